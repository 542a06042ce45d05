"""Orbit computation, homoclinic certificates, and hyperbolic shadowing.

Two backends share the same operations. The shift backend works with
finitely supported vectors on the lattice Z and is exact: beyond a
computable crossover the per-step orbit growth is literally a tail
constant, so boundedness, decay, and divergence are certified rather than
sampled. The dense backend iterates a matrix and reports at-horizon
statements only.

Shadowing follows the classical hyperbolic construction: split the defect
history into its stable and unstable parts, sum the stable part over the
past and the unstable part over the future. Both sweeps run in the
contracting direction, so the solver stays stable over long windows even
when the operator itself has large growth rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import (
    DeltaTooLargeError,
    HorizonTooLargeError,
    NotBoundedOrbitError,
)
from .linalg import (
    RECONSTRUCTION_TOL,
    SPECTRAL_TOL,
    ComplexMatrix,
    SpectralSplit,
    _as_array,
    spectral_split,
)
from .shifts import ShiftOperator, WeightSequence, weight_at

MAX_HORIZON_SHIFT = 10_000
MAX_HORIZON_DENSE = 1_000


@dataclass(frozen=True)
class LatticeVector:
    """Finitely supported vector on the lattice, ``sum c_m e_m``.

    Zero coefficients are pruned on construction, so the empty support is
    exactly the zero vector.
    """

    support: dict[int, complex]

    def __post_init__(self):
        pruned = {int(m): complex(c) for m, c in self.support.items() if c != 0}
        object.__setattr__(self, "support", pruned)

    @classmethod
    def basis(cls, m: int) -> "LatticeVector":
        return cls({m: 1.0 + 0.0j})

    @classmethod
    def zero(cls) -> "LatticeVector":
        return cls({})

    def norm(self) -> float:
        return math.sqrt(sum(abs(c) ** 2 for c in self.support.values()))

    def scaled(self, factor: complex) -> "LatticeVector":
        return LatticeVector({m: c * factor for m, c in self.support.items()})

    def sub(self, other: "LatticeVector") -> "LatticeVector":
        out = dict(self.support)
        for m, c in other.support.items():
            out[m] = out.get(m, 0.0) - c
        return LatticeVector(out)

    def to_json_obj(self) -> dict:
        return {
            str(m): [float(c.real), float(c.imag)]
            for m, c in sorted(self.support.items())
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "LatticeVector":
        return cls({int(m): complex(re, im) for m, (re, im) in obj.items()})


def apply_shift(op: ShiftOperator, x: LatticeVector, power: int = 1) -> LatticeVector:
    """Apply ``W^power`` (power may be negative) to a lattice vector, exactly."""
    out = x
    w = op.weights
    for _ in range(abs(power)):
        if power > 0:
            out = LatticeVector(
                {m + 1: c * weight_at(w, m) for m, c in out.support.items()}
            )
        else:
            out = LatticeVector(
                {m - 1: c / weight_at(w, m - 1) for m, c in out.support.items()}
            )
    return out


@dataclass(frozen=True, eq=False)
class OrbitSegment:
    """Norms of ``T^n x`` for n in ``[-horizon, horizon]``.

    ``log_norms`` carries the same data in log scale; it stays finite and
    meaningful when the linear norms overflow or underflow.
    """

    horizon: int
    ns: np.ndarray
    norms: np.ndarray
    log_norms: np.ndarray

    def norm_at(self, n: int) -> float:
        return float(self.norms[n + self.horizon])

    def log_norm_at(self, n: int) -> float:
        return float(self.log_norms[n + self.horizon])


def _is_shift(op) -> bool:
    return isinstance(op, ShiftOperator)


def _coerce_dense_vector(x, dim: int) -> np.ndarray:
    v = np.asarray(x, dtype=np.complex128).reshape(-1)
    if v.shape[0] != dim:
        raise ValueError(f"vector length {v.shape[0]} != operator dim {dim}")
    return v


def _shift_products(w: WeightSequence, supports: list[int], horizon: int):
    """Per-support coefficients of ``T^n e_m`` for |n| <= horizon.

    Returns ``(logp, linp)`` of shape (len(supports), 2*horizon + 1):
    column n + horizon holds the log product ``sum_{j<n} log a_{m+j}``
    (negated backward sum for n < 0) and the same quantity as a plain
    cumulative product. The linear values are exact while representable
    (they may overflow to inf or underflow to 0); the log values always
    stay finite.
    """
    n = horizon
    logp = np.zeros((len(supports), 2 * n + 1))
    linp = np.ones((len(supports), 2 * n + 1))
    for i, m in enumerate(supports):
        if n > 0:
            fwd = np.array([weight_at(w, m + j) for j in range(n)])
            logp[i, n + 1:] = np.cumsum(np.log(fwd))
            bwd = np.array([weight_at(w, m - j) for j in range(1, n + 1)])
            logp[i, :n] = -np.cumsum(np.log(bwd))[::-1]
            with np.errstate(over="ignore", under="ignore"):
                linp[i, n + 1:] = np.cumprod(fwd)
                linp[i, :n] = np.cumprod(1.0 / bwd)[::-1]
    return logp, linp


def _crossovers(w: WeightSequence, supports: list[int]) -> tuple[int, int]:
    """Steps beyond which the forward/backward orbit ratios are exactly the tails."""
    m_min, m_max = min(supports), max(supports)
    n_f = max(0, w.core_end - m_min)
    n_b = max(0, m_max - w.core_start)
    return n_f, n_b


def orbit_norms(op, x, horizon: int) -> OrbitSegment:
    """Norms of the two-sided orbit of ``x`` through the operator.

    Shift backend: closed-form products per support index (components of a
    shift orbit stay orthogonal), horizon up to 10_000. Dense backend:
    forward iteration plus one precomputed inverse, horizon up to 1_000.
    """
    if _is_shift(op):
        if not 0 <= horizon <= MAX_HORIZON_SHIFT:
            raise HorizonTooLargeError(
                f"shift horizon {horizon} exceeds {MAX_HORIZON_SHIFT}"
            )
        ns = np.arange(-horizon, horizon + 1)
        if not x.support:
            z = np.zeros(2 * horizon + 1)
            return OrbitSegment(horizon, ns, z, np.full(2 * horizon + 1, -np.inf))
        supports = sorted(x.support)
        logp, linp = _shift_products(op.weights, supports, horizon)
        logc = np.array([math.log(abs(x.support[m])) for m in supports])
        log_norms = 0.5 * logsumexp(2.0 * (logc[:, None] + logp), axis=0)
        # Prefer plain products where they are representable; for dyadic
        # weights they are exact where the log route would round.
        absc = np.abs(np.array([x.support[m] for m in supports]))
        with np.errstate(over="ignore", under="ignore"):
            direct = np.sqrt(np.sum((absc[:, None] * linp) ** 2, axis=0))
        norms = np.where(np.isfinite(direct) & (direct > 0), direct, np.exp(log_norms))
        return OrbitSegment(horizon, ns, norms, log_norms)

    a = _as_array(op)
    if not 0 <= horizon <= MAX_HORIZON_DENSE:
        raise HorizonTooLargeError(f"dense horizon {horizon} exceeds {MAX_HORIZON_DENSE}")
    dim = a.shape[0]
    v = _coerce_dense_vector(x, dim)
    a_inv = np.linalg.solve(a, np.eye(dim, dtype=np.complex128))
    norms = np.empty(2 * horizon + 1)
    norms[horizon] = np.linalg.norm(v)
    y = v.copy()
    for n in range(1, horizon + 1):
        y = a @ y
        norms[horizon + n] = np.linalg.norm(y)
    y = v.copy()
    for n in range(1, horizon + 1):
        y = a_inv @ y
        norms[horizon - n] = np.linalg.norm(y)
    with np.errstate(divide="ignore"):
        log_norms = np.log(norms)
    return OrbitSegment(horizon, np.arange(-horizon, horizon + 1), norms, log_norms)


@dataclass(frozen=True)
class HomoclinicReport:
    """Outcome of an r-homoclinic test.

    On the shift backend the decision is exact: ``is_r_homoclinic_at_horizon``
    is the true answer (tail ratios certify behaviour beyond any horizon),
    ``certified`` is True, and the tail ratios are reported. On the dense
    backend the flag only reflects the computed window. ``witness_index``
    is the smallest N with ``|T^n x| <= r`` for all ``|n| >= N`` (within
    the window, for the dense backend); None when no such N is visible.
    ``certified_divergent`` excludes r-homoclinicity for every r.
    """

    r: float
    horizon: int
    witness_index: int | None
    is_r_homoclinic_at_horizon: bool
    certified_divergent: bool
    certified: bool
    forward_ratio: float | None = None
    backward_ratio: float | None = None

    def __post_init__(self):
        if self.certified_divergent and self.is_r_homoclinic_at_horizon:
            raise ValueError("divergence certificate contradicts homoclinic flag")

    def to_json_obj(self) -> dict:
        return {
            "r": self.r,
            "horizon": self.horizon,
            "witnessIndex": self.witness_index,
            "isRHomoclinicAtHorizon": self.is_r_homoclinic_at_horizon,
            "certifiedDivergent": self.certified_divergent,
            "certified": self.certified,
            "forwardRatio": self.forward_ratio,
            "backwardRatio": self.backward_ratio,
        }


def _threshold_step(seg: OrbitSegment, r: float, side: int, ratio: float) -> int:
    """Smallest t >= 0 with norms <= r for every step >= t on one side.

    ``side`` is +1 (forward) or -1 (backward); ``ratio`` is the exact
    per-step factor beyond the computed window (<= 1 when this is called).
    """
    n = seg.horizon
    idx = [n + side * k for k in range(n + 1)]
    vals = seg.norms[idx]
    over = np.nonzero(vals > r)[0]
    t = int(over.max()) + 1 if over.size else 0
    edge = vals[-1]
    if edge > r and ratio < 1.0:
        extra = math.ceil((math.log(r) - float(seg.log_norms[idx[-1]])) / math.log(ratio))
        t = max(t, n + max(extra, 0))
    return t


def is_r_homoclinic(op, x, r: float, horizon: int) -> HomoclinicReport:
    """Decide whether ``|T^n x| <= r`` for all large ``|n|``.

    Shift backend: exact. The orbit is computed out to the tail crossover
    (at least ``horizon``), beyond which the per-step ratios are the tail
    constants; decay, eventual constancy, and divergence are all certified.
    Dense backend: at-horizon statement only.
    """
    if r <= 0:
        raise ValueError(f"r must be positive, got {r}")
    if _is_shift(op):
        if not x.support:
            return HomoclinicReport(r, horizon, 0, True, False, True, None, None)
        w = op.weights
        n_f, n_b = _crossovers(w, sorted(x.support))
        n_eff = max(horizon, n_f, n_b)
        if n_eff > MAX_HORIZON_SHIFT:
            raise HorizonTooLargeError(
                f"certificate needs horizon {n_eff} > {MAX_HORIZON_SHIFT}"
            )
        seg = orbit_norms(op, x, n_eff)
        fwd, bwd = w.right_tail, 1.0 / w.left_tail
        fwd_ok = fwd < 1.0 or (fwd == 1.0 and seg.norm_at(n_eff) <= r)
        bwd_ok = bwd < 1.0 or (bwd == 1.0 and seg.norm_at(-n_eff) <= r)
        divergent = fwd > 1.0 or bwd > 1.0
        verdict = fwd_ok and bwd_ok
        witness = None
        if verdict:
            t_f = _threshold_step(seg, r, +1, fwd)
            t_b = _threshold_step(seg, r, -1, bwd)
            witness = max(t_f, t_b)
        return HomoclinicReport(r, horizon, witness, verdict, divergent, True, fwd, bwd)

    seg = orbit_norms(op, x, horizon)
    at_horizon = seg.norm_at(horizon) <= r and seg.norm_at(-horizon) <= r
    witness = None
    if at_horizon:
        t = 0
        for k in range(horizon, 0, -1):
            if seg.norm_at(k) > r or seg.norm_at(-k) > r:
                t = k + 1
                break
        witness = t
    return HomoclinicReport(r, horizon, witness, at_horizon, False, False, None, None)


def homoclinic_scaling_check(op, x, r: float, r_prime: float, horizon: int) -> bool:
    """Rescaling invariance: if x is r'-homoclinic then (r/r')x is r-homoclinic.

    Returns the result of the rescaled test at the same horizon; by
    linearity of orbit norms it must come back True.
    """
    pre = is_r_homoclinic(op, x, r_prime, horizon)
    if not pre.is_r_homoclinic_at_horizon:
        raise ValueError("x is not r'-homoclinic at this horizon")
    factor = r / r_prime
    scaled = x.scaled(factor) if _is_shift(op) else np.asarray(x) * factor
    post = is_r_homoclinic(op, scaled, r, horizon)
    return post.is_r_homoclinic_at_horizon


@dataclass(frozen=True)
class EcReport:
    """Bounded-orbit membership report.

    ``sup_norm`` is the exact orbit sup on the shift backend (the window
    maximum is certified global once it covers the tail crossovers) and
    the window maximum on the dense backend.
    """

    member: bool
    certified: bool
    sup_norm: float
    horizon: int
    bound: float | None
    within_bound: bool | None

    def to_json_obj(self) -> dict:
        return {
            "member": self.member,
            "certified": self.certified,
            "supNorm": self.sup_norm if math.isfinite(self.sup_norm) else None,
            "horizon": self.horizon,
            "bound": self.bound,
            "withinBound": self.within_bound,
        }


def ec_membership(op, x, bound: float | None, horizon: int) -> EcReport:
    """Decide whether the two-sided orbit of ``x`` is bounded.

    Shift backend: exact (bounded iff the right tail is <= 1 and the left
    tail is >= 1, for nonzero x). Dense backend: the decision is
    ``sup <= bound`` over the window when a bound is given, otherwise the
    report just carries the window sup.
    """
    if _is_shift(op):
        if not x.support:
            return EcReport(True, True, 0.0, horizon, bound, True if bound else None)
        w = op.weights
        n_f, n_b = _crossovers(w, sorted(x.support))
        n_eff = max(horizon, n_f, n_b)
        if n_eff > MAX_HORIZON_SHIFT:
            raise HorizonTooLargeError(
                f"certificate needs horizon {n_eff} > {MAX_HORIZON_SHIFT}"
            )
        member = w.right_tail <= 1.0 and w.left_tail >= 1.0
        if member:
            seg = orbit_norms(op, x, n_eff)
            sup = float(seg.norms.max())
        else:
            sup = math.inf
        within = (sup <= bound) if bound is not None else None
        return EcReport(member, True, sup, horizon, bound, within)

    seg = orbit_norms(op, x, horizon)
    sup = float(seg.norms.max())
    within = (sup <= bound) if bound is not None else None
    member = within if within is not None else True
    return EcReport(member, False, sup, horizon, bound, within)


@dataclass(frozen=True, eq=False)
class PseudoOrbit:
    """A delta-pseudo-orbit: points ``x_n`` with defects ``d_n = x_{n+1} - T x_n``.

    ``points`` has one entry per n in ``[-horizon, horizon]``; ``defects``
    one per n in ``[-horizon, horizon - 1]``. Construction verifies
    ``max |d_n| < delta``.
    """

    backend: str
    delta: float
    horizon: int
    points: object
    defects: object
    defect_norms: np.ndarray

    def __post_init__(self):
        if self.defect_norms.size and float(self.defect_norms.max()) >= self.delta:
            raise ValueError(
                f"defect {self.defect_norms.max():.3e} not below delta {self.delta:.3e}"
            )

    def point(self, n: int):
        return self.points[n + self.horizon]

    def defect(self, n: int):
        return self.defects[n + self.horizon]


def build_pseudo_orbit_from_bounded(op, x, delta: float, horizon: int) -> PseudoOrbit:
    """Damped-orbit pseudo-orbit through a bounded-orbit vector.

    Points are ``x_n = q^{|n|} T^n x`` with ``q = 1 - delta/(4M)`` and M
    the certified orbit bound, so the defects stay below ``delta/4`` while
    the points decay to zero in both directions. Raises
    NotBoundedOrbitError when membership fails and DeltaTooLargeError when
    the damping factor would leave (0, 1).
    """
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    rep = ec_membership(op, x, None, horizon)
    if not rep.member:
        raise NotBoundedOrbitError("orbit is not bounded; no damped pseudo-orbit")
    m_bound = rep.sup_norm

    if m_bound > 0:
        q = 1.0 - delta / (4.0 * m_bound)
        if q <= 0.0:
            raise DeltaTooLargeError(
                f"delta {delta:g} too large for orbit bound {m_bound:g}"
            )
        q = min(q, 1.0 - 2.0**-52)
    else:
        q = 0.5

    n = horizon
    if _is_shift(op):
        damp = [q ** abs(k) for k in range(-n, n + 1)]
        orbit_points = [apply_shift(op, x, 0)]
        cur = x
        for _ in range(n):
            cur = apply_shift(op, cur, 1)
            orbit_points.append(cur)
        cur = x
        back = []
        for _ in range(n):
            cur = apply_shift(op, cur, -1)
            back.append(cur)
        orbit_points = list(reversed(back)) + orbit_points
        points = [p.scaled(damp[i]) for i, p in enumerate(orbit_points)]
        defects = [
            points[i + 1].sub(apply_shift(op, points[i], 1)) for i in range(2 * n)
        ]
        defect_norms = np.array([d.norm() for d in defects])
        return PseudoOrbit("shift", delta, n, points, defects, defect_norms)

    a = _as_array(op)
    dim = a.shape[0]
    v = _coerce_dense_vector(x, dim)
    if not 0 <= n <= MAX_HORIZON_DENSE:
        raise HorizonTooLargeError(f"dense horizon {n} exceeds {MAX_HORIZON_DENSE}")
    a_inv = np.linalg.solve(a, np.eye(dim, dtype=np.complex128))
    orbit = np.empty((2 * n + 1, dim), dtype=np.complex128)
    orbit[n] = v
    for k in range(1, n + 1):
        orbit[n + k] = a @ orbit[n + k - 1]
        orbit[n - k] = a_inv @ orbit[n - k + 1]
    damp = q ** np.abs(np.arange(-n, n + 1))
    points = orbit * damp[:, None]
    defects = points[1:] - points[:-1] @ a.T
    defect_norms = np.linalg.norm(defects, axis=1)
    return PseudoOrbit("dense", delta, n, points, defects, defect_norms)


def driven_pseudo_orbit(
    a, delta: float, horizon: int, rng: np.random.Generator, free_scale: float = 0.25
) -> PseudoOrbit:
    """Bounded-point pseudo-orbit of a hyperbolic matrix with random defects.

    The points combine a true orbit (stable part seeded at the past end,
    unstable part at the future end, so it stays bounded across the whole
    window) with the bounded solution driven by random defects of norm
    ``delta/2``. Useful for exercising the shadowing solver over long
    windows without overflow.
    """
    mat = _as_array(a)
    dim = mat.shape[0]
    split = spectral_split(mat, SPECTRAL_TOL)
    ps = split.stable_projection.data
    pu = split.unstable_projection.data
    a_inv = np.linalg.solve(mat, np.eye(dim, dtype=np.complex128))
    n = horizon
    if not 0 <= n <= MAX_HORIZON_DENSE:
        raise HorizonTooLargeError(f"dense horizon {n} exceeds {MAX_HORIZON_DENSE}")

    def unit(v):
        nv = np.linalg.norm(v)
        return v / nv if nv > 0 else v

    xi = np.empty((2 * n, dim), dtype=np.complex128)
    for i in range(2 * n):
        g = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        xi[i] = 0.5 * delta * unit(g)

    # Every sweep reprojects onto its invariant subspace after applying the
    # matrix: a no-op in exact arithmetic, but it stops rounding noise from
    # seeding the complementary subspace and growing geometrically.
    p_s = np.zeros((2 * n + 1, dim), dtype=np.complex128)
    for i in range(2 * n):
        p_s[i + 1] = ps @ (mat @ p_s[i] + xi[i])
    p_u = np.zeros((2 * n + 1, dim), dtype=np.complex128)
    for i in range(2 * n - 1, -1, -1):
        p_u[i] = pu @ (a_inv @ (pu @ xi[i] + p_u[i + 1]))

    g0 = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    h0 = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    free = np.zeros((2 * n + 1, dim), dtype=np.complex128)
    stable_seed = ps @ g0
    if np.linalg.norm(stable_seed) > 0:
        free[0] = free_scale * unit(stable_seed)
        for i in range(2 * n):
            free[i + 1] = ps @ (mat @ free[i])
    tail = np.zeros((2 * n + 1, dim), dtype=np.complex128)
    unstable_seed = pu @ h0
    if np.linalg.norm(unstable_seed) > 0:
        tail[2 * n] = free_scale * unit(unstable_seed)
        for i in range(2 * n - 1, -1, -1):
            tail[i] = pu @ (a_inv @ tail[i + 1])

    points = free + tail + p_s - p_u
    defects = points[1:] - points[:-1] @ mat.T
    defect_norms = np.linalg.norm(defects, axis=1)
    return PseudoOrbit("dense", delta, n, points, defects, defect_norms)


@dataclass(frozen=True, eq=False)
class ShadowResult:
    """Shadowing solution: a point whose true orbit tracks the pseudo-orbit.

    ``corrections[i]`` is ``x_n - A^n y`` at ``n = i - horizon``; the
    per-step errors are its norms and ``epsilon`` their maximum. ``bound``
    is ``K * delta`` for the shadowing constant K of the split.
    """

    shadow_point: np.ndarray
    epsilon: float
    per_step_errors: np.ndarray
    corrections: np.ndarray
    constant_k: float
    bound: float
    bound_satisfied: bool
    split: SpectralSplit


def _constant_from_split(split: SpectralSplit) -> float:
    c = split.bound_constant
    term_s = c / (1.0 - split.stable_rate)
    if math.isfinite(split.unstable_rate):
        inv = 1.0 / split.unstable_rate
        term_u = c * inv / (1.0 - inv)
    else:
        term_u = 0.0
    return term_s + term_u


def shadowing_constant_estimate(a, tol: float = SPECTRAL_TOL) -> float:
    """Shadowing constant ``K = C/(1-rho_s) + C rho_u^-1/(1-rho_u^-1)``."""
    return _constant_from_split(spectral_split(a, tol))


def shadow_solve(a, po: PseudoOrbit, tol: float = RECONSTRUCTION_TOL) -> ShadowResult:
    """Find the orbit shadowing a pseudo-orbit of a hyperbolic matrix.

    The per-step errors ``c_n = x_n - A^n y`` satisfy ``c_{n+1} = A c_n +
    d_n``; the bounded solution sums the stable projections of past
    defects forward and the unstable projections of future defects
    backward. Both sweeps contract, so no quantity ever grows like
    ``A^n``. The shadow point is ``y = x_0 - c_0``.
    """
    if po.backend != "dense":
        raise ValueError("shadow_solve needs a dense pseudo-orbit")
    mat = _as_array(a)
    dim = mat.shape[0]
    split = spectral_split(mat, SPECTRAL_TOL)
    ps = split.stable_projection.data
    pu = split.unstable_projection.data
    a_inv = np.linalg.solve(mat, np.eye(dim, dtype=np.complex128))

    n = po.horizon
    defects = np.asarray(po.defects, dtype=np.complex128)
    # Reproject after every matrix application; exact-arithmetic identity,
    # floating-point necessity (see driven_pseudo_orbit).
    c_s = np.zeros((2 * n + 1, dim), dtype=np.complex128)
    for i in range(2 * n):
        c_s[i + 1] = ps @ (mat @ c_s[i] + defects[i])
    c_u = np.zeros((2 * n + 1, dim), dtype=np.complex128)
    for i in range(2 * n - 1, -1, -1):
        c_u[i] = pu @ (a_inv @ (pu @ defects[i] + c_u[i + 1]))
    corrections = c_s - c_u

    points = np.asarray(po.points, dtype=np.complex128)
    y = points[n] - corrections[n]
    errors = np.linalg.norm(corrections, axis=1)
    eps = float(errors.max()) if errors.size else 0.0
    k_const = _constant_from_split(split)
    bound = k_const * po.delta
    return ShadowResult(
        shadow_point=y,
        epsilon=eps,
        per_step_errors=errors,
        corrections=corrections,
        constant_k=k_const,
        bound=bound,
        bound_satisfied=eps <= bound * (1.0 + 1e-9) + 1e-300,
        split=split,
    )
