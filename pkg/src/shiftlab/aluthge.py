"""Mean transform iteration: dense route, shift route, and certificates.

The transform replaces an invertible operator T = U|T| (right polar
decomposition) by |T|^lam U |T|^(1-lam). On a weighted shift it acts as a
geometric mean on neighbouring weights and never leaves the class, which
gives a second, exact route through weight sequences; the dense route
goes through polar factors and fractional powers. Tests and certificates
lean on computing both routes and comparing.

Iterating the weight update k times has a closed form: the log of weight
n after k steps is a binomial average of the logs of weights n..n+k. The
certificate machinery exploits this to evaluate deep iterates (k up to
2**16) without iterating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConstantWeightsError,
    NotHyponormalError,
    SingularInputError,
    TraceDivergedError,
)
from .linalg import (
    RECONSTRUCTION_TOL,
    SPECTRAL_TOL,
    ComplexMatrix,
    _as_array,
    is_hyperbolic_matrix,
    operator_norm,
    polar_decompose,
    psd_power,
    sort_spectrum,
    spectrum_distance,
)
from .sampling import ginibre
from .shifts import (
    MAX_ALUTHGE_POWER,
    WeightSequence,
    aluthge_weights,
    aluthge_weights_iterate,
    classify,
    is_hyponormal,
    log_binomial_weight,
    shift_distance,
    spectrum_annulus,
    weight_at,
)

MAX_DENSE_ITERS = 10_000
ROUTE_AGREEMENT_TOL = 1e-10


def aluthge_dense(a, lam: float = 0.5, tol: float = RECONSTRUCTION_TOL) -> ComplexMatrix:
    """One transform step on an invertible matrix via its polar factors."""
    if not 0.0 < lam < 1.0:
        raise ValueError(f"lam must lie in (0, 1), got {lam}")
    mat = _as_array(a)
    factors = polar_decompose(mat, tol)
    p = factors.modulus.data
    u = factors.unitary.data
    left = psd_power(p, lam, tol)
    right = psd_power(p, 1.0 - lam, tol)
    return ComplexMatrix(left.data @ u @ right.data)


@dataclass(frozen=True, eq=False)
class AluthgeTrace:
    """History of transform iterates.

    ``step_gaps[k]`` measures the move from iterate k to k+1 (operator
    norm for matrices, sup weight distance for shifts).
    ``commutator_defects`` tracks the normality defect |T*T - TT*| per
    iterate on the dense route (None for shifts). ``annuli`` (shift) or
    ``spectra`` (dense) snapshot the spectrum of every iterate, and
    ``max_spectral_drift`` is the largest distance from the spectrum of
    iterate 0 across the trace; the transform preserves spectra, so this
    audits numerical honesty.
    """

    backend: str
    lam: float
    iterates: tuple
    step_gaps: np.ndarray
    converged: bool
    commutator_defects: np.ndarray | None = None
    spectra: tuple | None = None
    annuli: tuple | None = None
    max_spectral_drift: float = 0.0

    @property
    def num_steps(self) -> int:
        return len(self.iterates) - 1


def _normality_defect(m: np.ndarray) -> float:
    return operator_norm(m.conj().T @ m - m @ m.conj().T)


def iterate_dense(
    a,
    lam: float = 0.5,
    max_iters: int = 100,
    stop_tol: float = 1e-10,
    tol: float = RECONSTRUCTION_TOL,
) -> AluthgeTrace:
    """Iterate the transform on a matrix until the step gap falls below stop_tol.

    Raises SingularInputError (carrying the iteration index) if an iterate
    becomes numerically singular, and ValueError for a bad lam or
    max_iters. Convergence is not guaranteed; the trace reports honestly.
    """
    if not 0.0 < lam < 1.0:
        raise ValueError(f"lam must lie in (0, 1), got {lam}")
    if not 1 <= max_iters <= MAX_DENSE_ITERS:
        raise ValueError(f"max_iters must lie in [1, {MAX_DENSE_ITERS}]")
    cur = _as_array(a)
    iterates = [ComplexMatrix(cur)]
    spectra = [sort_spectrum(np.linalg.eigvals(cur))]
    defects = [_normality_defect(cur)]
    gaps = []
    converged = False
    for k in range(max_iters):
        try:
            nxt = aluthge_dense(cur, lam, tol).data
        except SingularInputError as exc:
            raise SingularInputError(str(exc), iteration=k) from exc
        gaps.append(operator_norm(nxt - cur))
        iterates.append(ComplexMatrix(nxt))
        spectra.append(sort_spectrum(np.linalg.eigvals(nxt)))
        defects.append(_normality_defect(nxt))
        cur = nxt
        if gaps[-1] <= stop_tol:
            converged = True
            break
    base = spectra[0]
    drift = max(spectrum_distance(base, s) for s in spectra)
    return AluthgeTrace(
        backend="dense",
        lam=lam,
        iterates=tuple(iterates),
        step_gaps=np.array(gaps),
        converged=converged,
        commutator_defects=np.array(defects),
        spectra=tuple(spectra),
        annuli=None,
        max_spectral_drift=drift,
    )


def trace_for_shift(w: WeightSequence, lam: float = 0.5, num_iters: int = 16) -> AluthgeTrace:
    """Iterate the weight update, recording gaps and the (invariant) annulus."""
    if not 1 <= num_iters <= 4096:
        raise ValueError("num_iters must lie in [1, 4096]")
    iterates = [w]
    annuli = [spectrum_annulus(w)]
    gaps = []
    cur = w
    for _ in range(num_iters):
        nxt = aluthge_weights(cur, lam)
        gaps.append(shift_distance(cur, nxt))
        iterates.append(nxt)
        annuli.append(spectrum_annulus(nxt))
        cur = nxt
    base = annuli[0]
    drift = max(
        max(abs(ann.inner - base.inner), abs(ann.outer - base.outer)) for ann in annuli
    )
    return AluthgeTrace(
        backend="shift",
        lam=lam,
        iterates=tuple(iterates),
        step_gaps=np.array(gaps),
        converged=bool(gaps and gaps[-1] == 0.0),
        commutator_defects=None,
        spectra=None,
        annuli=tuple(annuli),
        max_spectral_drift=drift,
    )


@dataclass(frozen=True)
class DivergenceCertificate:
    """Two deep iterates of one weight, far enough apart to forbid a limit.

    ``value_small`` and ``value_large`` are the weight at ``probe_index``
    after ``k_small`` and ``k_large`` transform steps, each computed by
    the closed-form binomial average and cross-checked against literal
    iteration of the weight update (``route_max_rel_diff`` records the
    disagreement). ``gap`` is their separation; ``tail_lower_bound`` is
    half the tail separation, a floor on how far apart the weight fronts
    eventually sit.
    """

    lam: float
    k_small: int
    k_large: int
    probe_index: int
    value_small: float
    value_large: float
    gap: float
    tail_lower_bound: float
    left_tail: float
    right_tail: float
    route_max_rel_diff: float

    @property
    def routes_consistent(self) -> bool:
        return self.route_max_rel_diff <= ROUTE_AGREEMENT_TOL

    def to_json_obj(self) -> dict:
        return {
            "lambda": self.lam,
            "kSmall": self.k_small,
            "kLarge": self.k_large,
            "probeIndex": self.probe_index,
            "valueSmall": self.value_small,
            "valueLarge": self.value_large,
            "gap": self.gap,
            "tailLowerBound": self.tail_lower_bound,
            "leftTail": self.left_tail,
            "rightTail": self.right_tail,
            "routeMaxRelDiff": self.route_max_rel_diff,
            "routesConsistent": self.routes_consistent,
        }


def _probe_value_both_routes(
    w: WeightSequence, lam: float, k: int, n: int, iterate_cap: int = 256
) -> tuple[float, float]:
    """Weight n after k steps: (closed-form value, max relative route gap).

    The literal iteration route is only run for k up to ``iterate_cap``;
    beyond that the closed form stands alone (it is the only practical
    route at depth 2**16).
    """
    closed = math.exp(log_binomial_weight(w, lam, k, n))
    rel = 0.0
    if k <= iterate_cap:
        iterated = weight_at(aluthge_weights_iterate(w, lam, k), n)
        scale = max(abs(closed), abs(iterated), 1e-300)
        rel = abs(closed - iterated) / scale
    return closed, rel


def divergence_certificate_shift(
    w: WeightSequence,
    lam: float = 0.5,
    k_small: int = 16,
    k_large: int = 64,
    probe_index: int | None = None,
) -> DivergenceCertificate:
    """Certify that the transform iterates of a two-tailed shift do not settle.

    Tracks one weight index across two iteration depths; when the tails
    differ, the binomial averaging drags the weight front across the probe
    and the two values separate. Raises ConstantWeightsError when the
    tails agree (the drift argument has no slope to work with).
    """
    if not 0.0 < lam < 1.0:
        raise ValueError(f"lam must lie in (0, 1), got {lam}")
    if w.left_tail == w.right_tail:
        raise ConstantWeightsError(
            "equal tails leave no front drift; no divergence certificate"
        )
    if not 1 <= k_small < k_large <= MAX_ALUTHGE_POWER:
        raise ValueError("need 1 <= k_small < k_large <= 2**16")
    if probe_index is None:
        probe_index = w.core_start - 1 - round(lam * k_small)
    v_small, rel_small = _probe_value_both_routes(w, lam, k_small, probe_index)
    v_large, rel_large = _probe_value_both_routes(w, lam, k_large, probe_index)
    return DivergenceCertificate(
        lam=lam,
        k_small=k_small,
        k_large=k_large,
        probe_index=probe_index,
        value_small=v_small,
        value_large=v_large,
        gap=abs(v_small - v_large),
        tail_lower_bound=abs(w.left_tail - w.right_tail) / 2.0,
        left_tail=w.left_tail,
        right_tail=w.right_tail,
        route_max_rel_diff=max(rel_small, rel_large),
    )


@dataclass(frozen=True)
class HyperbolicProbeReport:
    """Limit audit for a converged dense trace.

    ``status`` is "HyperbolicLimit" when the limit's spectrum avoids the
    unit circle, "NotHyperbolicLimit" otherwise. Because spectra are
    preserved along the trace (``spectral_drift`` measures the audit),
    a hyperbolic limit certifies the initial operator was hyperbolic:
    ``initial_hyperbolic`` reports that cross-check. ``safe_radius`` is
    the smallest distance of an eigenvalue modulus to 1, and the report
    counts how many random perturbations of the initial operator at half
    that radius kept the hyperbolic classification.
    """

    status: str
    iterations: int
    final_gap: float
    safe_radius: float
    spectral_drift: float
    initial_hyperbolic: bool
    limit_hyperbolic: bool
    trials: int
    trials_hyperbolic: int

    def to_json_obj(self) -> dict:
        return {
            "status": self.status,
            "iterations": self.iterations,
            "finalGap": self.final_gap,
            "safeRadius": self.safe_radius,
            "spectralDrift": self.spectral_drift,
            "initialHyperbolic": self.initial_hyperbolic,
            "limitHyperbolic": self.limit_hyperbolic,
            "trials": self.trials,
            "trialsHyperbolic": self.trials_hyperbolic,
        }


def hyperbolic_limit_probe(
    trace: AluthgeTrace,
    tol: float = SPECTRAL_TOL,
    trials: int = 20,
    rng: np.random.Generator | None = None,
) -> HyperbolicProbeReport:
    """Audit hyperbolicity of a converged dense trace and its neighborhood.

    Raises TraceDivergedError when the trace did not converge (so no
    limit exists to probe). When the limit is hyperbolic the initial
    operator must be too, since their spectra agree within the recorded
    drift; random perturbations of the initial operator at half the safe
    radius are then checked to stay hyperbolic.
    """
    if trace.backend != "dense":
        raise ValueError("the limit probe needs a dense trace")
    if not trace.converged:
        last = float(trace.step_gaps[-1]) if trace.step_gaps.size else math.inf
        raise TraceDivergedError(
            f"no convergence after {trace.num_steps} steps (last gap {last:.3e})"
        )
    initial = trace.iterates[0].data
    limit = trace.iterates[-1].data
    eigs = trace.spectra[-1]
    safe_radius = float(np.abs(np.abs(eigs) - 1.0).min())
    initial_hyperbolic = is_hyperbolic_matrix(initial, tol)
    limit_hyperbolic = is_hyperbolic_matrix(limit, tol)
    trials_ok = 0
    trials_run = 0
    if limit_hyperbolic and trials > 0:
        if rng is None:
            rng = np.random.default_rng(0)
        dim = initial.shape[0]
        for _ in range(trials):
            e = ginibre(dim, rng)
            e = e * (0.5 * safe_radius / operator_norm(e))
            trials_run += 1
            if is_hyperbolic_matrix(initial + e, tol):
                trials_ok += 1
    return HyperbolicProbeReport(
        status="HyperbolicLimit" if limit_hyperbolic else "NotHyperbolicLimit",
        iterations=trace.num_steps,
        final_gap=float(trace.step_gaps[-1]) if trace.step_gaps.size else 0.0,
        safe_radius=safe_radius,
        spectral_drift=trace.max_spectral_drift,
        initial_hyperbolic=initial_hyperbolic,
        limit_hyperbolic=limit_hyperbolic,
        trials=trials_run,
        trials_hyperbolic=trials_ok,
    )


@dataclass(frozen=True)
class HyponormalDivergenceReport:
    """Convergence decision for the iterates of a hyponormal shift.

    For nondecreasing weights the iteration converges exactly when the
    weights are constant: the constant case is an exact fixed point
    (``max_step_gap`` is 0.0 by construction, not by tolerance), and any
    spread between weight inf and sup yields a divergence certificate.
    """

    converged: bool
    is_constant: bool
    verdict: str
    weight_inf: float
    weight_sup: float
    max_step_gap: float
    certificate: DivergenceCertificate | None

    def to_json_obj(self) -> dict:
        return {
            "converged": self.converged,
            "isConstant": self.is_constant,
            "verdict": self.verdict,
            "weightInf": self.weight_inf,
            "weightSup": self.weight_sup,
            "maxStepGap": self.max_step_gap,
            "certificate": self.certificate.to_json_obj() if self.certificate else None,
        }


def hyponormal_divergence_check(
    w: WeightSequence, lam: float = 0.5, k_max: int = 64
) -> HyponormalDivergenceReport:
    """Decide convergence of the transform iterates of a hyponormal shift.

    Raises NotHyponormalError when the weights are not nondecreasing.
    Constant weights: fixed point, verified by iterating a few steps and
    demanding literal zero gaps. Non-constant: builds a divergence
    certificate at depths k_max // 4 and k_max.
    """
    if not is_hyponormal(w):
        raise NotHyponormalError("weights are not nondecreasing")
    verdict = classify(w).verdict.value
    if w.is_constant():
        trace = trace_for_shift(w, lam, num_iters=4)
        gap = float(trace.step_gaps.max()) if trace.step_gaps.size else 0.0
        return HyponormalDivergenceReport(
            converged=gap == 0.0,
            is_constant=True,
            verdict=verdict,
            weight_inf=w.inf(),
            weight_sup=w.sup(),
            max_step_gap=gap,
            certificate=None,
        )
    k_small = max(1, k_max // 4)
    cert = divergence_certificate_shift(w, lam, k_small, k_max)
    return HyponormalDivergenceReport(
        converged=False,
        is_constant=False,
        verdict=verdict,
        weight_inf=w.inf(),
        weight_sup=w.sup(),
        max_step_gap=math.inf,
        certificate=cert,
    )
