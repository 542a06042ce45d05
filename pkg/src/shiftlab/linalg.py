"""Dense complex linear algebra backend.

Factorizations are delegated to LAPACK (via numpy/scipy) and wrapped in
thin result types that carry the contracts the rest of the library relies
on: verified reconstruction bounds, deterministic eigenvalue ordering, and
explicit refusal of singular or non-hyperbolic input.

Conventions
-----------
* Matrices are square ``complex128``, dimension at most ``MAX_DIM``.
* Polar decompositions are right polar: ``A = U P`` with ``P = (A*A)^{1/2}``.
* Eigenvalue lists are sorted by (modulus descending, argument ascending),
  which makes multiset comparisons across runs deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    NonConvergenceError,
    NotHyperbolicError,
    NotPSDError,
    SingularInputError,
)

MAX_DIM = 256

# Default tolerances: relative reconstruction error for factorizations and
# the spectral comparison scale used throughout the dynamics modules.
RECONSTRUCTION_TOL = 1e-10
SPECTRAL_TOL = 1e-6

# Horizon of the finite growth/decay audit performed when a spectral
# splitting constant is computed.
_BOUND_AUDIT_POWERS = 20


@dataclass(frozen=True, eq=False)
class ComplexMatrix:
    """Validated square complex matrix.

    The wrapped array is copied on construction and frozen, so instances
    can be shared safely. Equality of instances is identity; numerical
    comparisons in tests use an explicit entrywise tolerance.
    """

    data: np.ndarray

    def __post_init__(self):
        a = np.array(self.data, dtype=np.complex128)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"matrix must be square, got shape {a.shape}")
        n = a.shape[0]
        if n < 1:
            raise ValueError("matrix must have dimension >= 1")
        if n > MAX_DIM:
            raise ValueError(f"dimension {n} exceeds cap {MAX_DIM}")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix entries must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "data", a)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def to_json_obj(self) -> dict:
        """Serialize as {dim, entries} with entries row-major [re, im] pairs."""
        ent = [[float(z.real), float(z.imag)] for z in self.data.ravel()]
        return {"dim": self.dim, "entries": ent}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "ComplexMatrix":
        dim = int(obj["dim"])
        ent = obj["entries"]
        if len(ent) != dim * dim:
            raise ValueError(f"expected {dim * dim} entries, got {len(ent)}")
        flat = np.array([complex(re, im) for re, im in ent], dtype=np.complex128)
        return cls(flat.reshape(dim, dim))


@dataclass(frozen=True, eq=False)
class SchurForm:
    """Unitary Schur factorization ``A = Q T Q*`` with sorted eigenvalue list.

    ``eigenvalues`` holds exactly the diagonal entries of ``upper_t`` (same
    floats, as a multiset), sorted by (modulus desc, argument asc).
    """

    unitary_q: ComplexMatrix
    upper_t: ComplexMatrix
    eigenvalues: np.ndarray


@dataclass(frozen=True, eq=False)
class PolarFactors:
    """Right polar decomposition ``A = U P`` of an invertible matrix."""

    unitary: ComplexMatrix
    modulus: ComplexMatrix


@dataclass(frozen=True, eq=False)
class SpectralSplit:
    """Spectral projections of a hyperbolic matrix.

    ``stable_projection`` projects onto the invariant subspace of
    eigenvalues inside the unit disk, ``unstable_projection`` onto the
    complement. ``bound_constant`` is C with ``|A^k pi_s| <= C rho_s^k``
    and ``|A^-k pi_u| <= C rho_u^-k``, audited for k <= 20.
    """

    stable_projection: ComplexMatrix
    unstable_projection: ComplexMatrix
    stable_rate: float
    unstable_rate: float
    bound_constant: float


def _as_array(a) -> np.ndarray:
    """Accept a ComplexMatrix or array-like; return a complex ndarray."""
    if isinstance(a, ComplexMatrix):
        return a.data
    return ComplexMatrix(np.asarray(a)).data


def sort_spectrum(values) -> np.ndarray:
    """Sort eigenvalues by modulus descending, then argument ascending."""
    v = np.asarray(values, dtype=np.complex128).ravel()
    order = np.lexsort((np.angle(v), -np.abs(v)))
    return v[order]


def spectrum_distance(a_values, b_values) -> float:
    """Hausdorff distance between two eigenvalue sets in the complex plane."""
    a = np.asarray(a_values, dtype=np.complex128).ravel()
    b = np.asarray(b_values, dtype=np.complex128).ravel()
    if a.size == 0 and b.size == 0:
        return 0.0
    if a.size == 0 or b.size == 0:
        return math.inf
    d = np.abs(a[:, None] - b[None, :])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def operator_norm(a, tol: float = RECONSTRUCTION_TOL) -> float:
    """Largest singular value (the operator 2-norm).

    Computed by LAPACK to near machine precision; ``tol`` documents the
    accuracy the caller may rely on.
    """
    m = _as_array(a)
    return float(np.linalg.norm(m, 2))


def schur_decompose(a, tol: float = RECONSTRUCTION_TOL) -> SchurForm:
    """Complex Schur form with certified reconstruction.

    Raises NonConvergenceError if LAPACK's QR iteration fails or if the
    computed factors do not reproduce the input within ``tol`` (relative).
    """
    m = _as_array(a)
    try:
        t, q = scipy.linalg.schur(m, output="complex")
    except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as e:
        raise NonConvergenceError(f"schur iteration failed: {e}") from e
    scale = max(operator_norm(m), 1e-300)
    recon = float(np.linalg.norm(q @ t @ q.conj().T - m, 2))
    unit = float(np.linalg.norm(q.conj().T @ q - np.eye(m.shape[0]), 2))
    if recon > tol * scale or unit > max(tol, 1e-14):
        raise NonConvergenceError(
            f"schur certification failed: recon={recon:.3e}, unitary defect={unit:.3e}"
        )
    return SchurForm(
        unitary_q=ComplexMatrix(q),
        upper_t=ComplexMatrix(t),
        eigenvalues=sort_spectrum(np.diag(t)),
    )


def svd(a, tol: float = RECONSTRUCTION_TOL):
    """Singular value decomposition ``A = U diag(s) V*``.

    Returns ``(U, s, V)`` where ``s`` is nonincreasing and ``V`` is the
    right factor (not its adjoint). Reconstruction is certified to ``tol``.
    """
    m = _as_array(a)
    try:
        u, s, vh = np.linalg.svd(m)
    except np.linalg.LinAlgError as e:
        raise NonConvergenceError(f"svd failed: {e}") from e
    scale = max(float(s[0]) if s.size else 0.0, 1e-300)
    recon = float(np.linalg.norm((u * s) @ vh - m, 2))
    if recon > tol * scale:
        raise NonConvergenceError(f"svd certification failed: recon={recon:.3e}")
    return ComplexMatrix(u), s, ComplexMatrix(vh.conj().T)


def polar_decompose(a, tol: float = RECONSTRUCTION_TOL) -> PolarFactors:
    """Right polar decomposition ``A = U P`` with P = (A*A)^{1/2}.

    Refuses singular input: the smallest singular value must exceed
    ``tol * |A|``. (No partial-isometry convention is chosen for the
    degenerate case.)
    """
    m = _as_array(a)
    u, s, v = svd(m, tol)
    smax = float(s[0])
    smin = float(s[-1])
    if smin <= tol * smax:
        raise SingularInputError(
            f"matrix is numerically singular: sigma_min={smin:.3e} <= tol*sigma_max"
        )
    vd = v.data
    p = (vd * s) @ vd.conj().T
    p = (p + p.conj().T) / 2.0
    un = u.data @ vd.conj().T
    recon = float(np.linalg.norm(un @ p - m, 2))
    if recon > 10 * tol * smax:
        raise NonConvergenceError(f"polar certification failed: recon={recon:.3e}")
    return PolarFactors(unitary=ComplexMatrix(un), modulus=ComplexMatrix(p))


def psd_power(p, exponent: float, tol: float = RECONSTRUCTION_TOL) -> ComplexMatrix:
    """Fractional power of a Hermitian PSD matrix via eigendecomposition.

    ``exponent`` must lie in (0, 1]. Eigenvalues below zero are clamped to
    zero; an eigenvalue < -tol (or a non-Hermitian input) raises NotPSDError.
    """
    m = _as_array(p)
    if not 0.0 < exponent <= 1.0:
        raise ValueError(f"exponent must be in (0, 1], got {exponent}")
    scale = max(operator_norm(m), 1e-300)
    herm_defect = float(np.linalg.norm(m - m.conj().T, 2))
    if herm_defect > max(tol * scale, 1e-13 * scale):
        raise NotPSDError(f"input is not Hermitian: defect={herm_defect:.3e}")
    w, v = np.linalg.eigh((m + m.conj().T) / 2.0)
    if w[0] < -tol * max(scale, 1.0):
        raise NotPSDError(f"negative eigenvalue {w[0]:.3e}")
    w = np.maximum(w, 0.0)
    q = (v * w**exponent) @ v.conj().T
    q = (q + q.conj().T) / 2.0
    return ComplexMatrix(q)


def gelfand_radius(a, doublings: int = 30, tol: float = 0.0) -> float:
    """Spectral radius estimate ``|A^{2^d}|^{1/2^d}`` by repeated squaring.

    Powers are tracked in log scale so the estimate never overflows. If
    ``tol`` > 0, stops early once successive estimates agree to that
    relative tolerance. ``doublings`` is capped at 30.
    """
    m = _as_array(a)
    if not 0 <= doublings <= 30:
        raise ValueError(f"doublings must be in [0, 30], got {doublings}")
    norm = operator_norm(m)
    if norm == 0.0:
        return 0.0
    log_scale = math.log(norm)
    b = m / norm
    estimate = math.exp(log_scale)
    for k in range(1, doublings + 1):
        b = b @ b
        n = operator_norm(b)
        if n == 0.0:
            return 0.0
        log_scale = 2.0 * log_scale + math.log(n)
        b = b / n
        prev = estimate
        estimate = math.exp(log_scale / 2.0**k)
        if tol > 0.0 and abs(estimate - prev) <= tol * abs(estimate):
            break
    return estimate


def is_hyperbolic_matrix(a, tol: float = SPECTRAL_TOL) -> bool:
    """True when no eigenvalue modulus lies within ``tol`` of 1."""
    m = _as_array(a)
    moduli = np.abs(np.linalg.eigvals(m))
    return bool(np.all(np.abs(moduli - 1.0) > tol))


def spectral_split(a, tol: float = SPECTRAL_TOL) -> SpectralSplit:
    """Stable/unstable spectral projections of a hyperbolic matrix.

    The Schur form is reordered so eigenvalues inside the unit disk lead;
    the off-diagonal coupling is removed by a Sylvester solve, which gives
    the (generally non-orthogonal) spectral projections. Raises
    NotHyperbolicError if an eigenvalue modulus lies in (1-tol, 1+tol),
    SingularInputError if one lies within ``tol`` of 0.
    """
    m = _as_array(a)
    n = m.shape[0]
    eigs = np.linalg.eigvals(m)
    moduli = np.abs(eigs)
    if np.any(np.abs(moduli - 1.0) <= tol):
        raise NotHyperbolicError(
            f"eigenvalue modulus within {tol:g} of the unit circle: "
            f"min gap {np.abs(moduli - 1.0).min():.3e}"
        )
    if np.any(moduli <= tol):
        raise SingularInputError("eigenvalue within tol of 0; split undefined")

    t, q, sdim = scipy.linalg.schur(m, output="complex", sort=lambda z: abs(z) < 1.0)
    if sdim == 0:
        ps = np.zeros((n, n), dtype=np.complex128)
    elif sdim == n:
        ps = np.eye(n, dtype=np.complex128)
    else:
        t11 = t[:sdim, :sdim]
        t22 = t[sdim:, sdim:]
        t12 = t[:sdim, sdim:]
        # Commutation P T = T P for P = [[I, Y], [0, 0]] needs T11 Y - Y T22 = T12.
        y = scipy.linalg.solve_sylvester(t11, -t22, t12)
        block = np.zeros((n, n), dtype=np.complex128)
        block[:sdim, :sdim] = np.eye(sdim)
        block[:sdim, sdim:] = y
        ps = q @ block @ q.conj().T
    pu = np.eye(n, dtype=np.complex128) - ps

    stable = moduli[moduli < 1.0]
    unstable = moduli[moduli > 1.0]
    rho_s = float(stable.max()) if stable.size else 0.0
    rho_u = float(unstable.min()) if unstable.size else math.inf

    m_inv = np.linalg.solve(m, np.eye(n, dtype=np.complex128))
    c = 1.0
    fwd = np.array(ps)
    bwd = np.array(pu)
    for k in range(_BOUND_AUDIT_POWERS + 1):
        if stable.size:
            c = max(c, operator_norm(fwd) / rho_s**k)
        if unstable.size:
            c = max(c, operator_norm(bwd) * rho_u**k)
        fwd = m @ fwd
        bwd = m_inv @ bwd
    return SpectralSplit(
        stable_projection=ComplexMatrix(ps),
        unstable_projection=ComplexMatrix(pu),
        stable_rate=rho_s,
        unstable_rate=rho_u,
        bound_constant=float(c),
    )
