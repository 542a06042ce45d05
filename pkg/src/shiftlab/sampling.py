"""Seeded generators for test and experiment matrices.

Every generator takes an explicit numpy Generator; nothing here touches
global random state. Matrices come back as plain complex128 arrays.
"""

from __future__ import annotations

import numpy as np


def ginibre(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Square matrix of iid standard complex Gaussian entries."""
    re = rng.standard_normal((dim, dim))
    im = rng.standard_normal((dim, dim))
    return (re + 1j * im) / np.sqrt(2.0)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via phase-corrected QR of a Ginibre sample."""
    q, r = np.linalg.qr(ginibre(dim, rng))
    d = np.diagonal(r).copy()
    d[d == 0] = 1.0
    return q * (d / np.abs(d))


def random_normal_matrix(
    dim: int,
    rng: np.random.Generator,
    moduli: np.ndarray,
    phases: np.ndarray | None = None,
) -> np.ndarray:
    """Normal matrix with prescribed eigenvalue moduli (phases uniform)."""
    moduli = np.asarray(moduli, dtype=float)
    if moduli.shape != (dim,):
        raise ValueError(f"need {dim} moduli, got shape {moduli.shape}")
    if phases is None:
        phases = rng.uniform(0.0, 2.0 * np.pi, size=dim)
    eigs = moduli * np.exp(1j * np.asarray(phases, dtype=float))
    v = haar_unitary(dim, rng)
    return v @ np.diag(eigs) @ v.conj().T


def random_hyperbolic_matrix(
    dim: int,
    rng: np.random.Generator,
    gap: float = 0.25,
    stable_count: int | None = None,
    spread: float = 2.0,
    conditioning: float = 1.0,
) -> np.ndarray:
    """Matrix whose eigenvalue moduli avoid ``[1 - gap, 1 + gap]``.

    ``stable_count`` eigenvalues (random in 1..dim-1 when omitted) get
    moduli below 1 - gap, the rest above 1 + gap, with phases uniform.
    ``conditioning`` 1.0 gives a normal matrix (unitary eigenbasis);
    larger values use a similarity with singular values spread up to that
    factor.
    """
    if not 0.0 < gap < 1.0:
        raise ValueError(f"gap must lie in (0, 1), got {gap}")
    if stable_count is None:
        stable_count = int(rng.integers(1, dim)) if dim > 1 else 1
    if not 0 <= stable_count <= dim:
        raise ValueError(f"stable_count must lie in [0, {dim}]")
    lo_band = 1.0 - gap
    hi_band = 1.0 + gap
    moduli = np.empty(dim)
    moduli[:stable_count] = rng.uniform(lo_band / spread, lo_band, size=stable_count)
    moduli[stable_count:] = rng.uniform(
        hi_band, hi_band * spread, size=dim - stable_count
    )
    eigs = moduli * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=dim))
    if conditioning == 1.0:
        v = haar_unitary(dim, rng)
        return v @ np.diag(eigs) @ v.conj().T
    if conditioning < 1.0:
        raise ValueError(f"conditioning must be >= 1, got {conditioning}")
    sigma = np.linspace(1.0, conditioning, dim)
    s = haar_unitary(dim, rng) @ np.diag(sigma) @ haar_unitary(dim, rng)
    return s @ np.diag(eigs) @ np.linalg.inv(s)


def random_invertible(
    dim: int,
    rng: np.random.Generator,
    min_rel_sigma: float = 0.05,
    max_tries: int = 64,
) -> np.ndarray:
    """Ginibre sample, resampled until comfortably away from singular."""
    for _ in range(max_tries):
        a = ginibre(dim, rng)
        s = np.linalg.svd(a, compute_uv=False)
        if s[-1] > min_rel_sigma * s[0]:
            return a
    raise RuntimeError(f"no well-separated sample after {max_tries} tries")


def random_well_conditioned(
    dim: int, rng: np.random.Generator, condition: float = 10.0
) -> np.ndarray:
    """Invertible matrix with singular values spanning exactly ``condition``."""
    if condition < 1.0:
        raise ValueError(f"condition must be >= 1, got {condition}")
    sigma = np.linspace(condition, 1.0, dim)
    return haar_unitary(dim, rng) @ np.diag(sigma) @ haar_unitary(dim, rng)
