"""Exact algebra of bilateral weighted shifts with eventually constant weights.

A bilateral weighted shift acts on the standard basis of l2(Z) by
``W e_n = a_n e_{n+1}`` with positive weights ``a_n``. This module works
with the subclass whose weights are constant outside a finite core, which
makes every operation here finite and most of them exact:

* the Aluthge update ``a'_n = a_n^{1-l} a_{n+1}^l`` only touches a window
  one wider than the core, and both tails are carried through verbatim;
* the spectrum is the closed annulus whose radii are the tail constants
  (the exponential growth rates of weight products for this class);
* distances, classification, and hyponormality reduce to finite scans.

Weight sequences are kept in canonical form (the core never starts with
the left tail value or ends with the right tail value), so structural
equality of ``WeightSequence`` instances is equality of operators.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import UnboundedConjugatorError, WindowTooLargeError
from .linalg import MAX_DIM, ComplexMatrix

MAX_ALUTHGE_POWER = 2**16


@dataclass(frozen=True)
class WeightSequence:
    """Eventually constant positive weight sequence in canonical form.

    ``core`` holds the weights at indices ``core_start .. core_start +
    len(core) - 1``; every index below the core takes ``left_tail`` and
    every index at or above ``core_end`` takes ``right_tail``. For an
    empty core with distinct tails, ``core_start`` is the index where the
    right tail begins.
    """

    core_start: int
    core: tuple[float, ...]
    left_tail: float
    right_tail: float

    def __post_init__(self):
        core = tuple(float(c) for c in self.core)
        left = float(self.left_tail)
        right = float(self.right_tail)
        start = int(self.core_start)
        for v in (*core, left, right):
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"weights must be positive and finite, got {v}")
        # Canonical form: strip core entries equal to the adjacent tail.
        while core and core[0] == left:
            core = core[1:]
            start += 1
        while core and core[-1] == right:
            core = core[:-1]
        if not core and left == right:
            start = 0
        object.__setattr__(self, "core_start", start)
        object.__setattr__(self, "core", core)
        object.__setattr__(self, "left_tail", left)
        object.__setattr__(self, "right_tail", right)

    @property
    def core_end(self) -> int:
        """First index at or beyond which every weight equals the right tail."""
        return self.core_start + len(self.core)

    def weight(self, n: int) -> float:
        return weight_at(self, n)

    def is_constant(self) -> bool:
        return not self.core and self.left_tail == self.right_tail

    def sup(self) -> float:
        return max(self.left_tail, self.right_tail, *self.core) if self.core else max(
            self.left_tail, self.right_tail
        )

    def inf(self) -> float:
        return min(self.left_tail, self.right_tail, *self.core) if self.core else min(
            self.left_tail, self.right_tail
        )

    def to_json_obj(self) -> dict:
        return {
            "coreStart": self.core_start,
            "core": [float(c) for c in self.core],
            "leftTail": self.left_tail,
            "rightTail": self.right_tail,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "WeightSequence":
        return cls(
            core_start=int(obj["coreStart"]),
            core=tuple(float(c) for c in obj["core"]),
            left_tail=float(obj["leftTail"]),
            right_tail=float(obj["rightTail"]),
        )


def weight_at(w: WeightSequence, n: int) -> float:
    """Weight at index ``n`` (total over all integers)."""
    if n < w.core_start:
        return w.left_tail
    i = n - w.core_start
    if i < len(w.core):
        return w.core[i]
    return w.right_tail


@dataclass(frozen=True)
class ShiftOperator:
    """Bilateral weighted shift ``W e_n = a_n e_{n+1}`` over a weight sequence.

    Positive eventually-constant weights are bounded away from 0 and
    infinity, so the operator is invertible by construction.
    """

    weights: WeightSequence

    def norm(self) -> float:
        return self.weights.sup()

    def inverse_norm(self) -> float:
        return 1.0 / self.weights.inf()


class Verdict(enum.Enum):
    """Classification outcomes for a shift in this class.

    HyperbolicOnly is unreachable here: a shift annulus avoids the unit
    circle exactly when the shift is a uniform contraction or expansion.
    The member is kept so reports can state that explicitly.
    """

    UNIFORM_EXPANSION = "UniformExpansion"
    UNIFORM_CONTRACTION = "UniformContraction"
    HYPERBOLIC_ONLY = "HyperbolicOnly"
    SHIFTED_HYPERBOLIC = "ShiftedHyperbolic"
    NOT_GENERALIZED_HYPERBOLIC = "NotGeneralizedHyperbolic"
    BOUNDARY = "Boundary"


@dataclass(frozen=True)
class SpectralAnnulus:
    """Closed annulus ``inner <= |z| <= outer`` (a circle when equal)."""

    inner: float
    outer: float

    def __post_init__(self):
        if not 0.0 < self.inner <= self.outer:
            raise ValueError(f"invalid annulus [{self.inner}, {self.outer}]")

    def contains_unit_circle(self) -> bool:
        return self.inner <= 1.0 <= self.outer


@dataclass(frozen=True)
class IndexSplit:
    """Coordinate splitting certificate for a shifted hyperbolic shift.

    ``M = span{e_n : n >= split_point}`` is forward invariant with
    ``|W restricted to M| = rate_m < 1``; ``N = span{e_n : n < split_point}``
    is backward invariant with ``|W^-1 restricted to N| = rate_n < 1``.
    Both rates are exact sups over half-lines.
    """

    split_point: int
    rate_m: float
    rate_n: float

    def __post_init__(self):
        if not (0.0 < self.rate_m < 1.0 and 0.0 < self.rate_n < 1.0):
            raise ValueError("certified rates must lie in (0, 1)")


@dataclass(frozen=True)
class ShiftClass:
    """Classification verdict with optional splitting certificate."""

    verdict: Verdict
    annulus: SpectralAnnulus
    split: IndexSplit | None = None


def spectrum_annulus(w: WeightSequence) -> SpectralAnnulus:
    """Spectrum of the shift: the annulus with radii min/max of the tails.

    Exact for this class: products of weights grow like the tail constants,
    and the finitely many core weights only contribute a bounded factor.
    """
    return SpectralAnnulus(
        inner=min(w.left_tail, w.right_tail),
        outer=max(w.left_tail, w.right_tail),
    )


def _rate_m(w: WeightSequence, s: int) -> float:
    """Exact sup of weights over the half-line ``n >= s``."""
    vals = [w.right_tail]
    if s < w.core_start:
        vals.append(w.left_tail)
    vals.extend(w.core[max(0, s - w.core_start):])
    return max(vals)


def _rate_n(w: WeightSequence, s: int) -> float:
    """Exact sup of 1/weight over indices ``n <= s - 2``."""
    vals = [1.0 / w.left_tail]
    if s - 2 >= w.core_end:
        vals.append(1.0 / w.right_tail)
    hi = min(len(w.core), s - 1 - w.core_start)
    vals.extend(1.0 / c for c in w.core[:max(0, hi)])
    return max(vals)


def _index_split(w: WeightSequence) -> IndexSplit | None:
    """Search for a certified coordinate split.

    ``core_end`` is tried first (it certifies whenever any split point at
    or beyond the core does). When core weights at or below 1 block it, a
    smaller split point inside the core window may still certify, so the
    search continues downward before giving up.
    """
    candidates = [w.core_end] + list(range(w.core_end - 1, w.core_start - 1, -1))
    for s in candidates:
        rm = _rate_m(w, s)
        rn = _rate_n(w, s)
        if rm < 1.0 and rn < 1.0:
            return IndexSplit(split_point=s, rate_m=rm, rate_n=rn)
    return None


def classify(w: WeightSequence) -> ShiftClass:
    """Classify the shift by its tail constants.

    Boundary cases (a tail exactly 1) are decided first; otherwise the
    four sign patterns of (left-1, right-1) decide the verdict. For the
    shifted hyperbolic pattern (left > 1 > right) a coordinate splitting
    certificate is attached when one exists.
    """
    ann = spectrum_annulus(w)
    left, right = w.left_tail, w.right_tail
    if left == 1.0 or right == 1.0:
        return ShiftClass(Verdict.BOUNDARY, ann)
    if ann.outer < 1.0:
        return ShiftClass(Verdict.UNIFORM_CONTRACTION, ann)
    if ann.inner > 1.0:
        return ShiftClass(Verdict.UNIFORM_EXPANSION, ann)
    if left > 1.0 > right:
        return ShiftClass(Verdict.SHIFTED_HYPERBOLIC, ann, split=_index_split(w))
    return ShiftClass(Verdict.NOT_GENERALIZED_HYPERBOLIC, ann)


def is_hyponormal(w: WeightSequence) -> bool:
    """True when the weights are nondecreasing over all of Z."""
    if not w.core:
        return w.left_tail <= w.right_tail
    chain = (w.left_tail, *w.core, w.right_tail)
    return all(chain[i] <= chain[i + 1] for i in range(len(chain) - 1))


def aluthge_weights(w: WeightSequence, lam: float) -> WeightSequence:
    """One Aluthge step: ``a'_n = a_n^{1-lam} * a_{n+1}^lam``.

    Only the window ``[core_start-1, core_end-1]`` can change; both tails
    are carried through exactly. Where adjacent weights are equal the
    value is copied rather than recombined, so constant stretches (and the
    fixed point itself) stay exact.
    """
    if not 0.0 < lam < 1.0:
        raise ValueError(f"lambda must be in (0, 1), got {lam}")
    if w.is_constant():
        return w
    ns = range(w.core_start - 1, w.core_end)
    new_core = []
    for n in ns:
        a, b = weight_at(w, n), weight_at(w, n + 1)
        if a == b:
            new_core.append(a)
        else:
            new_core.append(math.exp((1.0 - lam) * math.log(a) + lam * math.log(b)))
    return WeightSequence(w.core_start - 1, tuple(new_core), w.left_tail, w.right_tail)


def aluthge_weights_iterate(w: WeightSequence, lam: float, k: int) -> WeightSequence:
    """k-fold application of ``aluthge_weights`` (k up to 2^16)."""
    if not 0 <= k <= MAX_ALUTHGE_POWER:
        raise ValueError(f"k must be in [0, {MAX_ALUTHGE_POWER}], got {k}")
    out = w
    for _ in range(k):
        out = aluthge_weights(out, lam)
    return out


def log_binomial_weight(w: WeightSequence, lam: float, k: int, n: int) -> float:
    """Closed form for the k-th Aluthge iterate weight at index ``n``.

    ``log a^(k)_n = sum_j C(k,j) lam^j (1-lam)^(k-j) log a_{n+j}``; the
    binomial coefficients are evaluated in log space so large ``k`` never
    overflows.
    """
    if not 0.0 < lam < 1.0:
        raise ValueError(f"lambda must be in (0, 1), got {lam}")
    if not 0 <= k <= MAX_ALUTHGE_POWER:
        raise ValueError(f"k must be in [0, {MAX_ALUTHGE_POWER}], got {k}")
    if k == 0:
        return math.log(weight_at(w, n))
    j = np.arange(k + 1)
    log_binom = (
        math.lgamma(k + 1)
        - np.array([math.lgamma(i + 1) + math.lgamma(k - i + 1) for i in j])
        + j * math.log(lam)
        + (k - j) * math.log1p(-lam)
    )
    coeff = np.exp(log_binom)
    logs = np.array([math.log(weight_at(w, n + i)) for i in j])
    return float(coeff @ logs)


def diagonal_conjugate(w: WeightSequence, d: WeightSequence) -> WeightSequence:
    """Weights of ``H W H^-1`` for the diagonal operator ``H e_n = d_n e_n``.

    The conjugated shift has weights ``a_n d_{n+1} / d_n``. The conjugator
    must have equal tails (otherwise H or H^-1 is unbounded), so outside a
    finite window the ratio is exactly 1 and the tails are untouched.
    """
    if d.left_tail != d.right_tail:
        raise UnboundedConjugatorError(
            f"conjugator tails differ ({d.left_tail} vs {d.right_tail})"
        )
    lo = min(w.core_start, d.core_start - 1)
    hi = max(w.core_end - 1, d.core_end - 1)
    new_core = []
    for n in range(lo, hi + 1):
        dn, dn1 = weight_at(d, n), weight_at(d, n + 1)
        if dn == dn1:
            new_core.append(weight_at(w, n))
        else:
            new_core.append(weight_at(w, n) * dn1 / dn)
    return WeightSequence(lo, tuple(new_core), w.left_tail, w.right_tail)


def truncate_to_dense(
    w: WeightSequence, lo: int, hi: int, boundary: str = "zero"
) -> ComplexMatrix:
    """Compression of the shift to ``span{e_lo .. e_hi}`` as a dense matrix.

    With ``boundary="zero"`` the result is the literal compression:
    subdiagonal entries ``a_lo .. a_{hi-1}`` and zeros elsewhere (note this
    matrix is singular). ``boundary="cyclic"`` adds the corner entry
    ``a_hi`` wrapping the top basis vector back to the bottom, which keeps
    the compression invertible while leaving every interior entry intact;
    it is the bridge used for dense-backend cross-checks.
    """
    if hi < lo:
        raise ValueError(f"empty window [{lo}, {hi}]")
    dim = hi - lo + 1
    if dim > MAX_DIM:
        raise WindowTooLargeError(f"window size {dim} exceeds cap {MAX_DIM}")
    if boundary not in ("zero", "cyclic"):
        raise ValueError(f"unknown boundary mode {boundary!r}")
    m = np.zeros((dim, dim), dtype=np.complex128)
    for i in range(dim - 1):
        m[i + 1, i] = weight_at(w, lo + i)
    if boundary == "cyclic":
        m[0, dim - 1] = weight_at(w, hi)
    return ComplexMatrix(m)


def shift_distance(w1: WeightSequence, w2: WeightSequence) -> float:
    """Operator norm distance ``sup_n |a_n - b_n|``, computed exactly.

    Outside the union of the core windows both sequences sit on their
    tails, so the sup is attained on a finite index set plus the two tail
    comparisons.
    """
    lo = min(w1.core_start, w2.core_start)
    hi = max(w1.core_end, w2.core_end)
    d = max(
        abs(w1.left_tail - w2.left_tail),
        abs(w1.right_tail - w2.right_tail),
    )
    for n in range(lo, hi):
        d = max(d, abs(weight_at(w1, n) - weight_at(w2, n)))
    return d


def inverse_shift_weights(w: WeightSequence) -> WeightSequence:
    """Weight sequence of the inverse shift after reflecting the index.

    ``W^-1`` is a backward shift with factors ``1/a_{n-1}``; conjugating by
    the reflection ``e_n -> e_{-n}`` turns it into a forward shift with
    weights ``b_n = 1/a_{-n-1}``.
    """
    core = tuple(1.0 / c for c in reversed(w.core))
    return WeightSequence(
        core_start=-w.core_end,
        core=core,
        left_tail=1.0 / w.right_tail,
        right_tail=1.0 / w.left_tail,
    )


# Named weight sequences. The two-tail presets split after index 0: the
# weight is the left constant for n <= 0 and the right constant for n >= 1.
PRESET_SHIFTS: dict[str, WeightSequence] = {
    "paper-sh": WeightSequence(1, (), 2.0, 0.5),
    "paper-hyp": WeightSequence(1, (), 2.0, 3.0),
}


def shift_library() -> list[tuple[str, WeightSequence]]:
    """Built-in 12-operator library covering every reachable verdict."""
    return [
        ("const-half", WeightSequence(0, (), 0.5, 0.5)),
        ("const-two", WeightSequence(0, (), 2.0, 2.0)),
        ("const-one", WeightSequence(0, (), 1.0, 1.0)),
        ("paper-sh", PRESET_SHIFTS["paper-sh"]),
        ("paper-hyp", PRESET_SHIFTS["paper-hyp"]),
        ("anti-split", WeightSequence(1, (), 0.5, 2.0)),
        ("left-unit", WeightSequence(1, (), 1.0, 2.0)),
        ("right-unit", WeightSequence(1, (), 2.0, 1.0)),
        ("sh-bump", WeightSequence(0, (5.0, 4.0), 3.0, 1.0 / 3.0)),
        ("exp-bump", WeightSequence(0, (2.0, 3.0), 1.5, 4.0)),
        ("contr-bump", WeightSequence(0, (0.8,), 0.5, 0.25)),
        ("sh-crossing", WeightSequence(0, (3.0, 0.5), 4.0, 0.25)),
    ]
