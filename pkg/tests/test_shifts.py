"""Weighted-shift weight sequences: canonical form, classification, and the
weight-level Aluthge update.

The two recurring operators are written (2|1/2) and (2|3): weight 2 up to
index 0 and then 1/2 (respectively 3) from index 1 onward.  (2|1/2) admits
a certified splitting with both rates 1/2; (2|3) is expanding with spectrum
in the annulus [2, 3].  The closed-form check re-derives the k-fold weight
update from scratch with exact rational binomial coefficients, so the two
routes are genuinely independent.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftlab import (
    MAX_ALUTHGE_POWER,
    PRESET_SHIFTS,
    ShiftOperator,
    UnboundedConjugatorError,
    Verdict,
    WeightSequence,
    WindowTooLargeError,
    aluthge_weights,
    aluthge_weights_iterate,
    classify,
    diagonal_conjugate,
    gelfand_radius,
    inverse_shift_weights,
    is_hyponormal,
    log_binomial_weight,
    schur_decompose,
    shift_distance,
    shift_library,
    spectrum_annulus,
    truncate_to_dense,
    weight_at,
)


# ============================================================
# canonical form and lookups
# ============================================================

def test_canonical_form_strips_tail_values_from_core():
    w = WeightSequence(0, (2.0, 2.0, 3.0), 2.0, 3.0)
    assert w.core == ()
    assert w.core_start == 2
    for n, expect in [(-1, 2.0), (0, 2.0), (1, 2.0), (2, 3.0), (5, 3.0)]:
        assert weight_at(w, n) == expect


def test_canonical_form_normalizes_constant():
    assert WeightSequence(5, (), 2.0, 2.0) == WeightSequence(0, (), 2.0, 2.0)
    w = WeightSequence(3, (2.0, 2.0), 2.0, 2.0)
    assert w.is_constant()
    assert w.core == () and w.core_start == 0


def test_canonical_form_is_idempotent_on_random_cores():
    rng = np.random.default_rng(6)
    for _ in range(50):
        k = int(rng.integers(0, 6))
        core = tuple(float(x) for x in np.exp(rng.uniform(-1.5, 1.5, size=k)))
        w = WeightSequence(int(rng.integers(-5, 5)), core,
                           float(np.exp(rng.uniform(-1, 1))),
                           float(np.exp(rng.uniform(-1, 1))))
        again = WeightSequence(w.core_start, w.core, w.left_tail, w.right_tail)
        assert again == w
        for n in range(w.core_start - 3, w.core_end + 3):
            assert weight_at(again, n) == weight_at(w, n)


@settings(derandomize=True, max_examples=60, deadline=None)
@given(
    start=st.integers(min_value=-5, max_value=5),
    core=st.lists(st.floats(min_value=0.3, max_value=3.0), max_size=5),
    left=st.floats(min_value=0.3, max_value=3.0),
    right=st.floats(min_value=0.3, max_value=3.0),
    lam=st.sampled_from((0.25, 0.5, 0.75)),
)
def test_update_keeps_tails_and_weight_hull(start, core, left, right, lam):
    w = WeightSequence(start, tuple(core), left, right)
    rebuilt = WeightSequence(w.core_start, w.core, w.left_tail, w.right_tail)
    assert rebuilt == w
    nxt = aluthge_weights(w, lam)
    assert nxt.left_tail == w.left_tail
    assert nxt.right_tail == w.right_tail
    lo = min((*w.core, w.left_tail, w.right_tail))
    hi = max((*w.core, w.left_tail, w.right_tail))
    for n in range(nxt.core_start - 2, nxt.core_end + 2):
        val = weight_at(nxt, n)
        assert lo * (1.0 - 1e-12) <= val <= hi * (1.0 + 1e-12)


def test_weight_validation():
    with pytest.raises(ValueError):
        WeightSequence(0, (0.0,), 1.0, 1.0)
    with pytest.raises(ValueError):
        WeightSequence(0, (), -2.0, 1.0)
    with pytest.raises(ValueError):
        WeightSequence(0, (), 1.0, math.inf)


def test_weight_at_presets():
    hyp = PRESET_SHIFTS["paper-hyp"]
    assert [weight_at(hyp, n) for n in (-5, 0, 1, 7)] == [2.0, 2.0, 3.0, 3.0]
    sh = PRESET_SHIFTS["paper-sh"]
    assert [weight_at(sh, n) for n in (-5, 0, 1, 7)] == [2.0, 2.0, 0.5, 0.5]


def test_json_round_trip():
    for _, w in shift_library():
        back = WeightSequence.from_json_obj(w.to_json_obj())
        assert back == w


def test_shift_operator_norms():
    op = ShiftOperator(PRESET_SHIFTS["paper-hyp"])
    assert op.norm() == 3.0
    assert op.inverse_norm() == 0.5


# ============================================================
# spectrum annulus
# ============================================================

def test_spectrum_annulus_presets():
    ann = spectrum_annulus(PRESET_SHIFTS["paper-hyp"])
    assert (ann.inner, ann.outer) == (2.0, 3.0)
    assert not ann.contains_unit_circle()
    ann = spectrum_annulus(PRESET_SHIFTS["paper-sh"])
    assert (ann.inner, ann.outer) == (0.5, 2.0)
    assert ann.contains_unit_circle()
    ann = spectrum_annulus(WeightSequence(0, (), 0.5, 0.5))
    assert (ann.inner, ann.outer) == (0.5, 0.5)


def test_spectrum_annulus_matches_orbit_growth():
    # growth route: |T^n e_m|^(1/n) approaches the outer radius and
    # |T^{-n} e_m|^(-1/n) the inner one, independently of the core
    from shiftlab import LatticeVector, orbit_norms
    w = WeightSequence(0, (5.0, 0.7), 2.0, 3.0)
    ann = spectrum_annulus(w)
    op = ShiftOperator(w)
    n = 200
    outer = max(
        math.exp(orbit_norms(op, LatticeVector.basis(m), n).log_norm_at(n) / n)
        for m in range(-3, 4)
    )
    inner = min(
        math.exp(-orbit_norms(op, LatticeVector.basis(m), n).log_norm_at(-n) / n)
        for m in range(-3, 4)
    )
    assert outer == pytest.approx(ann.outer, rel=0.02)
    assert inner == pytest.approx(ann.inner, rel=0.02)


def test_truncation_eigenvalues_stay_inside_annulus():
    # cyclic truncations of an invertible weighted shift keep their
    # eigenvalue moduli inside the weight annulus at every window size
    for name, w in shift_library():
        ann = spectrum_annulus(w)
        for dim in (8, 16, 32):
            t = truncate_to_dense(w, -dim // 2, dim // 2 - 1, boundary="cyclic")
            moduli = np.abs(schur_decompose(t.data).eigenvalues)
            assert moduli.min() >= ann.inner - 1e-9, name
            assert moduli.max() <= ann.outer + 1e-9, name
            est = gelfand_radius(t.data, doublings=20)
            assert est <= ann.outer * 1.02 + 1e-9, name


# ============================================================
# classification
# ============================================================

def test_classify_table():
    cases = [
        (WeightSequence(0, (), 0.5, 0.5), Verdict.UNIFORM_CONTRACTION),
        (PRESET_SHIFTS["paper-hyp"], Verdict.UNIFORM_EXPANSION),
        (PRESET_SHIFTS["paper-sh"], Verdict.SHIFTED_HYPERBOLIC),
        (WeightSequence(1, (), 0.5, 2.0), Verdict.NOT_GENERALIZED_HYPERBOLIC),
        (WeightSequence(1, (), 1.0, 2.0), Verdict.BOUNDARY),
        (WeightSequence(1, (), 2.0, 1.0), Verdict.BOUNDARY),
        (WeightSequence(0, (), 1.0, 1.0), Verdict.BOUNDARY),
    ]
    for w, expected in cases:
        assert classify(w).verdict == expected


def test_classify_split_certificate_for_sh_preset():
    cls = classify(PRESET_SHIFTS["paper-sh"])
    assert cls.verdict == Verdict.SHIFTED_HYPERBOLIC
    assert cls.split is not None
    assert cls.split.split_point == 1
    assert cls.split.rate_m == 0.5
    assert cls.split.rate_n == 0.5


def test_classify_finds_split_below_core_end():
    w = WeightSequence(0, (0.5, 0.25), 2.0, 0.5)
    cls = classify(w)
    assert cls.verdict == Verdict.SHIFTED_HYPERBOLIC
    assert cls.split.split_point == 1
    assert cls.split.rate_m == 0.5
    assert cls.split.rate_n == 0.5


def test_split_certificate_means_what_it_says():
    # verify the defining inequalities directly on basis vectors
    from shiftlab import LatticeVector, apply_shift
    for w in (PRESET_SHIFTS["paper-sh"],
              WeightSequence(0, (5.0, 4.0), 3.0, 1.0 / 3.0),
              WeightSequence(0, (3.0, 0.5), 4.0, 0.25)):
        cls = classify(w)
        assert cls.verdict == Verdict.SHIFTED_HYPERBOLIC
        s = cls.split.split_point
        op = ShiftOperator(w)
        for n in range(s, s + 8):
            img = apply_shift(op, LatticeVector.basis(n))
            assert set(img.support) == {n + 1}
            assert img.norm() <= cls.split.rate_m * (1 + 1e-12)
        for n in range(s - 8, s):
            img = apply_shift(op, LatticeVector.basis(n), power=-1)
            assert set(img.support) == {n - 1}
            assert img.norm() <= cls.split.rate_n * (1 + 1e-12)


def test_library_covers_all_reachable_verdicts():
    verdicts = {classify(w).verdict for _, w in shift_library()}
    assert verdicts == {
        Verdict.UNIFORM_CONTRACTION,
        Verdict.UNIFORM_EXPANSION,
        Verdict.SHIFTED_HYPERBOLIC,
        Verdict.NOT_GENERALIZED_HYPERBOLIC,
        Verdict.BOUNDARY,
    }


def test_is_hyponormal():
    assert is_hyponormal(PRESET_SHIFTS["paper-hyp"])
    assert not is_hyponormal(PRESET_SHIFTS["paper-sh"])
    assert is_hyponormal(WeightSequence(0, (), 3.0, 3.0))
    assert is_hyponormal(WeightSequence(0, (2.5,), 2.0, 3.0))
    assert not is_hyponormal(WeightSequence(0, (3.0, 2.5), 2.0, 3.0))


# ============================================================
# Aluthge weight update
# ============================================================

def test_aluthge_constant_is_exact_fixed_point():
    for c in (0.5, 1.0, 2.0, 3.0):
        w = WeightSequence(0, (), c, c)
        for lam in (0.25, 0.5, 0.75):
            assert aluthge_weights(w, lam) == w
            assert shift_distance(aluthge_weights(w, lam), w) == 0.0


def test_aluthge_sh_preset_single_step():
    out = aluthge_weights(PRESET_SHIFTS["paper-sh"], 0.5)
    assert out == WeightSequence(0, (1.0,), 2.0, 0.5)
    assert weight_at(out, 0) == 1.0


def test_aluthge_hyp_preset_third():
    out = aluthge_weights(PRESET_SHIFTS["paper-hyp"], 1.0 / 3.0)
    assert weight_at(out, 0) == pytest.approx(2.0 ** (2 / 3) * 3.0 ** (1 / 3), abs=1e-14)
    assert out.left_tail == 2.0
    assert out.right_tail == 3.0


def test_aluthge_lambda_validation():
    w = PRESET_SHIFTS["paper-sh"]
    for bad in (0.0, 1.0, -0.5, 1.5):
        with pytest.raises(ValueError):
            aluthge_weights(w, bad)


def test_aluthge_tails_preserved_exactly():
    for _, w in shift_library():
        for k in (1, 3, 10, 40):
            wk = aluthge_weights_iterate(w, 0.5, k)
            assert wk.left_tail == w.left_tail
            assert wk.right_tail == w.right_tail
            assert weight_at(wk, w.core_start - k - 1) == w.left_tail
            assert weight_at(wk, w.core_end + k) == w.right_tail


def test_aluthge_iterate_power_cap():
    w = PRESET_SHIFTS["paper-sh"]
    assert MAX_ALUTHGE_POWER == 2 ** 16
    with pytest.raises(ValueError):
        aluthge_weights_iterate(w, 0.5, MAX_ALUTHGE_POWER + 1)
    with pytest.raises(ValueError):
        aluthge_weights_iterate(w, 0.5, -1)


def _exact_log_weight(w: WeightSequence, lam_frac: Fraction, k: int, n: int) -> float:
    """Independent route: exact rational binomial mixture of log weights."""
    total = Fraction(0)
    logs = {}
    for j in range(k + 1):
        coeff = Fraction(math.comb(k, j)) * lam_frac ** j * (1 - lam_frac) ** (k - j)
        lw = logs.setdefault(n + j, math.log(weight_at(w, n + j)))
        total += coeff * Fraction(lw)
    return float(total)


def test_log_binomial_matches_exact_rational_route():
    lam = Fraction(1, 2)
    seqs = [PRESET_SHIFTS["paper-sh"], PRESET_SHIFTS["paper-hyp"],
            WeightSequence(0, (5.0, 0.7, 1.3), 2.0, 3.0)]
    for w in seqs:
        for k in (0, 1, 2, 5, 16):
            for n in range(w.core_start - k - 2, w.core_end + 2):
                got = log_binomial_weight(w, float(lam), k, n)
                want = _exact_log_weight(w, lam, k, n)
                assert abs(got - want) < 1e-12


def test_iterated_weights_match_closed_form():
    # two independent routes to the k-fold update, compared on a pool of
    # sequences at checkpoints up to k = 256
    rng = np.random.default_rng(2718)
    pool = [w for _, w in shift_library()]
    while len(pool) < 20:
        k = int(rng.integers(1, 5))
        core = tuple(float(x) for x in np.exp(rng.uniform(-1.0, 1.0, size=k)))
        pool.append(WeightSequence(int(rng.integers(-3, 4)), core,
                                   float(np.exp(rng.uniform(-0.7, 0.7))),
                                   float(np.exp(rng.uniform(-0.7, 0.7)))))
    for lam in (0.25, 0.5, 0.75):
        for w in pool:
            cur = w
            for k in range(1, 257):
                cur = aluthge_weights(cur, lam)
                if k in (1, 2, 5, 16, 64, 256):
                    for n in range(cur.core_start - 1, cur.core_end + 2):
                        closed = math.exp(log_binomial_weight(w, lam, k, n))
                        assert abs(weight_at(cur, n) - closed) <= 1e-10


def test_deep_closed_form_is_finite_and_in_hull():
    w = PRESET_SHIFTS["paper-sh"]
    lo, hi = math.log(0.5), math.log(2.0)
    for n in (-64, -8, 0, 8, 64):
        v = log_binomial_weight(w, 0.5, MAX_ALUTHGE_POWER, n)
        assert math.isfinite(v)
        assert lo - 1e-9 <= v <= hi + 1e-9


def test_aluthge_preserves_annulus_and_verdict():
    for _, w in shift_library():
        base = classify(w).verdict
        ann = spectrum_annulus(w)
        for lam in (0.25, 0.5, 0.75):
            cur = w
            for k in range(1, 65):
                cur = aluthge_weights(cur, lam)
                a2 = spectrum_annulus(cur)
                assert (a2.inner, a2.outer) == (ann.inner, ann.outer)
                if k in (1, 4, 16, 64):
                    assert classify(cur).verdict == base


# ============================================================
# conjugation
# ============================================================

def test_diagonal_conjugate_constant_is_identity():
    d = WeightSequence(0, (), 1.0, 1.0)
    for _, w in shift_library():
        assert diagonal_conjugate(w, d) == w
    half = WeightSequence(0, (), 0.5, 0.5)
    assert diagonal_conjugate(PRESET_SHIFTS["paper-sh"], half) == PRESET_SHIFTS["paper-sh"]


def test_diagonal_conjugate_hand_example():
    d = WeightSequence(0, (3.0,), 1.0, 1.0)
    out = diagonal_conjugate(PRESET_SHIFTS["paper-sh"], d)
    assert weight_at(out, -1) == 6.0
    assert weight_at(out, 0) == pytest.approx(2.0 / 3.0)
    assert weight_at(out, -2) == 2.0
    assert weight_at(out, 1) == 0.5


def test_diagonal_conjugate_matches_dense_similarity():
    w = PRESET_SHIFTS["paper-sh"]
    d = WeightSequence(-1, (0.5, 3.0, 1.5), 1.0, 1.0)
    out = diagonal_conjugate(w, d)
    lo, hi = -8, 7
    t = truncate_to_dense(w, lo, hi).data
    h = np.diag([weight_at(d, n) for n in range(lo, hi + 1)]).astype(complex)
    sim = h @ t @ np.linalg.inv(h)
    for i in range(hi - lo):
        assert sim[i + 1, i] == pytest.approx(weight_at(out, lo + i), abs=1e-12)


def test_diagonal_conjugate_preserves_verdict():
    rng = np.random.default_rng(404)
    for trial in range(10):
        k = int(rng.integers(1, 5))
        core = tuple(float(x) for x in np.exp(rng.uniform(-1.0, 1.0, size=k)))
        d = WeightSequence(int(rng.integers(-3, 3)), core, 1.0, 1.0)
        for _, w in shift_library():
            assert classify(diagonal_conjugate(w, d)).verdict == classify(w).verdict


def test_diagonal_conjugate_rejects_unbounded():
    d = WeightSequence(0, (), 0.5, 2.0)
    with pytest.raises(UnboundedConjugatorError):
        diagonal_conjugate(PRESET_SHIFTS["paper-sh"], d)


# ============================================================
# truncation, distance, inverse
# ============================================================

def test_truncate_zero_boundary_small():
    w = WeightSequence(0, (), 2.0, 2.0)
    t = truncate_to_dense(w, -1, 1)
    expect = np.array([[0, 0, 0], [2, 0, 0], [0, 2, 0]], dtype=complex)
    assert np.array_equal(t.data, expect)


def test_truncate_cyclic_adds_corner():
    w = PRESET_SHIFTS["paper-hyp"]
    t = truncate_to_dense(w, -1, 1, boundary="cyclic")
    assert t.data[0, 2] == weight_at(w, 1)
    assert t.data[1, 0] == weight_at(w, -1)
    assert t.data[2, 1] == weight_at(w, 0)


def test_truncate_norm_below_weight_sup():
    for _, w in shift_library():
        t = truncate_to_dense(w, -8, 7)
        assert float(np.linalg.norm(t.data, 2)) <= w.sup() + 1e-12


def test_truncate_window_cap():
    with pytest.raises(WindowTooLargeError):
        truncate_to_dense(PRESET_SHIFTS["paper-sh"], -200, 200)
    with pytest.raises(ValueError):
        truncate_to_dense(PRESET_SHIFTS["paper-sh"], 5, 2)


def test_shift_distance_cases():
    sh = PRESET_SHIFTS["paper-sh"]
    assert shift_distance(sh, sh) == 0.0
    c2 = WeightSequence(0, (), 2.0, 2.0)
    c3 = WeightSequence(0, (), 3.0, 3.0)
    assert shift_distance(c2, c3) == 1.0
    assert shift_distance(c3, c2) == 1.0
    # one Aluthge step moves (2|1/2) by exactly |2 - 1| at index 0
    assert shift_distance(sh, aluthge_weights(sh, 0.5)) == 1.0


def test_inverse_shift_weights():
    w = PRESET_SHIFTS["paper-hyp"]
    inv = inverse_shift_weights(w)
    for n in range(-6, 6):
        assert weight_at(inv, n) == pytest.approx(1.0 / weight_at(w, -n - 1), abs=1e-15)
    assert inverse_shift_weights(inv) == w
    ann_w = spectrum_annulus(w)
    ann_i = spectrum_annulus(inv)
    assert ann_i.inner == pytest.approx(1.0 / ann_w.outer)
    assert ann_i.outer == pytest.approx(1.0 / ann_w.inner)
