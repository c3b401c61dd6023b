import math
from fractions import Fraction

import pytest
import sympy
from hypothesis import assume, given
from hypothesis import strategies as st

from qforms.enclosure import Enclosure
from qforms.errors import DomainError, IndexUnderflow, InsufficientTruncation, QFormsError
from qforms.functions import eval_ell
from qforms.hankel import (
    SeqOfSeries,
    bareiss_det,
    certify,
    decay_fit,
    enclosure_det,
    hankel_bound,
    hankel_numeric,
    hankel_order_check,
    hankel_series,
    hankel_series_enclosure,
    hankel_values,
    lemma1_check,
    lemma1_sequence_check,
    lemma_bound,
    rational_det,
    remainder_sequence,
    series_det,
    series_det_cofactor,
    shift_difference,
    vprime,
    vprime_numeric_check,
)
from qforms.pade import linear_form, remainder_series
from qforms.series import QSeries

P1 = (2, Fraction(1, 2), Fraction(1, 3))


def small_rats():
    return st.fractions(min_value=-4, max_value=4, max_denominator=9)


def series_seq(length, M):
    one = st.lists(small_rats(), min_size=M + 1, max_size=M + 1).map(lambda cs: QSeries(cs, M))
    return st.lists(one, min_size=length, max_size=length)


# --- the shift-difference operator ----------------------------------------------------


def test_shift_difference_small_l():
    s = [QSeries([k, 1, k * k], 4) for k in range(1, 5)]
    assert shift_difference(0, s, 3) == s[3]
    assert shift_difference(1, s, 3) == s[3] - s[2]
    q = QSeries.monomial(1, 1, 4)
    assert shift_difference(2, s, 3) == s[3] - (QSeries.one(4) + q) * s[2] + q * s[1]


def test_shift_difference_underflow():
    s = [QSeries([1], 3)] * 3
    with pytest.raises(IndexUnderflow):
        shift_difference(3, s, 2)


def _compose(l, seq, q):
    """Apply (I - q^j N) for j = 0..l-1, one factor at a time."""
    cur = list(seq)
    for j in range(l):
        nxt = [None] * len(cur)
        for m in range(1, len(cur)):
            if cur[m] is None or cur[m - 1] is None:
                continue
            prev = cur[m - 1].shift(j) if q is None else cur[m - 1] * q**j
            nxt[m] = cur[m] - prev
        cur = nxt
    return cur


@given(st.integers(0, 5), series_seq(7, 12))
def test_shift_difference_is_composition_formal(l, seq):
    n = 6
    assert shift_difference(l, seq, n) == _compose(l, seq, None)[n]


@given(
    st.integers(0, 5),
    st.lists(small_rats(), min_size=7, max_size=7),
    st.fractions(min_value=-3, max_value=3, max_denominator=7),
)
def test_shift_difference_is_composition_numeric(l, seq, q):
    n = 6
    assert shift_difference(l, seq, n, q) == _compose(l, seq, q)[n]


def test_seq_of_series_checks_orders():
    with pytest.raises(ValueError):
        SeqOfSeries((QSeries([1], 3), QSeries([1], 4)))


# --- Lemma 1 --------------------------------------------------------------------------


def test_lemma1_hand_example():
    v = lemma1_check(QSeries.one(8), 1, 3, 2, 8)
    assert v.passed and v.bound == 5 and not v.exact and v.order == 9


def test_lemma1_l0():
    v = lemma1_check(QSeries([1, 3, -1], 10), 2, 4, 0, 10)
    assert v.bound == 0 and v.passed


def test_lemma1_geometric_H():
    H = QSeries([1, -1], 80).invert()
    for n in range(11):
        for l in range(n + 1):
            assert lemma1_check(H, 0, n, l, 80).passed, (n, l)


def test_lemma1_insufficient_truncation():
    with pytest.raises(InsufficientTruncation):
        lemma1_check(QSeries.one(3), 0, 5, 3, 3)


@given(
    st.lists(small_rats(), min_size=30, max_size=30),
    st.integers(0, 3),
    st.integers(0, 6).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n))),
)
def test_lemma1_random_H(tail, t, nl):
    n, l = nl
    M = 30
    H = QSeries([1] + tail[:M], M)
    assert lemma1_check(H, t, n, l, M).passed


def test_lemma1_on_remainders():
    seq = remainder_sequence(7, *P1, lemma_bound(6, 6) + 8)
    for n in range(7):
        for l in range(n + 1):
            v = lemma1_sequence_check(seq, n, l)
            assert v.passed and v.bound == lemma_bound(n, l)


# --- determinants ---------------------------------------------------------------------


def test_bareiss_small():
    assert bareiss_det([[1, 2], [3, 4]]) == -2
    assert bareiss_det([]) == 1
    assert bareiss_det([[0, 1], [1, 0]]) == -1


@given(st.integers(1, 6).flatmap(lambda n: st.lists(st.lists(st.integers(-20, 20), min_size=n, max_size=n), min_size=n, max_size=n)))
def test_bareiss_matches_sympy(m):
    assert bareiss_det(m) == sympy.Matrix(m).det()


@given(st.integers(1, 5).flatmap(lambda n: st.lists(st.lists(small_rats(), min_size=n, max_size=n), min_size=n, max_size=n)))
def test_rational_det_matches_sympy(m):
    ref = sympy.Matrix([[sympy.Rational(c.numerator, c.denominator) for c in row] for row in m]).det()
    assert rational_det(m) == Fraction(int(ref.p), int(ref.q))


@given(st.integers(1, 4).flatmap(lambda n: st.lists(st.lists(st.tuples(small_rats(), small_rats()), min_size=n, max_size=n), min_size=n, max_size=n)))
def test_enclosure_det_contains_exact(m):
    exact = [[v for v, _ in row] for row in m]
    # loosened enclosures whose midpoints are off but whose radii still cover the exact entries
    encs = [[Enclosure(v + off / 1000, abs(off) / 1000 + Fraction(1, 10**6)) for v, off in row] for row in m]
    assert enclosure_det(encs).contains(rational_det(exact))


def test_enclosure_det_kernel():
    e = enclosure_det([[Enclosure.exact(1), Enclosure.exact(2)], [Enclosure.exact(3), Enclosure.exact(4)]])
    assert e.mid == -2 and e.rad == 0


@pytest.mark.parametrize("n", range(1, 5))
def test_cofactor_equals_elimination(n):
    M = hankel_bound(n) + 6
    seq = remainder_sequence(2 * n - 1, 2, Fraction(1, 2), Fraction(1, 3), M)
    mat = [[seq[j + l] for l in range(n)] for j in range(n)]
    assert series_det(mat) == series_det_cofactor(mat)


def test_series_det_needs_cofactor_fallback():
    M = 6
    q = QSeries.monomial(1, 1, M)
    mat = [[q, QSeries.one(M)], [QSeries.one(M), q]]
    assert series_det(mat) == series_det_cofactor(mat) == q * q - QSeries.one(M)


# --- Hankel determinants -----------------------------------------------------------------


def test_hankel_series_n1_is_v0_star():
    assert hankel_series(1, *P1, 15) == remainder_series(0, *P1, 15)


def test_hankel_series_examples():
    assert hankel_series(2, 2, 1, 1, 20).ord() >= 1
    assert hankel_series(3, *P1, 15).ord() >= 5


@pytest.mark.parametrize("p,x,z", [P1, (-2, Fraction(1, 3), Fraction(1, 2))])
def test_hankel_order_bound(p, x, z):
    for n in range(1, 6):
        v = hankel_order_check(n, p, x, z)
        assert v.passed and v.bound == hankel_bound(n)


def test_hankel_numeric_n1():
    hv = hankel_numeric(1, *P1)
    assert hv.V.overlaps(eval_ell(*P1, Fraction(1, 10**60)) * 2)


@pytest.mark.parametrize("n", range(1, 5))
def test_hankel_numeric_matches_series(n):
    num = hankel_numeric(n, *P1).V
    ser = hankel_series_enclosure(n, *P1)
    assert num.overlaps(ser)
    assert num.rad < abs(num.mid)


def test_hankel_numeric_precision():
    hv = hankel_numeric(5, 2, 1, 1)
    assert hv.V.excludes_zero()
    assert hv.rel_bits() >= math.ceil(125 / 3) + 64


def test_hankel_values_thread_independent():
    a = hankel_values(*P1, range(1, 5), threads=1)
    b = hankel_values(*P1, range(1, 5), threads=2)
    assert [h.V for h in a] == [h.V for h in b]


# --- v_n' ----------------------------------------------------------------------------------


def test_vprime_n0_is_v0():
    assert vprime(0, *P1).form == linear_form(0, *P1)


def test_vprime_n1_expansion():
    p, x, z = P1
    v2, v1 = linear_form(2, p, x, z), linear_form(1, p, x, z)
    expected = v2 + v1.scale(-(x * z) ** 2)
    got = vprime(1, p, x, z).form
    assert (got.a, got.b) == (expected.a, expected.b)


@pytest.mark.parametrize("n", range(7))
def test_vprime_order_and_forms(n):
    r = vprime(n, *P1)
    assert r.verdict.passed and r.verdict.bound == n * (n + 1)
    assert r.forms_equal


@pytest.mark.parametrize("n", range(1, 5))
def test_vprime_numeric_overlap(n):
    lhs, rhs = vprime_numeric_check(n, *P1)
    assert lhs.overlaps(rhs)
    assert lhs.rad < abs(lhs.mid)


# --- decay fit and certificates ------------------------------------------------------------


def test_decay_fit_exact_recovery():
    a = -math.log(2) / 3
    fit = decay_fit({n: a * n**3 for n in range(4, 13)}, 2)
    assert abs(fit.a - a) < 1e-9 and abs(fit.b) < 1e-7 and abs(fit.c) < 1e-7
    assert fit.within_tolerance


@given(st.permutations(list(range(4, 13))))
def test_decay_fit_order_invariant(perm):
    data = [(n, -0.23 * n**3 + 0.4 * n**2 - 2 * n + (n % 3) * 0.1) for n in perm]
    base = decay_fit(sorted(data), 2)
    fit = decay_fit(data, 2)
    assert (fit.a, fit.b, fit.c) == (base.a, base.b, base.c)


def test_decay_fit_degenerate():
    with pytest.raises(QFormsError):
        decay_fit({n: None for n in range(5)}, 2)
    with pytest.raises(QFormsError):
        decay_fit({1: 0.0, 2: -1.0}, 2)


def test_certify_unit_point():
    rep = certify(2, 1, 1, 10)
    assert rep.all_nonzero and rep.orders_pass and rep.passed
    assert rep.scaled_decreasing(3)
    assert [r.n for r in rep.records] == list(range(1, 11))
    out = rep.to_json()
    assert out["heuristic"]["label"].startswith("HEURISTIC")
    assert out["rigorous"]["all_nonzero"] is True


def test_certify_small_point():
    rep = certify(2, Fraction(1, 2), Fraction(1, 3), 8)
    assert rep.all_nonzero and rep.fit is not None


@pytest.mark.parametrize("x,z", [(2, 1), (4, Fraction(1, 3))])
def test_certify_rejects_poles(x, z):
    with pytest.raises(DomainError, match="irrationality hypothesis"):
        certify(2, x, z, 3)


def test_certify_rejects_large_z():
    with pytest.raises(DomainError):
        certify(2, 1, 3, 3)


def test_certify_zero_parameter():
    with pytest.raises(DomainError):
        certify(2, 0, 1, 3)
