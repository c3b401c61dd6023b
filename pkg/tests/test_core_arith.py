from fractions import Fraction

import mpmath
import pytest
import sympy
from hypothesis import assume, given
from hypothesis import strategies as st

from qforms.enclosure import Enclosure, as_rat, parse_eps, round_dyadic, sqrt_upper, upper_bits
from qforms.errors import DivergenceError, DomainError, NonInvertibleError, PoleError
from qforms.qnotation import (
    multi_pochhammer,
    phi_rs,
    pochhammer,
    pochhammer_infinite,
    qbinom,
    qbinom_poly,
    qbinom_series,
)
from qforms.series import QSeries

from oracles import encloses, geometric_terms, mpq


def rats(lo=-3, hi=3, max_den=20):
    return st.fractions(min_value=lo, max_value=hi, max_denominator=max_den)


def small_q():
    return rats(-Fraction(9, 10), Fraction(9, 10), 30).filter(lambda q: q != 0)


def series(M):
    return st.lists(rats(-5, 5, 7), min_size=M + 1, max_size=M + 1).map(lambda cs: QSeries(cs, M))


# --- rationals and enclosures -----------------------------------------------------


def test_as_rat_parses_exact_strings():
    assert as_rat("3/6") == Fraction(1, 2)
    assert as_rat(" -7 ") == -7
    assert as_rat(Fraction(2, 4)).denominator == 2


@pytest.mark.parametrize("bad", ["0.5", "1e-3", "abc", "1/"])
def test_as_rat_rejects_decimals(bad):
    with pytest.raises(ValueError):
        as_rat(bad)


def test_as_rat_rejects_float():
    with pytest.raises(TypeError):
        as_rat(0.5)


def test_parse_eps():
    assert parse_eps("1e-12") == Fraction(1, 10**12)
    assert parse_eps("1/1024") == Fraction(1, 1024)
    for bad in ("0", "-1e-3", "x"):
        with pytest.raises(ValueError):
            parse_eps(bad)


def test_rat_lowest_terms():
    r = as_rat("6/4") * -1
    assert (r.numerator, r.denominator) == (-3, 2)
    assert Fraction(0, 5) == Fraction(0, 1) and Fraction(0, 5).denominator == 1


def test_enclosure_rejects_negative_radius():
    with pytest.raises(ValueError):
        Enclosure(Fraction(1), Fraction(-1))


def test_enclosure_basic_queries():
    e = Enclosure(Fraction(1), Fraction(1, 4))
    assert e.lo == Fraction(3, 4) and e.hi == Fraction(5, 4)
    assert e.contains(1) and not e.contains(2)
    assert e.excludes_zero()
    assert e.overlaps(Enclosure(Fraction(3, 2), Fraction(1, 4)))
    assert e.gap(Enclosure(Fraction(2), Fraction(1, 4))) == Fraction(1, 2)


def test_decimal_prints_only_certified_digits():
    e = Enclosure(Fraction(314159, 100000), Fraction(1, 10**4))
    assert e.decimal() == "3.141"  # [3.14149, 3.14169]
    assert Enclosure(Fraction(0), Fraction(0)).decimal() == "0"
    assert Enclosure(Fraction(0), Fraction(1, 100)).decimal().startswith("±")


def test_round_dyadic_error_is_exact():
    x = Fraction(1, 3)
    r, err = round_dyadic(x, 20)
    assert r.denominator <= 2**20 and abs(x - r) == err <= Fraction(1, 2**21)


def test_sqrt_upper_is_an_upper_bound():
    assert sqrt_upper(Fraction(2), 40) ** 2 >= 2
    assert sqrt_upper(Fraction(2), 40) - Fraction(14142135623, 10**10) < Fraction(1, 10**9)


def test_upper_bits_rounds_up():
    x = Fraction(1, 3) * Fraction(1, 10**50)
    u = upper_bits(x, 64)
    assert u >= x and (u - x) / x < Fraction(1, 2**63)
    assert upper_bits(Fraction(0)) == 0


def test_enclosure_division_by_zero_interval():
    with pytest.raises(ZeroDivisionError):
        Enclosure(Fraction(1), Fraction(1)) / Enclosure(Fraction(0), Fraction(1, 2))


@st.composite
def expr_trees(draw, depth=4):
    """A random expression as (exact value, enclosure built from loosened leaves)."""
    if depth == 0 or draw(st.booleans()):
        v = draw(rats(-10, 10, 50))
        r = draw(rats(0, Fraction(1, 100), 1000))
        # the enclosure's midpoint is off, but the radius still covers v
        off = draw(st.fractions(min_value=-1, max_value=1, max_denominator=50)) * r
        return v, Enclosure(v + off, r)
    op = draw(st.sampled_from("+-*/"))
    a, ea = draw(expr_trees(depth=depth - 1))
    b, eb = draw(expr_trees(depth=depth - 1))
    if op == "+":
        return a + b, ea + eb
    if op == "-":
        return a - b, ea - eb
    if op == "*":
        return a * b, ea * eb
    assume(eb.excludes_zero())
    return a / b, ea / eb


@given(expr_trees())
def test_enclosure_arithmetic_contains_exact_value(tree):
    value, enc = tree
    assert enc.contains(value)


@given(rats(-5, 5, 100), rats(0, 1, 100), st.integers(1, 80))
def test_rounded_enclosure_contains_original(mid, rad, bits):
    e = Enclosure(mid, rad)
    r = e.rounded(bits)
    assert r.lo <= e.lo and r.hi >= e.hi


# --- Pochhammer symbols and q-binomials ---------------------------------------------


def test_pochhammer_examples():
    assert pochhammer(Fraction(7, 3), Fraction(-5), 0) == 1
    assert pochhammer(Fraction(1, 2), Fraction(1, 2), 2) == Fraction(3, 8)


def test_multi_pochhammer_examples():
    q, x, z = Fraction(1, 2), Fraction(1, 3), Fraction(1, 5)
    assert multi_pochhammer([q, q * x, q * z], q, 1) == Fraction(3, 8)
    assert multi_pochhammer([], q, 5) == 1
    assert multi_pochhammer([Fraction(1, 2)], Fraction(1, 2), 2) == Fraction(3, 8)
    assert multi_pochhammer([Fraction(1, 2), Fraction(1, 4)], Fraction(1, 2), 1) == Fraction(3, 8)


def test_pochhammer_infinite_trivial_cases():
    e = pochhammer_infinite(0, Fraction(1, 2), Fraction(1, 10**10))
    assert e.contains(1) and e.rad <= Fraction(1, 10**10)
    z = pochhammer_infinite(1, Fraction(1, 2), Fraction(1, 10**10))
    assert z.mid == 0 and z.rad == 0


def test_pochhammer_infinite_against_partial_product():
    # prod_{j>=1} (1 + 2^{-(j-1)}) = 2 * prod_{n>=1} (1 + 2^{-n}) ~ 2 * 2.38423
    eps = Fraction(1, 10**6)
    e = pochhammer_infinite(-1, Fraction(1, 2), eps)
    ref = mpmath.mpf(1)
    for j in range(1, 300):
        ref *= 1 + mpmath.mpf(2) ** (1 - j)
    assert e.rad <= eps and encloses(e, ref)
    assert abs(ref / 2 - mpmath.mpf("2.38423")) < 1e-5


def test_pochhammer_infinite_divergence():
    with pytest.raises(DivergenceError):
        pochhammer_infinite(Fraction(1, 2), 1, Fraction(1, 100))


@given(rats(-3, 3, 12), small_q(), st.integers(0, 8), st.integers(0, 8))
def test_pochhammer_splitting(a, q, m, n):
    assert pochhammer(a, q, m + n) == pochhammer(a, q, m) * pochhammer(a * q**m, q, n)


@given(st.integers(0, 12).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n))), rats(-4, 4, 20))
def test_qbinom_symmetry(nk, q):
    n, k = nk
    assert qbinom(n, k, q) == qbinom(n, n - k, q)


@given(st.integers(2, 12).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n - 1))), rats(-4, 4, 20))
def test_q_pascal(nk, q):
    n, k = nk
    assert qbinom(n, k, q) == qbinom(n - 1, k - 1, q) + q**k * qbinom(n - 1, k, q)


@given(st.integers(1, 12), rats(-4, 4, 20))
def test_q_pascal_edge(n, q):
    # [n-1, n] is zero, so only the first term survives
    assert qbinom(n, n, q) == qbinom(n - 1, n - 1, q) == 1


def test_qbinom_examples():
    assert qbinom(5, 0, Fraction(2, 7)) == 1
    assert qbinom(2, 1, Fraction(1, 3)) == Fraction(4, 3)
    assert qbinom_poly(4, 2) == (1, 1, 2, 1, 1)
    assert qbinom_series(4, 2).coeffs == (1, 1, 2, 1, 1)


def test_qbinom_poly_matches_sympy():
    q = sympy.symbols("q")
    for n in range(9):
        for k in range(n + 1):
            num = sympy.prod([1 - q**j for j in range(n - k + 1, n + 1)])
            den = sympy.prod([1 - q**j for j in range(1, k + 1)])
            poly = sympy.Poly(sympy.cancel(num / den), q)
            expected = tuple(int(c) for c in reversed(poly.all_coeffs()))
            assert qbinom_poly(n, k) == expected


def test_qbinom_domain():
    with pytest.raises(DomainError):
        qbinom(2, 3, Fraction(1, 2))


def test_qbinom_at_root_of_unity_uses_polynomial():
    # q = -1 makes (1 - q^2) vanish; the polynomial value is still defined
    assert qbinom(4, 2, -1) == 1 - 1 + 2 - 1 + 1


# --- basic hypergeometric series -----------------------------------------------------


def test_phi_rs_only_constant_term():
    e = phi_rs([], [], Fraction(1, 2), 0, Fraction(1, 10**10))
    assert e.mid == 1 and e.rad == 0


def test_phi21_against_direct_sum():
    q, x, z = Fraction(1, 2), Fraction(1, 2), Fraction(1, 3)
    e = phi_rs([q, x], [q * x], q, z, Fraction(1, 10**30))
    ref = (1 - mpq(x)) * geometric_terms(lambda n: mpq(z) ** n / (1 - mpq(q) ** n * mpq(x)), start=0)
    assert e.rad <= Fraction(1, 10**30) and encloses(e, ref)


def test_phi_rs_pole():
    q = Fraction(1, 2)
    with pytest.raises(PoleError):
        phi_rs([Fraction(1, 3)], [1 / q], q, Fraction(1, 2), Fraction(1, 10**6))


def test_phi_rs_divergence():
    with pytest.raises(DivergenceError):
        phi_rs([], [], Fraction(3, 2), Fraction(1, 2), Fraction(1, 10**6))


# --- truncated series ---------------------------------------------------------------


def test_qseries_ord_examples():
    s = QSeries.monomial(1, 3, 10) + QSeries.monomial(2, 5, 10)
    assert s.ord() == 3 and s.ord_is_exact()
    z = QSeries.zero(7)
    assert z.ord() == 8 and not z.ord_is_exact() and z.ord_str() == ">=8"


def test_qseries_invert_and_product():
    assert QSeries([1, -1], 2).invert().coeffs == (1, 1, 1)
    prod = QSeries([1, 1], 3) * QSeries([1, -1], 3)
    assert prod.coeffs == (1, 0, -1, 0)


def test_qseries_invert_needs_unit():
    with pytest.raises(NonInvertibleError):
        QSeries([0, 1], 3).invert()


def test_qseries_truncation_is_min():
    a, b = QSeries([1, 2, 3], 5), QSeries([1, 1], 3)
    assert (a + b).trunc_order == 3 and (a * b).trunc_order == 3 and (a / b).trunc_order == 3


def test_qseries_coeff_beyond_order():
    with pytest.raises(IndexError):
        QSeries([1, 2], 1).coeff(2)


def test_qseries_eval_at_geometric():
    # 1/(1-q) at q = 1/3 with |c_k| <= 1
    s = QSeries([1, -1], 30).invert()
    e = s.eval_at(Fraction(1, 3), 1, 1)
    assert e.contains(Fraction(3, 2)) and e.rad < Fraction(1, 10**13)


def test_qseries_eval_at_diverges():
    with pytest.raises(DivergenceError):
        QSeries([1], 3).eval_at(Fraction(1, 2), 1, 2)


@given(series(8), series(8))
def test_qseries_mul_commutative(a, b):
    assert a * b == b * a


@given(series(6), series(6), series(6))
def test_qseries_mul_associative(a, b, c):
    assert (a * b) * c == a * (b * c)


@given(series(6), series(6), series(6))
def test_qseries_distributive(a, b, c):
    assert a * (b + c) == a * b + a * c


@given(series(8))
def test_qseries_inverse(a):
    assume(a.coeff(0) != 0)
    assert a * a.invert() == QSeries.one(8)


@given(rats(-3, 3, 10), st.integers(1, 6), series(10))
def test_binomial_updates_match_multiplication(a, k, s):
    factor = QSeries.one(10) - QSeries.monomial(a, k, 10)
    assert s.mul_binomial(a, k) == s * factor
    assert s.div_binomial(a, k) == s * factor.invert()


def test_qseries_matches_sympy_expansion():
    q = sympy.symbols("q")
    x = Fraction(2, 3)
    s = QSeries.one(12)
    for k in range(1, 4):
        s = s.mul_binomial(x, k)
    s = s.div_binomial(x, 5)
    expr = sympy.prod([1 - sympy.Rational(2, 3) * q**k for k in range(1, 4)]) / (1 - sympy.Rational(2, 3) * q**5)
    ref = sympy.Poly(sympy.series(expr, q, 0, 13).removeO(), q)
    coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(ref.all_coeffs())]
    assert list(s.coeffs) == coeffs + [Fraction(0)] * (13 - len(coeffs))
