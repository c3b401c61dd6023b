"""One test per acceptance criterion, with pinned tolerances and time limits.

The terminal summary lists each criterion with PASS or FAIL.
"""

import math
import time
from fractions import Fraction

import mpmath
from hypothesis import settings

from qforms.functions import eval_ell, eval_pi_q
from qforms.hankel import (
    certify,
    hankel_bound,
    hankel_order_check,
    hankel_values,
    lemma1_sequence_check,
    lemma_bound,
    remainder_sequence,
    vprime,
    vprime_numeric_check,
)
from qforms.identities import FORMAL_ORDER, REGISTRY, IdentityCase, check, run_suite
from qforms.pade import integrality_check, linear_form, remainder_enclosure

import oracles

# pinned tolerances and limits
ERDOS_BORWEIN = Fraction(16066951524, 10**10)
ERDOS_BORWEIN_RADIUS = Fraction(1, 10**10)
DEFECT_RADIUS = Fraction(1, 10**20)
DECAY_TOLERANCE = 0.15
DECAY_TARGET = -math.log(2) / 3
PI_Q_AT_2 = Fraction(4532372, 10**6)
ZETA_Q2_AT_2 = Fraction(27440, 10**4)
TRIALS = 200

FIVE_POINTS = [
    (2, 1, 1),
    (2, Fraction(1, 2), Fraction(1, 3)),
    (-3, Fraction(2, 5), Fraction(-1, 2)),
    (5, 1, Fraction(1, 2)),
    (2, Fraction(-1, 2), Fraction(1, 2)),
]
THREE_POINTS = FIVE_POINTS[:3]
HANKEL_POINTS = [(2, Fraction(1, 2), Fraction(1, 3)), (-2, Fraction(1, 3), Fraction(1, 2))]


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


def test_criterion_01_erdos_borwein_value():
    with Timer() as t:
        e = eval_ell(2, 1, 1, ERDOS_BORWEIN_RADIUS)
    assert e.rad <= ERDOS_BORWEIN_RADIUS
    assert abs(e.mid - ERDOS_BORWEIN) <= ERDOS_BORWEIN_RADIUS
    assert oracles.encloses(e, oracles.ell(2, 1, 1))
    assert t.seconds < 1


def test_criterion_02_linear_form_defect():
    with Timer() as t:
        for p, x, z in FIVE_POINTS:
            for n in range(11):
                form = linear_form(n, p, x, z)
                ell = eval_ell(p, x, z, DEFECT_RADIUS / 4 / max(abs(form.a), 1))
                lhs = form(ell)
                rhs = remainder_enclosure(n, p, x, z, DEFECT_RADIUS / 4)
                assert lhs.overlaps(rhs), (p, x, z, n)
                assert lhs.rad + rhs.rad <= DEFECT_RADIUS, (p, x, z, n)
    assert t.seconds < 120


def test_criterion_03_integrality():
    for p, x, z in FIVE_POINTS:
        for n in range(13):
            verdict = integrality_check(n, p, x, z)
            assert verdict.passed, (p, x, z, n, verdict.failures)


def test_criterion_04_lemma1_orders():
    with Timer() as t:
        for p, x, z in THREE_POINTS:
            seq = remainder_sequence(11, p, x, z, lemma_bound(10, 10) + 10)
            for n in range(11):
                for l in range(n + 1):
                    v = lemma1_sequence_check(seq, n, l)
                    assert v.passed and v.bound == n * l - l * (l - 1) // 2, (p, x, z, n, l)
    assert t.seconds < 300


def test_criterion_05_hankel_order_bound():
    with Timer() as t:
        for p, x, z in HANKEL_POINTS:
            for n in range(1, 8):
                v = hankel_order_check(n, p, x, z)
                assert v.passed and v.bound == n * (n - 1) * (2 * n - 1) // 6 == hankel_bound(n), (p, x, z, n)
    assert t.seconds < 600


def test_criterion_06_vprime_orders_and_forms():
    p, x, z = 2, Fraction(1, 2), Fraction(1, 3)
    for n in range(11):
        r = vprime(n, p, x, z)
        assert r.verdict.passed and r.verdict.bound == n * (n + 1), n
        if n <= 8:
            assert r.forms_equal, n
            lhs, rhs = vprime_numeric_check(n, p, x, z)
            assert lhs.overlaps(rhs) and lhs.rad < abs(lhs.mid), n


def test_criterion_07_decay_fit():
    with Timer() as t:
        rep = certify(2, 1, 1, 12, fit_from=4, order_n_max=0)
    fit = rep.fit
    assert fit is not None and fit.points == 9
    assert abs(fit.a - DECAY_TARGET) <= DECAY_TOLERANCE
    assert t.seconds < 1800


def test_criterion_08_nonvanishing():
    for p, x, z in [(2, 1, 1), (2, Fraction(1, 2), Fraction(1, 3))]:
        for hv in hankel_values(p, x, z, range(1, 11)):
            assert hv.V.excludes_zero(), (p, x, z, hv.n)


def test_criterion_09_identity_suite():
    with Timer() as t:
        rep = run_suite(None, points=5, seed=1)
    assert rep.passed, [c.to_json() for c in rep.reports if not c.passed]
    for ident in REGISTRY.values():
        modes = [c.mode for c in rep.reports if c.id == ident.id]
        assert modes.count("numeric") >= 5, ident.id
        if ident.formal is not None:
            assert modes.count("formal") >= 5, ident.id
    assert all(c.margin == FORMAL_ORDER for c in rep.reports if c.mode == "formal")
    eps = Fraction(1, 10**20)
    pis = [eval_pi_q(2, eps, form) for form in ("ell", "lambert-alt", "lambert-sech", "theta")]
    assert all(a.overlaps(b) for a in pis for b in pis)
    assert abs(pis[0].mid - PI_Q_AT_2) < Fraction(1, 10**6)
    zeta = check(IdentityCase("qzeta_two", {"p": 2}))
    assert zeta.passed and abs(zeta.lhs.mid - ZETA_Q2_AT_2) < Fraction(1, 10**4)
    assert t.seconds < 600


def test_criterion_10_property_suites():
    assert settings.default.max_examples == TRIALS and settings.default.derandomize
    import test_core_arith as core
    import test_functions as fns
    import test_hankel as hk
    import test_pade as pd

    props = [
        core.test_q_pascal,
        core.test_pochhammer_splitting,
        core.test_qbinom_symmetry,
        core.test_enclosure_arithmetic_contains_exact_value,
        core.test_qseries_mul_commutative,
        core.test_qseries_mul_associative,
        fns.test_ell_symmetry,
        fns.test_ell_functional_equation,
        fns.test_Lcal_cyclic_relation,
        fns.test_Lq_log_derivative,
        pd.test_normalizer_factorization,
        pd.test_integrality_at_random_points,
        hk.test_shift_difference_is_composition_formal,
        hk.test_enclosure_det_contains_exact,
    ]
    for prop in props:
        prop()
    assert mpmath.mp.dps >= 50
