"""A declarative registry of q-series identities with exact and certified checks.

Each identity lists two or more *members* that must agree.  In numeric mode
every member is a certified :class:`Enclosure` and the verdict is that all
members share a common point; in formal mode every member is a truncated
``q``-series at fixed rational parameters and the verdict is exact
coefficient equality up to ``q^M``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .enclosure import Enclosure, as_rat, common_intersection, upper_bits
from .errors import DomainError
from .functions import (
    _check_pole,
    eq_derivative_sum,
    eval_Eq,
    eval_F,
    eval_Lambda,
    eval_Lcal,
    eval_Lq,
    eval_ell,
    eval_pi_q,
    power_index,
    PI_Q_FORMS,
)
from .parallel import pmap
from .qnotation import phi_rs, pochhammer_infinite, qpoch_series
from .series import QSeries
from .summation import certified_sum, poly_geom_tail

NUMERIC_EPS = Fraction(1, 10**20)
SLOW_EPS = Fraction(1, 10**10)  # bilateral and triple sums
FORMAL_ORDER = 50

@dataclass(frozen=True)
class Identity:
    id: str
    title: str
    domain: str
    sample: Callable[[random.Random], dict]
    validate: Callable[[dict], None]
    numeric: Callable[[dict], list] | None = None  # -> list of (name, eps -> Enclosure)
    formal: Callable[[dict, int], list] | None = None  # -> list of (name, QSeries)
    formal_sample: Callable[[random.Random], dict] | None = None
    formal_validate: Callable[[dict], None] | None = None
    eps: Fraction = NUMERIC_EPS

    @property
    def modes(self) -> tuple:
        out = []
        if self.numeric is not None:
            out.append("numeric")
        if self.formal is not None:
            out.append("formal")
        return tuple(out)


@dataclass
class IdentityCase:
    id: str
    bindings: dict
    mode: str = "numeric"
    eps: Fraction | None = None
    M: int | None = None
    expected: str = "pass"


@dataclass
class CheckReport:
    id: str
    mode: str
    bindings: dict
    verdict: str
    values: list = field(default_factory=list)  # (name, Enclosure or QSeries)
    margin: Fraction | int | None = None
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    @property
    def lhs(self):
        return self.values[0][1] if self.values else None

    @property
    def rhs(self):
        return self.values[1][1] if len(self.values) > 1 else None

    def to_json(self) -> dict:
        out = {
            "id": self.id,
            "bindings": {k: str(v) for k, v in self.bindings.items()},
            "mode": self.mode,
            "verdict": self.verdict,
            "margin": None if self.margin is None else str(upper_bits(self.margin)),
        }
        if self.mode == "numeric":
            out["members"] = [
                {"name": n, "mid": str(e.mid), "rad": str(upper_bits(e.rad)), "decimal": e.decimal(30)} for n, e in self.values
            ]
        else:
            out["members"] = [{"name": n, "trunc_order": s.trunc_order} for n, s in self.values]
        if self.detail:
            out["detail"] = self.detail
        return out


# --- sampling helpers -------------------------------------------------------------


def rand_rat(rng: random.Random, lo: Fraction, hi: Fraction, max_den: int = 12, signed: bool = True) -> Fraction:
    """A rational with ``lo <= |r| <= hi`` and denominator at most ``max_den``."""
    lo, hi = Fraction(lo), Fraction(hi)
    for _ in range(1000):
        d = rng.randint(1, max_den)
        a = -(-lo * d // 1)  # ceil
        b = hi * d // 1
        if a <= b and b > 0:
            n = rng.randint(max(int(a), 1), int(b))
            r = Fraction(n, d)
            if lo <= r <= hi:
                return -r if signed and rng.random() < 0.5 else r
    raise RuntimeError("no rational found in range")


def rand_p(rng: random.Random, integer: bool = False) -> Fraction:
    if integer or rng.random() < 0.6:
        p = Fraction(rng.choice([2, 3, 4, 5, 7]))
    else:
        p = Fraction(rng.choice([5, 7, 9, 11]), rng.choice([2, 3]))
    return -p if rng.random() < 0.3 else p


def _in_q_powers(x: Fraction, p: Fraction) -> bool:
    """Whether ``x = p^k`` for some integer ``k``."""
    if x == 1:
        return True
    if x == 0:
        return False
    return power_index(x, p) is not None or power_index(1 / x, p) is not None


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise DomainError(msg)


def _rats(b: dict, *names):
    return [as_rat(b[n]) for n in names]


# --- shared numeric helpers ---------------------------------------------------------


def _ell(p, x, z):
    return lambda eps: eval_ell(p, x, z, eps)


def _scaled(c: Fraction, f):
    """``c * f`` with the inner tolerance shrunk accordingly."""
    c = as_rat(c)
    return lambda eps: f(eps / max(abs(c), Fraction(1))) * c


def _combine(fs: list, coeffs: list, const: Fraction = Fraction(0)):
    """``const + sum c_i f_i`` as one member."""

    def run(eps):
        k = len(fs)
        total = Enclosure.exact(const)
        for c, f in zip(coeffs, fs):
            c = as_rat(c)
            total = total + f(eps / (k * max(abs(c), Fraction(1)))) * c
        return total

    return run


def _prod_inf(params: list, q: Fraction, eps: Fraction, num: int) -> Enclosure:
    """``prod (a; q)_inf`` over the first ``num`` params divided by the rest."""
    out = Enclosure.exact(1)
    for i, a in enumerate(params):
        e = pochhammer_infinite(a, q, eps)
        out = out * e if i < num else out / e
    return out


def _tight(f, scale_guess: int = 40):
    """Wrap ``eps -> Enclosure`` whose error amplification is unknown:
    tighten the inner tolerance until the radius is at most ``eps``."""

    def run(eps):
        inner = eps / 2**scale_guess
        for _ in range(6):
            e = f(inner)
            if e.rad <= eps:
                return e
            inner /= 2**scale_guess
        return e

    return run


# --- q-harmonic series and E_q ------------------------------------------------------


def _sample_q(rng):
    return {"q": rand_rat(rng, Fraction(1, 10), Fraction(3, 4), 10)}


def _valid_q(b):
    (q,) = _rats(b, "q")
    _need(0 < abs(q) < 1, "needs 0 < |q| < 1")


def _clausen_rhs(q: Fraction):
    def run(eps):
        aq = abs(q)

        def terms():
            n = 1
            while True:
                qn = q**n
                yield q ** (n * n) * (1 + qn) / (1 - qn)
                n += 1

        def tail(i, t):
            n = i + 1
            # |term_{k}| <= |q|^{k^2} (1+|q|)/(1-|q|); ratio of bounds <= |q|^{2n+1}
            rho = aq ** (2 * n + 1)
            head = aq ** ((n + 1) ** 2) * (1 + aq) / (1 - aq)
            return head / (1 - rho)

        return certified_sum(terms(), tail, eps, what="accelerated q-harmonic sum").enclosure

    return run


def _clausen(b):
    (q,) = _rats(b, "q")
    return [("lambert", lambda eps: eval_Lq(q, 1, eps)), ("accelerated", _clausen_rhs(q))]


def _alternating_rhs(q: Fraction):
    def run(eps):
        aq = abs(q)

        def terms():
            n = 1
            poch = Fraction(1)
            while True:
                poch *= 1 - q**n
                yield (-1) ** (n - 1) * q ** (n * (n + 1) // 2) / ((1 - q**n) * poch)
                n += 1

        # lower bound for |(q;q)_n| over all n
        low = Fraction(1)
        for k in range(1, 200):
            low *= 1 - aq**k
        low -= aq**200 / (1 - aq)  # conservative lower bound for (|q|;|q|)_inf
        _need(low > 0, "alternating rewrite needs a smaller |q|")

        def tail(i, t):
            n = i + 1
            # |term_k| <= |q|^{k(k+1)/2} / ((1-|q|) low); ratio <= |q|^{n+2}
            head = aq ** ((n + 1) * (n + 2) // 2) / ((1 - aq) * low)
            return head / (1 - aq ** (n + 2))

        return certified_sum(terms(), tail, eps, what="alternating q-harmonic sum").enclosure

    return run


def _alternating(b):
    (q,) = _rats(b, "q")
    return [("lambert", lambda eps: eval_Lq(q, 1, eps)), ("alternating", _alternating_rhs(q))]


def _sample_qz(rng, zmax=Fraction(5)):
    b = _sample_q(rng)
    b["z"] = rand_rat(rng, Fraction(1, 10), zmax, 8)
    return b


def _valid_eq(b):
    _valid_q(b)


def _eq_sum_product(b):
    q, z = _rats(b, "q", "z")
    return [
        ("sum", lambda eps: eval_Eq(q, z, eps, "sum")),
        ("product", lambda eps: eval_Eq(q, z, eps, "product")),
    ]


def _sample_logderiv(rng):
    return {"q": rand_rat(rng, Fraction(1, 10), Fraction(3, 4), 10), "z": rand_rat(rng, Fraction(1, 10), Fraction(1), 10)}


def _valid_logderiv(b):
    q, z = _rats(b, "q", "z")
    _need(0 < abs(q) < 1 and abs(z) <= 1, "needs |q| < 1 and |z| <= 1")


def _logderiv(b):
    q, z = _rats(b, "q", "z")

    def rhs(eps):
        inner = eps * Fraction(1, 2**40)
        for _ in range(6):
            num = eq_derivative_sum(q, -z, inner).enclosure
            den = eval_Eq(q, -z, inner, "sum")
            out = num / den * z
            if out.rad <= eps:
                return out
            inner /= 2**40
        return out

    return [("q-logarithm", lambda eps: eval_Lq(q, z, eps)), ("log-derivative", rhs)]


# --- ell_p and relatives ---------------------------------------------------------------


def _sample_pxz(rng, frac=Fraction(3, 4)):
    p = rand_p(rng)
    lim = abs(p) * frac
    return {
        "p": p,
        "x": rand_rat(rng, Fraction(1, 10), lim, 8),
        "z": rand_rat(rng, Fraction(1, 10), lim, 8),
    }


def _valid_pxz_inside(b):
    p, x, z = _rats(b, "p", "x", "z")
    _need(abs(p) > 1, "needs |p| > 1")
    _need(abs(x) < abs(p) and abs(z) < abs(p), "needs |x|, |z| < |p|")
    _check_pole(x, p)
    _check_pole(z, p, name="z")


def _symmetry(b):
    p, x, z = _rats(b, "p", "x", "z")
    return [("ell(x, z)", _ell(p, x, z)), ("ell(z, x)", _ell(p, z, x))]


def _valid_functional(b):
    p, x, z = _rats(b, "p", "x", "z")
    _need(abs(p) > 1 and abs(z) < abs(p), "needs |p| > 1 and |z| < |p|")
    _check_pole(x, p, start=0)


def _functional(b):
    p, x, z = _rats(b, "p", "x", "z")
    return [
        ("ell(x, z)", _ell(p, x, z)),
        ("xz/(p-x) + z ell(x/p, z)", _combine([_ell(p, x / p, z)], [z], x * z / (p - x))),
    ]


def _double_sum(b):
    p, x, z = _rats(b, "p", "x", "z")
    return [("series", _ell(p, x, z)), ("double", lambda eps: eval_ell(p, x, z, eps, "double"))]


def _sample_p(rng):
    return {"p": rand_p(rng)}


def _valid_p(b):
    (p,) = _rats(b, "p")
    _need(abs(p) > 1, "needs |p| > 1")


def _pi_chain(b):
    (p,) = _rats(b, "p")
    return [(form, (lambda f: lambda eps: eval_pi_q(p, eps, f))(form)) for form in PI_Q_FORMS]


# --- the hypergeometric function F_p and its ell_p evaluation ----------------------------


def _sample_unit_xz(rng):
    return {
        "p": rand_p(rng),
        "x": rand_rat(rng, Fraction(1, 10), Fraction(9, 10), 10),
        "z": rand_rat(rng, Fraction(1, 10), Fraction(9, 10), 10),
    }


def _valid_unit_xz(b):
    p, x, z = _rats(b, "p", "x", "z")
    _need(abs(p) > 1, "needs |p| > 1")
    # |x| < 1 keeps x clear of the poles {1, p, p^2, ...} of both sides
    _need(0 < abs(x) < 1 and 0 < abs(z) < 1, "needs 0 < |x|, |z| < 1")


def _F_ell(b):
    p, x, z = _rats(b, "p", "x", "z")
    c = (1 - x) * (1 - z) / (p * x * z)
    return [
        ("F(x, z, xz)", lambda eps: eval_F(p, x, z, x * z, eps)),
        ("(1-x)(1-z)/(pxz) ell(px, pz)", _scaled(c, _ell(p, p * x, p * z))),
    ]


def _F_ell_formal(b, M):
    """Both sides as power series in ``q = 1/p`` at fixed ``x, z``."""
    x, z = _rats(b, "x", "z")
    # F_p(x, z, xz) = sum_n (q;q)_n / (qx, qz; q)_n q^{n(n-1)/2} (-xz)^n
    lhs = QSeries.zero(M)
    n = 0
    while n * (n - 1) // 2 <= M:
        term = qpoch_series(1, 1, n, M) / (qpoch_series(x, 1, n, M) * qpoch_series(z, 1, n, M))
        lhs = lhs + term.shift(n * (n - 1) // 2).scale((-x * z) ** n)
        n += 1
    # (1-x)(1-z) sum_{m>=0} z^m / (1 - q^m x), expanded by divisor sums
    coeffs = [1 / (1 - x) + z / (1 - z)]
    for k in range(1, M + 1):
        coeffs.append(sum((z**d * x ** (k // d) for d in range(1, k + 1) if k % d == 0), Fraction(0)))
    rhs = QSeries(coeffs, M).scale((1 - x) * (1 - z))
    return [("F(x, z, xz)", lhs), ("(1-x)(1-z) sum z^m/(1-q^m x)", rhs)]


def _sample_unit_xz_formal(rng):
    b = _sample_unit_xz(rng)
    b.pop("p")
    return b


def _valid_unit_xz_formal(b):
    x, z = _rats(b, "x", "z")
    _need(0 < abs(x) < 1 and 0 < abs(z) < 1, "needs 0 < |x|, |z| < 1")


# --- basic hypergeometric transformations -------------------------------------------


def _sample_hyp(rng):
    return {
        "q": rand_rat(rng, Fraction(1, 10), Fraction(1, 2), 10),
        "a": rand_rat(rng, Fraction(2), Fraction(4), 4),
        "b": rand_rat(rng, Fraction(3, 2), Fraction(3), 4),
        "c": rand_rat(rng, Fraction(3, 2), Fraction(3), 4),
        "d": rand_rat(rng, Fraction(1, 10), Fraction(1, 2), 10),
        "e": rand_rat(rng, Fraction(1, 10), Fraction(1, 2), 10),
    }


def _lower_ok(b: Fraction, q: Fraction) -> bool:
    """``(b; q)_n`` never vanishes: ``b`` is not ``q^{-m}``, ``m >= 0``."""
    return not (b == 1 or (b != 0 and power_index(b, 1 / q) is not None))


def _valid_hyp(names):
    def check(b):
        q = as_rat(b["q"])
        _need(0 < abs(q) < 1, "needs 0 < |q| < 1")
        a, d, e = _rats(b, "a", "d", "e")
        _need(a != 0, "a must be nonzero")
        _need(abs(e / a) < 1, "needs |e/a| < 1")
        for n in ("d", "e"):
            _need(_lower_ok(as_rat(b[n]), q), f"{n} must avoid q^(-m)")
        if "c" in names:
            c = as_rat(b["c"])
            _need(c != 0, "c must be nonzero")
            if "b" in names:
                bb = as_rat(b["b"])
                _need(bb != 0, "b must be nonzero")
                _need(abs(d * e / (a * bb * c)) < 1, "needs |de/(abc)| < 1")
                _need(_lower_ok(d * e / (bb * c), q), "de/(bc) must avoid q^(-m)")
                _need(_lower_ok(d * e / (a * bb * c), q), "de/(abc) must avoid q^(-m)")

    return check


def _phi(up, low, q, zz):
    return lambda eps: phi_rs(up, low, q, zz, eps)


def _prod_times(params, num, q, f):
    """``prod(params[:num]; q)_inf / prod(params[num:]; q)_inf * f``."""

    def run(eps):
        return _prod_inf(params, q, eps, num) * f(eps)

    return _tight(run, 20)


def _phi32(b):
    q, a, bb, c, d, e = _rats(b, "q", "a", "b", "c", "d", "e")
    lhs = _phi([a, bb, c], [d, e], q, d * e / (a * bb * c))
    rhs = _prod_times(
        [e / a, d * e / (bb * c), e, d * e / (a * bb * c)],
        2,
        q,
        _phi([a, d / bb, d / c], [d, d * e / (bb * c)], q, e / a),
    )
    return [("3phi2 left", lhs), ("products * 3phi2 right", rhs)]


def _phi22(b):
    q, a, c, d, e = _rats(b, "q", "a", "c", "d", "e")
    lhs = _phi([a, c], [d, e], q, d * e / (a * c))
    rhs = _prod_times([e / a, e], 1, q, _phi([a, d / c], [d], q, e / a))
    return [("2phi2", lhs), ("products * 2phi1", rhs)]


def _phi12(b):
    q, a, d, e = _rats(b, "q", "a", "d", "e")
    lhs = _phi([a], [d, e], q, d * e / a)
    rhs = _prod_times([e / a, e], 1, q, _phi([a, 0], [d], q, e / a))
    return [("1phi2", lhs), ("products * 2phi1", rhs)]


# formal versions: parameters a, b, c, d are constants, e = eps * q


def _sample_hyp_formal(rng):
    return {
        "a": rand_rat(rng, Fraction(1, 3), Fraction(3), 4),
        "b": rand_rat(rng, Fraction(1, 3), Fraction(3), 4),
        "c": rand_rat(rng, Fraction(1, 3), Fraction(3), 4),
        "d": rand_rat(rng, Fraction(1, 5), Fraction(3), 5),
        "e_over_q": rand_rat(rng, Fraction(1, 5), Fraction(3), 5),
    }


def _valid_hyp_formal(b):
    a, bb, c, d, eq = _rats(b, "a", "b", "c", "d", "e_over_q")
    _need(0 not in (a, bb, c, eq), "a, b, c and e/q must be nonzero")
    _need(d != 1 and d != 0, "d must differ from 0 and 1 so (d;q)_n is a unit")


def formal_phi(upper: list, lower: list, zz: tuple, excess: int, M: int) -> QSeries:
    """``sum_n prod (a;q)_n / ((q;q)_n prod (b;q)_n) ((-1)^n q^{n(n-1)/2})^excess zz^n``.

    Parameters are pairs ``(c, k)`` standing for ``c q^k``; lower parameters
    with ``k = 0`` need ``c != 1``.  The ``n``-th term has order at least
    ``excess * n(n-1)/2 + k_zz * n``, which must grow.
    """
    cz, kz = zz
    if excess <= 0 and kz <= 0:
        raise DomainError("formal sum does not converge in q")
    total = QSeries.zero(M)
    num = QSeries.one(M)
    den = QSeries.one(M)
    n = 0
    while excess * n * (n - 1) // 2 + kz * n <= M:
        if n > 0:
            for c, k in upper:
                num = num * qpoch_factor(c, k + n - 1, M)
            den = den * qpoch_factor(1, n, M)
            for c, k in lower:
                den = den * qpoch_factor(c, k + n - 1, M)
        sign = (-1) ** (n * excess)
        term = (num / den).shift(excess * n * (n - 1) // 2 + kz * n).scale(sign * cz**n)
        total = total + term
        n += 1
    return total


def qpoch_factor(c: Fraction, k: int, M: int) -> QSeries:
    """``1 - c q^k`` as a series."""
    if k == 0:
        return QSeries.constant(1 - c, M)
    return QSeries.one(M).mul_binomial(c, k)


def formal_prod_inf(c: Fraction, k: int, M: int) -> QSeries:
    """``(c q^k; q)_inf`` modulo ``q^{M+1}`` (``k >= 1``)."""
    if k < 1:
        raise DomainError("formal infinite product needs a positive q-power")
    return qpoch_series(c, k, M + 1, M)


def _phi32_formal(b, M):
    a, bb, c, d, eo = _rats(b, "a", "b", "c", "d", "e_over_q")
    lhs = formal_phi([(a, 0), (bb, 0), (c, 0)], [(d, 0), (eo, 1)], (d * eo / (a * bb * c), 1), 0, M)
    prods = (formal_prod_inf(eo / a, 1, M) * formal_prod_inf(d * eo / (bb * c), 1, M)) / (
        formal_prod_inf(eo, 1, M) * formal_prod_inf(d * eo / (a * bb * c), 1, M)
    )
    rhs = prods * formal_phi([(a, 0), (d / bb, 0), (d / c, 0)], [(d, 0), (d * eo / (bb * c), 1)], (eo / a, 1), 0, M)
    return [("3phi2 left", lhs), ("products * 3phi2 right", rhs)]


def _phi22_formal(b, M):
    a, c, d, eo = _rats(b, "a", "c", "d", "e_over_q")
    lhs = formal_phi([(a, 0), (c, 0)], [(d, 0), (eo, 1)], (d * eo / (a * c), 1), 1, M)
    prods = formal_prod_inf(eo / a, 1, M) / formal_prod_inf(eo, 1, M)
    rhs = prods * formal_phi([(a, 0), (d / c, 0)], [(d, 0)], (eo / a, 1), 0, M)
    return [("2phi2", lhs), ("products * 2phi1", rhs)]


def _phi12_formal(b, M):
    a, d, eo = _rats(b, "a", "d", "e_over_q")
    lhs = formal_phi([(a, 0)], [(d, 0), (eo, 1)], (d * eo / a, 1), 2, M)
    prods = formal_prod_inf(eo / a, 1, M) / formal_prod_inf(eo, 1, M)
    rhs = prods * formal_phi([(a, 0), (0, 0)], [(d, 0)], (eo / a, 1), 0, M)
    return [("1phi2", lhs), ("products * 2phi1", rhs)]


# the t-series transformation (1-t) sum t^n/(qb;q)_n = sum q^{n^2} (bt)^n/(qb,qt;q)_n


def _sample_tseries(rng):
    return {
        "q": rand_rat(rng, Fraction(1, 10), Fraction(3, 4), 10),
        "b": rand_rat(rng, Fraction(1, 10), Fraction(3), 6),
        "t": rand_rat(rng, Fraction(1, 10), Fraction(9, 10), 10),
    }


def _valid_tseries(b):
    q, bb, t = _rats(b, "q", "b", "t")
    _need(0 < abs(q) < 1 and abs(t) < 1, "needs |q| < 1 and |t| < 1")
    _need(_lower_ok(q * bb, q) and _lower_ok(q * t, q), "qb and qt must avoid q^(-m)")


def _tseries(b):
    q, bb, t = _rats(b, "q", "b", "t")
    lhs = _scaled(1 - t, _phi([q, 0], [q * bb], q, t))
    rhs = _phi([q], [q * bb, q * t], q, q * bb * t)
    return [("(1-t) sum t^n/(qb;q)_n", lhs), ("sum q^(n^2) (bt)^n/(qb,qt;q)_n", rhs)]


def _sample_tseries_formal(rng):
    b = _sample_tseries(rng)
    b.pop("q")
    return b


def _valid_tseries_formal(b):
    bb, t = _rats(b, "b", "t")
    _need(abs(t) < 1, "needs |t| < 1")


def _tseries_formal(b, M):
    """For ``n > M``, ``(qb;q)_n`` agrees with ``(qb;q)_M`` modulo ``q^{M+1}``,
    so the left tail sums in closed form to ``t^{M+1}/(1-t) / (qb;q)_M``."""
    bb, t = _rats(b, "b", "t")
    lhs = QSeries.zero(M)
    poch = QSeries.one(M)
    for n in range(M + 1):
        if n > 0:
            poch = poch.mul_binomial(bb, n)
        lhs = lhs + poch.invert().scale(t**n)
    lhs = lhs + poch.invert().scale(t ** (M + 1) / (1 - t))
    lhs = lhs.scale(1 - t)
    rhs = QSeries.zero(M)
    n = 0
    while n * n <= M:
        den = qpoch_series(bb, 1, n, M) * qpoch_series(t, 1, n, M)
        rhs = rhs + den.invert().shift(n * n).scale((bb * t) ** n)
        n += 1
    return [("(1-t) sum t^n/(qb;q)_n", lhs), ("sum q^(n^2) (bt)^n/(qb,qt;q)_n", rhs)]


# the a = c = q specialization: four expressions for (1-x) sum z^n/(1-q^n x)


def _sample_chain(rng):
    b = _sample_unit_xz(rng)
    b["x"] = rand_rat(rng, Fraction(1, 10), Fraction(3), 8)
    return b


def _valid_chain(b):
    p, x, z = _rats(b, "p", "x", "z")
    _need(abs(p) > 1 and 0 < abs(z) < 1 and x != 0, "needs |p| > 1, 0 < |z| < 1, x != 0")
    _need(x != 1 and power_index(x, p) is None, "x must avoid p^m, m >= 0")


def _chain(b):
    p, x, z = _rats(b, "p", "x", "z")
    q = 1 / p
    # sum_{n>=1} z^n/(1-q^n x) = ell_p(x, pz)/x
    direct = _combine([_ell(p, x, p * z)], [(1 - x) / x], Fraction(1))
    phi21 = _phi([q, x], [q * x], q, z)
    phi22 = _prod_times([q * z, z], 1, q, _phi([q, q], [q * x, q * z], q, x * z))
    fsum = _scaled(1 / (1 - z), lambda eps: eval_F(p, x, z, x * z, eps))
    return [
        ("(1-x) sum z^n/(1-q^n x)", direct),
        ("2phi1(q, x; qx; q, z)", phi21),
        ("(qz;q)_inf/(z;q)_inf 2phi2", phi22),
        ("sum (q;q)_n q^(n(n-1)/2) (-xz)^n / ((1-z)(qx,qz;q)_n)", fsum),
    ]


# --- L_p(x, y, z) ------------------------------------------------------------------------


def _sample_pxyz(rng, frac=Fraction(3, 4)):
    b = _sample_pxz(rng, frac)
    b["y"] = rand_rat(rng, Fraction(1, 10), abs(b["p"]) * frac, 8)
    return b


def _valid_pxyz(b):
    p, x, y, z = _rats(b, "p", "x", "y", "z")
    _need(abs(p) > 1, "needs |p| > 1")
    _need(max(abs(x), abs(y), abs(z)) < abs(p), "needs |x|, |y|, |z| < |p|")


def _lcal_difference(b):
    p, x, y, z = _rats(b, "p", "x", "y", "z")
    _need(x != y, "the difference quotient needs x != y")
    return [
        ("series", lambda eps: eval_Lcal(p, x, y, z, eps, "series")),
        ("(ell(x, z) - ell(y, z))/(x - y)", _combine([_ell(p, x, z), _ell(p, y, z)], [1 / (x - y), -1 / (x - y)])),
    ]


def _lcal_cyclic(b):
    p, x, y, z = _rats(b, "p", "x", "y", "z")

    def L(a, bb, c):
        return lambda eps: eval_Lcal(p, a, bb, c, eps, "series")

    lhs = _combine([L(x, y, z), L(y, z, x), L(z, x, y)], [x - y, y - z, z - x])
    return [("cyclic sum", lhs), ("zero", lambda eps: Enclosure.exact(0))]


def _sample_diag(rng):
    b = _sample_pxz(rng)
    return b


def _valid_diag(b):
    p, x, z = _rats(b, "p", "x", "z")
    _need(abs(p) > 1 and 0 < abs(x) < abs(p) and abs(z) < abs(p), "needs |p| > 1, 0 < |x| < |p|, |z| < |p|")
    _check_pole(z, p, name="z")


def _lcal_diag(b):
    p, x, z = _rats(b, "p", "x", "z")
    return [
        ("sum p^n z^n/(p^n - x)^2", lambda eps: eval_Lcal(p, x, x, z, eps, "series")),
        ("(z/x) sum n x^n/(p^n - z)", lambda eps: eval_Lcal(p, x, x, z, eps, "e03")),
    ]


def _sample_p_int(rng):
    return {"p": rand_p(rng)}


def _qzeta_one(b):
    (p,) = _rats(b, "p")
    q = 1 / p

    def divisor_form(eps):
        # zeta_q(1) = sum d(n) q^n with d(n) <= n
        aq = abs(q)

        def terms():
            n = 1
            while True:
                yield _divisors(n) * q**n
                n += 1

        return certified_sum(terms(), lambda i, t: poly_geom_tail(aq, i + 1, 1), eps, what="divisor sum").enclosure

    return [("ell_p(1, 1)", _ell(p, 1, 1)), ("sum d(n) q^n", divisor_form)]


def _qzeta_two(b):
    (p,) = _rats(b, "p")
    q = 1 / p

    def sq_series(eps):
        # zeta_q(2) = sum n q^n/(1 - q^n)
        aq = abs(q)

        def terms():
            n = 1
            while True:
                yield n * q**n / (1 - q**n)
                n += 1

        def tail(i, t):
            n = i + 1
            b_ = poly_geom_tail(aq, n, 1)
            return None if b_ is None else b_ / (1 - aq ** (n + 1))

        return certified_sum(terms(), tail, eps, what="q-zeta(2) sum").enclosure

    return [
        ("L_p(1, 1, 1)", lambda eps: eval_Lcal(p, 1, 1, 1, eps, "series")),
        ("sum n/(p^n - 1)", lambda eps: eval_Lcal(p, 1, 1, 1, eps, "e03")),
        ("sum n q^n/(1 - q^n)", sq_series),
    ]


def _divisors(n: int) -> int:
    count = 0
    k = 1
    while k * k <= n:
        if n % k == 0:
            count += 1 if k * k == n else 2
        k += 1
    return count


def _direct_sum(p: Fraction, term: Callable[[Fraction], Fraction], ratio_bound: Fraction, what: str):
    """``sum_{n>=1} term(p^n)`` where ``|term(p^n)| <= C |p|^{-n}`` past a point."""

    def run(eps):
        def terms():
            pn = p
            while True:
                yield term(pn)
                pn *= p

        def tail(i, t):
            # with |p^n| >= 4: |term_{n+1}| / |term_n| <= ratio_bound
            n = i + 1
            if abs(p) ** n < 4:
                return None
            return abs(t) * ratio_bound / (1 - ratio_bound)

        return certified_sum(terms(), tail, eps, what=what).enclosure

    return run


def _special_one_minus_one(b):
    (p,) = _rats(b, "p")
    ap = abs(p)
    # p^n/(p^{2n}-1): ratio of consecutive terms <= (1/|p|) (1 + 2/|p^n|^2)... bounded by 2/|p| once |p^n| >= 4
    direct = _direct_sum(p, lambda pn: pn / (pn * pn - 1), Fraction(2) / ap if ap > 2 else Fraction(3, 4), "p^n/(p^2n-1)")
    return [
        ("L_p(1, -1, 1)", lambda eps: eval_Lcal(p, 1, -1, 1, eps, "series")),
        ("sum p^n/(p^2n - 1)", direct),
        ("(ell(1, 1) - ell(-1, 1))/2", _combine([_ell(p, 1, 1), _ell(p, -1, 1)], [Fraction(1, 2), Fraction(-1, 2)])),
    ]


def _pi_quarter(b):
    (p,) = _rats(b, "p")
    ap = abs(p)
    direct = _direct_sum(p, lambda pn: pn / (pn * pn + 1), Fraction(2) / ap if ap > 2 else Fraction(3, 4), "p^n/(p^2n+1)")
    P = p**4
    return [
        ("sum p^n/(p^2n + 1)", direct),
        ("(pi_q - 1)/4", lambda eps: (eval_pi_q(p, eps * 4, "theta") - 1) * Fraction(1, 4)),
        ("ell_{p^4}(1, p^3) - ell_{p^4}(1, p)", _combine([_ell(P, 1, p**3), _ell(P, 1, p)], [1, -1])),
    ]


def _cube_root_sum(b):
    (p,) = _rats(b, "p")
    ap = abs(p)
    direct = _direct_sum(
        p, lambda pn: pn / (pn * pn + pn + 1), Fraction(2) / ap if ap > 2 else Fraction(3, 4), "p^n/(p^2n+p^n+1)"
    )
    P = p**3
    return [
        ("sum p^n/(p^2n + p^n + 1)", direct),
        ("ell_{p^3}(1, p^2) - ell_{p^3}(1, p)", _combine([_ell(P, 1, p**2), _ell(P, 1, p)], [1, -1])),
    ]


def _minus_one_diag(b):
    (p,) = _rats(b, "p")
    return [
        ("L_p(-1, -1, 1)", lambda eps: eval_Lcal(p, -1, -1, 1, eps, "series")),
        (
            "zeta_q(2) - 4 zeta_{q^2}(2)",
            _combine(
                [lambda eps: eval_Lcal(p, 1, 1, 1, eps, "series"), lambda eps: eval_Lcal(p * p, 1, 1, 1, eps, "series")],
                [1, -4],
            ),
        ),
    ]


def _valid_special(b):
    (p,) = _rats(b, "p")
    _need(abs(p) > 1, "needs |p| > 1")
    _need(abs(p) != 1 and p != -1, "p must not be -1")


# --- bilateral identities -------------------------------------------------------------


def _sample_kronecker(rng):
    p = Fraction(rng.choice([2, 3, 4, 5, -2, -3]))
    q = 1 / p
    z = rand_rat(rng, abs(q) * Fraction(5, 4), Fraction(7, 8), 12)
    while True:
        x = rand_rat(rng, Fraction(1, 5), Fraction(3), 8)
        if not _in_q_powers(x, p) and not _in_q_powers(x * z, p):
            break
    return {"p": p, "x": x, "z": z}


def _valid_kronecker(b):
    p, x, z = _rats(b, "p", "x", "z")
    q = 1 / p
    _need(abs(p) > 1, "needs |p| > 1")
    _need(abs(q) < abs(z) < 1, "needs |q| < |z| < 1")
    _need(x != 0 and not _in_q_powers(x, p), "x must avoid the powers of q")


def _bilateral_direct(p, x, z):
    q = 1 / p
    aq, ax, az = abs(q), abs(x), abs(z)

    def run(eps):
        def pos_terms():
            n = 0
            qn = Fraction(1)
            while True:
                yield z**n / (1 - qn * x)
                n += 1
                qn *= q

        def pos_tail(i, t):
            # |1 - q^n x| >= 1/2 once |q^n x| <= 1/2
            n = i + 1
            if aq**n * ax > Fraction(1, 2):
                return None
            return 2 * az**n / (1 - az)

        def neg_terms():
            k = 1
            while True:
                yield z ** (-k) / (1 - x / q**k)
                k += 1

        def neg_tail(i, t):
            # z^{-k}/(1 - q^{-k} x) = -(q/z)^k/(x (1 - q^k/x)), |q^k/x| <= 1/2
            k = i + 2
            if aq**k > ax / 2:
                return None
            u = aq / az
            return 2 * u**k / (ax * (1 - u))

        pos = certified_sum(pos_terms(), pos_tail, eps / 2, what="bilateral sum, n >= 0").enclosure
        neg = certified_sum(neg_terms(), neg_tail, eps / 2, what="bilateral sum, n < 0").enclosure
        return pos + neg

    return run


def _kronecker(b):
    p, x, z = _rats(b, "p", "x", "z")
    q = 1 / p
    # sum_{n>=1} z^n/(1-q^n x) = ell_p(x, pz)/x and sum_{n<=0} z^n/(1-q^n x) = -z ell_p(p/x, 1/z)
    ell_form = _combine([_ell(p, x, p * z), _ell(p, p / x, 1 / z)], [1 / x, -z])

    def product(eps):
        return _prod_inf([q, q, x * z, q / (x * z), x, q / x, z, q / z], q, eps, 4)

    return [
        ("ell_p(x, z/q)/x - z ell_p(1/(qx), 1/z)", ell_form),
        ("sum over n in Z of z^n/(1 - q^n x)", _bilateral_direct(p, x, z)),
        ("(q, q, xz, q/(xz); q)_inf / (x, q/x, z, q/z; q)_inf", _tight(product, 20)),
    ]


def _sample_box(rng):
    p = Fraction(rng.choice([2, 3, 4, -2, -3]))
    aq = 1 / abs(p)
    lo, hi = aq * Fraction(5, 4), Fraction(4, 5)
    return {"p": p, **{k: rand_rat(rng, lo, hi, 12) for k in ("x", "y", "z")}}


def _valid_box(b):
    p, x, y, z = _rats(b, "p", "x", "y", "z")
    aq = 1 / abs(p)
    _need(abs(p) > 1, "needs |p| > 1")
    for v in (x, y, z):
        _need(aq < abs(v) < 1, "needs |q| < |x|, |y|, |z| < 1")


def _mortenson_double(p, x, y, z):
    """``(sum_{m,n>=0} + sum_{m,n<0}) q^{mn} y^m z^n / (1 - q^{m+n} x)``.

    Summing the triple side over ``l < 0`` gives ``-1/(1 - q^{m+n} x)`` for
    each ``m, n < 0``, so the negative double part enters with a plus sign
    against the triple side's minus.
    """
    q = 1 / p
    aq, ax = abs(q), abs(x)
    v = max(abs(y), abs(z))
    u = max(aq / abs(y), aq / abs(z))

    def edge(c):
        # sum_{n>=0} c^n/(1 - q^n x); |1 - q^n x| >= 1 - |x|
        def terms():
            n = 0
            qn = Fraction(1)
            while True:
                yield c**n / (1 - qn * x)
                n += 1
                qn *= q

        ac = abs(c)
        return terms, lambda i, t: ac ** (i + 1) / ((1 - ac) * (1 - ax))

    def interior():
        s = 2
        while True:
            tot = Fraction(0)
            qs = q**s
            for m in range(1, s):
                n = s - m
                tot += q ** (m * n) * y**m * z**n / (1 - qs * x)
            yield tot
            s += 1

    def interior_tail(i, t):
        # q^{mn} <= |q|^{m+n-1}; shell s has s-1 terms of size <= |q|^{s-1} v^s/(1-|x|)
        b_ = poly_geom_tail(aq * v, i + 2, 1)
        return None if b_ is None else b_ / (aq * (1 - ax))

    def negative():
        # m = -a, n = -b: -(1/x) q^{ab} (q/y)^a (q/z)^b / (1 - q^{a+b}/x)
        s = 2
        while True:
            tot = Fraction(0)
            qs = q**s
            for a in range(1, s):
                bb = s - a
                tot += q ** (a * bb) * y ** (-a) * z ** (-bb) / (1 - x / qs)
            yield tot
            s += 1

    def negative_tail(i, t):
        # |term| <= |q|^{ab} u^s / (|x| (1 - |q|)) and ab >= s - 1
        b_ = poly_geom_tail(aq * u, i + 2, 1)
        return None if b_ is None else b_ / (aq * ax * (1 - aq))

    def run(eps):
        e = eps / 4
        t1, tl1 = edge(z)
        t2, tl2 = edge(y)
        a1 = certified_sum(t1(), tl1, e, what="double Lambert edge").enclosure
        a2 = certified_sum(t2(), tl2, e, what="double Lambert edge").enclosure - 1 / (1 - x)  # (0, 0) counted once
        a3 = certified_sum(interior(), interior_tail, e, what="double Lambert interior").enclosure
        a4 = certified_sum(negative(), negative_tail, e, what="double Lambert negative part").enclosure
        return a1 + a2 + a3 + a4

    return run


def _mortenson_triple(p, x, y, z):
    """``(sum_{l,m,n>=0} - sum_{l,m,n<0}) q^{lm+mn+nl} x^l y^m z^n``."""
    q = 1 / p
    aq = abs(q)
    v = max(abs(x), abs(y), abs(z))
    mn = min(abs(x), abs(y), abs(z))

    def axes():
        k = 0
        while True:
            yield Fraction(1) if k == 0 else x**k + y**k + z**k
            k += 1

    def axes_tail(i, t):
        return 3 * v ** (i + 1) / (1 - v)

    def off_axis():
        s = 2
        while True:
            tot = Fraction(0)
            for l in range(s + 1):
                for m in range(s + 1 - l):
                    n = s - l - m
                    if (l > 0) + (m > 0) + (n > 0) >= 2:
                        tot += q ** (l * m + m * n + n * l) * x**l * y**m * z**n
            yield tot
            s += 1

    def off_axis_tail(i, t):
        # two or more positive indices: lm+mn+nl >= s-1; shell has <= 3 s^2 terms
        b_ = poly_geom_tail(aq * v, i + 2, 2)
        return None if b_ is None else 3 * b_ / aq

    def negative():
        s = 3
        while True:
            tot = Fraction(0)
            for a in range(1, s - 1):
                for bb in range(1, s - a):
                    c = s - a - bb
                    tot += q ** (a * bb + bb * c + c * a) * x ** (-a) * y ** (-bb) * z ** (-c)
            yield tot
            s += 1

    def negative_tail(i, t):
        # ab+bc+ca >= 2s-3, so |term| <= |q|^{-3} (q^2/min)^s; shell has <= s^2/2 terms
        w = aq * aq / mn
        b_ = poly_geom_tail(w, i + 3, 2)
        return None if b_ is None else b_ / (2 * aq**3)

    def run(eps):
        e = eps / 3
        a1 = certified_sum(axes(), axes_tail, e, what="triple sum axes").enclosure
        a2 = certified_sum(off_axis(), off_axis_tail, e, what="triple sum").enclosure
        a3 = certified_sum(negative(), negative_tail, e, what="triple sum negative part").enclosure
        return a1 + a2 - a3

    return run


def _mortenson(b):
    p, x, y, z = _rats(b, "p", "x", "y", "z")
    return [
        ("(sum_{m,n>=0} + sum_{m,n<0}) double Lambert series", _mortenson_double(p, x, y, z)),
        ("(sum_{l,m,n>=0} - sum_{l,m,n<0}) triple sum", _mortenson_triple(p, x, y, z)),
    ]


def _sample_lambda(rng):
    p = rand_p(rng)
    lim = abs(p) / 2
    return {"p": p, **{k: rand_rat(rng, Fraction(1, 10), lim, 8) for k in ("x", "y", "z")}}


def _valid_lambda(b):
    p, x, y, z = _rats(b, "p", "x", "y", "z")
    _need(abs(p) > 1, "needs |p| > 1")
    _need(max(abs(x), abs(y), abs(z)) < abs(p), "needs |x|, |y|, |z| < |p|")
    _check_pole(x, p, start=2)


def _lambda(b):
    p, x, y, z = _rats(b, "p", "x", "y", "z")
    return [
        ("triple", lambda eps: eval_Lambda(p, x, y, z, eps, "triple")),
        ("double", lambda eps: eval_Lambda(p, x, y, z, eps, "double")),
    ]


# --- registry ---------------------------------------------------------------------------

REGISTRY: dict[str, Identity] = {}


def _register(*items: Identity) -> None:
    for item in items:
        REGISTRY[item.id] = item


_register(
    Identity("clausen", "sum q^n/(1-q^n) = sum q^(n^2) (1+q^n)/(1-q^n)", "0 < |q| < 1",
             _sample_q, _valid_q, _clausen),
    Identity("eq_sum_product", "E_q(z): power series = prod (1 + q^n z)", "|q| < 1",
             _sample_qz, _valid_eq, _eq_sum_product),
    Identity("lq_log_derivative", "L_q(z) = z E_q'(-z)/E_q(-z)", "|q| < 1, |z| <= 1",
             _sample_logderiv, _valid_logderiv, _logderiv),
    Identity("ell_symmetry", "ell_p(x, z) = ell_p(z, x)", "|p| > 1, |x|, |z| < |p|",
             _sample_pxz, _valid_pxz_inside, _symmetry),
    Identity("ell_functional", "ell_p(x, z) = xz/(p-x) + z ell_p(x/p, z)", "|p| > 1, |z| < |p|, x off poles",
             _sample_pxz, _valid_functional, _functional),
    Identity("ell_double_sum", "ell_p(x, z) = sum_{m,n>0} q^(mn) x^m z^n", "|p| > 1, |x|, |z| < |p|",
             _sample_pxz, _valid_pxz_inside, _double_sum),
    Identity("pi_q_chain", "four representations of pi_q agree", "|p| > 1",
             _sample_p, _valid_p, _pi_chain),
    Identity("qharmonic_alternating", "sum q^n/(1-q^n) = sum (-1)^(n-1) q^(n(n+1)/2)/((1-q^n)(q;q)_n)",
             "0 < |q| < 1", _sample_q, _valid_q, _alternating),
    Identity("F_ell", "F_p(x, z, xz) = (1-x)(1-z)/(pxz) ell_p(px, pz)", "|p| > 1, 0 < |x|, |z| < 1",
             _sample_unit_xz, _valid_unit_xz, _F_ell, _F_ell_formal, _sample_unit_xz_formal, _valid_unit_xz_formal),
    Identity("t_series", "(1-t) sum t^n/(qb;q)_n = sum q^(n^2) (bt)^n/(qb,qt;q)_n", "|q| < 1, |t| < 1",
             _sample_tseries, _valid_tseries, _tseries, _tseries_formal, _sample_tseries_formal, _valid_tseries_formal),
    Identity("phi32_transform", "3phi2(a,b,c;d,e;q,de/(abc)) = products * 3phi2(a,d/b,d/c;d,de/(bc);q,e/a)",
             "|q| < 1, |de/(abc)| < 1, |e/a| < 1", _sample_hyp, _valid_hyp("abcde"), _phi32, _phi32_formal,
             _sample_hyp_formal, _valid_hyp_formal),
    Identity("phi22_phi21", "2phi2(a,c;d,e;q,de/(ac)) = (e/a;q)_inf/(e;q)_inf 2phi1(a,d/c;d;q,e/a)",
             "|q| < 1, |e/a| < 1", _sample_hyp, _valid_hyp("acde"), _phi22, _phi22_formal, _sample_hyp_formal, _valid_hyp_formal),
    Identity("phi12_phi21", "1phi2(a;d,e;q,de/a) = (e/a;q)_inf/(e;q)_inf 2phi1(a,0;d;q,e/a)",
             "|q| < 1, |e/a| < 1", _sample_hyp, _valid_hyp("ade"), _phi12, _phi12_formal, _sample_hyp_formal, _valid_hyp_formal),
    Identity("ell_phi_chain", "(1-x) sum z^n/(1-q^n x) = 2phi1 = products * 2phi2 = F-type sum/(1-z)",
             "|p| > 1, 0 < |z| < 1, x off q-powers", _sample_chain, _valid_chain, _chain),
    Identity("Lcal_difference", "L_p(x, y, z) = (ell_p(x, z) - ell_p(y, z))/(x - y)", "|x|, |y|, |z| < |p|, x != y",
             _sample_pxyz, _valid_pxyz, _lcal_difference),
    Identity("Lcal_cyclic", "(x-y) L_p(x,y,z) + (y-z) L_p(y,z,x) + (z-x) L_p(z,x,y) = 0", "|x|, |y|, |z| < |p|",
             _sample_pxyz, _valid_pxyz, _lcal_cyclic),
    Identity("Lcal_diagonal", "sum p^n z^n/(p^n-x)^2 = (z/x) sum n x^n/(p^n-z)", "|p| > 1, 0 < |x| < |p|, |z| < |p|",
             _sample_diag, _valid_diag, _lcal_diag),
    Identity("qzeta_one", "zeta_q(1) = ell_p(1, 1) = sum d(n) q^n", "|p| > 1",
             _sample_p_int, _valid_special, _qzeta_one),
    Identity("qzeta_two", "zeta_q(2) = L_p(1, 1, 1) = sum n q^n/(1 - q^n)", "|p| > 1",
             _sample_p_int, _valid_special, _qzeta_two),
    Identity("Lcal_one_minus_one", "L_p(1, -1, 1) = sum p^n/(p^(2n) - 1)", "|p| > 1",
             _sample_p_int, _valid_special, _special_one_minus_one),
    Identity("pi_q_quarter", "sum p^n/(p^(2n) + 1) = (pi_q - 1)/4", "|p| > 1",
             _sample_p_int, _valid_special, _pi_quarter),
    Identity("cube_root_sum", "L_p(w, 1/w, 1) = sum p^n/(p^(2n) + p^n + 1), w a primitive cube root of 1",
             "|p| > 1", _sample_p_int, _valid_special, _cube_root_sum),
    Identity("Lcal_minus_one_diag", "L_p(-1, -1, 1) = zeta_q(2) - 4 zeta_(q^2)(2)", "|p| > 1",
             _sample_p_int, _valid_special, _minus_one_diag),
    Identity("kronecker", "ell_p(x, z/q)/x - z ell_p(1/(qx), 1/z) = sum_Z z^n/(1-q^n x) = theta quotient",
             "|q| < |z| < 1, x off q-powers", _sample_kronecker, _valid_kronecker, _kronecker, eps=SLOW_EPS),
    Identity("mortenson", "(sum_{m,n>=0} + sum_{m,n<0}) q^(mn) y^m z^n/(1-q^(m+n) x) = "
             "(sum_{l,m,n>=0} - sum_{l,m,n<0}) q^(lm+mn+nl) x^l y^m z^n", "|q| < |x|, |y|, |z| < 1",
             _sample_box, _valid_box, _mortenson, eps=SLOW_EPS),
    Identity("lambda_triple_double", "Lambda_p triple form = double form", "|y|, |z| < |p|, x off poles",
             _sample_lambda, _valid_lambda, _lambda, eps=SLOW_EPS),
)


# --- running checks ---------------------------------------------------------------------


def _evaluate_member(f, eps: Fraction) -> Enclosure:
    inner = eps
    for _ in range(4):
        e = f(inner)
        if e.rad <= eps:
            return e
        inner /= 2**32
    return e


def check(case: IdentityCase) -> CheckReport:
    """Check one identity at one binding in one mode."""
    if case.id not in REGISTRY:
        raise DomainError(f"unknown identity {case.id!r}; known: {', '.join(REGISTRY)}")
    ident = REGISTRY[case.id]
    bindings = {k: as_rat(v) for k, v in case.bindings.items()}
    if case.mode == "numeric":
        if ident.numeric is None:
            raise DomainError(f"{case.id} has no numeric mode")
        ident.validate(bindings)
        eps = as_rat(case.eps) if case.eps is not None else ident.eps
        values = [(name, _evaluate_member(f, eps)) for name, f in ident.numeric(bindings)]
        ok, margin = common_intersection([e for _, e in values])
        tight = all(e.rad <= eps for _, e in values)
        verdict = "pass" if ok and tight else "fail"
        detail = "" if tight else f"a member radius exceeds eps = {eps}"
        if not ok:
            detail = f"enclosures are disjoint, gap {float(margin):.3e}"
        return CheckReport(case.id, "numeric", bindings, verdict, values, margin, detail)
    if case.mode == "formal":
        if ident.formal is None:
            raise DomainError(f"{case.id} has no formal mode")
        ident.formal_validate(bindings)
        M = case.M if case.M is not None else FORMAL_ORDER
        values = ident.formal(bindings, M)
        first = values[0][1]
        mismatch = None
        for _, s in values[1:]:
            k = first.first_mismatch(s)
            if k is not None and (mismatch is None or k < mismatch):
                mismatch = k
        if mismatch is None:
            return CheckReport(case.id, "formal", bindings, "pass", values, M)
        return CheckReport(case.id, "formal", bindings, "fail", values, mismatch, f"first differing coefficient q^{mismatch}")
    raise DomainError(f"unknown mode {case.mode!r}")


def sample_cases(ids, points: int, seed: int) -> list[IdentityCase]:
    """Deterministic in-domain cases: ``points`` numeric bindings per identity,
    plus as many formal ones where a formal mode exists."""
    cases = []
    for ident_id in ids:
        ident = REGISTRY[ident_id]
        for k in range(points):
            if ident.numeric is not None:
                rng = random.Random(f"{seed}:{ident_id}:numeric:{k}")
                cases.append(IdentityCase(ident_id, _draw(ident.sample, ident.validate, rng), "numeric"))
            if ident.formal is not None:
                rng = random.Random(f"{seed}:{ident_id}:formal:{k}")
                cases.append(IdentityCase(ident_id, _draw(ident.formal_sample, ident.formal_validate, rng), "formal"))
    return cases


def _draw(sample, validate, rng) -> dict:
    for _ in range(200):
        b = sample(rng)
        try:
            validate(b)
        except DomainError:
            continue
        return b
    raise RuntimeError("could not draw an in-domain binding")


@dataclass
class SuiteReport:
    seed: int
    reports: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    def to_json(self) -> dict:
        return {
            "suite": "q-series identities",
            "seed": self.seed,
            "passed": self.passed,
            "cases": [r.to_json() for r in self.reports],
        }


def _check_job(case: IdentityCase) -> CheckReport:
    return check(case)


def run_suite(ids=None, points: int = 5, seed: int = 1, threads: int | None = 1) -> SuiteReport:
    """Run every identity in ``ids`` (all when None) at ``points`` random bindings."""
    if ids is None:
        ids = list(REGISTRY)
    unknown = [i for i in ids if i not in REGISTRY]
    if unknown:
        raise DomainError(f"unknown identities: {', '.join(unknown)}")
    cases = sample_cases(ids, points, seed)
    return SuiteReport(seed, pmap(_check_job, cases, threads))
