"""Certified evaluators for the generalized q-logarithm and its relatives.

Every evaluator returns an :class:`~qforms.enclosure.Enclosure` of radius at
most ``eps``.  Parameters follow the ``p``-convention (``q = 1/p``) except for
``L_q`` and ``E_q``, which take ``q`` directly.  Negative ``p`` is supported
everywhere; all tail majorants use absolute values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from .enclosure import Enclosure, RatLike, as_rat
from .errors import DivergenceError, DomainError, PoleError
from .qnotation import _poch_inf
from .summation import SeriesSum, certified_sum, poly_geom_tail, ratio_tail

_ZERO = Fraction(0)

# exhaustive exact search covers j up to this even when the size bound is smaller
POLE_SEARCH_MIN = 64


def power_index(x: Fraction, p: Fraction, start: int = 1) -> int | None:
    """Return ``j >= start`` with ``x == p**j`` or ``None``.

    Complete for rationals: once ``|p^j| > |x|`` (``|p| > 1``) no later power
    can match, and the loop also runs to at least ``POLE_SEARCH_MIN``.
    """
    if x == 0:
        return None
    pj = p**start
    j = start
    while j <= POLE_SEARCH_MIN or abs(pj) <= abs(x):
        if pj == x:
            return j
        if abs(pj) > abs(x) and j > POLE_SEARCH_MIN:
            break
        pj *= p
        j += 1
    return None


def _check_p(p: Fraction) -> None:
    if abs(p) <= 1:
        raise DomainError(f"need |p| > 1, got p={p}")


def _check_eps(eps: Fraction) -> None:
    if eps <= 0:
        raise DomainError("eps must be positive")


def _check_pole(x: Fraction, p: Fraction, start: int = 1, name: str = "x") -> None:
    j = power_index(x, p, start)
    if j is not None:
        raise PoleError(f"pole: {name} = p^{j} = {x} (need {name} not in {{p^{start}, p^{start + 1}, ...}})")


def _rats(*values: RatLike) -> list[Fraction]:
    return [as_rat(v) for v in values]


# --- generalized q-logarithm ------------------------------------------------


def ell_sum(p: RatLike, x: RatLike, z: RatLike, eps: RatLike) -> SeriesSum:
    p, x, z, eps = _rats(p, x, z, eps)
    _check_p(p)
    _check_eps(eps)
    if abs(z) >= abs(p):
        raise DivergenceError(f"ell_p(x, z) needs |z| < |p|, got z={z}, p={p}")
    _check_pole(x, p)
    if x == 0 or z == 0:
        return SeriesSum(Enclosure.exact(0), 0)
    rho = abs(z / p)
    ax = abs(x)

    def terms() -> Iterator[Fraction]:
        zn, pn = Fraction(1), Fraction(1)
        while True:
            zn *= z
            pn *= p
            yield x * zn / (pn - x)

    def tail(i: int, t: Fraction):
        N = i + 1  # last summed index
        if abs(p) ** (N + 1) < 2 * ax:
            return None
        # |p^n - x| >= |p|^n / 2 for n > N, so |term_n| <= 2|x| |z/p|^n
        return 2 * ax * rho ** (N + 1) / (1 - rho)

    return certified_sum(terms(), tail, eps, what="ell_p")


def ell_double_sum(p: RatLike, x: RatLike, z: RatLike, eps: RatLike) -> SeriesSum:
    """``sum_{m,n>0} q^{mn} x^m z^n`` by diagonal shells ``m + n = s``."""
    p, x, z, eps = _rats(p, x, z, eps)
    _check_p(p)
    _check_eps(eps)
    if abs(x) >= abs(p) or abs(z) >= abs(p):
        raise DivergenceError("double-sum form needs |x|, |z| < |p|")
    q = 1 / p
    w = max(abs(x), abs(z)) / abs(p)

    def shells() -> Iterator[Fraction]:
        s = 2
        while True:
            total = _ZERO
            for m in range(1, s):
                n = s - m
                total += q ** (m * n) * x**m * z**n
            yield total
            s += 1

    def tail(i: int, t: Fraction):
        S = i + 2
        # m n >= m + n - 1 gives |term| <= |p| w^(m+n); shell s has s - 1 terms
        b = poly_geom_tail(w, S, 1)
        return None if b is None else abs(p) * b

    return certified_sum(shells(), tail, eps, what="ell_p double sum")


def eval_ell(p: RatLike, x: RatLike, z: RatLike, eps: RatLike, form: str = "series") -> Enclosure:
    """``ell_p(x, z) = x * sum_{n>=1} z^n / (p^n - x)``.

    ``form="double"`` sums ``sum_{m,n>0} q^{mn} x^m z^n`` instead.
    """
    if form == "series":
        return ell_sum(p, x, z, eps).enclosure
    if form == "double":
        return ell_double_sum(p, x, z, eps).enclosure
    raise ValueError(f"unknown form {form!r}")


# --- q-logarithm and q-exponential ------------------------------------------


def lq_sum(q: RatLike, z: RatLike, eps: RatLike) -> SeriesSum:
    q, z, eps = _rats(q, z, eps)
    _check_eps(eps)
    if not abs(q) < 1 or abs(z) > 1:
        raise DivergenceError(f"L_q(z) needs |q| < 1 and |z| <= 1, got q={q}, z={z}")
    if q == 0 or z == 0:
        return SeriesSum(Enclosure.exact(0), 0)
    r = abs(q * z)

    def terms():
        w, qn = Fraction(1), Fraction(1)
        while True:
            w *= q * z
            qn *= q
            yield w / (1 - qn)

    def tail(i, t):
        N = i + 1
        return r ** (N + 1) / ((1 - r) * (1 - abs(q) ** (N + 1)))

    return certified_sum(terms(), tail, eps, what="L_q")


def eval_Lq(q: RatLike, z: RatLike, eps: RatLike) -> Enclosure:
    """The q-logarithm ``sum_{n>=1} q^n z^n / (1 - q^n)``."""
    return lq_sum(q, z, eps).enclosure


def eq_sum(q: RatLike, z: RatLike, eps: RatLike, form: str = "sum") -> SeriesSum:
    q, z, eps = _rats(q, z, eps)
    _check_eps(eps)
    if not abs(q) < 1:
        raise DivergenceError(f"E_q needs |q| < 1, got {q}")
    if form == "product":
        return _poch_inf(-q * z, q, eps)
    if form != "sum":
        raise ValueError(f"unknown form {form!r}")
    aq = abs(q)

    def terms():
        t = Fraction(1)
        n = 0
        yield t
        while True:
            n += 1
            t = t * q**n * z / (1 - q**n)
            yield t

    def tail(i, t):
        # ratio t_{n+1}/t_n = q^{n+1} z / (1 - q^{n+1}), bounded for all later n
        r = aq ** (i + 1) * abs(z) / (1 - aq ** (i + 1))
        return ratio_tail(abs(t), r)

    return certified_sum(terms(), tail, eps, what="E_q")


def eval_Eq(q: RatLike, z: RatLike, eps: RatLike, form: str = "sum") -> Enclosure:
    """``E_q(z)`` by its power series (``form="sum"``) or ``prod (1 + q^n z)``."""
    return eq_sum(q, z, eps, form).enclosure


def eq_derivative_sum(q: RatLike, w: RatLike, eps: RatLike) -> SeriesSum:
    """Termwise derivative ``sum_{n>=1} n q^{n(n+1)/2} w^{n-1} / (q;q)_n``."""
    q, w, eps = _rats(q, w, eps)
    _check_eps(eps)
    if not abs(q) < 1:
        raise DivergenceError(f"E_q needs |q| < 1, got {q}")
    aq = abs(q)

    def terms():
        n = 1
        c = q / (1 - q)  # q^{n(n+1)/2} w^{n-1} / (q;q)_n, without the factor n
        while True:
            yield n * c
            n += 1
            c = c * q**n * w / (1 - q**n)

    def tail(i, t):
        n = i + 1
        # ratio (n+1)/n * q^{n+1} w / (1 - q^{n+1}) <= 2 |q|^{n+1} |w| / (1 - |q|^{n+1})
        r = 2 * aq ** (n + 1) * abs(w) / (1 - aq ** (n + 1))
        return ratio_tail(abs(t), r)

    return certified_sum(terms(), tail, eps, what="E_q'")


def eval_Eq_derivative(q: RatLike, w: RatLike, eps: RatLike) -> Enclosure:
    return eq_derivative_sum(q, w, eps).enclosure


# --- the q-hypergeometric function F_p ----------------------------------------


def F_sum(p: RatLike, x: RatLike, y: RatLike, z: RatLike, eps: RatLike) -> SeriesSum:
    p, x, y, z, eps = _rats(p, x, y, z, eps)
    _check_p(p)
    _check_eps(eps)
    _check_pole(x, p, name="x")
    _check_pole(y, p, name="y")
    ap, ax, ay, az = abs(p), abs(x), abs(y), abs(z)

    def terms():
        t = Fraction(1)
        pk = Fraction(1)
        yield t
        while True:
            pk *= p
            t = t * (pk - 1) * (-p * z) / ((pk - x) * (pk - y))
            yield t

    def tail(i, t):
        A = ap ** (i + 1)
        if A <= ax or A <= ay:
            return None
        # later ratios are bounded by this decreasing function of |p|^{n+1}
        r = (A + 1) * ap * az / ((A - ax) * (A - ay))
        return ratio_tail(abs(t), r)

    return certified_sum(terms(), tail, eps, what="F_p")


def eval_F(p: RatLike, x: RatLike, y: RatLike, z: RatLike, eps: RatLike) -> Enclosure:
    """``F_p(x, y, z) = sum_n prod_{k<=n} (p^k - 1) (-pz)^n / ((p^k - x)(p^k - y))``.

    Convergence is certified by a ratio test, so no size constraint is
    imposed on ``y`` (or ``z``) beyond what the test establishes.
    """
    return F_sum(p, x, y, z, eps).enclosure


# --- the function L_p(x, y, z) ---------------------------------------------


def Lcal_series_sum(p, x, y, z, eps) -> SeriesSum:
    p, x, y, z, eps = _rats(p, x, y, z, eps)
    _check_p(p)
    _check_eps(eps)
    if abs(z) >= abs(p):
        raise DivergenceError(f"L_p(x, y, z) needs |z| < |p|, got z={z}")
    _check_pole(x, p, name="x")
    _check_pole(y, p, name="y")
    if z == 0:
        return SeriesSum(Enclosure.exact(0), 0)
    ap, ax, ay, az = abs(p), abs(x), abs(y), abs(z)

    def terms():
        pn, zn = Fraction(1), Fraction(1)
        while True:
            pn *= p
            zn *= z
            yield pn * zn / ((pn - x) * (pn - y))

    def tail(i, t):
        A = ap ** (i + 1)
        if ap * A <= ax or ap * A <= ay:
            return None
        r = ap * az * (A + ax) * (A + ay) / ((ap * A - ax) * (ap * A - ay))
        return ratio_tail(abs(t), r)

    return certified_sum(terms(), tail, eps, what="L_p")


def e03_sum(p, x, z, eps) -> SeriesSum:
    """``(z/x) * sum_{n>=1} n x^n / (p^n - z)`` (needs ``x != 0``, ``|x| < |p|``)."""
    p, x, z, eps = _rats(p, x, z, eps)
    _check_p(p)
    _check_eps(eps)
    if x == 0:
        raise DomainError("the n x^n / (p^n - z) representation is undefined at x = 0")
    if abs(x) >= abs(p):
        raise DivergenceError(f"need |x| < |p|, got x={x}")
    _check_pole(z, p, name="z")
    if z == 0:
        return SeriesSum(Enclosure.exact(0), 0)
    ap, ax, az = abs(p), abs(x), abs(z)

    def terms():
        pn, xn, n = Fraction(1), Fraction(1), 0
        while True:
            n += 1
            pn *= p
            xn *= x
            yield n * xn / (pn - z)

    def tail(i, t):
        n = i + 1
        A = ap**n
        if ap * A <= az:
            return None
        r = Fraction(n + 1, n) * ax * (A + az) / (ap * A - az)
        return ratio_tail(abs(t), r)

    # target eps for the unscaled sum so that (z/x) * sum has radius <= eps
    scale = z / x
    inner = certified_sum(terms(), tail, eps / max(abs(scale), Fraction(1)), what="e03 form")
    return SeriesSum(inner.enclosure * scale, inner.terms)


def eval_Lcal(p: RatLike, x: RatLike, y: RatLike, z: RatLike, eps: RatLike, form: str = "auto") -> Enclosure:
    """``L_p(x, y, z) = sum_{n>=1} p^n z^n / ((p^n - x)(p^n - y))``.

    ``form``: ``"series"`` (the defining sum), ``"difference"``
    (``(ell_p(x,z) - ell_p(y,z)) / (x - y)``, ``x != y``), ``"e03"``
    (``x == y != 0``), or ``"auto"``: the defining sum, cross-checked against
    whichever alternative is valid at the given point.
    """
    p, x, y, z, eps = _rats(p, x, y, z, eps)
    if form == "series":
        return Lcal_series_sum(p, x, y, z, eps).enclosure
    if form == "difference":
        if x == y:
            raise DomainError("difference form needs x != y")
        d = x - y
        e = eps * min(abs(d), Fraction(1)) / 2
        return (eval_ell(p, x, z, e) - eval_ell(p, y, z, e)) / d
    if form == "e03":
        if x != y:
            raise DomainError("the e03 form needs x == y")
        if x == 0:
            _check_p(p)
            if abs(z) >= abs(p):
                raise DivergenceError("need |z| < |p|")
            # removable singularity: L_p(0, 0, z) = sum (z/p)^n
            r = z / p
            return Enclosure.exact(r / (1 - r))
        return e03_sum(p, x, z, eps).enclosure
    if form != "auto":
        raise ValueError(f"unknown form {form!r}")
    main = Lcal_series_sum(p, x, y, z, eps).enclosure
    alt = None
    if x != y:
        if abs(x) < abs(p) and abs(y) < abs(p):
            alt = eval_Lcal(p, x, y, z, eps, "difference")
    elif abs(x) < abs(p) and power_index(z, p) is None:
        alt = eval_Lcal(p, x, y, z, eps, "e03")
    if alt is not None and not main.overlaps(alt):
        raise ArithmeticError(f"L_p representations disagree at p={p}, x={x}, y={y}, z={z}")
    return main


# --- Lambda_p ------------------------------------------------------------


def Lambda_double_sum(p, x, y, z, eps) -> SeriesSum:
    p, x, y, z, eps = _rats(p, x, y, z, eps)
    _check_p(p)
    _check_eps(eps)
    if abs(y) >= abs(p) or abs(z) >= abs(p):
        raise DivergenceError("Lambda_p needs |y|, |z| < |p|")
    _check_pole(x, p, start=2)
    q = 1 / p
    ap, ax = abs(p), abs(x)
    v = max(abs(y), abs(z)) / ap

    def shells():
        s = 2
        ps = p * p
        while True:
            inner = _ZERO
            for m in range(1, s):
                inner += q ** (m * (s - m)) * y**m * z ** (s - m)
            yield x * inner / (ps - x)
            s += 1
            ps *= p

    def tail(i, t):
        S = i + 2
        if ap ** (S + 1) < 2 * ax:
            return None
        # |p^s - x| >= |p|^s / 2 and |sum_m q^(m(s-m)) y^m z^(s-m)| <= s max(|y|,|z|)^s
        b = poly_geom_tail(v, S, 1)
        return None if b is None else 2 * ax * b

    return certified_sum(shells(), tail, eps, what="Lambda_p double form")


def Lambda_triple_sum(p, x, y, z, eps) -> SeriesSum:
    p, x, y, z, eps = _rats(p, x, y, z, eps)
    _check_p(p)
    _check_eps(eps)
    ap = abs(p)
    if max(abs(x), abs(y), abs(z)) >= ap:
        raise DivergenceError("triple form needs |x|, |y|, |z| < |p|")
    q = 1 / p
    w = max(abs(x), abs(y), abs(z)) / ap

    def shells():
        s = 3
        while True:
            total = _ZERO
            for l in range(1, s - 1):
                for m in range(1, s - l):
                    n = s - l - m
                    total += q ** (l * m + m * n + n * l) * x**l * y**m * z**n
            yield total
            s += 1

    def tail(i, t):
        S = i + 3
        # lm + mn + nl >= l + m + n, so |term| <= w^s; shell s has < s^2/2 terms
        b = poly_geom_tail(w, S, 2)
        return None if b is None else b / 2

    return certified_sum(shells(), tail, eps, what="Lambda_p triple form")


def eval_Lambda(p, x, y, z, eps, form: str = "double") -> Enclosure:
    """``Lambda_p(x, y, z)`` by its double or triple form.

    Double: ``x sum_{m,n>0} q^{mn} y^m z^n / (p^(m+n) - x)`` (summing the
    triple form over ``l`` leaves the factor ``q^{mn}``).
    Triple: ``sum_{l,m,n>0} q^{lm+mn+nl} x^l y^m z^n``.
    """
    if form == "double":
        return Lambda_double_sum(p, x, y, z, eps).enclosure
    if form == "triple":
        return Lambda_triple_sum(p, x, y, z, eps).enclosure
    raise ValueError(f"unknown form {form!r}")


# --- pi_q and q-zeta values ---------------------------------------------------

PI_Q_FORMS = ("ell", "lambert-alt", "lambert-sech", "theta")


def pi_q_sum(p: RatLike, eps: RatLike, form: str = "theta") -> SeriesSum:
    p, eps = _rats(p, eps)
    _check_p(p)
    _check_eps(eps)
    q = 1 / p
    aq = abs(q)
    if form == "ell":
        inner = ell_sum(p * p, p, -1, eps / 4)
        return SeriesSum(1 - 4 * inner.enclosure, inner.terms)
    if form == "lambert-alt":
        q2 = q * q

        def terms():
            qk = q
            sign = 1
            while True:
                yield sign * qk / (1 - qk)
                qk *= q2
                sign = -sign

        def tail(i, t):
            # |q^{2n+1} / (1 - q^{2n+1})| <= |q|^{2n+1} / (1 - |q|) for later n
            return aq ** (2 * i + 3) / ((1 - q2) * (1 - aq))

        inner = certified_sum(terms(), tail, eps / 4, what="pi_q alternating Lambert")
        return SeriesSum(1 + 4 * inner.enclosure, inner.terms)
    if form == "lambert-sech":

        def terms():
            qn = Fraction(1)
            while True:
                qn *= q
                yield qn / (1 + qn * qn)

        def tail(i, t):
            return aq ** (i + 2) / (1 - aq)

        inner = certified_sum(terms(), tail, eps / 4, what="pi_q Lambert")
        return SeriesSum(1 + 4 * inner.enclosure, inner.terms)
    if form == "theta":
        target = eps / 16
        while True:
            half = _theta_half(q, target)
            theta = 1 + 2 * half.enclosure
            sq = theta * theta
            if sq.rad <= eps:
                return SeriesSum(sq, half.terms)
            target /= 4
    raise ValueError(f"unknown form {form!r}")


def _theta_half(q: Fraction, eps: Fraction) -> SeriesSum:
    """``sum_{n>=1} q^{n^2}``; the bilateral theta sum is ``1 + 2 *`` this."""
    aq = abs(q)

    def terms():
        n = 0
        while True:
            n += 1
            yield q ** (n * n)

    def tail(i, t):
        N = i + 1
        return aq ** ((N + 1) ** 2) / (1 - aq ** (2 * N + 3))

    return certified_sum(terms(), tail, eps, what="theta")


def eval_pi_q(p: RatLike, eps: RatLike, form: str = "theta") -> Enclosure:
    """``pi_q`` through any member of its chain of representations."""
    return pi_q_sum(p, eps, form).enclosure


def eval_zeta_q(p: RatLike, k: int, eps: RatLike) -> Enclosure:
    """``zeta_q(1) = ell_p(1, 1)`` and ``zeta_q(2) = L_p(1, 1, 1)``."""
    if k == 1:
        return eval_ell(p, 1, 1, eps)
    if k == 2:
        return eval_Lcal(p, 1, 1, 1, eps, form="series")
    raise DomainError("only zeta_q(1) and zeta_q(2) are available")


# --- request dispatch ---------------------------------------------------------

FUNCTIONS = ("ell", "Lq", "Eq", "F", "Lcal", "Lambda", "pi_q", "zeta_q")


@dataclass(frozen=True)
class EvalRequest:
    fn: str
    params: dict = field(default_factory=dict)
    eps: Fraction = Fraction(1, 10**20)
    form: str | None = None


def evaluate(req: EvalRequest) -> SeriesSum:
    """Dispatch an :class:`EvalRequest`; returns the enclosure and term count."""
    P = {k: as_rat(v) for k, v in req.params.items() if k != "k"}
    eps = as_rat(req.eps)
    fn, form = req.fn, req.form

    def need(*names):
        missing = [n for n in names if n not in P]
        if missing:
            raise DomainError(f"{fn} needs parameters {', '.join(missing)}")
        return [P[n] for n in names]

    if fn == "ell":
        p, x, z = need("p", "x", "z")
        if form in (None, "series"):
            return ell_sum(p, x, z, eps)
        return ell_double_sum(p, x, z, eps)
    if fn == "Lq":
        q, z = need("q", "z")
        return lq_sum(q, z, eps)
    if fn == "Eq":
        q, z = need("q", "z")
        return eq_sum(q, z, eps, form or "sum")
    if fn == "F":
        p, x, y, z = need("p", "x", "y", "z")
        return F_sum(p, x, y, z, eps)
    if fn == "Lcal":
        p, x, y, z = need("p", "x", "y", "z")
        if form in (None, "series", "auto"):
            res = Lcal_series_sum(p, x, y, z, eps)
            if form == "auto":
                eval_Lcal(p, x, y, z, eps, "auto")
            return res
        return SeriesSum(eval_Lcal(p, x, y, z, eps, form), 0)
    if fn == "Lambda":
        p, x, y, z = need("p", "x", "y", "z")
        if form == "triple":
            return Lambda_triple_sum(p, x, y, z, eps)
        return Lambda_double_sum(p, x, y, z, eps)
    if fn == "pi_q":
        (p,) = need("p")
        return pi_q_sum(p, eps, form or "theta")
    if fn == "zeta_q":
        (p,) = need("p")
        k = int(req.params.get("k", 1))
        if k == 1:
            return ell_sum(p, 1, 1, eps)
        if k == 2:
            return Lcal_series_sum(p, 1, 1, 1, eps)
        raise DomainError("only zeta_q(1) and zeta_q(2) are available")
    raise DomainError(f"unknown function {fn!r}; choose from {', '.join(FUNCTIONS)}")
