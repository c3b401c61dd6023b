"""Padé-type linear forms ``v_n(mu) = A~_n mu - (B~_n + C~_n)`` for ``ell_p(x, z)``.

All quantities are evaluated exactly at rational points ``(p, x, z)``; the
remainder ``v_n(ell_p(x, z)) = (xz)^{2n+1} v_n*`` is available both as a
formal ``q``-expansion and as a certified numeric enclosure.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .enclosure import Enclosure, RatLike, as_rat
from .errors import DivergenceError, DomainError, PoleError
from .functions import _check_p, power_index
from .qnotation import multi_pochhammer, pochhammer, qbinom
from .series import QSeries
from .summation import SeriesSum, certified_sum, ratio_tail


@dataclass(frozen=True)
class FormCoeffs:
    """Unscaled coefficients ``A_n, B_n, C_n`` and the normalizer ``D_n``."""

    n: int
    A: Fraction
    B: Fraction
    C: Fraction
    D: Fraction

    @property
    def A_tilde(self) -> Fraction:
        return self.D * self.A

    @property
    def B_tilde(self) -> Fraction:
        return self.D * self.B

    @property
    def C_tilde(self) -> Fraction:
        return self.D * self.C


@dataclass(frozen=True)
class LinearForm:
    """``v(mu) = a * mu - b``."""

    n: int
    a: Fraction
    b: Fraction

    def __call__(self, mu):
        if isinstance(mu, Enclosure):
            return mu * self.a - self.b
        return self.a * as_rat(mu) - self.b

    def __add__(self, other: "LinearForm") -> "LinearForm":
        return LinearForm(self.n, self.a + other.a, self.b + other.b)

    def scale(self, c: RatLike) -> "LinearForm":
        c = as_rat(c)
        return LinearForm(self.n, c * self.a, c * self.b)

    def to_json(self) -> dict:
        return {"n": self.n, "a": str(self.a), "b": str(self.b)}


def _pp(p: Fraction, k: int) -> Fraction:
    """``(p; p)_k``."""
    return pochhammer(p, p, k)


def _nonzero(value: Fraction, what: str) -> Fraction:
    if value == 0:
        raise PoleError(f"zero denominator: {what}")
    return value


def coeffs(n: int, p: RatLike, x: RatLike, z: RatLike) -> FormCoeffs:
    """Exact ``A_n, B_n, C_n, D_n`` at ``(p, x, z)``."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    p, x, z = as_rat(p), as_rat(x), as_rat(z)
    if p == 0 or x == 0 or z == 0:
        raise DomainError("p, x and z must be nonzero")
    pref = p ** ((n + 1) * (3 * n + 2) // 2)

    A_sum = Fraction(0)
    B_sum = Fraction(0)
    for k in range(n + 1):
        prod = Fraction(1)
        for j in range(1, n + 1):
            prod *= p ** (k + j) - x
        base = (-1) ** k * p ** (k * (k + 1) // 2) * prod / _nonzero(_pp(p, k) * _pp(p, n - k), "(p;p)_k (p;p)_{n-k}")
        A_sum += base * z ** (-k)
        inner = Fraction(0)
        for l in range(1, k + 1):
            inner += z ** (l - k) / _nonzero(p**l - x, f"p^{l} - x")
        B_sum += base * inner
    A = pref * x ** (-n) * A_sum
    B = pref * x ** (1 - n) * B_sum

    C_sum = Fraction(0)
    for l in range(n):
        inner = Fraction(0)
        for k in range(l + 1):
            inner += (
                (-1) ** k
                * qbinom(n, k, p)
                * qbinom(n + l - k, n, p)
                * p ** ((n - k) * (n - k + 1) // 2)
                * x**k
            )
        C_sum += x ** (-l) / _nonzero(p ** (n - l) - z, f"p^{n - l} - z") * inner
    C = pref * z * C_sum

    D_num = Fraction(1)
    for j in range(1, n + 1):
        pj = p**j
        D_num *= (pj - 1) * (pj - x) * (pj - z)
    D = (x * z) ** n * D_num / p ** (3 * n * (n + 1) // 2)
    return FormCoeffs(n, A, B, C, D)


def normalizer_pochhammer(n: int, p: RatLike, x: RatLike, z: RatLike) -> Fraction:
    """``D_n`` through its Pochhammer form ``(xz)^n (q, qx, qz; q)_n``."""
    p, x, z = as_rat(p), as_rat(x), as_rat(z)
    q = 1 / p
    return (x * z) ** n * multi_pochhammer([q, q * x, q * z], q, n)


def linear_form(n: int, p: RatLike, x: RatLike, z: RatLike) -> LinearForm:
    c = coeffs(n, p, x, z)
    return LinearForm(n, c.A_tilde, c.B_tilde + c.C_tilde)


# --- the remainder v_n(ell_p) ---------------------------------------------------


def default_order(n: int) -> int:
    return n * (n + 1) + 10


def remainder_series(n: int, p: RatLike, x: RatLike, z: RatLike, M: int | None = None) -> QSeries:
    """Formal ``q``-expansion of ``v_n* = (xz)^{-2n-1} v_n(ell_p(x, z))``.

    Uses ``v_n* = sum_t z^t (q, qx, qz, q^{t+1}; q)_n q^{(n+1)t} / (q^{n+1+t} x; q)_{n+1}``;
    the ``t``-th term has order at least ``(n+1)t``, so ``t <= M / (n+1)`` suffices.
    ``p`` only enters through the pole check.
    """
    p, x, z = as_rat(p), as_rat(x), as_rat(z)
    if M is None:
        M = default_order(n)
    j = power_index(x, p, n + 1)
    if j is not None:
        raise PoleError(f"pole: x = p^{j}")
    base = QSeries.one(M)
    for k in range(1, n + 1):
        base = base.mul_binomial(1, k).mul_binomial(x, k).mul_binomial(z, k)
    total = QSeries.zero(M)
    zt = Fraction(1)
    for t in range(M // (n + 1) + 1):
        s = base.shift((n + 1) * t)
        if s.ord_is_exact():
            for k in range(n):
                s = s.mul_binomial(1, t + 1 + k)
            for k in range(n + 1):
                s = s.div_binomial(x, n + 1 + t + k)
            total = total + s.scale(zt)
        zt *= z
    return total


def majorant_bound(n: int, x: Fraction, z: Fraction, r: Fraction) -> Fraction:
    """Value at ``q = r`` of a coefficientwise majorant of ``v_n*``.

    Replacing each ``(1 - a q^k)`` by ``1 + |a| q^k`` and each ``1/(1 - a q^k)``
    by ``1/(1 - |a| q^k)`` majorizes every factor, the ``t``-dependent
    numerator by its ``t = 0`` value, and the denominator by its smallest
    shift.  Hence ``|[q^k] v_n*| <= F(r) / r^k`` for every ``k``.
    """
    ax, az = abs(x), abs(z)
    if az * r ** (n + 1) >= 1 or ax * r ** (n + 1) >= 1:
        raise DivergenceError("majorant radius too large")
    P = Fraction(1)
    for k in range(1, n + 1):
        rk = r**k
        P *= (1 + rk) ** 2 * (1 + ax * rk) * (1 + az * rk)
    for k in range(n + 1):
        P /= 1 - ax * r ** (n + 1 + k)
    return P / (1 - az * r ** (n + 1))


def majorant_radius(p: Fraction, x: Fraction, z: Fraction) -> Fraction:
    """A rational ``r`` strictly between ``1/|p|`` and the majorant's convergence limit."""
    q = 1 / abs(as_rat(p))
    lim = min(Fraction(1), 1 / max(abs(as_rat(x)), Fraction(1, 10**6)), 1 / max(abs(as_rat(z)), Fraction(1, 10**6)))
    if lim <= q:
        raise DivergenceError("no majorant radius available")
    r = (q + lim) / 2
    return Fraction(r.numerator * 2**20 // r.denominator + 1, 2**20) if r < lim else r


def _star_sum(n: int, p: Fraction, x: Fraction, z: Fraction, eps: Fraction) -> SeriesSum:
    """Numeric ``v_n*`` at ``q = 1/p`` through its ``t``-sum."""
    _check_p(p)
    if abs(z) >= abs(p):
        raise DivergenceError(f"remainder sum needs |z| < |p|, got z={z}")
    j = power_index(x, p, n + 1)
    if j is not None:
        raise PoleError(f"pole: x = p^{j}")
    q = 1 / p
    aq, ax, az = abs(q), abs(x), abs(z)
    pref = multi_pochhammer([q, q * x, q * z], q, n)
    if pref == 0:
        return SeriesSum(Enclosure.exact(0), 0)
    zq = z * q ** (n + 1)

    def terms():
        # g_t = z^t q^{(n+1)t} (q^{t+1};q)_n / (q^{n+1+t} x; q)_{n+1}
        g = pochhammer(q, q, n) / pochhammer(q ** (n + 1) * x, q, n + 1)
        t = 0
        while True:
            yield g
            if g == 0:
                # only possible when z == 0
                return
            qa = q ** (t + 1)
            g = g * zq * (1 - qa * q**n) / (1 - qa) * (1 - qa * q**n * x) / (1 - qa * q ** (2 * n + 1) * x)
            t += 1

    def tail(i, g):
        T = i  # ratios g_{t+1}/g_t for t >= T are bounded by the value at T
        a1 = aq ** (T + 1)
        den = (1 - a1) * (1 - a1 * aq ** (2 * n + 1) * ax)
        if den <= 0:
            return None
        rho = az * aq ** (n + 1) * (1 + a1 * aq**n) * (1 + a1 * aq**n * ax) / den
        return ratio_tail(abs(g), rho)

    inner = certified_sum(terms(), tail, eps / max(abs(pref), Fraction(1)), what="remainder t-sum")
    return SeriesSum(inner.enclosure * pref, inner.terms)


def remainder_star_enclosure(n: int, p: RatLike, x: RatLike, z: RatLike, eps: RatLike) -> Enclosure:
    """Certified numeric value of ``v_n*`` at ``q = 1/p``."""
    p, x, z, eps = as_rat(p), as_rat(x), as_rat(z), as_rat(eps)
    return _star_sum(n, p, x, z, eps).enclosure


def remainder_enclosure(n: int, p: RatLike, x: RatLike, z: RatLike, eps: RatLike) -> Enclosure:
    """Certified ``v_n(ell_p(x, z)) = (xz)^{2n+1} v_n*``."""
    p, x, z, eps = as_rat(p), as_rat(x), as_rat(z), as_rat(eps)
    scale = (x * z) ** (2 * n + 1)
    if scale == 0:
        _check_p(p)
        return Enclosure.exact(0)
    star = _star_sum(n, p, x, z, eps / max(abs(scale), Fraction(1))).enclosure
    return star * scale


# --- integrality ---------------------------------------------------------------


@dataclass(frozen=True)
class IntegralityVerdict:
    n: int
    scale: int
    values: dict
    failures: tuple

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "scale": str(self.scale),
            "values": {k: str(v) for k, v in self.values.items()},
            "passed": self.passed,
            "failures": list(self.failures),
        }


def integrality_check(n: int, p: RatLike, x: RatLike, z: RatLike) -> IntegralityVerdict:
    """Check that ``(x0 z0)^{2n}`` clears the denominators of ``A~_n, B~_n, C~_n``."""
    p, x, z = as_rat(p), as_rat(x), as_rat(z)
    if p.denominator != 1 or abs(p) <= 1:
        raise DomainError(f"integrality needs an integer p with |p| > 1, got {p}")
    c = coeffs(n, p, x, z)
    scale = (x.denominator * z.denominator) ** (2 * n)
    values = {"A": scale * c.A_tilde, "B": scale * c.B_tilde, "C": scale * c.C_tilde}
    failures = tuple(k for k, v in values.items() if v.denominator != 1)
    return IntegralityVerdict(n, scale, values, failures)
