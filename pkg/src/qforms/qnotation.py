"""Standard q-notation: Pochhammer symbols, q-binomials, basic hypergeometric sums."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .enclosure import Enclosure, RatLike, as_rat, round_dyadic
from .errors import DivergenceError, DomainError, NoCertifiedConvergence, PoleError
from .series import QSeries
from .summation import DEFAULT_BUDGET, SeriesSum, working_bits


def pochhammer(a: RatLike, q: RatLike, n: int) -> Fraction:
    """``(a; q)_n = prod_{j=1}^{n} (1 - a q^{j-1})``; ``n = 0`` gives 1."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    a, q = as_rat(a), as_rat(q)
    result = Fraction(1)
    term = a
    for _ in range(n):
        result *= 1 - term
        term *= q
    return result


def multi_pochhammer(params: Sequence[RatLike], q: RatLike, n: int) -> Fraction:
    result = Fraction(1)
    for a in params:
        result *= pochhammer(a, q, n)
    return result


def pochhammer_infinite(a: RatLike, q: RatLike, eps: RatLike) -> Enclosure:
    """Enclosure of ``prod_{j>=1} (1 - a q^{j-1})`` with radius ``<= eps``.

    Past index ``J`` with ``|a q^J| <= 1/2`` the tail factor ``T`` satisfies
    ``|log T| <= delta = 2|a||q|^J / (1 - |q|)``, hence
    ``|T - 1| <= delta / (1 - delta)``.
    """
    return _poch_inf(as_rat(a), as_rat(q), as_rat(eps)).enclosure


def _poch_inf(a: Fraction, q: Fraction, eps: Fraction, budget: int = DEFAULT_BUDGET) -> SeriesSum:
    if abs(q) >= 1:
        raise DivergenceError(f"infinite product needs |q| < 1, got q={q}")
    if eps <= 0:
        raise DomainError("eps must be positive")
    if a == 0:
        return SeriesSum(Enclosure.exact(1), 0)
    if q == 0:
        return SeriesSum(Enclosure.exact(1 - a), 1)
    bits = working_bits(eps) + 8
    aq = abs(q)
    prod = Enclosure.exact(1)
    w = a  # a q^{j-1}
    for j in range(1, budget + 1):
        if w == 1:
            return SeriesSum(Enclosure.exact(0), j)
        prod = (prod * (1 - w)).rounded(bits)
        w *= q
        # now prod holds factors 1..j; the remaining factors involve a q^j, a q^{j+1}, ...
        wa = abs(w)
        if wa > Fraction(1, 2):
            continue
        delta = 2 * wa / (1 - aq)
        if delta >= 1:
            continue
        extra = prod.magnitude * delta / (1 - delta)
        if extra <= eps / 2 and prod.rad + extra <= eps:
            return SeriesSum(prod.widen(extra), j)
    raise NoCertifiedConvergence("infinite product: budget exhausted")


@lru_cache(maxsize=4096)
def _qbinom_poly(n: int, k: int) -> tuple[int, ...]:
    """Integer coefficients of the Gaussian polynomial ``[n choose k]_q``."""
    if k < 0 or k > n:
        return ()
    if k == 0 or k == n:
        return (1,)
    a = _qbinom_poly(n - 1, k - 1)
    b = _qbinom_poly(n - 1, k)
    out = [0] * (k * (n - k) + 1)
    for i, c in enumerate(a):
        out[i] += c
    for i, c in enumerate(b):
        out[i + k] += c
    return tuple(out)


def qbinom(n: int, k: int, q: RatLike) -> Fraction:
    """Evaluate the q-binomial coefficient at a rational ``q``."""
    if not (0 <= k <= n):
        raise DomainError(f"q-binomial needs 0 <= k <= n, got n={n}, k={k}")
    q = as_rat(q)
    num = Fraction(1)
    den = Fraction(1)
    for i in range(1, k + 1):
        num *= 1 - q ** (n - k + i)
        den *= 1 - q**i
    if den == 0:
        # q is a root of unity; fall back on the polynomial, which is always defined
        return sum((c * q**i for i, c in enumerate(_qbinom_poly(n, k))), Fraction(0))
    return num / den


def qbinom_poly(n: int, k: int) -> tuple[int, ...]:
    if not (0 <= k <= n):
        raise DomainError(f"q-binomial needs 0 <= k <= n, got n={n}, k={k}")
    return _qbinom_poly(n, k)


def qbinom_series(n: int, k: int, M: int | None = None) -> QSeries:
    """``[n choose k]_q`` as a polynomial in ``q`` truncated at ``q^M``."""
    poly = qbinom_poly(n, k)
    if M is None:
        M = len(poly) - 1
    return QSeries(poly[: M + 1], M)


def qpoch_series(a: RatLike, shift: int, n: int, M: int) -> QSeries:
    """``(a q^shift; q)_n`` as a truncated series in ``q``."""
    s = QSeries.one(M)
    for j in range(n):
        s = _mul_factor(s, a, shift + j)
    return s


def _mul_factor(s: QSeries, a, k: int) -> QSeries:
    if k == 0:
        return s.scale(1 - as_rat(a))
    return s.mul_binomial(a, k)


def phi_rs(
    upper: Sequence[RatLike],
    lower: Sequence[RatLike],
    q: RatLike,
    zz: RatLike,
    eps: RatLike,
    budget: int = DEFAULT_BUDGET,
) -> Enclosure:
    """Certified value of the basic hypergeometric series ``r phi s``.

    Terms are ``(a;q)_n / (q, b;q)_n * ((-1)^n q^{n(n-1)/2})^{s+1-r} * zz^n``.
    """
    return phi_rs_sum(upper, lower, q, zz, eps, budget).enclosure


def phi_rs_sum(upper, lower, q, zz, eps, budget: int = DEFAULT_BUDGET) -> SeriesSum:
    ups = [as_rat(a) for a in upper]
    lows = [as_rat(b) for b in lower]
    q, zz, eps = as_rat(q), as_rat(zz), as_rat(eps)
    if abs(q) >= 1:
        raise DivergenceError(f"basic hypergeometric series needs |q| < 1, got {q}")
    excess = len(lows) + 1 - len(ups)
    bits = working_bits(eps)
    aq = abs(q)
    term = Fraction(1)
    total = Fraction(1)
    err = Fraction(0)
    qn = Fraction(1)  # q^n
    for n in range(budget + 1):
        # ratio term_{n+1} / term_n
        num = Fraction(1)
        terminates = False
        for a in ups:
            f = 1 - a * qn
            if f == 0:
                terminates = True
            num *= f
        den = 1 - qn * q
        for b in lows:
            f = 1 - b * qn
            if f == 0:
                raise PoleError(f"lower parameter {b} gives a zero denominator at n={n + 1}")
            den *= f
        if terminates or zz == 0:
            return SeriesSum(Enclosure(total, err), n + 1)
        # certified bound on every later ratio
        qN = abs(qn)
        if excess >= 0:
            rho_num = abs(zz) * qN**excess
            for a in ups:
                rho_num *= 1 + abs(a) * qN
            rho_den = 1 - qN * aq
            ok = True
            for b in lows:
                d = 1 - abs(b) * qN
                if d <= 0:
                    ok = False
                rho_den *= d
            if ok and rho_den > 0:
                rho = rho_num / rho_den
                if rho < 1:
                    tail = abs(term) * rho / (1 - rho)
                    if tail <= eps / 2:
                        return SeriesSum(Enclosure(total, err + tail), n + 1)
        sign_pow = (-qn) ** excess if excess >= 0 else 1 / (-qn) ** (-excess)
        term = term * num / den * sign_pow * zz
        r, e = round_dyadic(term, bits)
        total += r
        err += e
        qn *= q
    raise NoCertifiedConvergence(f"{len(ups)}phi{len(lows)}: no certified convergence within {budget} terms")
