"""Certified summation of convergent series with exact rational terms.

Terms are produced exactly, rounded onto a dyadic grid fine enough that the
accumulated rounding error is negligible against ``eps``, and summed until a
caller-supplied tail bound certifies the remainder.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterator, NamedTuple, Optional

from .enclosure import Enclosure, round_dyadic
from .errors import NoCertifiedConvergence

DEFAULT_BUDGET = 10_000


class SeriesSum(NamedTuple):
    enclosure: Enclosure
    terms: int


def working_bits(eps: Fraction, guard: int = 40) -> int:
    """Bits of the dyadic grid used for an absolute target ``eps``."""
    return max(eps.denominator.bit_length() - eps.numerator.bit_length(), 0) + guard


def ratio_tail(last_abs: Fraction, rho: Fraction) -> Optional[Fraction]:
    """``sum_{k>=1} last * rho^k`` if ``rho < 1``, else ``None``."""
    if rho >= 1:
        return None
    return last_abs * rho / (1 - rho)


def poly_geom_tail(v: Fraction, S: int, deg: int) -> Optional[Fraction]:
    """Upper bound for ``sum_{s>S} s^deg v^s`` with ``0 <= v < 1``."""
    if v == 0:
        return Fraction(0)
    if S < 0:
        S = 0
    rho = Fraction(S + 2, S + 1) ** deg * v
    if rho >= 1:
        return None
    return Fraction(S + 1) ** deg * v ** (S + 1) / (1 - rho)


def certified_sum(
    terms: Iterator[Fraction],
    tail_after: Callable[[int, Fraction], Optional[Fraction]],
    eps: Fraction,
    budget: int = DEFAULT_BUDGET,
    what: str = "series",
    min_terms: int = 0,
) -> SeriesSum:
    """Sum ``terms`` until ``tail_after(i, term_i)`` is at most ``eps / 2``.

    ``tail_after(i, t)`` receives the index (0-based position in the stream)
    and exact value of the last summed term and must return a bound on the
    absolute sum of all later terms, or ``None`` when none is available yet.
    The result has radius ``<= eps``.
    """
    bits = working_bits(eps)
    half = eps / 2
    total = Fraction(0)
    err = Fraction(0)
    i = -1
    for i, t in enumerate(terms):
        if i > budget:
            raise NoCertifiedConvergence(f"{what}: no certified tail bound within {budget} terms")
        if t:
            r, e = round_dyadic(t, bits)
            total += r
            err += e
        if i + 1 < min_terms:
            continue
        tail = tail_after(i, t)
        if tail is not None and tail <= half:
            return SeriesSum(Enclosure(total, err + tail), i + 1)
    # the stream ended: the series is a finite sum
    return SeriesSum(Enclosure(total, err), i + 1)
