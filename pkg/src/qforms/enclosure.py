"""Exact rationals and certified real enclosures.

``Rat`` is :class:`fractions.Fraction`; every scalar in the library is one.
An :class:`Enclosure` is a ball ``[mid - rad, mid + rad]`` with exact rational
endpoints.  All arithmetic on enclosures is outward: the true result of the
operation applied to any members of the operands lies in the result.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Iterable, Union

Rat = Fraction
RatLike = Union[int, Fraction, str]

_RAT_RE = re.compile(r"^\s*[+-]?\d+(\s*/\s*\d+)?\s*$")


def as_rat(value: RatLike) -> Fraction:
    """Coerce an int, Fraction or ``"a/b"`` string to an exact rational.

    Floats and decimal strings are rejected; the library never accepts
    inexact input.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        if not _RAT_RE.match(value):
            raise ValueError(f"not an exact rational: {value!r} (use 'a/b' or an integer)")
        return Fraction(value.replace(" ", ""))
    try:
        import gmpy2

        if isinstance(value, type(gmpy2.mpq())) or isinstance(value, type(gmpy2.mpz())):
            return Fraction(int(value.numerator), int(value.denominator))
    except ImportError:  # pragma: no cover
        pass
    raise TypeError(f"cannot use {type(value).__name__} as an exact rational")


def parse_eps(text: str) -> Fraction:
    """Parse a tolerance such as ``1e-12`` or ``1/1000`` exactly."""
    text = text.strip()
    if _RAT_RE.match(text):
        eps = Fraction(text.replace(" ", ""))
    elif re.match(r"^\d+(\.\d+)?[eE][+-]?\d+$", text):
        eps = Fraction(text)  # decimal scientific strings convert exactly
    else:
        raise ValueError(f"bad tolerance {text!r}")
    if eps <= 0:
        raise ValueError("tolerance must be positive")
    return eps


def floor_div_pow2(x: Fraction, bits: int) -> int:
    return (x.numerator << bits) // x.denominator


def round_dyadic(x: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    """Round ``x`` to the nearest multiple of ``2**-bits``.

    Returns ``(rounded, error)`` with ``|x - rounded| == error`` exactly.
    """
    if x.denominator <= (1 << bits) and ((1 << bits) % x.denominator == 0):
        return x, Fraction(0)
    scaled = ((x.numerator << (bits + 1)) // x.denominator + 1) >> 1
    r = Fraction(scaled, 1 << bits)
    return r, abs(x - r)


def sqrt_upper(x: Fraction, bits: int = 64) -> Fraction:
    """A rational upper bound for ``sqrt(x)``, tight to about ``2**-bits``."""
    if x < 0:
        raise ValueError("negative argument")
    if x == 0:
        return Fraction(0)
    scaled = floor_div_pow2(x, 2 * bits) + 1
    return Fraction(isqrt(scaled) + 1, 1 << bits)


def upper_bits(x: Fraction, bits: int = 64) -> Fraction:
    """Smallest multiple of ``2**(e - bits)`` that is ``>= x``, where ``e = floor(log2 x)``.

    Keeps about ``bits`` significant bits of a nonnegative bound, rounding up.
    """
    x = as_rat(x)
    if x <= 0:
        return x
    step = Fraction(2) ** (log2_floor(x) - bits)
    if (x / step).denominator == 1:
        return x
    return (x // step + 1) * step


def log2_floor(x: Fraction) -> int:
    """``floor(log2(|x|))`` for nonzero rational ``x``, computed exactly."""
    x = abs(x)
    if x == 0:
        raise ValueError("log of zero")
    e = x.numerator.bit_length() - x.denominator.bit_length()
    # 2**e is within a factor two of x; fix up
    if e >= 0:
        if x.numerator < (x.denominator << e):
            e -= 1
    else:
        if (x.numerator << -e) < x.denominator:
            e -= 1
    return e


@dataclass(frozen=True)
class Enclosure:
    """A certified real value: the truth lies in ``[mid - rad, mid + rad]``."""

    mid: Fraction
    rad: Fraction = Fraction(0)

    def __post_init__(self):
        if not isinstance(self.mid, Fraction):
            object.__setattr__(self, "mid", as_rat(self.mid))
        if not isinstance(self.rad, Fraction):
            object.__setattr__(self, "rad", as_rat(self.rad))
        if self.rad < 0:
            raise ValueError("negative radius")

    @classmethod
    def exact(cls, value: RatLike) -> "Enclosure":
        return cls(as_rat(value), Fraction(0))

    @classmethod
    def from_bounds(cls, lo: Fraction, hi: Fraction) -> "Enclosure":
        if lo > hi:
            raise ValueError("empty interval")
        return cls((lo + hi) / 2, (hi - lo) / 2)

    @property
    def lo(self) -> Fraction:
        return self.mid - self.rad

    @property
    def hi(self) -> Fraction:
        return self.mid + self.rad

    @property
    def magnitude(self) -> Fraction:
        """Upper bound for the absolute value of every member."""
        return abs(self.mid) + self.rad

    def is_exact(self) -> bool:
        return self.rad == 0

    def contains(self, value) -> bool:
        if isinstance(value, Enclosure):
            return self.lo <= value.lo and value.hi <= self.hi
        return self.lo <= as_rat(value) <= self.hi

    def __contains__(self, value) -> bool:
        return self.contains(value)

    def overlaps(self, other: "Enclosure") -> bool:
        other = _enc(other)
        return abs(self.mid - other.mid) <= self.rad + other.rad

    def excludes_zero(self) -> bool:
        return abs(self.mid) > self.rad

    def gap(self, other: "Enclosure") -> Fraction:
        """Distance between the two intervals (0 when they overlap)."""
        other = _enc(other)
        return max(Fraction(0), abs(self.mid - other.mid) - self.rad - other.rad)

    def widen(self, extra: Fraction) -> "Enclosure":
        return Enclosure(self.mid, self.rad + abs(as_rat(extra)))

    def rounded(self, bits: int) -> "Enclosure":
        """Snap the midpoint to the dyadic grid ``2**-bits``, widening outward."""
        mid, err = round_dyadic(self.mid, bits)
        rad = self.rad + err
        if rad.denominator > (1 << bits):
            # keep the radius representation small as well; round it up
            rad = Fraction(-((-rad.numerator << bits) // rad.denominator), 1 << bits)
        return Enclosure(mid, rad)

    # arithmetic -----------------------------------------------------------

    def __neg__(self):
        return Enclosure(-self.mid, self.rad)

    def __add__(self, other):
        other = _enc(other)
        return Enclosure(self.mid + other.mid, self.rad + other.rad)

    __radd__ = __add__

    def __sub__(self, other):
        other = _enc(other)
        return Enclosure(self.mid - other.mid, self.rad + other.rad)

    def __rsub__(self, other):
        return _enc(other) - self

    def __mul__(self, other):
        other = _enc(other)
        rad = abs(self.mid) * other.rad + abs(other.mid) * self.rad + self.rad * other.rad
        return Enclosure(self.mid * other.mid, rad)

    __rmul__ = __mul__

    def reciprocal(self) -> "Enclosure":
        if not self.excludes_zero():
            raise ZeroDivisionError("enclosure contains zero")
        m = abs(self.mid)
        return Enclosure(1 / self.mid, self.rad / (m * (m - self.rad)))

    def __truediv__(self, other):
        other = _enc(other)
        if other.rad == 0:
            if other.mid == 0:
                raise ZeroDivisionError("division by exact zero")
            return Enclosure(self.mid / other.mid, self.rad / abs(other.mid))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return _enc(other) / self

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only nonnegative integer powers")
        result = Enclosure.exact(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # rendering ------------------------------------------------------------

    def decimal(self, max_digits: int = 60) -> str:
        """Decimal digits certified by the enclosure (truncated, never rounded up).

        A digit is printed only if every member of the interval shares it.
        When the interval straddles zero the result is ``"0"`` for an exact
        zero, otherwise ``"±<bound>"``.
        """
        lo, hi = self.lo, self.hi
        if lo <= 0 <= hi:
            if lo == hi == 0:
                return "0"
            return "±" + _sci_upper(max(-lo, hi))
        sign = "-" if hi < 0 else ""
        a, b = (abs(hi), abs(lo)) if hi < 0 else (lo, hi)
        if int(a) != int(b):
            return sign + _sci_upper(b)  # integer part not certified; print a bound
        best = str(int(a))
        for k in range(1, max_digits + 1):
            ta = (a.numerator * 10**k) // a.denominator
            tb = (b.numerator * 10**k) // b.denominator
            if ta != tb:
                break
            s = str(ta).rjust(k + 1, "0")
            best = s[:-k] + "." + s[-k:]
        return sign + best

    def to_json(self) -> dict:
        return {
            "mid": str(self.mid),
            "rad": str(upper_bits(self.rad)),
            "decimal": self.decimal(),
        }

    def __str__(self):
        return f"{self.decimal()} (rad <= {_sci_upper(self.rad) if self.rad else '0'})"


def _sci_upper(x: Fraction) -> str:
    """Short decimal upper bound ``d.ddde±k`` for a nonnegative rational."""
    if x == 0:
        return "0"
    e = log2_floor(x) * 3 // 10  # rough decimal exponent, then fix up
    while Fraction(10) ** e > x:
        e -= 1
    while Fraction(10) ** (e + 1) <= x:
        e += 1
    m = x / Fraction(10) ** e
    digits = -((-m.numerator * 1000) // m.denominator)  # ceil to 3 decimals
    if digits >= 10000:
        digits, e = -(-digits // 10), e + 1
    s = str(digits)
    return f"{s[0]}.{s[1:]}e{e:+d}"


def _enc(value) -> Enclosure:
    if isinstance(value, Enclosure):
        return value
    return Enclosure(as_rat(value), Fraction(0))


def enclosure_sum(items: Iterable[Enclosure]) -> Enclosure:
    total = Enclosure.exact(0)
    for item in items:
        total = total + item
    return total


def common_intersection(encs: list[Enclosure]) -> tuple[bool, Fraction]:
    """Whether all intervals share a point, and the shared width or the gap."""
    lo = max(e.lo for e in encs)
    hi = min(e.hi for e in encs)
    if lo <= hi:
        return True, hi - lo
    return False, lo - hi
