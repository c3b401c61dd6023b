"""Truncated formal power series in ``q`` with exact rational coefficients."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from .enclosure import Enclosure, RatLike, as_rat, round_dyadic
from .errors import DivergenceError, NonInvertibleError

_ZERO = Fraction(0)
_ONE = Fraction(1)


class QSeries:
    """``c_0 + c_1 q + ... + c_M q^M + O(q^{M+1})``.

    Coefficients beyond ``q^M`` are unknown.  Binary operations truncate to
    the smaller of the two operands' orders.
    """

    __slots__ = ("coeffs", "trunc_order")

    def __init__(self, coeffs: Iterable[RatLike], trunc_order: int | None = None):
        cs = [as_rat(c) for c in coeffs]
        if trunc_order is None:
            trunc_order = len(cs) - 1
        if trunc_order < 0:
            raise ValueError("truncation order must be >= 0")
        if len(cs) > trunc_order + 1:
            cs = cs[: trunc_order + 1]
        else:
            cs.extend([_ZERO] * (trunc_order + 1 - len(cs)))
        self.coeffs: tuple[Fraction, ...] = tuple(cs)
        self.trunc_order = trunc_order

    @classmethod
    def _raw(cls, coeffs: list[Fraction]) -> "QSeries":
        obj = cls.__new__(cls)
        obj.coeffs = tuple(coeffs)
        obj.trunc_order = len(coeffs) - 1
        return obj

    # constructors ---------------------------------------------------------

    @classmethod
    def zero(cls, M: int) -> "QSeries":
        return cls._raw([_ZERO] * (M + 1))

    @classmethod
    def one(cls, M: int) -> "QSeries":
        return cls.constant(1, M)

    @classmethod
    def constant(cls, c: RatLike, M: int) -> "QSeries":
        cs = [_ZERO] * (M + 1)
        cs[0] = as_rat(c)
        return cls._raw(cs)

    @classmethod
    def monomial(cls, c: RatLike, k: int, M: int) -> "QSeries":
        cs = [_ZERO] * (M + 1)
        if k <= M:
            cs[k] = as_rat(c)
        return cls._raw(cs)

    # basic protocol -------------------------------------------------------

    def __len__(self):
        return len(self.coeffs)

    def coeff(self, k: int) -> Fraction:
        if k < 0:
            return _ZERO
        if k > self.trunc_order:
            raise IndexError(f"coefficient of q^{k} unknown beyond order {self.trunc_order}")
        return self.coeffs[k]

    __getitem__ = coeff

    def __eq__(self, other):
        if not isinstance(other, QSeries):
            return NotImplemented
        return self.trunc_order == other.trunc_order and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.trunc_order, self.coeffs))

    def agrees_with(self, other: "QSeries") -> bool:
        """Coefficientwise equality up to the shared truncation order."""
        M = min(self.trunc_order, other.trunc_order)
        return self.coeffs[: M + 1] == other.coeffs[: M + 1]

    def first_mismatch(self, other: "QSeries") -> int | None:
        M = min(self.trunc_order, other.trunc_order)
        for k in range(M + 1):
            if self.coeffs[k] != other.coeffs[k]:
                return k
        return None

    def ord(self) -> int:
        """Index of the first nonzero stored coefficient.

        When every stored coefficient vanishes the answer ``M + 1`` is only a
        lower bound; see :meth:`ord_is_exact`.
        """
        for k, c in enumerate(self.coeffs):
            if c:
                return k
        return self.trunc_order + 1

    def ord_is_exact(self) -> bool:
        return any(self.coeffs)

    def ord_str(self) -> str:
        k = self.ord()
        return str(k) if self.ord_is_exact() else f">={k}"

    def truncate(self, M: int) -> "QSeries":
        if M > self.trunc_order:
            raise ValueError("cannot extend a truncated series")
        return QSeries._raw(list(self.coeffs[: M + 1]))

    def __repr__(self):
        terms = [f"{c}*q^{k}" for k, c in enumerate(self.coeffs) if c]
        body = " + ".join(terms[:8]) + (" + ..." if len(terms) > 8 else "")
        return f"QSeries({body or '0'} + O(q^{self.trunc_order + 1}))"

    # ring operations ------------------------------------------------------

    def _coerce(self, other) -> "QSeries":
        if isinstance(other, QSeries):
            return other
        return QSeries.constant(as_rat(other), self.trunc_order)

    def __add__(self, other):
        other = self._coerce(other)
        M = min(self.trunc_order, other.trunc_order)
        a, b = self.coeffs, other.coeffs
        return QSeries._raw([a[k] + b[k] for k in range(M + 1)])

    __radd__ = __add__

    def __neg__(self):
        return QSeries._raw([-c for c in self.coeffs])

    def __sub__(self, other):
        other = self._coerce(other)
        M = min(self.trunc_order, other.trunc_order)
        a, b = self.coeffs, other.coeffs
        return QSeries._raw([a[k] - b[k] for k in range(M + 1)])

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c: RatLike) -> "QSeries":
        c = as_rat(c)
        if c == 1:
            return self
        return QSeries._raw([c * a for a in self.coeffs])

    def __mul__(self, other):
        if not isinstance(other, QSeries):
            return self.scale(other)
        M = min(self.trunc_order, other.trunc_order)
        a, b = self.coeffs, other.coeffs
        out = [_ZERO] * (M + 1)
        bnz = [(j, c) for j, c in enumerate(b[: M + 1]) if c]
        for i in range(M + 1):
            ai = a[i]
            if not ai:
                continue
            lim = M - i
            for j, bj in bnz:
                if j > lim:
                    break
                out[i + j] += ai * bj
        return QSeries._raw(out)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, k: int):
        if k < 0:
            return self.invert() ** (-k)
        result = QSeries.one(self.trunc_order)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def invert(self) -> "QSeries":
        c0 = self.coeffs[0]
        if c0 == 0:
            raise NonInvertibleError("constant term is zero")
        M = self.trunc_order
        a = self.coeffs
        inv0 = 1 / c0
        out = [inv0] + [_ZERO] * M
        nz = [(j, c) for j, c in enumerate(a) if c and j > 0]
        for k in range(1, M + 1):
            s = _ZERO
            for j, aj in nz:
                if j > k:
                    break
                s += aj * out[k - j]
            out[k] = -s * inv0
        return QSeries._raw(out)

    def __truediv__(self, other):
        if isinstance(other, QSeries):
            return self * other.invert()
        return self.scale(1 / as_rat(other))

    # sparse factor updates (O(M) each) -------------------------------------

    def shift(self, k: int) -> "QSeries":
        """Multiply by ``q^k`` (k >= 0), keeping the truncation order."""
        if k == 0:
            return self
        M = self.trunc_order
        return QSeries._raw([_ZERO] * min(k, M + 1) + list(self.coeffs[: max(M + 1 - k, 0)]))

    def mul_binomial(self, a: RatLike, k: int) -> "QSeries":
        """Multiply by ``(1 - a q^k)``."""
        a = as_rat(a)
        if a == 0 or k > self.trunc_order:
            return self
        c = list(self.coeffs)
        src = self.coeffs
        for i in range(k, len(c)):
            if src[i - k]:
                c[i] -= a * src[i - k]
        return QSeries._raw(c)

    def div_binomial(self, a: RatLike, k: int) -> "QSeries":
        """Multiply by ``1/(1 - a q^k)`` expanded geometrically (k >= 1)."""
        a = as_rat(a)
        if k == 0:
            d = 1 - a
            if d == 0:
                raise NonInvertibleError("factor 1 - a has zero constant term")
            return self.scale(1 / d)
        if a == 0 or k > self.trunc_order:
            return self
        c = list(self.coeffs)
        for i in range(k, len(c)):
            if c[i - k]:
                c[i] += a * c[i - k]
        return QSeries._raw(c)

    def substitute_power(self, k: int, M: int | None = None) -> "QSeries":
        """The series ``H(q^k)``; its known order is limited by both inputs."""
        if k < 1:
            raise ValueError("k must be positive")
        known = k * (self.trunc_order + 1) - 1
        M = known if M is None else min(M, known)
        out = [_ZERO] * (M + 1)
        for r, c in enumerate(self.coeffs):
            if r * k > M:
                break
            out[r * k] = c
        return QSeries._raw(out)

    # evaluation -----------------------------------------------------------

    def eval_at(self, q0: RatLike, tail_C: RatLike, tail_g: RatLike, bits: int | None = None) -> Enclosure:
        """Enclose the value of the underlying (untruncated) series at ``q0``.

        The caller certifies ``|c_k| <= tail_C * tail_g**k`` for all ``k > M``;
        the discarded tail is then at most ``C rho^(M+1) / (1 - rho)`` with
        ``rho = tail_g |q0| < 1``.
        """
        q0, C, g = as_rat(q0), as_rat(tail_C), as_rat(tail_g)
        rho = g * abs(q0)
        if not abs(q0) < 1 or rho >= 1:
            raise DivergenceError(f"tail bound does not converge at q={q0} (g|q| = {rho})")
        M = self.trunc_order
        total = _ZERO
        err = _ZERO
        power = _ONE
        for c in self.coeffs:
            if c:
                term = c * power
                if bits is not None:
                    term, e = round_dyadic(term, bits)
                    err += e
                total += term
            power *= q0
        tail = C * rho ** (M + 1) / (1 - rho)
        return Enclosure(total, err + tail)

    def to_json(self) -> dict:
        return {"trunc_order": self.trunc_order, "coeffs": [str(c) for c in self.coeffs]}


def series_sum(items: Sequence[QSeries], M: int) -> QSeries:
    total = QSeries.zero(M)
    for s in items:
        total = total + s
    return total
