"""Hankel determinants of the remainders, q-order checks and decay certificates.

The shift-difference operator ``D_l = (N; q)_l`` acts on index sequences
through ``D_l s_n = sum_k (-1)^k q^{k(k-1)/2} [l, k]_q s_{n-k}``.  Applied to
the remainders ``v_n*`` it raises their ``q``-order, which in turn forces the
Hankel determinants ``V_n* = det(v*_{j+l})`` to start at
``q^{n(n-1)(2n-1)/6}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Sequence

import numpy as np

from .enclosure import Enclosure, RatLike, as_rat, log2_floor, sqrt_upper, upper_bits
from .errors import (
    DomainError,
    IndexUnderflow,
    InsufficientTruncation,
    PrecisionExhausted,
    QFormsError,
)
from .functions import eval_ell, power_index
from .pade import (
    LinearForm,
    linear_form,
    majorant_bound,
    majorant_radius,
    remainder_series,
    remainder_star_enclosure,
)
from .parallel import pmap
from .qnotation import qbinom, qbinom_series
from .series import QSeries


# --- sequences and the shift-difference operator --------------------------------


@dataclass(frozen=True)
class SeqOfSeries:
    """``s_0, ..., s_K``: truncated series sharing one truncation order."""

    items: tuple

    def __post_init__(self):
        items = tuple(self.items)
        if not items:
            raise ValueError("empty sequence")
        M = items[0].trunc_order
        if any(s.trunc_order != M for s in items):
            raise ValueError("all members must share one truncation order")
        object.__setattr__(self, "items", items)

    @property
    def K(self) -> int:
        return len(self.items) - 1

    @property
    def trunc_order(self) -> int:
        return self.items[0].trunc_order

    def __getitem__(self, n: int) -> QSeries:
        return self.items[n]

    def __len__(self):
        return len(self.items)


def difference_coefficients(l: int, q: RatLike | None = None, M: int | None = None) -> list:
    """The weights ``(-1)^k q^{k(k-1)/2} [l, k]_q`` for ``k = 0..l``.

    With ``q=None`` the weights are polynomials in a formal ``q`` (as
    :class:`QSeries` truncated at ``M``); otherwise exact rationals.
    """
    out = []
    for k in range(l + 1):
        sign = -1 if k % 2 else 1
        if q is None:
            if M is None:
                raise ValueError("a truncation order is needed for formal q")
            poly = qbinom_series(l, k, M)
            out.append(poly.shift(k * (k - 1) // 2).scale(sign))
        else:
            qv = as_rat(q)
            out.append(sign * qv ** (k * (k - 1) // 2) * qbinom(l, k, qv))
    return out


def shift_difference(l: int, s: Sequence, n: int, q: RatLike | None = None):
    """``(D_l s)_n``; ``q=None`` treats ``q`` as the formal variable of the series."""
    if l < 0:
        raise DomainError("l must be nonnegative")
    if n < l:
        raise IndexUnderflow(f"D_{l} at index {n} needs s_{n - l}, which does not exist")
    if n >= len(s):
        raise IndexUnderflow(f"sequence has no member s_{n}")
    M = s[n].trunc_order if q is None else None
    weights = difference_coefficients(l, q, M)
    total = None
    for k, w in enumerate(weights):
        term = s[n - k] * w if q is None else _scale(s[n - k], w)
        total = term if total is None else total + term
    return total


def _scale(item, w: Fraction):
    if isinstance(item, LinearForm):
        return item.scale(w)
    if isinstance(item, QSeries):
        return item.scale(w)
    return item * w


def lemma_bound(n: int, l: int) -> int:
    return n * l - l * (l - 1) // 2


def hankel_bound(n: int) -> int:
    return n * (n - 1) * (2 * n - 1) // 6


@dataclass(frozen=True)
class OrderVerdict:
    kind: str
    n: int
    l: int | None
    bound: int
    order: int
    exact: bool
    trunc_order: int

    @property
    def passed(self) -> bool:
        return self.order >= self.bound

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "l": self.l,
            "bound": self.bound,
            "ord": self.order if self.exact else f">={self.order}",
            "trunc_order": self.trunc_order,
            "passed": self.passed,
        }


def _order_verdict(kind, n, l, bound, series: QSeries) -> OrderVerdict:
    if series.trunc_order < bound and series.ord() > series.trunc_order:
        raise InsufficientTruncation(f"order {series.trunc_order} cannot certify ord >= {bound}")
    return OrderVerdict(kind, n, l, bound, series.ord(), series.ord_is_exact(), series.trunc_order)


def w_sequence(H: QSeries, t: int, upto: int, M: int) -> list[QSeries]:
    """``w_j = q^{(j+1)t} prod_{k=1}^{j} H(q^k)`` for ``j = 0..upto``."""
    if H.coeff(0) != 1:
        raise DomainError("H must start from the constant term 1")
    M = min(M, H.trunc_order)
    out = []
    prod = QSeries.one(M)
    for j in range(upto + 1):
        if j > 0:
            prod = prod * H.substitute_power(j, M)
        out.append(prod.shift((j + 1) * t))
    return out


def lemma1_check(H: QSeries, t: int, n: int, l: int, M: int) -> OrderVerdict:
    """Verify ``ord(D_l w_n(H, t)) >= nl - l(l-1)/2``."""
    if not 0 <= l <= n:
        raise DomainError("need 0 <= l <= n")
    bound = lemma_bound(n, l)
    if M < bound:
        raise InsufficientTruncation(f"M={M} is below the bound {bound}")
    w = w_sequence(H, t, n, M)
    return _order_verdict("lemma1", n, l, bound, shift_difference(l, w, n))


def lemma1_sequence_check(seq: Sequence[QSeries], n: int, l: int) -> OrderVerdict:
    """The same bound for an arbitrary sequence, e.g. the remainders ``v_n*``."""
    return _order_verdict("lemma1", n, l, lemma_bound(n, l), shift_difference(l, seq, n))


def remainder_sequence(count: int, p: RatLike, x: RatLike, z: RatLike, M: int, threads: int | None = 1) -> SeqOfSeries:
    """``v_0*, ..., v_{count-1}*`` as series truncated at a common ``M``."""
    jobs = [(j, as_rat(p), as_rat(x), as_rat(z), M) for j in range(count)]
    return SeqOfSeries(tuple(pmap(_remainder_job, jobs, threads)))


def _remainder_job(args):
    j, p, x, z, M = args
    return remainder_series(j, p, x, z, M)


# --- determinants ---------------------------------------------------------------


def bareiss_det(matrix: Sequence[Sequence[int]]) -> int:
    """Fraction-free (Bareiss) determinant of an integer matrix."""
    a = [list(map(int, row)) for row in matrix]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
        prev = akk
    return sign * a[n - 1][n - 1]


def rational_det(matrix: Sequence[Sequence[RatLike]]) -> Fraction:
    """Exact determinant of a rational matrix: clear row denominators, then Bareiss."""
    rows = [[as_rat(v) for v in row] for row in matrix]
    scale = Fraction(1)
    ints = []
    for row in rows:
        d = 1
        for v in row:
            d = d * v.denominator // math.gcd(d, v.denominator)
        ints.append([int(v * d) for v in row])
        scale *= d
    return Fraction(bareiss_det(ints)) / scale


def series_det(matrix: Sequence[Sequence[QSeries]]) -> QSeries:
    """Determinant over the truncated-series ring.

    Gaussian elimination with pivots whose constant term is nonzero (units);
    when a column has no unit left, the remaining block is expanded by
    cofactors.
    """
    a = [list(row) for row in matrix]
    n = len(a)
    if n == 0:
        raise ValueError("empty matrix")
    M = min(e.trunc_order for row in a for e in row)
    result = QSeries.one(M)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c].coeff(0) != 0), None)
        if piv is None:
            block = [row[c:] for row in a[c:]]
            return result * series_det_cofactor(block)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            result = -result
        pivot = a[c][c]
        result = result * pivot
        inv = pivot.invert()
        for r in range(c + 1, n):
            if not a[r][c].ord_is_exact():
                continue
            f = a[r][c] * inv
            a[r] = [a[r][j] - f * a[c][j] if j > c else a[r][j] for j in range(n)]
    return result


def series_det_cofactor(matrix: Sequence[Sequence[QSeries]]) -> QSeries:
    """Laplace expansion along the first row (exponential; small matrices only)."""
    n = len(matrix)
    if n == 1:
        return matrix[0][0]
    total = None
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in matrix[1:]]
        term = matrix[0][j] * series_det_cofactor(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total


def hankel_series(n: int, p: RatLike, x: RatLike, z: RatLike, M: int, threads: int | None = 1) -> QSeries:
    """``V_n* = det(v*_{j+l})_{0<=j,l<n}`` exactly modulo ``q^{M+1}``."""
    if n < 1:
        raise DomainError("n must be >= 1")
    seq = remainder_sequence(2 * n - 1, p, x, z, M, threads)
    return series_det([[seq[j + l] for l in range(n)] for j in range(n)])


def hankel_order_check(
    n: int, p: RatLike, x: RatLike, z: RatLike, threads: int | None = 1, M: int | None = None
) -> OrderVerdict:
    """``ord V_n* >= n(n-1)(2n-1)/6``, by default with ``M = bound + 10``."""
    bound = hankel_bound(n)
    V = hankel_series(n, p, x, z, bound + 10 if M is None else M, threads)
    return _order_verdict("hankel", n, None, bound, V)


def hankel_series_enclosure(n: int, p: RatLike, x: RatLike, z: RatLike, M: int | None = None) -> Enclosure:
    """``(xz)^{n(2n-1)}`` times ``V_n*`` evaluated from its truncated series at ``q = 1/p``.

    Tail: every entry ``v_m*`` has ``|[q^k] v_m*| <= F_m(r) / r^k`` (see
    ``majorant_bound``), so each product along a permutation has coefficients
    at most ``prod F / r^k``; summing over permutations, the coefficients of
    ``V_n*`` are at most ``perm(F_{j+l}(r)) / r^k``.
    """
    p, x, z = as_rat(p), as_rat(x), as_rat(z)
    if M is None:
        M = hankel_bound(n) + 60
    r = majorant_radius(p, x, z)
    F = [majorant_bound(m, x, z, r) for m in range(2 * n - 1)]
    perm = Fraction(0)
    for sigma in permutations(range(n)):
        prod = Fraction(1)
        for j in range(n):
            prod *= F[j + sigma[j]]
        perm += prod
    V = hankel_series(n, p, x, z, M)
    value = V.eval_at(1 / p, perm, 1 / r)
    return value * (x * z) ** (n * (2 * n - 1))


# --- numeric Hankel determinants ------------------------------------------------


def precision_target(n: int, p: RatLike) -> int:
    """Relative precision (bits) for ``V_n``: ``ceil(n^3 log2|p| / 3) + 64``."""
    return math.ceil(n**3 * math.log2(abs(float(as_rat(p)))) / 3) + 64


def star_entries(count: int, p: RatLike, x: RatLike, z: RatLike, bits: int, threads: int | None = 1) -> list[Enclosure]:
    """Enclosures of ``v_0*, ..., v_{count-1}*`` with radius ``<= 2^-bits``."""
    jobs = [(j, as_rat(p), as_rat(x), as_rat(z), bits) for j in range(count)]
    return pmap(_star_job, jobs, threads)


def _star_job(args):
    j, p, x, z, bits = args
    return remainder_star_enclosure(j, p, x, z, Fraction(1, 1 << bits)).rounded(bits + 8)


def enclosure_det(matrix: Sequence[Sequence[Enclosure]]) -> Enclosure:
    """Determinant of a matrix of enclosures.

    Midpoints (dyadic after rounding) go through exact Bareiss elimination;
    the radius comes from the column-wise Hadamard perturbation bound
    ``|det(A + E) - det(A)| <= prod(|a_j| + |e_j|) - prod |a_j|``.
    """
    n = len(matrix)
    mids = [[e.mid for e in row] for row in matrix]
    det_mid = rational_det(mids)
    a_norm = []
    e_norm = []
    for j in range(n):
        a_norm.append(sqrt_upper(sum((mids[i][j] ** 2 for i in range(n)), Fraction(0)), 96))
        # the 1-norm dominates the Euclidean norm and needs no square root
        e_norm.append(sum((matrix[i][j].rad for i in range(n)), Fraction(0)))
    with_err = Fraction(1)
    without = Fraction(1)
    for an, en in zip(a_norm, e_norm):
        with_err *= an + en
        without *= an
    return Enclosure(det_mid, with_err - without)


@dataclass(frozen=True)
class HankelValue:
    n: int
    V: Enclosure  # V_n(ell_p(x, z))
    star: Enclosure  # V_n*
    bits: int

    def rel_bits(self) -> int | None:
        """Certified relative precision in bits (None if 0 is not excluded)."""
        if not self.star.excludes_zero() or self.star.rad == 0:
            return None if not self.star.excludes_zero() else 10**9
        return log2_floor(self.star.mid) - log2_floor(self.star.rad) - 1


def hankel_numeric(
    n: int,
    p: RatLike,
    x: RatLike,
    z: RatLike,
    prec_bits: int | None = None,
    retries: int = 4,
    threads: int | None = 1,
    _entries: list[Enclosure] | None = None,
) -> HankelValue:
    """Certified ``V_n(ell_p(x, z)) = (xz)^{n(2n-1)} det(v*_{j+l})``.

    The working precision is raised until the relative radius is below
    ``2^-prec_bits``; ``PrecisionExhausted`` after ``retries`` increases.
    """
    p, x, z = as_rat(p), as_rat(x), as_rat(z)
    if n < 1:
        raise DomainError("n must be >= 1")
    if prec_bits is None:
        prec_bits = precision_target(n, p)
    scale = (x * z) ** (n * (2 * n - 1))
    if scale == 0:
        zero = Enclosure.exact(0)
        return HankelValue(n, zero, zero, 0)
    logp = math.log2(abs(float(p)))
    bits = prec_bits + math.ceil(hankel_bound(n) * logp) + 16 * n + 32
    entries = _entries
    for attempt in range(retries + 1):
        if entries is None or attempt > 0:
            entries = star_entries(2 * n - 1, p, x, z, bits, threads)
        star = enclosure_det([[entries[j + l] for l in range(n)] for j in range(n)])
        hv = HankelValue(n, star * scale, star, bits)
        got = hv.rel_bits()
        if got is not None and got >= prec_bits:
            return hv
        if star.excludes_zero():
            bits += prec_bits - got + 32
        else:
            bits *= 2
    raise PrecisionExhausted(f"V_{n}: relative precision 2^-{prec_bits} not reached after {retries} retries")


# --- alternative linear forms v_n' ------------------------------------------------


@dataclass(frozen=True)
class VPrimeResult:
    n: int
    form: LinearForm  # k-sum with integral coefficients
    dn_form: LinearForm  # the same form assembled from D_n acting on v*
    series: QSeries  # D_n v*_{2n}
    prefactor: Fraction  # (xz)^{4n+1} p^{n(n-1)/2}
    verdict: OrderVerdict

    @property
    def forms_equal(self) -> bool:
        return self.form == self.dn_form

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "a": str(self.form.a),
            "b": str(self.form.b),
            "forms_equal": self.forms_equal,
            "order": self.verdict.to_json(),
        }


def vprime_form(n: int, p: RatLike, x: RatLike, z: RatLike) -> LinearForm:
    """``v_n'(mu) = sum_k (-1)^k p^{(n-k)(n-k-1)/2} [n, k]_p (xz)^{2k} v_{2n-k}(mu)``."""
    p, x, z = as_rat(p), as_rat(x), as_rat(z)
    xz = x * z
    total = LinearForm(n, Fraction(0), Fraction(0))
    for k in range(n + 1):
        c = (-1) ** k * p ** ((n - k) * (n - k - 1) // 2) * qbinom(n, k, p) * xz ** (2 * k)
        total = total + linear_form(2 * n - k, p, x, z).scale(c)
    return LinearForm(n, total.a, total.b)


def vprime_dn_form(n: int, p: RatLike, x: RatLike, z: RatLike) -> LinearForm:
    """``(xz)^{4n+1} p^{n(n-1)/2} (D_n v*)_{2n}`` with ``v*_m(mu) = (xz)^{-2m-1} v_m(mu)``."""
    p, x, z = as_rat(p), as_rat(x), as_rat(z)
    q = 1 / p
    xz = x * z
    stars = [linear_form(m, p, x, z).scale(xz ** (-2 * m - 1)) for m in range(2 * n + 1)]
    d = shift_difference(n, stars, 2 * n, q)
    pref = xz ** (4 * n + 1) * p ** (n * (n - 1) // 2)
    return LinearForm(n, pref * d.a, pref * d.b)


def vprime_bound(n: int) -> int:
    return n * (n + 1)


def vprime(n: int, p: RatLike, x: RatLike, z: RatLike, M: int | None = None, seq: SeqOfSeries | None = None) -> VPrimeResult:
    """Both forms of ``v_n'`` and the order check ``ord_q v_n'(ell_p) >= n(n+1)``.

    The series ``D_n v*_{2n}`` must start at ``q^{n(n+1) + n(n-1)/2}``; the
    prefactor ``p^{n(n-1)/2}`` lowers that by ``n(n-1)/2``.
    """
    p, x, z = as_rat(p), as_rat(x), as_rat(z)
    shift = n * (n - 1) // 2
    bound = vprime_bound(n) + shift
    if M is None:
        M = bound + 10
    if seq is None:
        seq = remainder_sequence(2 * n + 1, p, x, z, M)
    D = shift_difference(n, seq, 2 * n)
    v = _order_verdict("vprime", n, None, bound, D)
    # report the order of the composite v_n'(ell_p) expansion itself
    verdict = OrderVerdict("vprime", n, None, vprime_bound(n), v.order - shift, v.exact, v.trunc_order - shift)
    pref = (x * z) ** (4 * n + 1) * p**shift
    return VPrimeResult(n, vprime_form(n, p, x, z), vprime_dn_form(n, p, x, z), D, pref, verdict)


def vprime_numeric_check(n: int, p: RatLike, x: RatLike, z: RatLike, eps: RatLike | None = None) -> tuple:
    """Evaluate ``v_n'`` two ways: the k-sum form at an enclosure of ``ell_p``,
    and the prefactor times ``(D_n v*)_{2n}`` built from numeric ``v_m*``.

    Returns ``(lhs, rhs)``; they must overlap.  The default ``eps`` sits 64
    bits below the expected size ``|p|^{-n(n+1)}`` so the overlap is not vacuous.
    """
    p, x, z = as_rat(p), as_rat(x), as_rat(z)
    if eps is None:
        eps = Fraction(1, 2**64) / abs(p) ** (n * (n + 1)) * min(Fraction(1), abs(x * z) ** (4 * n + 1) or 1)
    eps = as_rat(eps)
    form = vprime_form(n, p, x, z)
    ell = eval_ell(p, x, z, eps / max(abs(form.a), Fraction(1)))
    lhs = form(ell)
    pref = (x * z) ** (4 * n + 1) * p ** (n * (n - 1) // 2)
    weights = difference_coefficients(n, 1 / p)
    inner_eps = eps / max(abs(pref), Fraction(1)) / (sum(abs(w) for w in weights) + 1)
    rhs = Enclosure.exact(0)
    for k, w in enumerate(weights):
        rhs = rhs + remainder_star_enclosure(2 * n - k, p, x, z, inner_eps) * w
    return lhs, rhs * pref


# --- decay fit and certificates ----------------------------------------------------


def log_abs(value: Fraction) -> float:
    """Natural log of ``|value|`` without float under/overflow."""
    if value == 0:
        raise ValueError("log of zero")
    return math.log(abs(value.numerator)) - math.log(value.denominator)


@dataclass(frozen=True)
class DecayFit:
    a: float
    b: float
    c: float
    target: float
    tolerance: float
    points: int

    @property
    def within_tolerance(self) -> bool:
        return abs(self.a - self.target) <= self.tolerance

    def predict(self, n: float) -> float:
        return self.a * n**3 + self.b * n**2 + self.c * n

    def to_json(self) -> dict:
        return {
            "a": repr(self.a),
            "b": repr(self.b),
            "c": repr(self.c),
            "target_a": repr(self.target),
            "tolerance": repr(self.tolerance),
            "points": self.points,
            "within_tolerance": self.within_tolerance,
        }


DECAY_TOLERANCE = 0.15


def decay_fit(values: dict | Sequence, p: RatLike, tolerance: float = DECAY_TOLERANCE) -> DecayFit:
    """Least-squares fit of ``log|V_n| ~ a n^3 + b n^2 + c n``.

    ``values`` maps ``n`` to ``log|V_n|`` (floats) or is a sequence of
    ``(n, log|V_n|)`` pairs.  ``target`` is ``-log|p| / 3``.
    """
    pairs = sorted(values.items() if isinstance(values, dict) else values)
    pairs = [(n, v) for n, v in pairs if v is not None and math.isfinite(v)]
    if not pairs:
        raise QFormsError("degenerate fit: no nonzero values")
    if len(pairs) < 4:
        raise QFormsError("decay fit needs at least 4 data points")
    ns = np.array([float(n) for n, _ in pairs])
    ys = np.array([float(v) for _, v in pairs])
    X = np.column_stack([ns**3, ns**2, ns])
    coef, *_ = np.linalg.lstsq(X, ys, rcond=None)
    target = -math.log(abs(float(as_rat(p)))) / 3
    return DecayFit(float(coef[0]), float(coef[1]), float(coef[2]), target, tolerance, len(pairs))


def heuristic_threshold(fit: DecayFit, denominator: int, x0z0: int, n_max: int = 10**5) -> int | None:
    """Smallest ``n0`` with ``b^n (x0 z0)^{2n(n-1)} |V_n| < 1`` for all ``n >= n0``
    under the fitted decay (HEURISTIC: uses fitted constants)."""
    if fit.a >= 0:
        return None
    lb, lx = math.log(denominator), math.log(x0z0)

    def f(n):
        return n * lb + 2 * n * (n - 1) * lx + fit.predict(n)

    last_bad = 0
    for n in range(1, n_max + 1):
        if f(n) >= 0:
            last_bad = n
    return last_bad + 1 if last_bad < n_max else None


@dataclass
class HankelRecord:
    n: int
    V: Enclosure
    scaled: Enclosure  # (x0 z0)^{2n(n-1)} V_n
    nonzero: bool
    rel_bits: int | None
    order: OrderVerdict | None = None

    def to_json(self) -> dict:
        log_v = log_abs(self.V.mid) if self.V.mid != 0 else None
        return {
            "n": self.n,
            "V_mid": str(self.V.mid),
            "V_rad": str(upper_bits(self.V.rad)),
            "V_decimal": self.V.decimal(30),
            "log_abs_V": None if log_v is None else repr(log_v),
            "scaled_mid": str(self.scaled.mid),
            "scaled_rad": str(upper_bits(self.scaled.rad)),
            "log_abs_scaled": None if self.scaled.mid == 0 else repr(log_abs(self.scaled.mid)),
            "nonzero": self.nonzero,
            "relative_bits": self.rel_bits,
            "order": None if self.order is None else self.order.to_json(),
        }


@dataclass
class CertificateReport:
    p: Fraction
    x: Fraction
    z: Fraction
    x0: int
    z0: int
    n_min: int
    n_max: int
    records: list = field(default_factory=list)
    fit: DecayFit | None = None
    fit_range: tuple | None = None
    heuristic: list = field(default_factory=list)
    verdict: str = ""

    @property
    def all_nonzero(self) -> bool:
        return all(r.nonzero for r in self.records)

    @property
    def orders_pass(self) -> bool:
        return all(r.order.passed for r in self.records if r.order is not None)

    def scaled_decreasing(self, start: int = 3) -> bool | None:
        """Whether ``|scaled V_n|`` strictly decreases for consecutive ``n >= start``.

        Certified from the enclosures; None when fewer than two such records exist.
        """
        recs = [r for r in self.records if r.n >= start]
        if len(recs) < 2:
            return None
        for a, b in zip(recs, recs[1:]):
            if b.n != a.n + 1 or not a.nonzero:
                return False
            lo_a = min(abs(a.scaled.lo), abs(a.scaled.hi))
            hi_b = max(abs(b.scaled.lo), abs(b.scaled.hi))
            if not hi_b < lo_a:
                return False
        return True

    @property
    def passed(self) -> bool:
        return self.all_nonzero and self.orders_pass

    def to_json(self) -> dict:
        return {
            "report": "hankel-certificate",
            "parameters": {
                "p": str(self.p),
                "x": str(self.x),
                "z": str(self.z),
                "x0": self.x0,
                "z0": self.z0,
                "n_range": [self.n_min, self.n_max],
            },
            "records": [r.to_json() for r in self.records],
            "decay_fit": None
            if self.fit is None
            else dict(self.fit.to_json(), n_range=list(self.fit_range) if self.fit_range else None),
            "heuristic": {
                "label": "HEURISTIC: thresholds use fitted decay constants, not proven bounds",
                "thresholds": self.heuristic,
            },
            "rigorous": {
                "all_nonzero": self.all_nonzero,
                "orders_pass": self.orders_pass,
                "scaled_decreasing_from_3": self.scaled_decreasing(3),
            },
            "verdict": self.verdict,
            "passed": self.passed,
        }


def check_irrationality_hypotheses(p: Fraction, x: Fraction, z: Fraction) -> None:
    if p.denominator != 1 or abs(p) <= 1:
        raise DomainError(f"irrationality hypothesis: p must be an integer with |p| > 1, got {p}")
    if x == 0 or z == 0:
        raise DomainError("irrationality hypothesis: x and z must be nonzero rationals")
    j = power_index(x, p)
    if j is not None:
        raise DomainError(f"irrationality hypothesis violated: x = {x} = p^{j} lies in {{p, p^2, p^3, ...}}")
    if abs(z) >= abs(p):
        raise DomainError(f"irrationality hypothesis violated: need |z| < |p|, got z={z}")


def hankel_values(
    p: RatLike, x: RatLike, z: RatLike, ns: Sequence[int], threads: int | None = 1
) -> list[HankelValue]:
    """``V_n`` for every ``n`` in ``ns`` at its scheduled precision, sharing entries."""
    p, x, z = as_rat(p), as_rat(x), as_rat(z)
    ns = sorted(ns)
    if not ns:
        return []
    top = ns[-1]
    logp = math.log2(abs(float(p)))
    bits = precision_target(top, p) + math.ceil(hankel_bound(top) * logp) + 16 * top + 32
    entries = star_entries(2 * top - 1, p, x, z, bits, threads)
    out = []
    for n in ns:
        out.append(hankel_numeric(n, p, x, z, threads=threads, _entries=entries[: 2 * n - 1]))
    return out


DENOMINATOR_PROBES = (10, 10**3, 10**6, 10**12, 10**24)


def certify(
    p: RatLike,
    x: RatLike,
    z: RatLike,
    n_max: int,
    n_min: int = 1,
    order_n_max: int = 5,
    fit_from: int = 4,
    threads: int | None = 1,
) -> CertificateReport:
    """Assemble the experimental irrationality report for ``ell_p(x, z)``.

    Rigorous per-n facts: each ``V_n`` enclosure, whether it excludes 0, and
    (for ``n <= order_n_max``) the exact ``q``-order check of ``V_n*``.  The
    decay fit and the resulting thresholds are heuristic.
    """
    p, x, z = as_rat(p), as_rat(x), as_rat(z)
    check_irrationality_hypotheses(p, x, z)
    if n_max < n_min or n_min < 1:
        raise DomainError("need 1 <= n_min <= n_max")
    x0z0 = x.denominator * z.denominator
    report = CertificateReport(p, x, z, x.denominator, z.denominator, n_min, n_max)
    values = hankel_values(p, x, z, range(n_min, n_max + 1), threads)
    for hv in values:
        n = hv.n
        scale = Fraction(x0z0) ** (2 * n * (n - 1))
        order = hankel_order_check(n, p, x, z) if n <= order_n_max else None
        report.records.append(HankelRecord(n, hv.V, hv.V * scale, hv.V.excludes_zero(), hv.rel_bits(), order))
    fit_points = {r.n: log_abs(r.V.mid) for r in report.records if r.n >= fit_from and r.nonzero}
    if len(fit_points) >= 4:
        report.fit = decay_fit(fit_points, p)
        report.fit_range = (min(fit_points), max(fit_points))
        for b in DENOMINATOR_PROBES:
            report.heuristic.append(
                {"denominator_bound": str(b), "n_threshold": heuristic_threshold(report.fit, b, x0z0)}
            )
    nz = sum(r.nonzero for r in report.records)
    parts = [f"{nz}/{len(report.records)} Hankel determinants certified nonzero (rigorous)"]
    checked = [r for r in report.records if r.order is not None]
    if checked:
        ok = sum(r.order.passed for r in checked)
        parts.append(f"{ok}/{len(checked)} q-order bounds verified exactly")
    if report.fit is not None:
        parts.append(
            f"fitted n^3 coefficient {report.fit.a:.4f} vs {report.fit.target:.4f} "
            f"({'within' if report.fit.within_tolerance else 'outside'} +-{report.fit.tolerance}; heuristic)"
        )
    report.verdict = "; ".join(parts)
    return report
