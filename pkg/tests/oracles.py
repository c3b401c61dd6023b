"""Independent reference values: plain mpmath sums at high working precision.

Nothing here imports qforms, so these serve as oracles for the certified code.
"""

from fractions import Fraction

import mpmath
from mpmath import mp

mp.dps = 60

# truncation slack for the oracles below (they sum until terms are far below this)
SLACK = mpmath.mpf(10) ** -45


def mpq(r) -> mpmath.mpf:
    r = Fraction(r)
    return mpmath.mpf(r.numerator) / r.denominator


def encloses(enc, value, slack=SLACK) -> bool:
    lo = mpq(enc.mid) - mpq(enc.rad) - slack
    hi = mpq(enc.mid) + mpq(enc.rad) + slack
    return lo <= value <= hi


def geometric_terms(term, start=1, ratio=None, tol=mpmath.mpf(10) ** -55, cap=20000):
    """Sum ``term(n)`` from ``start`` until ``|term| < tol`` for 5 consecutive n."""
    total = mpmath.mpf(0)
    small = 0
    for n in range(start, start + cap):
        t = term(n)
        total += t
        small = small + 1 if abs(t) < tol else 0
        if small >= 5:
            return total
    raise RuntimeError("oracle did not converge")


def ell(p, x, z):
    p, x, z = mpq(p), mpq(x), mpq(z)
    return x * geometric_terms(lambda n: z**n / (p**n - x))


def Lq(q, z):
    q, z = mpq(q), mpq(z)
    return geometric_terms(lambda n: q**n * z**n / (1 - q**n))


def Eq_product(q, z):
    q, z = mpq(q), mpq(z)
    prod = mpmath.mpf(1)
    for n in range(1, 4000):
        prod *= 1 + q**n * z
        if abs(q**n * z) < mpmath.mpf(10) ** -58:
            break
    return prod


def Lcal(p, x, y, z):
    p, x, y, z = mpq(p), mpq(x), mpq(y), mpq(z)
    return geometric_terms(lambda n: p**n * z**n / ((p**n - x) * (p**n - y)))


def theta3_squared(q):
    q = mpq(q)
    s = 1 + 2 * geometric_terms(lambda n: q ** (n * n))
    return s * s


def zeta_q2(p):
    p = mpq(p)
    return geometric_terms(lambda n: n / (p**n - 1))


def poch(a, q, n):
    prod = mpmath.mpf(1)
    for j in range(n):
        prod *= 1 - a * q**j
    return prod


def remainder_star(n, p, x, z):
    """``v_n*`` by its t-sum, summed directly."""
    q, x, z = 1 / mpq(p), mpq(x), mpq(z)
    pref = poch(q, q, n) * poch(q * x, q, n) * poch(q * z, q, n)

    def term(t):
        return z**t * poch(q ** (t + 1), q, n) * q ** ((n + 1) * t) / poch(q ** (n + 1 + t) * x, q, n + 1)

    return pref * geometric_terms(term, start=0)
