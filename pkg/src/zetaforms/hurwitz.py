"""Hurwitz zeta values zeta(k, a/q) with certified error bounds.

Everything here is Euler-Maclaurin: for integer k >= 2 and x = a/q in (0, 1],

    zeta(k, x) = sum_{m=0}^{N-1} (m+x)^-k
               + (N+x)^(1-k)/(k-1)            (integral tail)
               + (N+x)^-k / 2                 (boundary term)
               + sum_{j=1}^{J} B_{2j}/(2j)! * (k)_{2j-1} * (N+x)^(1-k-2j)
               + R_J,

where (k)_m is the rising factorial and B_{2j} are Bernoulli numbers.
Because every derivative of t -> (t+x)^-k has constant sign on [N, oo),
the remainder R_J is bounded in magnitude by the first omitted correction
term, which is what we certify (plus a crude rounding allowance).  The
correction terms only start shrinking while 2j stays below N + x - k, so
the evaluator enforces N + x > k + 2J and grows N when a precision target
would push J past that window.

Bernoulli numbers are exact rationals, computed from the tangent-number
triangle (integer-only recurrence) and cached.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import mp

from .errors import NumericError, ValidationError

# ---------------------------------------------------------------------------
# Bernoulli numbers.

_tangent_cache: list = []  # _tangent_cache[m-1] = m-th tangent number
_tangent_lock = threading.Lock()


def _grow_tangent(count: int) -> None:
    """Fill the tangent-number cache up to T_count (integer recurrence)."""
    global _tangent_cache
    if len(_tangent_cache) >= count:
        return
    n = max(count, 2 * len(_tangent_cache), 16)
    t = [0] * (n + 1)
    t[1] = 1
    for i in range(2, n + 1):
        t[i] = (i - 1) * t[i - 1]
    for i in range(2, n + 1):
        for j in range(i, n + 1):
            t[j] = (j - i) * t[j - 1] + (j - i + 2) * t[j]
    _tangent_cache = t[1:]


def bernoulli(j: int) -> Fraction:
    """Exact Bernoulli number B_j (convention B_1 = -1/2)."""
    if not isinstance(j, int) or j < 0:
        raise ValidationError(f"bernoulli needs an int >= 0, got {j!r}")
    if j == 0:
        return Fraction(1)
    if j == 1:
        return Fraction(-1, 2)
    if j % 2 == 1:
        return Fraction(0)
    m = j // 2
    with _tangent_lock:
        _grow_tangent(m)
        t_m = _tangent_cache[m - 1]
    sign = 1 if m % 2 == 1 else -1
    return Fraction(sign * 2 * m * t_m, 4**m * (4**m - 1))


# ---------------------------------------------------------------------------
# Hurwitz zeta.


@dataclass(frozen=True)
class ZetaValue:
    """A certified evaluation: |value - zeta(k, a/q)| <= 2**err2exp."""

    k: int
    a: int
    q: int
    bits: int
    value: mpmath.mpf
    err2exp: int

    def as_dict(self) -> dict:
        dps = int(self.bits * 0.30103) + 3
        return {
            "k": self.k,
            "a": self.a,
            "q": self.q,
            "bits": self.bits,
            "value": mpmath.nstr(self.value, dps),
            "err2exp": self.err2exp,
        }


_zeta_cache: dict = {}
_zeta_lock = threading.Lock()


def clear_cache() -> None:
    with _zeta_lock:
        _zeta_cache.clear()


def _check_args(k: int, a: int, q: int, bits: int) -> None:
    if not isinstance(k, int) or k < 2:
        raise ValidationError(f"k must be an int >= 2, got {k!r}")
    if not isinstance(q, int) or q < 1:
        raise ValidationError(f"q must be an int >= 1, got {q!r}")
    if not isinstance(a, int) or not 1 <= a <= q:
        raise ValidationError(f"a must satisfy 1 <= a <= q = {q}, got {a!r}")
    if not isinstance(bits, int) or bits < 16:
        raise ValidationError(f"bits must be an int >= 16, got {bits!r}")


def hurwitz_zeta(k: int, a: int, q: int, bits: int) -> ZetaValue:
    """zeta(k, a/q) for integer k >= 2, 1 <= a <= q, certified below
    2**-bits absolute error.  Cached per (k, a, q, bits)."""
    _check_args(k, a, q, bits)
    key = (k, a, q, bits)
    with _zeta_lock:
        hit = _zeta_cache.get(key)
    if hit is not None:
        return hit

    work = bits + 64 + k * max(1, q.bit_length())
    target_exp = -(bits + 8)
    with mp.workprec(work):
        x = mp.mpf(a) / q
        n_direct = max(2 * k + 2, (3 * bits) // 10 + 8)
        while True:
            value, rem = _euler_maclaurin(k, x, n_direct, target_exp)
            if value is not None:
                break
            n_direct *= 2  # J hit the N + x > k + 2J window; push N out
        # Rounding allowance: the sums involve O(n_direct) additions at
        # `work` bits on magnitudes <= |value|; wildly conservative.
        rounding = mp.ldexp(abs(value) + 1, -(work - n_direct.bit_length() - 8))
        total = rem + rounding
        err2exp = int(mp.ceil(mp.log(total, 2))) if total > 0 else -(work)
    if err2exp > -bits - 1:
        raise NumericError(
            f"hurwitz_zeta could not certify 2^-{bits} "
            f"(achieved 2^{err2exp}) for ({k}, {a}/{q})"
        )
    zv = ZetaValue(k=k, a=a, q=q, bits=bits, value=value, err2exp=err2exp)
    with _zeta_lock:
        _zeta_cache[key] = zv
    return zv


def _euler_maclaurin(k: int, x, n_direct: int, target_exp: int):
    """One Euler-Maclaurin pass; returns (value, remainder_bound) or
    (None, None) if the correction terms would violate N + x > k + 2J."""
    nx = n_direct + x
    direct = mp.fsum((m + x) ** (-k) for m in range(n_direct))
    value = direct + nx ** (1 - k) / (k - 1) + nx ** (-k) / 2

    target = mp.ldexp(1, target_exp)
    inv_nx2 = 1 / (nx * nx)
    power = nx ** (1 - k) * inv_nx2  # (N+x)^(1-k-2j) at j = 1
    poch = mp.mpf(k)  # (k)_{2j-1} at j = 1
    fact = mp.mpf(2)  # (2j)! at j = 1
    j = 1
    corrections = []
    while True:
        b = bernoulli(2 * j)
        term = mp.mpf(b.numerator) / b.denominator * poch * power / fact
        if abs(term) < target:
            # `term` is the first omitted correction: certified remainder.
            return value + mp.fsum(corrections), abs(term)
        if 2 * (j + 1) + k >= nx:
            return None, None
        corrections.append(term)
        poch *= (k + 2 * j - 1) * (k + 2 * j)
        fact *= (2 * j + 1) * (2 * j + 2)
        power *= inv_nx2
        j += 1


# ---------------------------------------------------------------------------
# Even/odd combinations and identities.


@dataclass(frozen=True)
class ZetaPair:
    """zeta_plus / zeta_minus at (k, a/q):

    zeta_pm(k, a/q) = zeta(k, a/q) +- (-1)^k * zeta(k, 1 - a/q).
    """

    k: int
    a: int
    q: int
    bits: int
    plus: mpmath.mpf
    minus: mpmath.mpf
    err2exp: int


def zeta_pair(k: int, a: int, q: int, bits: int) -> ZetaPair:
    if not isinstance(a, int) or not 1 <= a < q:
        raise ValidationError(f"zeta_pair needs 1 <= a < q, got a = {a!r}")
    z1 = hurwitz_zeta(k, a, q, bits)
    z2 = hurwitz_zeta(k, q - a, q, bits)
    sign = -1 if k % 2 else 1
    with mp.workprec(bits + 16):
        plus = z1.value + sign * z2.value
        minus = z1.value - sign * z2.value
    return ZetaPair(
        k=k,
        a=a,
        q=q,
        bits=bits,
        plus=plus,
        minus=minus,
        err2exp=max(z1.err2exp, z2.err2exp) + 1,
    )


@dataclass(frozen=True)
class DistributionReport:
    k: int
    p: int
    a: int
    q: int
    bits: int
    residual: mpmath.mpf
    threshold: mpmath.mpf
    ok: bool


def verify_distribution(k: int, p: int, a: int, q: int, bits: int) -> DistributionReport:
    """Check sum_{j=0}^{p-1} zeta(k, (a+jq)/(pq)) = p^k * zeta(k, a/q).

    Both sides are evaluated with enough internal precision that the
    residual of a correct implementation stays below (p+2) * 2**-bits.
    """
    if not isinstance(p, int) or p < 2:
        raise ValidationError(f"p must be an int >= 2, got {p!r}")
    inner_bits = bits + k * p.bit_length() + 8
    rhs = hurwitz_zeta(k, a, q, inner_bits)
    parts = [hurwitz_zeta(k, a + j * q, p * q, inner_bits) for j in range(p)]
    with mp.workprec(inner_bits + 16):
        lhs = mp.fsum(part.value for part in parts)
        residual = abs(lhs - mp.mpf(p) ** k * rhs.value)
        threshold = (p + 2) * mp.ldexp(1, -bits)
    return DistributionReport(
        k=k,
        p=p,
        a=a,
        q=q,
        bits=bits,
        residual=residual,
        threshold=threshold,
        ok=bool(residual < threshold),
    )


def zeta_via_odd_parts(k: int, q: int, bits: int):
    """For odd k: zeta(k) = sum_{a=1}^{q-1} zeta_minus(k, a/q) / (2(q^k - 1)).

    Returns an mpf; agreement with the direct evaluation of zeta(k) is an
    exactness check on the odd-part decomposition.
    """
    if k % 2 != 1 or k < 3:
        raise ValidationError(f"zeta_via_odd_parts needs odd k >= 3, got {k}")
    if q < 2:
        raise ValidationError(f"q must be >= 2, got {q}")
    with mp.workprec(bits + 32):
        total = mp.fsum(zeta_pair(k, a, q, bits + 16).minus for a in range(1, q))
        return total / (2 * (mp.mpf(q) ** k - 1))
