"""Higher cotangent kernels cot_k and their finite cosine expansions.

cot_k is the normalized (k-1)-st derivative of the cotangent,

    cot_k(z) = ((-1)^(k-1) / (k-1)!) * d^(k-1)/dz^(k-1) cot(z),

normalized so that cot_k(z) ~ z^-k at the origin.  It has the closed form

    cot_k(z) = V_k(cos z) / sin(z)^k

with V_k a polynomial of degree k - 2 (k >= 2) satisfying

    V_1 = X,   V_{k+1} = ((1 - X^2) V_k' + k X V_k) / k,

and the finite cosine expansion

    sin(z)^k * cot_k(z) = sum_l c_l cos(l z),
    l running over k mod 2, k-2, k-4, ..., with c_{k-2} != 0.

All polynomial coefficients are exact rationals.  Evaluation is done at
z -> cot_k(pi z), whose poles sit on the integers; the evaluator refuses
points closer to a pole than 2**(-bits/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import mp

from .errors import PoleProximityError, ValidationError

_vk_cache: dict[int, tuple[Fraction, ...]] = {}


def vk_polynomial(k: int) -> tuple[Fraction, ...]:
    """Coefficients of V_k in ascending powers of X (exact rationals)."""
    if not isinstance(k, int) or k < 1:
        raise ValidationError(f"vk_polynomial needs an int k >= 1, got {k!r}")
    if k in _vk_cache:
        return _vk_cache[k]
    v = [Fraction(0), Fraction(1)]  # V_1 = X
    _vk_cache.setdefault(1, tuple(v))
    for m in range(1, k):
        # V_{m+1} = ((1 - X^2) V_m' + m X V_m) / m
        deriv = [i * v[i] for i in range(1, len(v))]
        out = [Fraction(0)] * (len(v) + 1)
        for i, c in enumerate(deriv):
            out[i] += c
            out[i + 2] -= c
        for i, c in enumerate(v):
            out[i + 1] += m * c
        v = [c / m for c in out]
        while len(v) > 1 and v[-1] == 0:
            v.pop()
        _vk_cache.setdefault(m + 1, tuple(v))
    return _vk_cache[k]


def cosine_expansion(k: int) -> dict[int, Fraction]:
    """The coefficients c_l of sin^k(z) cot_k(z) = sum_l c_l cos(l z).

    Returns {l: c_l} for the nonzero coefficients; l == k (mod 2),
    0 <= l <= k - 2 for k >= 2, and the extreme one c_{k-2} is nonzero.
    The values sum to V_k(1) = 1.
    """
    if not isinstance(k, int) or k < 2:
        raise ValidationError(f"cosine_expansion needs an int k >= 2, got {k!r}")
    coeffs = vk_polynomial(k)
    c: dict[int, Fraction] = {}
    for m, vm in enumerate(coeffs):
        if vm == 0:
            continue
        # cos^m = 2^-m * sum_j binom(m, j) cos((m - 2j) z), folded onto l >= 0:
        # j and m - j both land on l = |m - 2j| > 0, the middle term once.
        scale = Fraction(1, 2**m)
        for j in range(m // 2 + 1):
            l = m - 2 * j
            w = scale * math.comb(m, j)
            if l > 0:
                c[l] = c.get(l, Fraction(0)) + 2 * vm * w
            else:
                c[0] = c.get(0, Fraction(0)) + vm * w
    return {l: cl for l, cl in sorted(c.items()) if cl != 0}


@dataclass(frozen=True)
class CotkExpansion:
    k: int
    c: dict[int, Fraction]

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "c": {str(l): f"{v.numerator}/{v.denominator}" for l, v in self.c.items()},
        }


def expansion(k: int) -> CotkExpansion:
    return CotkExpansion(k=k, c=cosine_expansion(k))


def cotk_eval(k: int, z, bits: int):
    """cot_k(pi z) = V_k(cos pi z) / sin(pi z)^k at working precision.

    Raises PoleProximityError when dist(z, Z) < 2**(-bits/2); that close
    to a pole the closed form cannot be trusted at this precision.
    """
    if not isinstance(k, int) or k < 2:
        raise ValidationError(f"cotk_eval needs an int k >= 2, got {k!r}")
    with mp.workprec(bits + 32):
        zz = mp.mpc(z) if mp.im(mp.mpc(z)) != 0 else mp.mpf(mp.re(mp.mpc(z)))
        nearest = mp.nint(mp.re(zz))
        dist = abs(zz - nearest)
        if dist < mp.ldexp(1, -(bits // 2)):
            raise PoleProximityError(
                f"z = {z} is within 2^-{bits // 2} of the pole at {int(nearest)}"
            )
        s = mp.sinpi(zz)
        x = mp.cospi(zz)
        coeffs = vk_polynomial(k)
        acc = mp.mpf(0)
        for cm in reversed(coeffs):  # Horner
            acc = acc * x + mp.mpf(cm.numerator) / cm.denominator
        return acc / s**k


def cotk_eval_cosine(k: int, z, bits: int):
    """Same value through the cosine expansion; used as a cross-route."""
    with mp.workprec(bits + 32):
        zz = mp.mpc(z)
        s = mp.sinpi(zz)
        total = mp.fsum(
            (mp.mpf(cl.numerator) / cl.denominator) * mp.cos(l * mp.pi * zz)
            for l, cl in cosine_expansion(k).items()
        )
        return total / s**k
