"""Exact construction of the linear forms S_n in Hurwitz zeta values.

For parameters (k, q, r, n) the driving rational function is

    R_n(t) = pref * (2qt + rqn)^(1 - delta_k)
                  * ((t - qn)_{qn:rise})^k * ((t + rn + 1)_{qn:rise})^k
                  / (qt)_{rqn+1:rise},
    pref   = (rqn)! / (qn)!^(2k) * q^(2kqn) * prod_{p|q} p^(2kqn/(p-1)),

whose partial fractions R_n(t) = sum_{j=0}^{rqn} C_{n,j} / (qt + j) have
integer coefficients factoring as

    C_{n,j} = (-1)^j binom(rqn, j) (rqn - 2j)^(1 - delta_k) A_j^k B_j^k,
    A_j     = P * prod_{t=1}^{qn} (j + qt) / (qn)!,
    B_j     = A_{rqn - j},              P = prod_{p|q} p^(qn/(p-1)).

(The pairing B_j = A_{rqn-j} is the index reversal of the second rising
factorial; it also makes the symmetry C_j = (-1)^(k-1) C_{rqn-j} visible.)

Summing the normalized derivative (1/(k-1)!) R_n^(k-1)(m) over m > qn and
sorting by residues j mod q produces the linear form

    S_n = rho_0 + delta_k * rho_1 * zeta(k)
              + sum_{1 <= a < q/2} rho_{a} * zeta_minus(k, a/q)

with q*rho_1, q*rho_a integers and d_{rqn}^k * rho_0 an integer
(d_m = lcm(1..m)).  Everything in this module is exact: gmpy2 integers
and rationals, with every claimed divisibility checked on the spot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import gmpy2
import mpmath
from gmpy2 import mpq, mpz
from mpmath import mp

from .errors import IntegralityError, PrecisionUnderflow, ValidationError, VerificationError
from .params import Params, lcm_upto, prime_divisors
from . import hurwitz


# ---------------------------------------------------------------------------
# Coefficient tables.


@dataclass
class CoefficientTable:
    """C_{n,j} together with the integer factors A_j, B_j."""

    params: Params
    c: list
    a_factor: list
    b_factor: list
    _mpf_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def degree(self) -> int:
        """Degree of R_n as a rational function (a negative integer)."""
        p = self.params
        return -p.delta_k - (p.r - 2 * p.k) * p.qn


def _prime_prefactor(params: Params) -> mpz:
    """P = prod_{p | q} p^(qn/(p-1)); the mode guarantees integer exponents."""
    acc = mpz(1)
    for p in prime_divisors(params.q):
        e, rem = divmod(params.qn, p - 1)
        if rem:
            raise ValidationError(
                f"(p-1) = {p - 1} does not divide qn = {params.qn}; "
                "parameter validation should have rejected this"
            )
        acc *= mpz(p) ** e
    return acc


def _exact_div(num: mpz, den: mpz, what: str) -> mpz:
    out, rem = gmpy2.f_divmod(num, den)
    if rem:
        raise IntegralityError(f"{what}: {den} does not divide exactly")
    return out


def build_coefficients(params: Params) -> CoefficientTable:
    """Build the exact coefficient table for S_n.

    A_j is computed once per residue class j mod q by a straight product
    and then moved along the class with the telescoping identity

        A_{j+q} = A_j * (j + q + q^2 n) / (j + q),

    every division checked exact.  Integrality of each A_j (hence of the
    whole table) is therefore verified, not assumed -- in relaxed mode
    this is precisely the empirical content of the divisibility condition.
    """
    k, q, n = params.k, params.q, params.n
    qn, rqn = params.qn, params.rqn
    pp = _prime_prefactor(params)
    fac_qn = gmpy2.fac(qn)
    q2n = q * qn

    a = [mpz(0)] * (rqn + 1)
    for a0 in range(q):
        prod = mpz(1)
        for t in range(1, qn + 1):
            prod *= a0 + q * t
        a[a0] = _exact_div(pp * prod, fac_qn, f"A_{a0}")
        j = a0
        while j + q <= rqn:
            a[j + q] = _exact_div(a[j] * (j + q + q2n), mpz(j + q), f"A_{j + q}")
            j += q

    # Closed-form anchors: A_0 = P q^qn and A_rqn = P q^qn binom(rn+qn, qn).
    if a[0] != pp * mpz(q) ** qn:
        raise VerificationError("A_0 does not match its closed form")
    if a[rqn] != pp * mpz(q) ** qn * gmpy2.bincoef(params.rn + qn, qn):
        raise VerificationError("A_rqn does not match its closed form")

    b = [a[rqn - j] for j in range(rqn + 1)]

    one_minus_dk = 1 - params.delta_k
    c = [mpz(0)] * (rqn + 1)
    binom = mpz(1)
    for j in range(rqn + 1):
        v = binom * (a[j] * b[j]) ** k
        if one_minus_dk:
            v *= rqn - 2 * j
        if j % 2:
            v = -v
        c[j] = v
        if j < rqn:
            binom = _exact_div(binom * (rqn - j), mpz(j + 1), "binomial")

    sign = -1 if k % 2 == 0 else 1
    for j in range(rqn // 2 + 1):
        if c[j] != sign * c[rqn - j]:
            raise VerificationError(f"coefficient symmetry fails at j = {j}")

    return CoefficientTable(params=params, c=c, a_factor=a, b_factor=b)


def export_coefficients(table: CoefficientTable) -> dict:
    return {
        "schema": 1,
        "params": table.params.as_dict(),
        "coefficients": [str(v) for v in table.c],
    }


def export_coefficients_csv(table: CoefficientTable) -> str:
    lines = ["j,c"]
    lines.extend(f"{j},{v}" for j, v in enumerate(table.c))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# The linear form.


@dataclass
class LinearForm:
    """S_n = rho0 + delta_k rho1 zeta(k) + sum_a rho_a zeta_minus(k, a/q)."""

    params: Params
    rho0: mpq
    rho1: mpq
    rho_a: dict
    rho1_prime: mpq
    rho_half: mpq | None


def rho(params: Params, table: CoefficientTable) -> LinearForm:
    """Collapse the coefficient table into the linear-form coefficients.

    rho_{a} = ((-1)^(k-1)/q) * sum_j C_{qj+a}  (j up to rn, resp. rn-1),
    rho_0   = ((-1)^k/q) * [ sum_{j,m<=j} C_{qj}/m^k
                             + sum_{a,j,m<=j} C_{qj+a}/(m+a/q)^k ].

    For even k the class sums over a = 0 and (q even) a = q/2 vanish by
    the symmetry of the table, so rho1 = 0 exactly; this is checked.
    For even q the shift 1/2 contributes (2^k - 1) rho_{q/2} to rho1.
    """
    k, q = params.k, params.q
    rn, rqn = params.rn, params.rqn
    c = table.c
    sgn = 1 if k % 2 == 1 else -1  # (-1)^(k-1)

    class_sum = [mpz(0)] * q
    for a0 in range(q):
        top = rn if a0 == 0 else rn - 1
        s = mpz(0)
        for j in range(top + 1):
            s += c[q * j + a0]
        class_sum[a0] = s

    rho_all = {a0: mpq(sgn * class_sum[a0], q) for a0 in range(1, q)}
    rho1_prime = mpq(sgn * class_sum[0], q)
    rho_half = rho_all[q // 2] if q % 2 == 0 else None

    if k % 2 == 0:
        if rho1_prime != 0:
            raise VerificationError("rho1' must vanish for even k")
        if rho_half is not None and rho_half != 0:
            raise VerificationError("rho_{1/2} must vanish for even k and even q")

    rho1 = rho1_prime
    if q % 2 == 0:
        rho1 = rho1 + (mpz(2) ** k - 1) * rho_half

    # rho_0 via suffix sums of the classes: swapping the (j, m) order turns
    # the triple sum into  sum_m (suffix sum of C) / (value at m)^k.
    d = lcm_upto(rqn)
    dk = mpz(d) ** k
    acc = mpz(0)
    suffix = mpz(0)
    for j in range(rn, 0, -1):  # m runs 1..rn; suffix starts at C_{q rn}
        suffix += c[q * j]
        acc += suffix * (dk // mpz(j) ** k)
    qk = mpz(q) ** k
    for a0 in range(1, q):
        suffix = mpz(0)
        for j in range(rn - 1, -1, -1):  # m runs 0..rn-1
            suffix += c[q * j + a0]
            acc += suffix * qk * (dk // mpz(q * j + a0) ** k)
    rho0 = mpq(-sgn * acc, q * dk)

    # The divisibility lemmas, checked exactly.
    if mpq(q * rho1).denominator != 1:
        raise IntegralityError("q * rho1 is not an integer")
    for a0, val in rho_all.items():
        if mpq(q * val).denominator != 1:
            raise IntegralityError(f"q * rho_{a0} is not an integer")
    if mpq(dk * rho0).denominator != 1:
        raise IntegralityError("d_rqn^k * rho0 is not an integer")

    return LinearForm(
        params=params,
        rho0=rho0,
        rho1=rho1,
        rho_a={a0: rho_all[a0] for a0 in range(1, (q + 1) // 2)},
        rho1_prime=rho1_prime,
        rho_half=rho_half,
    )


# ---------------------------------------------------------------------------
# Growth of the coefficients.


def beta_value(params: Params, bits: int = 128) -> mpmath.mpf:
    """The exponential growth rate of the coefficient table:

    beta = rq log 2 + k ( (2q + r) log(q + r/2) - r log(r/2)
                          + 2q sum_{p|q} log p / (p - 1) ).
    """
    k, q, r = params.k, params.q, params.r
    with mp.workprec(bits):
        psum = mp.fsum(mp.log(p) / (p - 1) for p in prime_divisors(q))
        return r * q * mp.log(2) + k * (
            (2 * q + r) * mp.log(q + mp.mpf(r) / 2)
            - r * mp.log(mp.mpf(r) / 2)
            + 2 * q * psum
        )


@dataclass(frozen=True)
class GrowthReport:
    slope: mpmath.mpf
    beta: mpmath.mpf
    bound: mpmath.mpf
    ok: bool


def coefficient_growth(table: CoefficientTable, bits: int = 128) -> GrowthReport:
    """log(max_j |C_j|) / n against the asymptotic rate beta (+1 slack)."""
    biggest = max(abs(v) for v in table.c)
    with mp.workprec(bits):
        slope = mp.log(mpmath.mpf(int(biggest))) / table.params.n
        beta = beta_value(table.params, bits)
        bound = beta + 1
        return GrowthReport(slope=slope, beta=beta, bound=bound, ok=bool(slope <= bound))


# ---------------------------------------------------------------------------
# Series route.


def eval_R_derivative_term(table: CoefficientTable, m: int) -> mpq:
    """(1/(k-1)!) R_n^(k-1)(m) = (-1)^(k-1) q^(k-1) sum_j C_j/(qm+j)^k,
    exactly.  Vanishes for 1 <= m <= qn (R has zeros of order k there)."""
    if not isinstance(m, int) or m < 1:
        raise ValidationError(f"m must be an int >= 1, got {m!r}")
    p = table.params
    k, q = p.k, p.q
    total = mpq(0)
    for j, cj in enumerate(table.c):
        total += mpq(cj, mpz(q * m + j) ** k)
    sgn = 1 if k % 2 == 1 else -1
    return sgn * mpz(q) ** (k - 1) * total


@dataclass(frozen=True)
class TruncatedSum:
    value: mpq
    tail_bound: mpmath.mpf
    terms: int


def s_n_truncated(params: Params, table: CoefficientTable, terms: int) -> TruncatedSum:
    """Exact partial sum of S_n = sum_{m>qn} (1/(k-1)!) R_n^(k-1)(m) over
    m <= terms, plus a certified bound on the discarded tail.

    The partial sum groups equal denominators: v = qm + j takes each value
    with total weight w(v) = sum of the C_j in the right window, so the
    whole computation is O(q * terms) big-integer operations over the
    fixed common denominator lcm(1..q*terms+rqn)^k.

    The tail majorant comes from the product form of R_n: a Cauchy bound
    on the derivative over circles |z - m| = 1/2 gives

        |term(m)| <= 2^(k-1) * L * exp(E/m) * m^deg,
        L = pref (2q)^(1-delta_k) / q^(rqn+1)   (the leading constant),

    with an explicit E collecting all low-order factor corrections, and
    the sum over m > terms is closed by integral comparison.
    """
    p = params
    k, q, qn, rn, rqn = p.k, p.q, p.qn, p.rn, p.rqn
    if terms < qn:
        raise ValidationError(f"terms must be >= qn = {qn}, got {terms}")

    # Prefix sums per residue class of j.
    prefix = []
    for a0 in range(q):
        length = rqn // q + 1 if a0 == 0 else (rqn - a0) // q + 1
        ps = [mpz(0)] * (length + 1)
        for i in range(length):
            ps[i + 1] = ps[i] + table.c[a0 + q * i]
        prefix.append(ps)

    vmax = q * terms + rqn
    d = lcm_upto(vmax)
    dk = mpz(d) ** k
    acc = mpz(0)
    for v in range(q, vmax + 1):
        a0 = v % q
        ps = prefix[a0]
        length = len(ps) - 1
        # j = a0 + q*i with  v - q*terms <= j <= v - q  and 0 <= i < length.
        i_lo = max(0, -(-(v - q * terms - a0) // q))
        i_hi = min(length - 1, (v - q - a0) // q)
        if i_hi < i_lo:
            continue
        w = ps[i_hi + 1] - ps[i_lo]
        if w:
            acc += w * (dk // mpz(v) ** k)
    sgn = 1 if k % 2 == 1 else -1
    value = mpq(sgn * mpz(q) ** (k - 1) * acc, dk)

    tail = _tail_majorant(p, terms)
    return TruncatedSum(value=value, tail_bound=tail, terms=terms)


def _tail_majorant(p: Params, m_last: int) -> mpmath.mpf:
    k, q, n = p.k, p.q, p.n
    qn, rn, rqn = p.qn, p.rn, p.rqn
    deg = -p.delta_k - (p.r - 2 * k) * qn
    pref = mpq(
        gmpy2.fac(rqn) * mpz(q) ** (2 * k * qn) * _prime_prefactor(p) ** (2 * k),
        gmpy2.fac(qn) ** (2 * k),
    )
    lead = pref * (2 * q) ** (1 - p.delta_k) / mpz(q) ** (rqn + 1)
    e_const = (
        k * (qn * qn + qn * (rn + qn + 1))
        + (rqn + 1)
        + mpq(q + rqn, 2 * q)
    )
    with mp.workprec(96):
        m1 = mp.mpf(m_last + 1)
        bound = (
            mp.mpf(2) ** (k - 1)
            * mp.mpf(lead.numerator)
            / mp.mpf(lead.denominator)
            * mp.exp(mp.mpf(float(e_const)) / m1)
            * (m1**deg + m1 ** (deg + 1) / (-deg - 1))
        )
        return bound * (1 + mp.mpf("1e-6"))


# ---------------------------------------------------------------------------
# Zeta route.


@dataclass(frozen=True)
class ZetaRouteSum:
    value: mpmath.mpf
    err_bound: mpmath.mpf
    bits: int


def s_n_via_zeta(
    params: Params,
    form: LinearForm,
    bits: int,
    min_certified_bits: int = 32,
) -> ZetaRouteSum:
    """Evaluate S_n from the linear-form coefficients and zeta values.

    The rho coefficients are exponentially large while S_n is small, so
    the working precision must absorb the cancellation; if the propagated
    error bound fails to certify `min_certified_bits` relative bits of
    the result, a PrecisionUnderflow is raised rather than returning a
    number whose accuracy we cannot vouch for.
    """
    p = params
    with mp.workprec(bits + 32):
        acc = mp.mpf(form.rho0.numerator) / mp.mpf(form.rho0.denominator)
        err = mp.mpf(0)
        if p.delta_k:
            z = hurwitz.hurwitz_zeta(p.k, 1, 1, bits)
            r1 = mp.mpf(form.rho1.numerator) / mp.mpf(form.rho1.denominator)
            acc += r1 * z.value
            err += abs(r1) * mp.ldexp(1, z.err2exp)
        for a0, coeff in form.rho_a.items():
            pair = hurwitz.zeta_pair(p.k, a0, p.q, bits)
            ca = mp.mpf(coeff.numerator) / mp.mpf(coeff.denominator)
            acc += ca * pair.minus
            err += abs(ca) * mp.ldexp(1, pair.err2exp)
        # Rounding allowance for the q/2 + 2 multiply-adds above.
        err += mp.ldexp(abs(acc) + 1, -(bits + 16))
        if err > abs(acc) * mp.ldexp(1, -min_certified_bits):
            raise PrecisionUnderflow(
                f"zeta route certifies fewer than {min_certified_bits} bits "
                f"of S_n at working precision {bits}"
            )
        return ZetaRouteSum(value=acc, err_bound=err, bits=bits)


# ---------------------------------------------------------------------------
# Pointwise evaluation of R_n (used by the contour quadrature).


def r_product(params: Params, z, bits: int):
    """R_n(z) by its product form, at the working precision.

    Unlike the partial fractions, the product has no cancellation, so it
    stays accurate at a working precision independent of the coefficient
    sizes; quadrature on the contour uses this route.
    """
    k, q, n = params.k, params.q, params.n
    qn, rn, rqn = params.qn, params.rn, params.rqn
    pref = mpq(
        gmpy2.fac(rqn) * mpz(q) ** (2 * k * qn) * _prime_prefactor(params) ** (2 * k),
        gmpy2.fac(qn) ** (2 * k),
    )
    with mp.workprec(bits + 32):
        zz = mp.mpc(z)
        num = mp.mpf(pref.numerator) / mp.mpf(pref.denominator)
        if params.delta_k == 0:
            num *= 2 * q * zz + rqn
        prod1 = mp.mpc(1)
        prod2 = mp.mpc(1)
        for i in range(qn):
            prod1 *= zz - qn + i
            prod2 *= zz + rn + 1 + i
        num *= prod1**k * prod2**k
        den = mp.mpc(1)
        for j in range(rqn + 1):
            den *= q * zz + j
        return num / den


def r_eval(table: CoefficientTable, z, bits: int, with_abs: bool = False):
    """R_n(z) by partial fractions at the working precision.

    With with_abs=True also returns sum_j |C_j / (qz + j)|, the scale
    against which the rounding error of the cancellation is measured.
    """
    key = bits
    cs = table._mpf_cache.get(key)
    with mp.workprec(bits):
        if cs is None:
            cs = [mp.mpf(int(v)) for v in table.c]
            table._mpf_cache[key] = cs
        q = table.params.q
        zz = mp.mpc(z)
        total = mp.mpc(0)
        total_abs = mp.mpf(0)
        qz = q * zz
        for j, cj in enumerate(cs):
            t = cj / (qz + j)
            total += t
            if with_abs:
                total_abs += abs(t)
        if with_abs:
            return total, total_abs
        return total
