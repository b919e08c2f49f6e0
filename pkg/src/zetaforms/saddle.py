"""Saddle-point machinery for the exponential asymptotics of the forms.

The phase function of the contour integrals is

    f(z) = k(z+r+q)log(z+r+q) + k(q-z)log(q-z) + (q+k)z log z
           - (q+k)(z+r)log(z+r) + rq log r + 2kq sum_{p|q} log p/(p-1),

holomorphic off the cuts (-inf, 0] and [q, +inf).  Saddle points of
f(z) - lambda*pi*i*z solve f'(z) = lambda*pi*i.  The substitution
z = r(w-1)/2 turns f' into the three-parameter model function

    h(w) = (a+b)(log(w-1) - log(w+1)) + b(log(1+s+w) - log(1+s-w)),
    a = q,  b = k,  s = 2q/r   (a > sb iff r > 2k),

whose level-set geometry (the curve H = Re h = 0, its endpoints eta0 and
eta1, the height function Y0, and the monotone imaginary parts) settles
where the solutions of h(w) = lambda*pi*i live for every real lambda.
This module implements both planes: certified bisection for everything
the level-set lemmas bracket, and a damped Newton iteration in the
coordinate u = log(q - z) for the saddle tau_lambda itself.  The u
coordinate matters: tau_{k-2} approaches q at the rate
exp(-log^2(q)/k), and only log-distance arithmetic survives that.

The constants of the asymptotic law |S_n| = exp(-alpha n + o(n)) *
(|cos(n omega + phi)| + o(1)) come out of

    f0(z) = f(z) - z f'(z),
    alpha = -Re f0(tau_{k-2}),  omega = Im f0(tau_{k-2}),
    phi = -arg(f''(tau_{k-2}))/2 + arg(g(tau_{k-2})).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
from mpmath import mp

from .errors import (
    ConvergenceError,
    StructuralError,
    ValidationError,
    VerificationError,
)
from .params import prime_divisors


@dataclass(frozen=True)
class PhaseContext:
    """The (k, q, r) triple of the phase function, without the n that a
    full parameter set carries; the saddle geometry does not depend on n.
    """

    k: int
    q: int
    r: int

    def __post_init__(self):
        if not (isinstance(self.k, int) and self.k >= 2):
            raise ValidationError(f"k must be an int >= 2, got {self.k!r}")
        if not (isinstance(self.q, int) and self.q >= 3):
            raise ValidationError(f"q must be an int >= 3, got {self.q!r}")
        if not (isinstance(self.r, int) and self.r > 2 * self.k):
            raise ValidationError(f"r must be an int > 2k = {2 * self.k}, got {self.r!r}")

    @classmethod
    def from_params(cls, params) -> "PhaseContext":
        return cls(k=params.k, q=params.q, r=params.r)

    # h-plane parameters: a > s*b is exactly r > 2k.
    @property
    def a(self) -> int:
        return self.q

    @property
    def b(self) -> int:
        return self.k

    def s_value(self):
        return mp.mpf(2 * self.q) / self.r


def _ctx(params) -> PhaseContext:
    if isinstance(params, PhaseContext):
        return params
    return PhaseContext.from_params(params)


def _log_prime_sum(q: int):
    return mp.fsum(mp.log(p) / (p - 1) for p in prime_divisors(q))


def _check_off_f_cuts(q: int, z) -> None:
    if mp.im(z) == 0 and (mp.re(z) <= 0 or mp.re(z) >= q):
        raise ValidationError(
            f"z = {z} lies on a branch cut (-inf, 0] or [{q}, +inf)"
        )


# ---------------------------------------------------------------------------
# The f-plane functions.


def f_eval(params, z, bits: int = 128):
    c = _ctx(params)
    k, q, r = c.k, c.q, c.r
    with mp.workprec(bits + 32):
        zz = mp.mpc(z)
        _check_off_f_cuts(q, zz)
        const = r * q * mp.log(r) + 2 * k * q * _log_prime_sum(q)
        return (
            k * (zz + r + q) * mp.log(zz + r + q)
            + k * (q - zz) * mp.log(q - zz)
            + (q + k) * zz * mp.log(zz)
            - (q + k) * (zz + r) * mp.log(zz + r)
            + const
        )


def _fprime_raw(k: int, q: int, r: int, zz):
    return (q + k) * (mp.log(zz) - mp.log(zz + r)) + k * (
        mp.log(zz + r + q) - mp.log(q - zz)
    )


def fprime_eval(params, z, bits: int = 128):
    c = _ctx(params)
    with mp.workprec(bits + 32):
        zz = mp.mpc(z)
        _check_off_f_cuts(c.q, zz)
        return _fprime_raw(c.k, c.q, c.r, zz)


def f0_eval(params, z, bits: int = 128):
    """f0(z) = f(z) - z f'(z), written in closed form."""
    c = _ctx(params)
    k, q, r = c.k, c.q, c.r
    with mp.workprec(bits + 32):
        zz = mp.mpc(z)
        _check_off_f_cuts(q, zz)
        const = r * q * mp.log(r) + 2 * k * q * _log_prime_sum(q)
        return (
            k * (r + q) * mp.log(zz + r + q)
            + k * q * mp.log(q - zz)
            - r * (q + k) * mp.log(zz + r)
            + const
        )


def _fpp_raw(k: int, q: int, r: int, zz):
    num = (r - 2 * k) * q * (2 * zz + r) ** 2 - r * q * (r + 2 * q) * (r + 2 * k + 2 * q)
    den = 4 * zz * (zz + r) * (zz + r + q) * (zz - q)
    return num / den


def fpp_eval(params, z, bits: int = 128):
    c = _ctx(params)
    with mp.workprec(bits + 32):
        zz = mp.mpc(z)
        _check_off_f_cuts(c.q, zz)
        return _fpp_raw(c.k, c.q, c.r, zz)


def g_eval(params, z, bits: int = 128):
    c = _ctx(params)
    k, q, r = c.k, c.q, c.r
    with mp.workprec(bits + 32):
        zz = mp.mpc(z)
        _check_off_f_cuts(q, zz)
        sz = mp.sqrt(zz)
        szr = mp.sqrt(zz + r)
        ratio = mp.sqrt(q - zz) * mp.sqrt(zz + r + q) / (sz * szr)
        lead = mp.mpc(1) if k % 2 == 1 else (2 * zz + r)
        return lead / (sz * szr) * ratio**k


# ---------------------------------------------------------------------------
# The h-plane model: h, H, banks.


def _real(x):
    """mpf at working precision; exact for Fraction / mpq style rationals."""
    den = getattr(x, "denominator", None)
    if den is not None and not isinstance(x, int):
        return mp.mpf(int(x.numerator)) / mp.mpf(int(den))
    return mp.mpf(x)


def _check_h_args(a, b, s) -> None:
    if not (a > 0 and b > 0 and s > 0):
        raise ValidationError(f"need a, b, s > 0, got ({a}, {b}, {s})")
    if not a > s * b:
        raise ValidationError(f"need a > s*b, got a = {a}, s*b = {s * b}")


def h_eval(a, b, s, w, bits: int = 128):
    """h(w) on C minus the cuts (-inf, 1] and [1+s, +inf)."""
    _check_h_args(a, b, s)
    with mp.workprec(bits + 32):
        ww = mp.mpc(w)
        ss = _real(s)
        if mp.im(ww) == 0 and (mp.re(ww) <= 1 or mp.re(ww) >= 1 + ss):
            raise ValidationError(f"w = {w} lies on a branch cut of h")
        return (a + b) * (mp.log(ww - 1) - mp.log(ww + 1)) + b * (
            mp.log(1 + ss + ww) - mp.log(1 + ss - ww)
        )


def H_eval(a, b, s, x, y, bits: int = 128):
    """The extension of Re h to all of R^2, with values in R u {+-inf}."""
    _check_h_args(a, b, s)
    with mp.workprec(bits + 32):
        xx, yy, ss = _real(x), _real(y), _real(s)
        y2 = yy * yy
        n1 = (xx - 1) ** 2 + y2
        d1 = (xx + 1) ** 2 + y2
        n2 = (xx + 1 + ss) ** 2 + y2
        d2 = (xx - 1 - ss) ** 2 + y2
        if n1 == 0 or d2 == 0:
            return mp.ninf if n1 == 0 else mp.inf
        if d1 == 0 or n2 == 0:
            return mp.inf if d1 == 0 else mp.ninf
        return mp.mpf(a + b) / 2 * mp.log(n1 / d1) + mp.mpf(b) / 2 * mp.log(n2 / d2)


def h_bank_imag(a, b, s, x, side: int, bits: int = 128):
    """Im h at x + side*i0 on the banks of the cuts (constant per segment:
    (a+b)pi on (-1, 1], 0 on (-1-s, -1], b*pi outside [-1-s, 1+s]), with
    the sign flipped on the lower bank.  Off the cuts the value is 0."""
    _check_h_args(a, b, s)
    if side not in (1, -1):
        raise ValidationError(f"side must be +1 or -1, got {side!r}")
    with mp.workprec(bits + 32):
        xx, ss = _real(x), _real(s)
        if -1 < xx <= 1:
            base = (a + b) * mp.pi
        elif -1 - ss < xx <= -1:
            base = mp.mpf(0)
        elif xx <= -1 - ss or xx >= 1 + ss:
            base = b * mp.pi
        else:  # 1 < x < 1+s: not a cut, h is real there
            base = mp.mpf(0)
        return side * base


def dH_dx_axis(a, b, s, x, bits: int = 128):
    """dH/dx at (x, 0), away from the four singular abscissas."""
    _check_h_args(a, b, s)
    with mp.workprec(bits + 32):
        xx, ss = _real(x), _real(s)
        return (a + b) * (1 / (xx - 1) - 1 / (xx + 1)) + b * (
            1 / (xx + 1 + ss) + 1 / (1 + ss - xx)
        )


def dH_dy(a, b, s, x, y, bits: int = 128):
    """dH/dy, in the factored form whose quartic factor controls its sign:

    dH/dy = 4xy ((a-sb)y^4 + c1(x)y^2 + c2(x)) / (|w-1||w+1||w-1-s||w+1+s|)^2.
    """
    _check_h_args(a, b, s)
    with mp.workprec(bits + 32):
        xx, yy, ss = _real(x), _real(y), _real(s)
        c1 = 2 * (a - ss * b) * xx**2 + 2 * (1 + ss) * (a + ss * a + ss * b)
        c2 = (a + b) * (xx**2 - (1 + ss) ** 2) ** 2 - b * (1 + ss) * (xx**2 - 1) ** 2
        quartic = (a - ss * b) * yy**4 + c1 * yy**2 + c2
        y2 = yy * yy
        den = (
            ((xx - 1) ** 2 + y2)
            * ((xx + 1) ** 2 + y2)
            * ((xx - 1 - ss) ** 2 + y2)
            * ((xx + 1 + ss) ** 2 + y2)
        )
        return 4 * xx * yy * quartic / den


# ---------------------------------------------------------------------------
# Certified bisection utilities.


def _bisect(fn, lo, hi, bits: int, what: str):
    """Root of fn on [lo, hi] by sign bisection; fn(lo) and fn(hi) must
    have opposite signs, otherwise the bracketing lemma this call relies
    on has failed and we refuse to continue."""
    flo, fhi = fn(lo), fn(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise StructuralError(
            f"{what}: no sign change on [{mpmath.nstr(lo, 8)}, {mpmath.nstr(hi, 8)}]"
        )
    tol = mp.ldexp(max(1, abs(hi)), -bits)
    for _ in range(4 * bits + 64):
        mid = (lo + hi) / 2
        if hi - lo < tol:
            return mid
        fm = fn(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    return (lo + hi) / 2


def eta_roots(a, b, s, bits: int = 128):
    """The two positive roots of H(x, 0) = 0: eta0 in (1, 1+s) where
    H is increasing, and eta1 in (1+s, +inf) where H is decreasing.
    The derivative signs dH/dx(eta0) > 0 > dH/dx(eta1) are verified."""
    _check_h_args(a, b, s)
    with mp.workprec(bits + 48):
        ss = _real(s)

        def on_axis(x):
            return H_eval(a, b, s, x, 0, bits + 32)

        # eta0: H goes -inf -> +inf across (1, 1+s).
        eps = ss / 16
        lo, hi = 1 + eps, 1 + ss - eps
        while on_axis(lo) >= 0:
            eps /= 16
            lo = 1 + eps
        eps2 = ss / 16
        while on_axis(hi) <= 0:
            eps2 /= 16
            hi = 1 + ss - eps2
        eta0 = _bisect(on_axis, lo, hi, bits, "eta0")

        # eta1: H goes +inf -> negative across (1+s, x_min), where x_min
        # is the minimum of H(., 0) beyond the cut endpoint.
        x_min = mp.sqrt(((a + b) * (1 + ss) ** 2 - b * (1 + ss)) / (a - ss * b))
        eps = (x_min - (1 + ss)) / 16
        lo = 1 + ss + eps
        while on_axis(lo) <= 0:
            eps /= 16
            lo = 1 + ss + eps
        if on_axis(x_min) >= 0:
            raise StructuralError("H(x_min, 0) >= 0; eta1 bracket impossible")
        eta1 = _bisect(on_axis, lo, x_min, bits, "eta1")

        if not dH_dx_axis(a, b, s, eta0, bits) > 0:
            raise StructuralError("dH/dx(eta0, 0) is not positive")
        if not dH_dx_axis(a, b, s, eta1, bits) < 0:
            raise StructuralError("dH/dx(eta1, 0) is not negative")
        return +eta0, +eta1


def y0_curve(a, b, s, x, bits: int = 128):
    """The positive solution y = Y0(x) of H(x, y) = 0, for x strictly
    between eta0 and eta1 (equivalently H(x, 0) > 0).  Bisection between
    y = 0 and a doubling upper bracket; the sign dH/dy < 0 at the root
    is verified through the factored derivative."""
    _check_h_args(a, b, s)
    with mp.workprec(bits + 48):
        if not H_eval(a, b, s, x, 0, bits + 32) > 0:
            raise ValidationError(
                f"x = {mpmath.nstr(mp.mpf(x), 10)} is not strictly between the eta roots"
            )
        hi = mp.mpf(1)
        for _ in range(80):
            if H_eval(a, b, s, x, hi, bits + 32) < 0:
                break
            hi *= 2
        else:
            raise StructuralError("no upper bracket for Y0: H stays positive")

        def fy(y):
            return H_eval(a, b, s, x, y, bits + 32)

        y = _bisect(fy, mp.mpf(0), hi, bits, "Y0")
        if not dH_dy(a, b, s, x, y, bits) < 0:
            raise StructuralError("dH/dy at (x, Y0(x)) is not negative")
        return +y


def curve_im_h(a, b, s, x, bits: int = 128):
    """Im h(x + i Y0(x)); strictly increasing in x from 0 to b*pi."""
    with mp.workprec(bits + 48):
        y = y0_curve(a, b, s, x, bits)
        return +mp.im(h_eval(a, b, s, mp.mpc(x, y), bits))


@dataclass(frozen=True)
class ImagAxisScan:
    a: float
    b: float
    s: float
    ys: tuple
    values: tuple
    decreasing: bool
    limit_zero_residual: mpmath.mpf
    limit_infinity_residual: mpmath.mpf


def imag_axis_scan(a, b, s, grid=None, bits: int = 128) -> ImagAxisScan:
    """Im h(iy) on a grid of y > 0, via the closed form

        Im h(iy) = 2(a+b) arctan(1/y) + 2b arctan(y/(1+s)),

    together with the strict-decrease flag and the residuals against the
    limits (a+b)pi at y -> 0 and b*pi at y -> +inf (sampled at 10^-6 and
    10^6)."""
    _check_h_args(a, b, s)
    with mp.workprec(bits + 32):
        ss = _real(s)

        def psi(y):
            return 2 * (a + b) * mp.atan(1 / y) + 2 * b * mp.atan(y / (1 + ss))

        if grid is None:
            grid = [mp.mpf(10) ** (e / mp.mpf(4)) for e in range(-24, 25)]
        ys = tuple(mp.mpf(y) for y in grid)
        values = tuple(psi(y) for y in ys)
        decreasing = all(values[i] > values[i + 1] for i in range(len(values) - 1))
        res0 = abs(psi(mp.mpf("1e-6")) - (a + b) * mp.pi)
        res_inf = abs(psi(mp.mpf("1e6")) - b * mp.pi)
        return ImagAxisScan(
            a=a,
            b=b,
            s=s,
            ys=ys,
            values=values,
            decreasing=decreasing,
            limit_zero_residual=res0,
            limit_infinity_residual=res_inf,
        )


# ---------------------------------------------------------------------------
# Solutions of h(w) = lambda * pi * i.


@dataclass(frozen=True)
class BankPoint:
    """A point x + side*i0 on a bank of a cut of h."""

    x: mpmath.mpf
    side: int


@dataclass(frozen=True)
class HSolutionSet:
    """All solutions of h(w) = lambda*pi*i, split into interior points of
    the domain of h and bank points of the cuts.

    The case tag follows the classification by |lambda|:
    "zero" (lambda = 0), "curve-pair" (0 < |lambda| < b), "bank-eta1"
    (|lambda| = b), "axis" (b < |lambda| < a+b), "bank-origin"
    (|lambda| = a+b), "empty" (|lambda| > a+b).
    """

    lam: float
    case: str
    interior: tuple
    bank: tuple
    residual: mpmath.mpf


def solve_h(a, b, s, lam, bits: int = 128) -> HSolutionSet:
    _check_h_args(a, b, s)
    with mp.workprec(bits + 48):
        lam = _real(lam)
        sgn = 1 if lam >= 0 else -1
        mag = abs(lam)
        ss = _real(s)

        if mag > a + b:
            return HSolutionSet(lam=lam, case="empty", interior=(), bank=(), residual=mp.mpf(0))

        if mag == a + b:
            # Bank of (-inf, 1] at x = 0: H(0,0) = 0 and Im = side*(a+b)*pi,
            # both exact.
            return HSolutionSet(
                lam=lam,
                case="bank-origin",
                interior=(),
                bank=(BankPoint(x=mp.mpf(0), side=sgn),),
                residual=mp.mpf(0),
            )

        eta0, eta1 = eta_roots(a, b, s, bits)

        if mag == 0:
            res = abs(h_eval(a, b, s, eta0, bits))
            return HSolutionSet(
                lam=lam,
                case="zero",
                interior=(mp.mpc(eta0),),
                bank=(BankPoint(x=-eta0, side=1), BankPoint(x=-eta0, side=-1)),
                residual=res,
            )

        if mag == b:
            res = abs(H_eval(a, b, s, eta1, 0, bits))
            return HSolutionSet(
                lam=lam,
                case="bank-eta1",
                interior=(),
                bank=(BankPoint(x=-eta1, side=sgn), BankPoint(x=eta1, side=sgn)),
                residual=res,
            )

        if mag > b:
            # Unique purely imaginary solution: Im h(iy) decreases from
            # (a+b)pi to b*pi, so it crosses mag*pi exactly once.
            def psi_shift(y):
                return (
                    2 * (a + b) * mp.atan(1 / y)
                    + 2 * b * mp.atan(y / (1 + ss))
                    - mag * mp.pi
                )

            lo, hi = mp.mpf(2) ** -64, mp.mpf(2) ** 64
            y = _bisect(psi_shift, lo, hi, bits, "imaginary-axis solution")
            w = mp.mpc(0, sgn * y)
            res = abs(h_eval(a, b, s, w, bits) - lam * mp.pi * 1j)
            return HSolutionSet(
                lam=lam, case="axis", interior=(w,), bank=(), residual=res
            )

        # 0 < mag < b: a conjugate-symmetric pair on the curve y = Y0(x).
        def im_on_curve(x):
            return curve_im_h(a, b, s, x, bits) - mag * mp.pi

        width = eta1 - eta0
        eps = width / 2**12
        lo, hi = eta0 + eps, eta1 - eps
        while im_on_curve(lo) >= 0:
            eps /= 16
            lo = eta0 + eps
        eps2 = width / 2**12
        while im_on_curve(hi) <= 0:
            eps2 /= 16
            hi = eta1 - eps2
        x = _bisect(im_on_curve, lo, hi, bits, "curve solution")
        y = y0_curve(a, b, s, x, bits)
        w = mp.mpc(x, y) if sgn > 0 else mp.mpc(x, -y)
        res = abs(h_eval(a, b, s, w, bits) - lam * mp.pi * 1j)
        pair = (w, -mp.conj(w))
        return HSolutionSet(
            lam=lam, case="curve-pair", interior=pair, bank=(), residual=res
        )


# ---------------------------------------------------------------------------
# Saddle points of f' = lambda * pi * i.


@dataclass(frozen=True)
class SaddlePoint:
    lam: float
    tau: mpmath.mpc
    q_minus_tau: mpmath.mpc
    residual: mpmath.mpf
    strategy: str


def _mu0_log_bisect(c: PhaseContext, bits: int):
    """mu0 as q - exp(v*), where v* is the root of v -> f'(q - e^v) on the
    real axis.  Working with v = log(q - x) keeps full accuracy even when
    mu0 is exponentially close to q (r ~ log^2 q makes it so)."""
    k, q, r = c.k, c.q, c.r
    with mp.workprec(bits + 64):

        def fv(v):
            x = q - mp.exp(v)
            if x <= 0:
                return mp.mpf(-1e9)
            return _fprime_raw(k, q, r, mp.mpf(x))

        v_lo = mp.mpf(-(bits + 4 * max(1, int(mp.log(q) ** 2))))
        v_hi = mp.log(mp.mpf(q) * (1 - mp.mpf(2) ** -16))
        v = _bisect(fv, v_lo, v_hi, bits + 16, "mu0")
        q_minus = mp.exp(v)
        return q - q_minus, q_minus


def mu_roots(params, bits: int = 128):
    """The endpoints (mu0, mu1) of the saddle curve in the f-plane:
    mu0 in (0, q) is the zero of f' there, mu1 = r(eta1 - 1)/2 > q its
    counterpart beyond the cut."""
    c = _ctx(params)
    with mp.workprec(bits + 48):
        mu0, _ = _mu0_log_bisect(c, bits)
        _, eta1 = eta_roots(c.a, c.b, c.s_value(), bits)
        mu1 = c.r * (eta1 - 1) / 2
        return +mu0, +mu1


def _u_newton(c: PhaseContext, lam, bits: int, u0, max_steps: int = 400):
    """Damped Newton for F(u) = f'(q - e^u) - lambda*pi*i in u = log(q-z).
    Near z = q the phase behaves like -k*u + const, so F is nearly linear
    in u and the iteration is immune to the z-plane cancellation."""
    k, q, r = c.k, c.q, c.r
    target = mp.ldexp(1, -(bits + 16))

    def F(u):
        return _fprime_raw(k, q, r, q - mp.exp(u)) - lam * mp.pi * 1j

    u = mp.mpc(u0)
    fu = F(u)
    for _ in range(max_steps):
        if abs(fu) < target:
            break
        eu = mp.exp(u)
        try:
            fp = -_fpp_raw(k, q, r, q - eu) * eu
        except (ValueError, ZeroDivisionError):
            raise ConvergenceError("Newton iterate landed on a pole of f''")
        if fp == 0:
            raise ConvergenceError("Newton derivative vanished")
        step = fu / fp
        t = mp.mpf(1)
        for _ in range(60):
            u_try = u - t * step
            try:
                f_try = F(u_try)
            except (ValueError, ZeroDivisionError):
                f_try = None
            if f_try is not None and abs(f_try) < abs(fu):
                u, fu = u_try, f_try
                break
            t /= 2
        else:
            break  # stalled; the caller judges the residual
    return u, fu


def find_tau(params, lam, bits: int = 256, strategy: str = "newton") -> SaddlePoint:
    """The saddle point tau_lambda: the unique solution of
    f'(z) = lambda*pi*i with Re z in [mu0, mu1) and Im z >= 0, for real
    lambda in [0, k).

    newton: damped Newton in u = log(q - z), seeded near z = q (where
    tau_{k-2} localizes as q grows); if the iteration stalls, the solver
    brackets the saddle on the level curve Im f' = lambda*pi by certified
    bisection in the h-plane and restarts Newton from there.

    census: for lambda = k - 2 (mod 2 classes of P), picks the nearest
    root of the polynomial P(z) and polishes it; only meaningful when
    lambda is an integer with lambda = k (mod 2).
    """
    c = _ctx(params)
    k, q, r = c.k, c.q, c.r
    with mp.workprec(bits + 64):
        lam = _real(lam)
        if not 0 <= lam < k:
            raise ValidationError(f"lambda must lie in [0, k), got {lam}")
        if strategy not in ("newton", "census"):
            raise ValidationError(f"unknown strategy {strategy!r}")

        if lam == 0:
            mu0, q_minus = _mu0_log_bisect(c, bits)
            res = abs(_fprime_raw(k, q, r, mp.mpf(mu0)))
            return SaddlePoint(
                lam=lam,
                tau=mp.mpc(mu0),
                q_minus_tau=mp.mpc(q_minus),
                residual=+res,
                strategy="bisect",
            )

        accept = mp.ldexp(1, -(bits // 2))

        if strategy == "census":
            lam_i = int(lam)
            if lam_i != lam or (lam_i - k) % 2 != 0:
                raise ValidationError(
                    "census strategy needs an integer lambda with lambda = k (mod 2)"
                )
            report = p_roots_census(c, bits=max(bits, 192))
            target = lam * mp.pi * 1j
            best = None
            for z in report.roots:
                if mp.re(z) > -r / 2 and mp.im(z) >= 0:
                    try:
                        d = abs(_fprime_raw(k, q, r, z) - target)
                    except (ValueError, ZeroDivisionError):
                        continue
                    if best is None or d < best[0]:
                        best = (d, z)
            if best is None:
                raise ConvergenceError("census found no candidate root")
            u0 = mp.log(q - best[1])
        else:
            z0 = q * (1 - mp.mpf("1e-3")) + 1j * q * mp.mpf("1e-3")
            u0 = mp.log(q - z0)

        u, fu = _u_newton(c, lam, bits, u0)
        if abs(fu) >= accept and strategy == "newton":
            # Guaranteed fallback: bracket the saddle on the curve in the
            # h-plane, then polish.
            sols = solve_h(c.a, c.b, c.s_value(), lam / 1, bits=min(bits, 160))
            if not sols.interior:
                raise ConvergenceError(
                    f"no interior h-plane solution for lambda = {lam}"
                )
            w = sols.interior[0]
            z_seed = r * (w - 1) / 2
            u, fu = _u_newton(c, lam, bits, mp.log(q - z_seed))
        if abs(fu) >= accept:
            raise ConvergenceError(
                f"saddle solver stalled at residual {mpmath.nstr(abs(fu), 6)} "
                f"for lambda = {lam}, (k, q, r) = ({k}, {q}, {r})"
            )
        q_minus = mp.exp(u)
        tau = q - q_minus
        if mp.im(tau) < 0:
            raise ConvergenceError("converged into the lower half-plane")
        return SaddlePoint(
            lam=lam,
            tau=+tau,
            q_minus_tau=+q_minus,
            residual=+abs(fu),
            strategy=strategy,
        )


# ---------------------------------------------------------------------------
# Census of the roots of P(z).


def p_polynomial(params) -> list:
    """Integer coefficients (descending) of

        P(z) = (z+r)^(q+k) (z-q)^k - z^(q+k) (z+q+r)^k,

    of degree exactly q + 2k - 1 with leading coefficient q(r - 2k)."""
    c = _ctx(params)
    k, q, r = c.k, c.q, c.r

    def binom_poly(shift: int, e: int) -> list:
        out = [0] * (e + 1)  # ascending
        for i in range(e + 1):
            out[i] = math.comb(e, i) * shift ** (e - i)
        return out

    def mul(p1: list, p2: list) -> list:
        out = [0] * (len(p1) + len(p2) - 1)
        for i, v1 in enumerate(p1):
            if v1 == 0:
                continue
            for j, v2 in enumerate(p2):
                out[i + j] += v1 * v2
        return out

    left = mul(binom_poly(r, q + k), binom_poly(-q, k))
    right = mul([0] * (q + k) + [1], binom_poly(q + r, k))
    coeffs = [x - y for x, y in zip(left, right)]
    if coeffs[-1] != 0:
        raise VerificationError("top-degree coefficients of P failed to cancel")
    coeffs.pop()
    if coeffs[-1] != q * (r - 2 * k):
        raise VerificationError("leading coefficient of P is not q(r - 2k)")
    return coeffs[::-1]


@dataclass(frozen=True)
class CensusReport:
    k: int
    q: int
    r: int
    degree: int
    on_line: int
    right: int
    left: int
    min_distance: mpmath.mpf
    roots: tuple
    bits: int

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "q": self.q,
            "r": self.r,
            "degree": self.degree,
            "counts": {"on_line": self.on_line, "right": self.right, "left": self.left},
            "min_distance": mpmath.nstr(self.min_distance, 17),
            "roots": [
                [mpmath.nstr(mp.re(z), 25), mpmath.nstr(mp.im(z), 25)]
                for z in self.roots
            ],
        }


def p_roots_census(params, bits: int = 512) -> CensusReport:
    """All roots of P(z), classified against the line Re z = -r/2.

    The counts must be (q-1, k, k) for (on-line, right, left); anything
    else contradicts the saddle classification and raises."""
    c = _ctx(params)
    k, q, r = c.k, c.q, c.r
    degree = q + 2 * k - 1
    if degree > 200:
        raise ValidationError(f"census limited to degree <= 200, got {degree}")
    coeffs = p_polynomial(c)
    with mp.workprec(bits + 64):
        try:
            roots = mp.polyroots(coeffs, maxsteps=200, extraprec=bits // 2 + 64)
        except mpmath.libmp.NoConvergence as exc:
            raise ConvergenceError(f"polynomial solver did not converge: {exc}")
        roots = sorted((mp.mpc(z) for z in roots), key=lambda z: (mp.re(z), mp.im(z)))
        tol = mp.ldexp(1, -(bits // 4))
        half = -mp.mpf(r) / 2
        on_line = sum(1 for z in roots if abs(mp.re(z) - half) < tol)
        right = sum(1 for z in roots if mp.re(z) - half >= tol)
        left = sum(1 for z in roots if mp.re(z) - half <= -tol)
        mind = mp.inf
        for i in range(len(roots)):
            for j in range(i + 1, len(roots)):
                d = abs(roots[i] - roots[j])
                if d < mind:
                    mind = d
        if (on_line, right, left) != (q - 1, k, k):
            raise StructuralError(
                f"census counts ({on_line}, {right}, {left}) != ({q - 1}, {k}, {k})"
            )
        return CensusReport(
            k=k,
            q=q,
            r=r,
            degree=degree,
            on_line=on_line,
            right=right,
            left=left,
            min_distance=+mind,
            roots=tuple(roots),
            bits=bits,
        )


# ---------------------------------------------------------------------------
# The asymptotic constants.


@dataclass(frozen=True)
class SaddleData:
    lam: float
    tau: mpmath.mpc
    q_minus_tau: mpmath.mpc
    alpha: mpmath.mpf
    omega: mpmath.mpf
    phi: mpmath.mpf
    f0_at_tau: mpmath.mpc
    residual: mpmath.mpf
    bits: int

    def as_dict(self) -> dict:
        return {
            "lambda": float(self.lam),
            "tau": [mpmath.nstr(mp.re(self.tau), 25), mpmath.nstr(mp.im(self.tau), 25)],
            "alpha": mpmath.nstr(self.alpha, 25),
            "omega": mpmath.nstr(self.omega, 25),
            "phi": mpmath.nstr(self.phi, 25),
            "residual": mpmath.nstr(self.residual, 8),
            "bits": self.bits,
        }


def _f0_via_q_minus(c: PhaseContext, tau, q_minus, bits: int):
    """f0(tau) with log(q - tau) taken from the exactly-known difference."""
    k, q, r = c.k, c.q, c.r
    with mp.workprec(bits + 48):
        const = r * q * mp.log(r) + 2 * k * q * _log_prime_sum(q)
        return (
            k * (r + q) * mp.log(tau + r + q)
            + k * q * mp.log(q_minus)
            - r * (q + k) * mp.log(tau + r)
            + const
        )


def saddle_constants(params, bits: int = 256) -> SaddleData:
    """alpha, omega, phi at the dominant saddle tau_{k-2}.

    For k = 2 the saddle is the real point mu0, the second derivative and
    g are positive there, and omega = phi = 0 exactly.
    """
    c = _ctx(params)
    k = c.k
    with mp.workprec(bits + 64):
        sp = find_tau(c, k - 2, bits=bits)
        f0v = _f0_via_q_minus(c, sp.tau, sp.q_minus_tau, bits)
        alpha = -mp.re(f0v)
        if k == 2:
            fpp = _fpp_raw(c.k, c.q, c.r, mp.re(sp.tau))
            gv = g_eval(c, mp.re(sp.tau), bits)
            if not (mp.im(sp.tau) == 0 and mp.re(fpp) > 0 and mp.re(gv) > 0 and mp.im(gv) == 0):
                raise VerificationError(
                    "k = 2 saddle must be real with positive f'' and g"
                )
            omega = mp.mpf(0)
            phi = mp.mpf(0)
        else:
            omega = mp.im(f0v)
            fpp = fpp_eval(c, sp.tau, bits)
            gv = g_eval(c, sp.tau, bits)
            phi = -mp.arg(fpp) / 2 + mp.arg(gv)
        return SaddleData(
            lam=k - 2,
            tau=sp.tau,
            q_minus_tau=sp.q_minus_tau,
            alpha=+alpha,
            omega=+omega,
            phi=+phi,
            f0_at_tau=+f0v,
            residual=sp.residual,
            bits=bits,
        )


@dataclass(frozen=True)
class TauScanRow:
    q: int
    r: int
    log_distance: mpmath.mpf
    ratio: mpmath.mpf


def tau_asymptotic_scan(k: int, q_list, bits: int = 224) -> list:
    """log|tau_{k-2} - q| / log^2(q) for r = floor(log^2 q); the ratio
    approaches -1/k at the rate O(1/log q)."""
    rows = []
    for q in q_list:
        r = int(math.floor(math.log(q) ** 2))
        c = PhaseContext(k=k, q=q, r=r)
        with mp.workprec(bits + 64):
            sp = find_tau(c, k - 2, bits=bits)
            logd = mp.log(abs(sp.q_minus_tau))
            ratio = logd / mp.log(q) ** 2
            rows.append(TauScanRow(q=q, r=r, log_distance=+logd, ratio=+ratio))
    return rows
