"""Saddle-point machinery: phase derivatives, the h-plane model, level
sets, the root census, and the asymptotic constants.

Derivatives are cross-checked by central differences, the h-plane model
by the exact substitution z = r(w-1)/2, and the solvers by residuals of
the defining equations at the returned points.
"""

from fractions import Fraction

import pytest
from mpmath import mp

from zetaforms.errors import StructuralError, ValidationError
from zetaforms.params import Params
from zetaforms.saddle import (
    H_eval,
    PhaseContext,
    curve_im_h,
    dH_dx_axis,
    dH_dy,
    eta_roots,
    f0_eval,
    f_eval,
    find_tau,
    fpp_eval,
    fprime_eval,
    g_eval,
    h_bank_imag,
    h_eval,
    imag_axis_scan,
    mu_roots,
    p_polynomial,
    p_roots_census,
    saddle_constants,
    solve_h,
    tau_asymptotic_scan,
)

C235 = PhaseContext(2, 3, 5)
C337 = PhaseContext(3, 3, 7)
S235 = Fraction(6, 5)  # s = 2q/r for (q, r) = (3, 5)

# Frozen reference values (parse inside a workprec block before use).
ETA0_235 = "1.953857544344722368760002"
ETA1_235 = "3.561233836197700861937915"
MU0_235 = "2.384643860861805921900005"
MU1_235 = "6.403084590494252154844787"
ALPHA_235 = "-15.28010123015561184169415"


def test_phase_context_validation():
    with pytest.raises(ValidationError):
        PhaseContext(1, 3, 5)
    with pytest.raises(ValidationError):
        PhaseContext(2, 2, 5)
    with pytest.raises(ValidationError):
        PhaseContext(2, 3, 4)  # r must exceed 2k
    ctx = PhaseContext.from_params(Params(2, 3, 5, 6))
    assert (ctx.a, ctx.b) == (3, 2)
    with mp.workprec(80):
        assert abs(ctx.s_value() - mp.mpf(6) / 5) < mp.ldexp(1, -70)


def test_branch_cut_guards():
    with pytest.raises(ValidationError):
        f_eval(C235, -1.0, 128)
    with pytest.raises(ValidationError):
        fprime_eval(C235, 3.0, 128)  # z >= q
    with pytest.raises(ValidationError):
        h_eval(3, 2, S235, 0.5, 128)  # w <= 1
    with pytest.raises(ValidationError):
        h_eval(3, 2, S235, 2.5, 128)  # w >= 1 + s
    with pytest.raises(ValidationError):
        h_eval(3, 2, 4, 5.0, 128)  # a <= s*b rejected


@pytest.mark.parametrize("c", [C235, C337], ids=["k2", "k3"])
def test_derivatives_by_central_difference(c):
    with mp.workprec(360):
        h = mp.ldexp(1, -60)
        for z in (mp.mpc(1.3, 0.7), mp.mpc(0.4, -1.1), mp.mpc(2.5, 2.0)):
            d1 = (f_eval(c, z + h, 320) - f_eval(c, z - h, 320)) / (2 * h)
            assert abs(d1 - fprime_eval(c, z, 320)) < mp.ldexp(1, -100), z
            d2 = (fprime_eval(c, z + h, 320) - fprime_eval(c, z - h, 320)) / (2 * h)
            assert abs(d2 - fpp_eval(c, z, 320)) < mp.ldexp(1, -100), z


@pytest.mark.parametrize("c", [C235, C337], ids=["k2", "k3"])
def test_f0_is_legendre_transform(c):
    with mp.workprec(300):
        for z in (mp.mpc(1.1, 0.4), mp.mpc(0.8, -2.0), mp.mpc(2.9, 1.5)):
            want = f_eval(c, z, 256) - z * fprime_eval(c, z, 256)
            assert abs(f0_eval(c, z, 256) - want) < mp.ldexp(1, -200), z


def test_h_substitution_matches_fprime():
    """f'(r(w-1)/2) = h(w) with (a, b, s) = (q, k, 2q/r)."""
    for c in (C235, C337):
        s = Fraction(2 * c.q, c.r)
        with mp.workprec(300):
            for w in (mp.mpc(1.7, 0.9), mp.mpc(-0.3, 0.25), mp.mpc(0, 2.0)):
                z = c.r * (w - 1) / 2
                lhs = fprime_eval(c, z, 256)
                rhs = h_eval(c.q, c.k, s, w, 256)
                assert abs(lhs - rhs) < mp.ldexp(1, -200), (c.k, complex(w))


def test_H_matches_re_h_and_symmetries():
    with mp.workprec(200):
        for x, y in ((1.4, 0.8), (0.2, 1.9), (-2.3, 0.4)):
            hv = h_eval(3, 2, S235, mp.mpc(x, y), 160)
            assert abs(H_eval(3, 2, S235, x, y, 160) - mp.re(hv)) < mp.ldexp(1, -140)
            # H is even in y and odd in x.
            assert abs(H_eval(3, 2, S235, x, -y, 160) - mp.re(hv)) < mp.ldexp(1, -140)
            assert abs(H_eval(3, 2, S235, -x, y, 160) + mp.re(hv)) < mp.ldexp(1, -140)
        # Signed infinities at the four singular points.
        assert H_eval(3, 2, S235, 1, 0, 160) == mp.ninf
        assert H_eval(3, 2, S235, -1, 0, 160) == mp.inf
        assert H_eval(3, 2, S235, 1 + S235, 0, 160) == mp.inf
        assert H_eval(3, 2, S235, -1 - S235, 0, 160) == mp.ninf


def test_bank_imaginary_parts():
    with mp.workprec(120):
        pi = mp.pi
        assert abs(h_bank_imag(3, 2, S235, 0.5, +1, 80) - 5 * pi) < mp.ldexp(1, -70)
        assert abs(h_bank_imag(3, 2, S235, 0.5, -1, 80) + 5 * pi) < mp.ldexp(1, -70)
        assert h_bank_imag(3, 2, S235, -1.5, +1, 80) == 0
        assert abs(h_bank_imag(3, 2, S235, -4.0, +1, 80) - 2 * pi) < mp.ldexp(1, -70)
        assert abs(h_bank_imag(3, 2, S235, 4.0, -1, 80) + 2 * pi) < mp.ldexp(1, -70)
        assert h_bank_imag(3, 2, S235, 1.1, +1, 80) == 0  # (1, 1+s): no cut
    with pytest.raises(ValidationError):
        h_bank_imag(3, 2, S235, 0.5, 2, 80)


def test_dH_derivative_formulas():
    with mp.workprec(300):
        h = mp.ldexp(1, -50)
        for x, y in ((1.6, 0.0), (2.8, 0.0)):
            num = (
                H_eval(3, 2, S235, x + h, 0, 256) - H_eval(3, 2, S235, x - h, 0, 256)
            ) / (2 * h)
            assert abs(num - dH_dx_axis(3, 2, S235, x, 256)) < mp.ldexp(1, -90)
        for x, y in ((1.6, 0.7), (2.2, 1.3), (0.4, 0.9)):
            num = (
                H_eval(3, 2, S235, x, y + h, 256) - H_eval(3, 2, S235, x, y - h, 256)
            ) / (2 * h)
            assert abs(num - dH_dy(3, 2, S235, x, y, 256)) < mp.ldexp(1, -90)


def test_eta_roots_frozen_and_certified():
    with mp.workprec(300):
        e0, e1 = eta_roots(3, 2, S235, 256)
        assert abs(e0 - mp.mpf(ETA0_235)) < mp.ldexp(1, -70)
        assert abs(e1 - mp.mpf(ETA1_235)) < mp.ldexp(1, -70)
        assert 1 < e0 < 1 + mp.mpf(6) / 5 < e1
        # They are genuine zeros of H on the axis.
        assert abs(H_eval(3, 2, S235, e0, 0, 256)) < mp.ldexp(1, -240)
        assert abs(H_eval(3, 2, S235, e1, 0, 256)) < mp.ldexp(1, -240)


def test_mu_roots_frozen_and_linked_to_eta():
    with mp.workprec(300):
        m0, m1 = mu_roots(C235, 256)
        assert abs(m0 - mp.mpf(MU0_235)) < mp.ldexp(1, -70)
        assert abs(m1 - mp.mpf(MU1_235)) < mp.ldexp(1, -70)
        assert abs(fprime_eval(C235, m0, 256)) < mp.ldexp(1, -230)
        e0, e1 = eta_roots(3, 2, S235, 256)
        assert abs(m1 - C235.r * (e1 - 1) / 2) < mp.ldexp(1, -230)
        assert abs(m0 - C235.r * (e0 - 1) / 2) < mp.ldexp(1, -70)


def test_y0_curve_and_im_h_monotone():
    with mp.workprec(220):
        e0, e1 = eta_roots(3, 2, S235, 160)
        xs = [e0 + (e1 - e0) * mp.mpf(i) / 24 for i in range(1, 24)]
        ys = [curve_im_h(3, 2, S235, x, 160) for x in xs]
        assert all(0 < v < 2 * mp.pi for v in ys)
        assert all(ys[i] < ys[i + 1] for i in range(len(ys) - 1))
        # Endpoint limits: 0 at eta0, b*pi at eta1.
        off = (e1 - e0) * mp.mpf("1e-9")
        assert abs(curve_im_h(3, 2, S235, e0 + off, 160)) < mp.mpf("1e-3") * mp.pi
        assert abs(curve_im_h(3, 2, S235, e1 - off, 160) - 2 * mp.pi) < mp.mpf("1e-3") * mp.pi
        with pytest.raises(ValidationError):
            curve_im_h(3, 2, S235, e1 + mp.mpf("0.1"), 160)


def test_imag_axis_scan_closed_form():
    scan = imag_axis_scan(3, 2, S235, bits=160)
    assert scan.decreasing
    with mp.workprec(200):
        assert scan.limit_zero_residual < mp.mpf("1e-4")
        assert scan.limit_infinity_residual < mp.mpf("1e-4")
        # Spot-check the closed form against h on the imaginary axis.
        for y, v in zip(scan.ys, scan.values):
            direct = mp.im(h_eval(3, 2, S235, mp.mpc(0, y), 160))
            assert abs(v - direct) < mp.ldexp(1, -130), float(y)


def _check_case(sols, case, n_interior, n_bank):
    assert sols.case == case
    assert len(sols.interior) == n_interior
    assert len(sols.bank) == n_bank


def test_solve_h_all_cases():
    a, b, s = 3, 2, S235
    with mp.workprec(220):
        pi = mp.pi
        tol = mp.ldexp(1, -100)

        sols = solve_h(a, b, s, 0, bits=160)
        _check_case(sols, "zero", 1, 2)
        assert abs(sols.interior[0] - mp.mpf(ETA0_235)) < mp.ldexp(1, -60)
        assert {p.side for p in sols.bank} == {1, -1}
        assert all(abs(p.x + mp.mpf(ETA0_235)) < mp.ldexp(1, -60) for p in sols.bank)

        sols = solve_h(a, b, s, 1, bits=160)
        _check_case(sols, "curve-pair", 2, 0)
        w0, w1 = sols.interior
        assert abs(w0 + mp.conj(w1)) < tol  # the pair is w, -conj(w)
        assert abs(h_eval(a, b, s, w0, 160) - pi * 1j) < tol
        assert sols.residual < tol

        sols = solve_h(a, b, s, 2, bits=160)  # |lam| = b
        _check_case(sols, "bank-eta1", 0, 2)
        assert {abs(p.x) > 0 for p in sols.bank} == {True}
        xs = sorted(float(p.x) for p in sols.bank)
        eta1 = float(mp.mpf(ETA1_235))
        assert abs(xs[0] + eta1) < 1e-15 and abs(xs[1] - eta1) < 1e-15
        assert all(p.side == 1 for p in sols.bank)

        sols = solve_h(a, b, s, Fraction(7, 2), bits=160)  # b < |lam| < a+b
        _check_case(sols, "axis", 1, 0)
        w = sols.interior[0]
        assert mp.re(w) == 0 and mp.im(w) > 0
        # Bisection bracket starts at 2^64, so ~64 bits of the budget go
        # to scale; accept 2^-90.
        assert abs(h_eval(a, b, s, w, 160) - mp.mpf(3.5) * pi * 1j) < mp.ldexp(1, -90)

        sols = solve_h(a, b, s, 5, bits=160)  # |lam| = a+b
        _check_case(sols, "bank-origin", 0, 1)
        assert sols.bank[0].x == 0 and sols.bank[0].side == 1

        sols = solve_h(a, b, s, 6, bits=160)
        _check_case(sols, "empty", 0, 0)

        # Negative lambda mirrors into the lower half-plane.
        sols = solve_h(a, b, s, -1, bits=160)
        _check_case(sols, "curve-pair", 2, 0)
        assert all(mp.im(w) < 0 for w in sols.interior)
        assert abs(h_eval(a, b, s, sols.interior[0], 160) + pi * 1j) < tol


def test_find_tau_lambda_zero_is_mu0():
    sp = find_tau(C235, 0, bits=256)
    with mp.workprec(280):
        assert sp.strategy == "bisect"
        assert mp.im(sp.tau) == 0
        assert abs(sp.tau - mp.mpf(MU0_235)) < mp.ldexp(1, -70)
        assert abs(sp.tau + sp.q_minus_tau - C235.q) < mp.ldexp(1, -250)
        assert sp.residual < mp.ldexp(1, -240)


def test_find_tau_newton_census_agree():
    sp = find_tau(C337, 1, bits=256)
    spc = find_tau(C337, 1, bits=256, strategy="census")
    with mp.workprec(300):
        assert sp.residual < mp.ldexp(1, -128)
        assert spc.residual < mp.ldexp(1, -128)
        assert abs(sp.tau - spc.tau) < mp.ldexp(1, -200)
        assert abs(sp.tau - mp.mpc("2.361682552801751701560071", "0.5194318204960193176412609")) < mp.ldexp(1, -70)
        # The defining equation and the mirror identity.
        target = mp.pi * 1j
        assert abs(fprime_eval(C337, sp.tau, 256) - target) < mp.ldexp(1, -128)
        mirror = -C337.r - mp.conj(sp.tau)
        assert abs(fprime_eval(C337, mirror, 256) - target) < mp.ldexp(1, -128)


def test_find_tau_validation():
    with pytest.raises(ValidationError):
        find_tau(C235, 2, bits=128)  # lam must be < k
    with pytest.raises(ValidationError):
        find_tau(C235, -0.5, bits=128)
    with pytest.raises(ValidationError):
        find_tau(C235, 0.5, bits=128, strategy="magic")
    with pytest.raises(ValidationError):
        find_tau(C337, 0.5, bits=128, strategy="census")  # non-integer lam


def test_p_polynomial_exact_values():
    coeffs = p_polynomial(C235)
    assert len(coeffs) == C235.q + 2 * C235.k  # degree q + 2k - 1
    assert coeffs[0] == C235.q * (C235.r - 2 * C235.k)
    k, q, r = C235.k, C235.q, C235.r
    for z in (1, -2, 7, -11):
        direct = (z + r) ** (q + k) * (z - q) ** k - z ** (q + k) * (z + q + r) ** k
        horner = 0
        for c in coeffs:
            horner = horner * z + c
        assert horner == direct, z


def test_p_roots_census_counts_and_symmetry():
    rep = p_roots_census(C235, bits=320)
    assert (rep.on_line, rep.right, rep.left) == (C235.q - 1, C235.k, C235.k)
    assert rep.degree == C235.q + 2 * C235.k - 1
    with mp.workprec(360):
        assert rep.min_distance > mp.mpf("1e-6")
        half = -mp.mpf(C235.r) / 2
        # Root set is symmetric under z -> -r - conj(z) (coefficients are
        # real and P(-r - z) = -P(z) up to sign for this family).
        for z in rep.roots:
            partner = min(abs(-C235.r - mp.conj(z) - w) for w in rep.roots)
            assert partner < mp.ldexp(1, -120), complex(z)
        doc = rep.as_dict()
        assert doc["counts"] == {"on_line": 2, "right": 2, "left": 2}
        assert len(doc["roots"]) == rep.degree


def test_saddle_constants_k2_real_saddle():
    data = saddle_constants(C235, bits=256)
    with mp.workprec(300):
        assert data.omega == 0 and data.phi == 0
        assert mp.im(data.tau) == 0
        # alpha < 0 here: (2, 3, 5) sits in the vacuous regime.
        assert abs(data.alpha - mp.mpf(ALPHA_235)) < mp.ldexp(1, -70)
        with mp.workprec(400):
            assert data.alpha + mp.re(data.f0_at_tau) == 0
        # f0 value agrees with the direct evaluator at the saddle.
        direct = f0_eval(C235, mp.re(data.tau), 256)
        assert abs(data.f0_at_tau - direct) < mp.ldexp(1, -200)


def test_saddle_constants_k3_complex_saddle():
    data = saddle_constants(C337, bits=256)
    with mp.workprec(300):
        assert mp.im(data.tau) > 0
        assert data.omega != 0
        assert data.phi != 0
        direct = f0_eval(C337, data.tau, 256)
        assert abs(data.f0_at_tau - direct) < mp.ldexp(1, -180)
        # phi = -arg(f'')/2 + arg(g) at tau.
        want_phi = -mp.arg(fpp_eval(C337, data.tau, 256)) / 2 + mp.arg(
            g_eval(C337, data.tau, 256)
        )
        assert abs(data.phi - want_phi) < mp.ldexp(1, -180)


def test_tau_asymptotic_scan_ratio_approaches_minus_inverse_k():
    rows = tau_asymptotic_scan(2, [101, 1009, 10007], bits=192)
    assert [row.q for row in rows] == [101, 1009, 10007]
    with mp.workprec(200):
        devs = [abs(row.ratio + mp.mpf(1) / 2) for row in rows]
        assert all(devs[i] > devs[i + 1] for i in range(len(devs) - 1))
        assert devs[-1] < mp.mpf("0.13")
        assert all(row.ratio < 0 for row in rows)


def test_fraction_arguments_accepted():
    with mp.workprec(160):
        v1 = h_eval(3, 2, Fraction(6, 5), mp.mpc(1.5, 0.5), 128)
        v2 = h_eval(3, 2, mp.mpf(6) / 5, mp.mpc(1.5, 0.5), 128)
        assert abs(v1 - v2) < mp.ldexp(1, -120)
        e0a, _ = eta_roots(3, 2, Fraction(6, 5), 128)
        e0b, _ = eta_roots(3, 2, mp.mpf(6) / 5, 128)
        assert abs(e0a - e0b) < mp.ldexp(1, -60)
