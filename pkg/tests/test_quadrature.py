"""Contour quadrature: the cot_k integral for S_n, the J integrals, the
g_n ratio lemma, and the asymptotic fit scaffolding.

The quadrature is validated against the zeta route (an entirely
different computation), against its own refinement estimator, and
against the certified truncation bounds.
"""

from fractions import Fraction

import pytest
from mpmath import mp

from zetaforms.cotk import expansion
from zetaforms.errors import PoleProximityError, ValidationError
from zetaforms.linform import build_coefficients, rho, s_n_via_zeta
from zetaforms.params import Params
from zetaforms.quadrature import (
    ContourSpec,
    asymptotic_fit,
    fit_report_csv,
    g_n_ratio,
    j_integral,
    s_n_contour,
    s_tilde_prefactor,
)

P236 = Params(2, 3, 5, 6)


@pytest.fixture(scope="module")
def table():
    return build_coefficients(P236)


@pytest.fixture(scope="module")
def zeta_route():
    form = rho(P236, build_coefficients(P236))
    return s_n_via_zeta(P236, form, 640)


def test_contour_matches_zeta_route(table, zeta_route):
    res = s_n_contour(P236, table, bits=96)
    with mp.workprec(300):
        assert abs(res.value - zeta_route.value) <= res.total_error + zeta_route.err_bound
        # The integral is real; the imaginary part must be noise.
        assert abs(res.imag) <= res.total_error
        assert abs(res.imag) < abs(res.value) * mp.ldexp(1, -90)
        # The auto-chosen height meets the certification target.
        assert res.truncation <= mp.ldexp(1, -(96 + 16))


def test_contour_independent_of_abscissa(table):
    ra = s_n_contour(P236, table, ContourSpec(mu=Fraction(5, 4)), bits=96)
    rb = s_n_contour(P236, table, ContourSpec(mu=Fraction(9, 4)), bits=96)
    with mp.workprec(240):
        assert abs(ra.mu - mp.mpf(5) / 4) < mp.ldexp(1, -200)
        assert abs(ra.value - rb.value) <= ra.total_error + rb.total_error


def test_panel_refinement_shrinks_delta(table):
    r1 = s_n_contour(P236, table, ContourSpec(height=4096, panels=1), bits=96)
    r2 = s_n_contour(P236, table, ContourSpec(height=4096, panels=2), bits=96)
    with mp.workprec(240):
        # Halving every panel width must shrink the two-level delta at
        # least 4x (Gauss-Legendre gains far more in practice).
        assert r2.delta <= r1.delta / 4
        assert abs(r1.value - r2.value) <= r1.total_error + r2.total_error


def test_explicit_height_honored(table):
    h1 = s_n_contour(P236, table, ContourSpec(height=60), bits=96)
    h2 = s_n_contour(P236, table, ContourSpec(height=240), bits=96)
    with mp.workprec(240):
        assert abs(h1.height - 60) == 0
        # Certified soundness: the shift from extending the contour is
        # inside the reported truncation bound.
        assert abs(h1.value - h2.value) <= h1.truncation + h1.delta + h2.delta


def test_contour_validation(table):
    with pytest.raises(ValidationError):
        ContourSpec(panels=0)
    with pytest.raises(ValidationError):
        s_n_contour(P236, table, ContourSpec(mu=4), bits=96)  # n*mu = 24 > qn
    with pytest.raises(PoleProximityError):
        s_n_contour(P236, table, ContourSpec(mu=Fraction(4, 3)), bits=96)  # n*mu = 8
    with pytest.raises(ValidationError):
        s_n_contour(P236, table, ContourSpec(height=10), bits=96)  # below 2N/q
    with pytest.raises(ValidationError):
        s_n_contour(Params(2, 3, 5, 12), table, bits=96)  # wrong table


def test_jobs_do_not_change_bits(table):
    r1 = s_n_contour(P236, table, ContourSpec(height=1024), bits=96, jobs=1)
    r2 = s_n_contour(P236, table, ContourSpec(height=1024), bits=96, jobs=2)
    assert r1.value == r2.value
    assert r1.delta == r2.delta
    assert r1.imag == r2.imag


def test_j_integral_conjugate_symmetry(table):
    """J_{n,-lambda} = conj(J_{n,lambda}): the integrand mirrors under
    y -> -y together with lambda -> -lambda."""
    jp = j_integral(P236, Fraction(1, 2), bits=128, table=table)
    jm = j_integral(P236, Fraction(-1, 2), bits=128, table=table)
    with mp.workprec(260):
        assert abs(jp.value - mp.conj(jm.value)) <= jp.total_error + jm.total_error


def test_j_integral_validation(table):
    with pytest.raises(ValidationError):
        j_integral(P236, 2, bits=96, table=table)  # |lam| must be < k
    with pytest.raises(ValidationError):
        j_integral(P236, 0, mu=4, bits=96, table=table)  # mu outside (0, q)
    with pytest.raises(PoleProximityError):
        j_integral(P236, 0, mu=Fraction(1, 2), bits=96, table=table)  # n*mu = 3
    with pytest.raises(ValidationError):
        j_integral(P236, 0, bits=96, table=table, height=mp.mpf("1e-3"))


def test_saddle_decomposition(table, zeta_route):
    """S_n = -prefactor * sum_l c_l Re J_{n,l} within the combined
    certified budgets; the c_l are the cosine-expansion weights."""
    with mp.workprec(360):
        pref = s_tilde_prefactor(P236, 160)
        stilde = mp.mpf(0)
        budget = mp.mpf(0)
        for l, c in sorted(expansion(P236.k).c.items()):
            piece = j_integral(P236, l, bits=160, table=table)
            weight = mp.mpf(c.numerator) / c.denominator
            stilde += weight * mp.re(piece.value)
            budget += abs(weight) * piece.total_error
        residual = abs(zeta_route.value + pref * stilde)
        assert residual <= zeta_route.err_bound + pref * budget
        # And the budget is meaningful: far below |S_n| itself.
        assert pref * budget < abs(zeta_route.value) * mp.ldexp(1, -30)


def test_g_n_ratio_decays_like_inverse_n():
    z = mp.mpc(1.2, 0.4)
    vals = []
    for n in (6, 12, 24):
        vals.append(abs(g_n_ratio(Params(2, 3, 5, n), z, bits=192)))
    with mp.workprec(200):
        assert vals[0] < mp.mpf("0.05")
        for a, b in zip(vals, vals[1:]):
            ratio = a / b
            assert mp.mpf("1.8") < ratio < mp.mpf("2.2")


def test_asymptotic_fit_structure():
    rep = asymptotic_fit(P236, [6, 12], bits=1024)
    assert [row.n for row in rep.rows] == [6, 12]
    assert rep.decreasing and rep.final_ok is not None
    with mp.workprec(200):
        assert abs(rep.rows[0].residual) > abs(rep.rows[1].residual)
        for row in rep.rows:
            assert not row.excluded
            assert mp.isfinite(row.log_s) and mp.isfinite(row.predicted)
    csv_text = fit_report_csv(rep)
    lines = csv_text.strip().splitlines()
    assert lines[0] == "n,logS,predicted,residual"
    assert len(lines) == 3
    doc = rep.as_dict()
    assert doc["k"] == 2 and len(doc["rows"]) == 2


def test_asymptotic_fit_edge_cases():
    rep = asymptotic_fit(P236, [], bits=256)
    assert rep.rows == () and rep.decreasing and rep.final_ok
    assert rep.gauss_ratio_log is None
    with pytest.raises(ValidationError):
        asymptotic_fit(P236, [12, 6], bits=256)
