"""Dimension lower bound: the abstract criterion, the hat-constant
identity, a frozen large-q value, and the trend scan toward the
(1/log 2) log q law.
"""

from fractions import Fraction

import pytest
from mpmath import mp

from zetaforms.bound import (
    BoundReport,
    CriterionInput,
    dimension_lower,
    nesterenko_bound,
    trend_scan,
    trend_scan_csv,
)
from zetaforms.errors import ValidationError

# dimension_lower(2, 10^4, 84) at 192 and 320 bits agrees to all shown
# digits; frozen here as the reference for the large-q worked example.
D_LOWER_2_1E4 = "3.750439544526322369"


def test_criterion_worked_examples():
    """d >= 1 + (alpha + sum_{j<d} gamma_j)/beta by minimal
    counterexample: hand-checkable instances."""
    res = nesterenko_bound(CriterionInput(alpha=3, beta=1, constant_gamma=0))
    assert (res.d_lower, res.divergent) == (4, False)
    res = nesterenko_bound(
        CriterionInput(alpha=3, beta=1, constant_gamma=Fraction(1, 2))
    )
    assert (res.d_lower, res.divergent) == (7, False)
    res = nesterenko_bound(CriterionInput(alpha=1, beta=1, constant_gamma=1))
    assert res.d_lower is None and res.divergent


def test_criterion_minimality():
    """Every d below the returned one must violate the inequality."""
    inp = CriterionInput(alpha=3, beta=1, constant_gamma=Fraction(1, 2))
    res = nesterenko_bound(inp)
    acc = Fraction(0)
    for d in range(1, res.d_lower):
        assert (d - 1) * inp.beta < inp.alpha + acc, d
        acc += inp.constant_gamma
    assert (res.d_lower - 1) * inp.beta >= inp.alpha + acc


def test_criterion_mixed_prefix_and_constant():
    # Large early gammas (3, 3) delay the crossing far beyond the
    # all-constant rule: d = 15 instead of 5 (hand computation).
    const_only = nesterenko_bound(
        CriterionInput(alpha=2, beta=1, constant_gamma=Fraction(1, 2))
    )
    assert const_only.d_lower == 5
    mixed = nesterenko_bound(
        CriterionInput(alpha=2, beta=1, gammas=(3, 3), constant_gamma=Fraction(1, 2))
    )
    assert (mixed.d_lower, mixed.divergent) == (15, False)


def test_criterion_monotone_in_alpha_and_beta():
    base = nesterenko_bound(CriterionInput(alpha=3, beta=1, constant_gamma=0)).d_lower
    bigger_alpha = nesterenko_bound(
        CriterionInput(alpha=5, beta=1, constant_gamma=0)
    ).d_lower
    bigger_beta = nesterenko_bound(
        CriterionInput(alpha=3, beta=2, constant_gamma=0)
    ).d_lower
    assert bigger_alpha >= base
    assert bigger_beta <= base


def test_criterion_exhaustion_and_validation():
    with pytest.raises(ValidationError):
        nesterenko_bound(CriterionInput(alpha=10, beta=1, gammas=(0, 0)))
    with pytest.raises(ValidationError):
        CriterionInput(alpha=0, beta=1, constant_gamma=0)
    with pytest.raises(ValidationError):
        CriterionInput(alpha=1, beta=-2, constant_gamma=0)
    with pytest.raises(ValidationError):
        CriterionInput(alpha=1, beta=1, gammas=(-1,))
    with pytest.raises(ValidationError):
        CriterionInput(alpha=1, beta=1, constant_gamma=-0.5)


def test_criterion_divergent_when_gamma_dominates():
    res = nesterenko_bound(CriterionInput(alpha=1, beta=1, constant_gamma=2))
    assert res.divergent and res.d_lower is None


def test_dimension_lower_identity_and_vacuous_small_q():
    rep = dimension_lower(2, 3, 5, bits=192)
    assert isinstance(rep, BoundReport)
    with mp.workprec(256):
        krq = mp.mpf(2) * 5 * 3
        assert abs(rep.alpha_hat - (rep.alpha - krq)) < mp.ldexp(1, -180)
        assert abs(rep.beta_hat - (rep.beta + krq)) < mp.ldexp(1, -180)
        assert abs(rep.d_lower - (1 + rep.alpha_hat / rep.beta)) < mp.ldexp(1, -150)
        # alpha < 0 at q = 3: the bound carries no information there.
        assert rep.vacuous
        assert rep.alpha_hat < 0
    doc = rep.as_dict()
    assert doc["vacuous"] is True
    assert set(doc) == {
        "k", "q", "r", "alpha", "beta", "alpha_hat", "beta_hat",
        "d_lower", "ratio_to_log2q", "vacuous",
    }


def test_dimension_lower_frozen_large_q():
    rep = dimension_lower(2, 10**4, 84, bits=192)
    with mp.workprec(256):
        assert not rep.vacuous
        assert rep.alpha_hat > 0
        assert abs(rep.d_lower - mp.mpf(D_LOWER_2_1E4)) < mp.mpf("1e-15")
        # Bit-stability: a higher-precision run reproduces it.
        rep2 = dimension_lower(2, 10**4, 84, bits=320)
        assert abs(rep.d_lower - rep2.d_lower) < mp.mpf("1e-30")


def test_trend_scan_ratios_drift_toward_one():
    rows = trend_scan(2, [1000, 10000, 100000], bits=192)
    assert [row.q for row in rows] == [1000, 10000, 100000]
    assert all(not row.vacuous for row in rows)
    with mp.workprec(200):
        for field in ("dim_ratio", "alpha_ratio", "beta_ratio"):
            devs = [abs(getattr(row, field) - 1) for row in rows]
            assert all(devs[i] > devs[i + 1] for i in range(len(devs) - 1)), field
        # beta normalization is the right one: already within 2x at 10^5.
        assert mp.mpf("0.5") < rows[-1].beta_ratio < mp.mpf("2.0")
        # d_lower grows with q.
        assert rows[0].d_lower < rows[1].d_lower < rows[2].d_lower


def test_trend_scan_csv_shape():
    rows = trend_scan(2, [1000, 3000], bits=160)
    text = trend_scan_csv(rows)
    lines = text.strip().splitlines()
    assert lines[0] == "q,r,d_lower,d_ratio,alpha_ratio,beta_ratio,vacuous"
    assert len(lines) == 3
    first = lines[1].split(",")
    assert first[0] == "1000"
    assert first[-1] in {"0", "1"}
    assert float(first[2]) > 0


def test_dimension_lower_rejects_bad_r():
    with pytest.raises(ValidationError):
        dimension_lower(2, 100, 4, bits=160)  # r must exceed 2k
