"""Unit tests for mortality, surrender intensity and truncation bounds."""

import math

import numpy as np
import pytest

from levyva.actuarial import (
    MortalityParams,
    SurrenderParams,
    SurvivalCurve,
    TruncationBounds,
    base_mortality,
    bounded_surrender_intensity,
    surrender_intensity,
    survival_probability,
    tail_level,
    truncation_error_bounds,
)

MORT = MortalityParams(
    gm_b=12.1104, gm_z=76.139, ou_kappa=0.4806, ou_lambda=0.0195, ou_sigma=0.0254
)


def test_survival_at_zero_is_one():
    assert SurvivalCurve(MORT).survival(0.0) == pytest.approx(1.0, abs=1e-14)


def test_survival_is_decreasing_and_bounded():
    t = np.linspace(0.0, 40.0, 200)
    s = SurvivalCurve(MORT).survival(t)
    assert np.all(np.diff(s) < 0.0)
    assert np.all((s > 0.0) & (s <= 1.0))


def test_survival_reduces_to_gompertz_without_perturbation():
    plain = MortalityParams(gm_b=12.1104, gm_z=76.139, ou_kappa=0.0, ou_lambda=0.0195, ou_sigma=0.0)
    curve = SurvivalCurve(plain)
    for t in (1.0, 5.0, 20.0):
        expected = math.exp(
            -plain.gm_b * (base_mortality(plain.age_x + t, plain) - base_mortality(plain.age_x, plain))
        )
        assert curve.survival(t) == pytest.approx(expected, rel=1e-12)


def test_death_interval_probabilities_sum_to_total():
    curve = SurvivalCurve(MORT)
    grid = (0.5, 1.5, 2.5, 3.5)
    total = sum(curve.death_interval_probability(i, grid) for i in range(1, 5))
    assert total == pytest.approx(1.0 - curve.survival(3.5), rel=1e-12)
    with pytest.raises(ValueError):
        curve.death_interval_probability(0, grid)
    with pytest.raises(ValueError):
        curve.death_interval_probability(5, grid)


def test_survival_rejects_negative_time():
    with pytest.raises(ValueError):
        SurvivalCurve(MORT).survival(-0.1)
    assert survival_probability(1.0, MORT) == SurvivalCurve(MORT).survival(1.0)


def test_surrender_intensity_values():
    p = SurrenderParams(beta_s=0.05, c_base=0.01)
    assert surrender_intensity(0.0, p) == pytest.approx(0.01)
    assert surrender_intensity(2.0, p) == pytest.approx(0.05 * 4.0 + 0.01)
    assert surrender_intensity(-2.0, p) == surrender_intensity(2.0, p)


def test_bounded_intensity_branches_and_continuity():
    p = SurrenderParams(beta_s=0.05, c_base=0.01, trunc_L=2.0)
    top = 0.05 * 4.0 + 0.01
    # Quadratic inside the window.
    assert bounded_surrender_intensity(1.0, p) == pytest.approx(0.05 + 0.01)
    # Frozen at the boundary value above L.
    assert bounded_surrender_intensity(5.0, p) == pytest.approx(top)
    # Exponential decay below -L.
    assert bounded_surrender_intensity(-3.0, p) == pytest.approx(top * math.exp(-1.0))
    # Continuity at the seams.
    for seam in (2.0, -2.0):
        lo = bounded_surrender_intensity(seam - 1e-10, p)
        hi = bounded_surrender_intensity(seam + 1e-10, p)
        assert lo == pytest.approx(hi, abs=1e-8)
    # Global bound.
    d = np.linspace(-50, 50, 10001)
    assert np.all(bounded_surrender_intensity(d, p) <= top + 1e-15)


def test_tail_level():
    assert tail_level(1.0, 1.0) == 0.0
    assert tail_level(1e-4, 5.0) == pytest.approx(math.log(5.0 / 1e-4))
    # eps larger than the moment sum clips at zero.
    assert tail_level(10.0, 1.0) == 0.0
    with pytest.raises(ValueError):
        tail_level(0.0, 1.0)
    with pytest.raises(ValueError):
        tail_level(1e-4, 0.0)


def test_truncation_bounds_vanish_at_zero_eps():
    b = truncation_error_bounds(
        eps=0.0,
        guarantee_maturity=1.1,
        bond_maturity=0.99,
        survival_maturity=0.98,
        c2_terminal=0.3,
        death_terms=[(0.01, 0.995, 1.05, 0.2)],
        surrender_terms=[(0.96, 0.999), (0.97, 0.998)],
        notional=100.0,
    )
    assert b == TruncationBounds(gmab=0.0, death=0.0, surrender=0.0)


def test_truncation_bounds_formula():
    eps = 1e-4
    b = truncation_error_bounds(
        eps=eps,
        guarantee_maturity=1.1,
        bond_maturity=0.99,
        survival_maturity=0.98,
        c2_terminal=0.3,
        death_terms=[(0.01, 0.995, 1.05, 0.2)],
        surrender_terms=[(0.96, 0.999), (0.97, 0.998)],
        notional=100.0,
    )
    root = math.sqrt(eps)
    assert b.gmab == pytest.approx(2 * 0.98 * 0.99 * 1.1 * (eps + 0.3 * root))
    assert b.death == pytest.approx(2 * 0.01 * 0.995 * 1.05 * (eps + 0.2 * root))
    assert b.surrender == pytest.approx(
        2 * 100 * 0.96 * 0.999 * eps + 4 * 100 * eps * 0.97 * 0.998
    )


def test_parameter_validation():
    with pytest.raises(ValueError):
        MortalityParams(gm_b=0.0, gm_z=76.0, ou_kappa=0.5, ou_lambda=0.02, ou_sigma=0.02)
    with pytest.raises(ValueError):
        SurrenderParams(beta_s=-0.1, c_base=0.01)
    with pytest.raises(ValueError):
        SurrenderParams(beta_s=0.1, c_base=0.01, trunc_L=0.0)
