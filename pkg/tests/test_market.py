"""Unit tests for the hybrid market model, curves and contract terms."""

import math

import numpy as np
import pytest

from levyva.curves import ForwardCurve
from levyva.market import (
    ContractSpec,
    HybridMarketModel,
    LevyDriver,
    spread_moment_sum,
    w_coefficient,
)
from levyva.nig import MomentBudget, NigParams, nig_cumulant, time_integrated_cumulant


def make_model(curve=None, horizon=10.0):
    return HybridMarketModel(
        curve=curve or ForwardCurve.zero(),
        reversion_a=0.0020898,
        sigma2=0.1818,
        b_loading=0.0065,
        driver1=LevyDriver(NigParams(4.0, -3.8, 1.34, 0.0), MomentBudget(0.15, 0.1)),
        driver2=LevyDriver(NigParams(5.73, -2.13, 8.3, 0.0), MomentBudget(3.0, 0.1)),
        horizon=horizon,
    )


def test_forward_curve_flat_and_zero():
    flat = ForwardCurve.flat(0.02)
    assert flat.rate(3.7) == pytest.approx(0.02)
    assert flat.integral(5.0) == pytest.approx(0.1)
    zero = ForwardCurve.zero()
    assert zero.rate(1.0) == 0.0
    assert zero.integral(7.3) == 0.0


def test_forward_curve_piecewise_linear_integral():
    curve = ForwardCurve(maturities=(0.0, 1.0, 3.0), rates=(0.01, 0.03, 0.03))
    # Linear from 0.01 to 0.03 on [0,1], flat after.
    assert curve.rate(0.5) == pytest.approx(0.02)
    assert curve.integral(1.0) == pytest.approx(0.02)
    assert curve.integral(3.0) == pytest.approx(0.02 + 2 * 0.03)
    # Extrapolates flat beyond the last pillar.
    assert curve.rate(10.0) == pytest.approx(0.03)


def test_sigma_bond_values():
    model = make_model()
    a = model.reversion_a
    assert model.sigma_bond(0.0, 3.0) == pytest.approx(1.0 - math.exp(-3.0 * a))
    assert model.sigma_bond(3.0, 3.0) == 0.0
    # Zero after the bond matures.
    assert model.sigma_bond(4.0, 3.0) == 0.0
    # Vectorised over s.
    s = np.array([0.0, 1.0, 2.0])
    np.testing.assert_allclose(model.sigma_bond(s, 3.0), 1.0 - np.exp(-a * (3.0 - s)))


def test_drift_and_omega():
    model = make_model()
    s, big_t = 1.0, 4.0
    expected = nig_cumulant(model.driver1.params, model.sigma_bond(s, big_t)).real
    assert model.drift_A(s, big_t) == pytest.approx(expected)
    rate = (
        nig_cumulant(model.driver2.params, model.sigma2).real
        + nig_cumulant(model.driver1.params, model.b_loading).real
    )
    assert model.omega(2.5) == pytest.approx(2.5 * rate)
    assert model.omega(0.0) == 0.0


def test_int_drift_a_matches_generic_quadrature():
    model = make_model()
    direct = time_integrated_cumulant(
        model.driver1.params, lambda s: model.sigma_bond(s, 4.0), 3.0
    ).real
    assert model.int_drift_A(3.0, 4.0) == pytest.approx(direct, rel=1e-12)
    with pytest.raises(ValueError):
        model.int_drift_A(5.0, 4.0)


def test_zero_bond():
    model = make_model(curve=ForwardCurve.flat(0.02))
    assert model.zero_bond(3.0) == pytest.approx(math.exp(-0.06))


def test_loading_constraints_enforced():
    with pytest.raises(ValueError):
        # sigma2 beyond M2/2 = 1.5.
        HybridMarketModel(
            curve=ForwardCurve.zero(),
            reversion_a=0.0020898,
            sigma2=1.6,
            b_loading=0.0065,
            driver1=LevyDriver(NigParams(4.0, -3.8, 1.34, 0.0), MomentBudget(0.15, 0.1)),
            driver2=LevyDriver(NigParams(5.73, -2.13, 8.3, 0.0), MomentBudget(3.0, 0.1)),
            horizon=10.0,
        )


def test_contract_standard_grids():
    c = ContractSpec.standard(4.0)
    assert c.surrender_grid == (0.0, 1.0, 2.0, 3.0)
    assert c.mortality_grid == tuple(0.5 * i for i in range(1, 9))
    assert c.n_surrender == 3
    assert c.grid_step(1) == 1.0
    assert c.guarantee(4.0) == pytest.approx(100.0 * math.exp(0.04))
    assert c.penalty(0.0) == pytest.approx(0.95)
    assert c.penalty(4.0) == pytest.approx(1.0)
    assert c.log_penalty(4.0) == pytest.approx(0.0)


def test_contract_grid_validation():
    with pytest.raises(ValueError, match="t_K"):
        ContractSpec(
            maturity=3.0,
            guarantee_rate=0.01,
            notional=100.0,
            surrender_grid=(0.0, 1.0, 2.0, 3.0),  # t_K must be < maturity
            mortality_grid=(1.0, 2.0, 3.0),
        )
    with pytest.raises(ValueError):
        ContractSpec(
            maturity=3.0,
            guarantee_rate=0.01,
            notional=100.0,
            surrender_grid=(0.0, 1.0, 2.0),
            mortality_grid=(1.0, 2.0),  # must end at maturity
        )
    with pytest.raises(ValueError):
        ContractSpec.standard(3.0, dampening_r=2.5)


def test_w_coefficient_term_by_term():
    model = make_model(curve=ForwardCurve.flat(0.015))
    c = ContractSpec.standard(3.0)
    delta, big_t = c.guarantee_rate, 3.0
    # interior at t_1 = 1: int A(s,T) + int f - delta T - omega(t) - p(t)
    t = 1.0
    expected = (
        model.int_drift_A(t, big_t)
        + model.curve.integral(big_t)
        - delta * big_t
        - model.omega(t)
        - c.log_penalty(t)
    )
    assert w_coefficient(c, model, "interior", index=1) == pytest.approx(expected, rel=1e-12)
    # terminal: t = T, no penalty.
    expected_term = (
        model.int_drift_A(big_t, big_t)
        + model.curve.integral(big_t)
        - delta * big_t
        - model.omega(big_t)
    )
    assert w_coefficient(c, model, "terminal") == pytest.approx(expected_term, rel=1e-12)
    # death at tbar_1 = 0.5: both t and the maturity collapse to tbar.
    tb = 0.5
    expected_death = (
        model.int_drift_A(tb, tb)
        + model.curve.integral(tb)
        - delta * tb
        - model.omega(tb)
        - c.log_penalty(tb)
    )
    assert w_coefficient(c, model, "death", index=1) == pytest.approx(expected_death, rel=1e-12)
    with pytest.raises(ValueError):
        w_coefficient(c, model, "interior", index=0)
    with pytest.raises(ValueError):
        w_coefficient(c, model, "nope")


def test_spread_moment_sum_positive_and_finite():
    model = make_model()
    c = ContractSpec.standard(4.0)
    total = spread_moment_sum(c, model)
    assert np.isfinite(total)
    # K-1 = 2 dates, each contributing two moments near 1.
    assert 2.0 < total < 20.0
