"""Hybrid interest-rate / equity market model and contract terms.

Two independent NIG drivers move the economy: driver 1 drives the forward
rate curve through a Vasicek-type bond volatility Sigma(s, T) =
1 - exp(-a (T - s)), driver 2 adds an idiosyncratic equity factor with
constant loading sigma2; the equity also loads on driver 1 with constant
loading b.  Absence of arbitrage pins the forward-rate drift to
A(s, T) = theta1(Sigma(s, T)) and the equity compensator to
omega(t) = t * (theta2(sigma2) + theta1(b)).

This module holds the static model (parameters, drifts, bond prices), the
contract terms (grids, guarantee, penalty, dampening), and the ``w``
phase coefficients that enter every Fourier integrand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curves import ForwardCurve
from .nig import (
    MomentBudget,
    NigParams,
    gauss_legendre_panels,
    nig_cumulant,
    time_integrated_cumulant,
    verify_moment_budget,
)


@dataclass(frozen=True)
class LevyDriver:
    """A NIG driver together with its exponential-moment budget."""

    params: NigParams
    budget: MomentBudget

    def __post_init__(self) -> None:
        verify_moment_budget(self.params, self.budget)

    def cumulant(self, z, *, check: bool = True):
        return nig_cumulant(self.params, z, check=check)


@dataclass(frozen=True)
class HybridMarketModel:
    """Static market model: curve, mean-reversion speed, loadings, drivers.

    ``horizon`` is the largest maturity the model will be asked about; the
    loading constraints (which keep every Fourier argument inside the
    drivers' moment budgets) are enforced at that horizon.
    """

    curve: ForwardCurve
    reversion_a: float
    sigma2: float
    b_loading: float
    driver1: LevyDriver
    driver2: LevyDriver
    horizon: float
    nodes_per_year: int = 64

    def __post_init__(self) -> None:
        if self.reversion_a <= 0.0:
            raise ValueError(f"reversion_a must be positive, got {self.reversion_a}")
        if self.horizon <= 0.0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if self.sigma2 <= 0.0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")
        if self.nodes_per_year < 4:
            raise ValueError("nodes_per_year must be at least 4")
        m1 = self.driver1.budget.m_bound
        m2 = self.driver2.budget.m_bound
        sig_max = self.sigma_bond(0.0, self.horizon)
        if sig_max > m1 / 3.0 + 1e-15:
            raise ValueError(
                f"bond volatility {sig_max:.6g} at the horizon exceeds M1/3 = {m1 / 3.0:.6g}"
            )
        if self.sigma2 > m2 / 2.0 + 1e-15:
            raise ValueError(f"sigma2 = {self.sigma2:.6g} exceeds M2/2 = {m2 / 2.0:.6g}")
        if abs(self.b_loading) > m1 / 3.0 + 1e-15:
            raise ValueError(
                f"|b_loading| = {abs(self.b_loading):.6g} exceeds M1/3 = {m1 / 3.0:.6g}"
            )

    # ----- building blocks -------------------------------------------------

    def sigma_bond(self, s, maturity):
        """Bond volatility loading Sigma(s, T) = 1 - exp(-a (T - s)) for
        s <= T, and 0 afterwards."""
        tau = np.maximum(np.asarray(maturity, dtype=float) - np.asarray(s, dtype=float), 0.0)
        out = 1.0 - np.exp(-self.reversion_a * tau)
        return float(out) if out.ndim == 0 else out

    def theta1(self, z, *, check: bool = True):
        return self.driver1.cumulant(z, check=check)

    def theta2(self, z, *, check: bool = True):
        return self.driver2.cumulant(z, check=check)

    def drift_A(self, s, maturity):
        """No-arbitrage forward drift A(s, T) = theta1(Sigma(s, T))."""
        return np.real(self.theta1(self.sigma_bond(s, maturity)))

    def omega(self, t):
        """Equity compensator: omega(t) = t (theta2(sigma2) + theta1(b))."""
        rate = np.real(self.theta2(self.sigma2)) + np.real(self.theta1(self.b_loading))
        return t * rate

    def int_drift_A(self, t_upper: float, maturity: float) -> float:
        """int_0^{t_upper} A(s, maturity) ds by composite Gauss-Legendre."""
        if t_upper < 0.0 or t_upper > maturity + 1e-12:
            raise ValueError(
                f"need 0 <= t_upper <= maturity, got t_upper={t_upper}, maturity={maturity}"
            )
        val = time_integrated_cumulant(
            self.driver1.params,
            lambda s: self.sigma_bond(s, maturity),
            t_upper,
            nodes_per_year=self.nodes_per_year,
        )
        return float(np.real(val))

    def zero_bond(self, maturity: float) -> float:
        """Initial zero-coupon bond price B(0, T) = exp(-int_0^T f(0,s) ds)."""
        return math.exp(-self.curve.integral(maturity))

    def drift_quadrature(self, t_upper: float, maturity: float):
        """Shared Gauss-Legendre grid on [0, t_upper] for driver-1 time
        integrals whose arguments involve Sigma(., maturity).  Returns
        (nodes, weights)."""
        return gauss_legendre_panels(np.array([0.0, t_upper]), self.nodes_per_year)


@dataclass(frozen=True)
class ContractSpec:
    """Variable annuity contract terms.

    * ``surrender_grid``: (t_0=0, t_1, ..., t_K) with t_K < maturity; the
      policyholder may lapse at t_1..t_{K-1} and the surrender intensity is
      refreshed on each interval [t_l, t_{l+1}).
    * ``mortality_grid``: death-benefit payment dates (tbar_1, ..., tbar_N)
      with tbar_N = maturity.
    * guarantee G(t) = notional * exp(guarantee_rate * t).
    * penalty P(t) = penalty_floor + (1 - penalty_floor) * t / maturity,
      increasing to P(maturity) = 1; p(t) = -log P(t).
    * ``dampening_r`` in (1, 2): exponential dampening used to make the
      call-type payoff transform integrable.
    """

    maturity: float
    guarantee_rate: float
    notional: float
    surrender_grid: tuple[float, ...]
    mortality_grid: tuple[float, ...]
    dampening_r: float = 1.5
    penalty_floor: float = 0.95

    def __post_init__(self) -> None:
        t = np.asarray(self.surrender_grid, dtype=float)
        tb = np.asarray(self.mortality_grid, dtype=float)
        if self.maturity <= 0.0:
            raise ValueError(f"maturity must be positive, got {self.maturity}")
        if self.guarantee_rate <= 0.0:
            raise ValueError(f"guarantee_rate must be positive, got {self.guarantee_rate}")
        if self.notional < 0.0:
            raise ValueError(f"notional must be nonnegative, got {self.notional}")
        if t.size < 2 or t[0] != 0.0 or np.any(np.diff(t) <= 0):
            raise ValueError("surrender_grid must start at 0 and strictly increase")
        if not t[-1] < self.maturity:
            raise ValueError(
                f"last surrender date t_K = {t[-1]} must satisfy t_K < maturity = {self.maturity}"
            )
        if tb.size < 1 or np.any(tb <= 0) or np.any(np.diff(tb) <= 0):
            raise ValueError("mortality_grid must be strictly increasing and positive")
        if abs(tb[-1] - self.maturity) > 1e-12:
            raise ValueError("mortality_grid must end exactly at the contract maturity")
        if not 1.0 < self.dampening_r < 2.0:
            raise ValueError(f"dampening_r must lie in (1, 2), got {self.dampening_r}")
        if not 0.0 < self.penalty_floor <= 1.0:
            raise ValueError(f"penalty_floor must lie in (0, 1], got {self.penalty_floor}")

    @classmethod
    def standard(
        cls,
        maturity: float,
        *,
        guarantee_rate: float = 0.01,
        notional: float = 100.0,
        surrender_step: float = 1.0,
        mortality_step: float = 0.5,
        dampening_r: float = 1.5,
        penalty_floor: float = 0.95,
    ) -> "ContractSpec":
        """Regular grids: surrender dates every ``surrender_step`` up to but
        excluding maturity, death-benefit dates every ``mortality_step`` up
        to and including maturity."""
        n_s = int(round(maturity / surrender_step))
        n_m = int(round(maturity / mortality_step))
        surrender = tuple(l * surrender_step for l in range(n_s))
        mortality = tuple(i * mortality_step for i in range(1, n_m + 1))
        return cls(
            maturity=maturity,
            guarantee_rate=guarantee_rate,
            notional=notional,
            surrender_grid=surrender,
            mortality_grid=mortality,
            dampening_r=dampening_r,
            penalty_floor=penalty_floor,
        )

    @property
    def n_surrender(self) -> int:
        """K: index of the last surrender-grid node."""
        return len(self.surrender_grid) - 1

    @property
    def n_mortality(self) -> int:
        return len(self.mortality_grid)

    def guarantee(self, t) -> float:
        return self.notional * np.exp(self.guarantee_rate * np.asarray(t, dtype=float))

    def penalty(self, t):
        """Surrender penalty factor P(t), linear from the floor to 1."""
        return self.penalty_floor + (1.0 - self.penalty_floor) * np.asarray(t, dtype=float) / self.maturity

    def log_penalty(self, t):
        """p(t) = -log P(t) >= 0, vanishing at maturity."""
        return -np.log(self.penalty(t))

    def grid_step(self, l: int) -> float:
        """Delta t_l = t_l - t_{l-1} for l = 1..K."""
        return self.surrender_grid[l] - self.surrender_grid[l - 1]


def w_coefficient(
    contract: ContractSpec,
    model: HybridMarketModel,
    kind: str,
    *,
    index: int | None = None,
    maturity: float | None = None,
) -> float:
    """Deterministic phase coefficients of the Fourier integrands.

    All three kinds share the skeleton
        int_0^{t} A(s, T) ds + int_0^T f(0,s) ds - delta*T - omega(t) [- p(t)]
    with delta the guarantee rate; they differ in which date plays ``t``,
    whether the penalty enters, and (for death benefits) which maturity T is
    used:

    * ``interior``: t = t_index (a surrender date, 1 <= index <= K-1), with
      penalty.  ``maturity`` defaults to the contract maturity; pricing of
      guaranteed benefits at a shorter horizon passes that horizon instead.
    * ``terminal``: t = T = maturity (default contract maturity), no penalty.
    * ``death``: t = T = tbar_index (a death-benefit date), with penalty.
    """
    big_t = contract.maturity if maturity is None else float(maturity)
    delta = contract.guarantee_rate
    if kind == "interior":
        if index is None or not 1 <= index <= contract.n_surrender:
            raise ValueError(f"interior index out of range: {index}")
        t = contract.surrender_grid[index]
        penalty = contract.log_penalty(t)
    elif kind == "terminal":
        t = big_t
        penalty = 0.0
    elif kind == "death":
        if index is None or not 1 <= index <= contract.n_mortality:
            raise ValueError(f"death index out of range: {index}")
        t = contract.mortality_grid[index - 1]
        big_t = t
        penalty = contract.log_penalty(t)
    else:
        raise ValueError(f"unknown w-coefficient kind {kind!r}")
    return (
        model.int_drift_A(t, big_t)
        + model.curve.integral(big_t)
        - delta * big_t
        - model.omega(t)
        - penalty
    )


def spread_moment_sum(contract: ContractSpec, model: HybridMarketModel) -> float:
    """Sum over surrender dates t_1..t_{K-1} of the forward-measure
    exponential moments E[exp(D(t_i))] + E[exp(-D(t_i))], where D(t) is the
    log-moneyness spread log(P(t) I S_t / G(T)).

    Used to size the truncation level of the bounded surrender intensity.
    Each moment is available in closed form: with w_i the interior phase
    coefficient,

        E[exp(+-D(t_i))] = exp(+-w_i) * exp(-int_0^T A(s,T) ds)
            * exp( int_0^{t_i} theta2(+-sigma2) ds
                 + int_0^T theta1(Sigma(s,T) +- (b - Sigma(s,T)) 1{s<=t_i}) ds ).
    """
    big_t = contract.maturity
    int_a = model.int_drift_A(big_t, big_t)
    total = 0.0
    for i in range(1, contract.n_surrender):
        t_i = contract.surrender_grid[i]
        w_i = w_coefficient(contract, model, "interior", index=i)
        for sign in (+1.0, -1.0):
            th2 = t_i * np.real(model.theta2(sign * model.sigma2))

            def arg(s, sign=sign, t_i=t_i):
                sig = model.sigma_bond(s, big_t)
                return sig + sign * (model.b_loading - sig) * (s <= t_i)

            th1 = np.real(
                time_integrated_cumulant(
                    model.driver1.params,
                    arg,
                    big_t,
                    nodes_per_year=model.nodes_per_year,
                    breakpoints=np.array([t_i]),
                )
            )
            total += math.exp(sign * w_i - int_a + th2 + th1)
    return total
