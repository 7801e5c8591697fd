"""Path-simulation oracle.

Everything in :mod:`levyva.pricing` is a Fourier-space evaluation of an
expectation.  This module recomputes the same expectations by brute-force
simulation of the two NIG drivers and of the mortality improvement factor,
sharing no code with the transform machinery.  It exists to validate the
closed forms, to estimate the spread moments entering the truncation error
bounds, and to price the bounded-intensity variant of the contract for
which no closed form is used.

Key representations (all exact consequences of the model dynamics):

    discount(t)        = B(0,t) exp(-int_0^t A(s,t) ds + int_0^t Sigma(s,t) dL1)
    discount(t) * S_t  = exp(int_0^t sigma2 dL2 + int_0^t b dL1 - omega(t))
    D(t)               = -p(t) - delta T + int_0^T f(0,s) ds + int_0^t A(s,T) ds
                         - int_0^t Sigma(s,T) dL1 + int_0^t sigma2 dL2
                         + int_0^t b dL1 - omega(t)
    dQ^tau / dQ        = discount(tau) / B(0,tau)

Because Sigma(s,tau) = 1 - exp(-a (tau - s)), every stochastic integral
above reduces to two running sums per driver-1 path: the plain cumulative
sum of the increments and the cumulative sum weighted by exp(a s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .actuarial import (
    MortalityParams,
    SurrenderParams,
    SurvivalCurve,
    base_mortality,
    bounded_surrender_intensity,
    surrender_intensity,
)
from .market import ContractSpec, HybridMarketModel
from .nig import NigParams


def sample_inverse_gaussian(
    mean: float, shape: float, rng: np.random.Generator, size
) -> np.ndarray:
    """Inverse-Gaussian draws by the transformation method of Michael,
    Schucany and Haas (squared-normal root plus a Bernoulli swap)."""
    nu = rng.standard_normal(size) ** 2
    x = mean + mean * mean * nu / (2.0 * shape) - mean / (2.0 * shape) * np.sqrt(
        4.0 * mean * shape * nu + (mean * nu) ** 2
    )
    swap = rng.random(size) > mean / (mean + x)
    return np.where(swap, mean * mean / x, x)


def sample_nig_increment(
    params: NigParams, dt: float, rng: np.random.Generator, size
) -> np.ndarray:
    """NIG increments over a step dt via inverse-Gaussian subordination:
    conditionally on the subordinator tau ~ IG(delta dt / gamma, (delta dt)^2),
    the increment is mu dt + beta tau + sqrt(tau) Z."""
    delta_t = params.delta_scale * dt
    tau = sample_inverse_gaussian(delta_t / params.gamma, delta_t * delta_t, rng, size)
    z = rng.standard_normal(size)
    return params.mu * dt + params.beta_skew * tau + np.sqrt(tau) * z


@dataclass(frozen=True)
class PathGrid:
    """Uniform simulation grid aligned with a set of contract dates."""

    step: float
    n_steps: int

    @classmethod
    def build(cls, dates: np.ndarray, step: float) -> "PathGrid":
        horizon = float(np.max(dates))
        n = int(round(horizon / step))
        if abs(n * step - horizon) > 1e-9:
            raise ValueError(f"step {step} does not divide the horizon {horizon}")
        idx = dates / step
        if np.any(np.abs(idx - np.round(idx)) > 1e-9):
            raise ValueError("all contract dates must lie on the simulation grid")
        return cls(step=step, n_steps=n)

    def index(self, t: float) -> int:
        return int(round(t / self.step))

    @property
    def midpoints(self) -> np.ndarray:
        return (np.arange(self.n_steps) + 0.5) * self.step


def _oracle_rng(seed: int, stream: int, batch: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=(seed << 64) + (stream << 32) + batch))


class _MarketPaths:
    """Stochastic integrals of one batch of market paths, evaluated at a
    fixed list of dates."""

    def __init__(
        self,
        model: HybridMarketModel,
        grid: PathGrid,
        dates: np.ndarray,
        n_paths: int,
        rng: np.random.Generator,
    ) -> None:
        a = model.reversion_a
        mids = grid.midpoints
        d_l1 = sample_nig_increment(model.driver1.params, grid.step, rng, (n_paths, grid.n_steps))
        d_l2 = sample_nig_increment(model.driver2.params, grid.step, rng, (n_paths, grid.n_steps))
        cum1 = np.cumsum(d_l1, axis=1)
        cum1_exp = np.cumsum(np.exp(a * mids)[None, :] * d_l1, axis=1)
        cum2 = np.cumsum(d_l2, axis=1)
        idx = np.array([grid.index(t) - 1 for t in dates])
        self.dates = dates
        self._pos = {round(float(t), 9): k for k, t in enumerate(dates)}
        self.l1 = cum1[:, idx]
        self.l1_exp = cum1_exp[:, idx]
        self.l2 = cum2[:, idx]

    def _col(self, t: float) -> int:
        return self._pos[round(float(t), 9)]

    def sigma_integral(self, t: float, maturity: float, model: HybridMarketModel) -> np.ndarray:
        """int_0^t Sigma(s, maturity) dL1 along each path."""
        k = self._col(t)
        return self.l1[:, k] - math.exp(-model.reversion_a * maturity) * self.l1_exp[:, k]

    def equity_integral(self, t: float, model: HybridMarketModel) -> np.ndarray:
        """int_0^t sigma2 dL2 + int_0^t b dL1 along each path."""
        k = self._col(t)
        return model.sigma2 * self.l2[:, k] + model.b_loading * self.l1[:, k]


class OracleEngine:
    """Shared deterministic quantities plus batched path generation for a
    particular contract/model pair."""

    def __init__(
        self,
        contract: ContractSpec,
        model: HybridMarketModel,
        *,
        step: float = 1.0 / 256.0,
    ) -> None:
        self.contract = contract
        self.model = model
        dates = np.unique(
            np.concatenate(
                [
                    np.asarray(contract.surrender_grid[1:], dtype=float),
                    np.asarray(contract.mortality_grid, dtype=float),
                    [contract.maturity],
                ]
            )
        )
        self.dates = dates
        self.grid = PathGrid.build(dates, step)
        # Deterministic drift integrals int_0^t A(s, tau) ds, cached per pair.
        self._int_a: dict[tuple[float, float], float] = {}
        for t in dates:
            self._int_a[(float(t), float(t))] = model.int_drift_A(float(t), float(t))
        big_t = contract.maturity
        for t in contract.surrender_grid[1:]:
            self._int_a[(float(t), big_t)] = model.int_drift_A(float(t), big_t)
        self._int_a[(big_t, big_t)] = model.int_drift_A(big_t, big_t)
        self._curve_int_t = model.curve.integral(big_t)

    def paths(self, n_paths: int, rng: np.random.Generator) -> _MarketPaths:
        return _MarketPaths(self.model, self.grid, self.dates, n_paths, rng)

    # ----- path functionals -------------------------------------------------

    def spread(self, paths: _MarketPaths, t: float) -> np.ndarray:
        """Log-moneyness D(t) = log(P(t) I S_t / G(T)) along each path."""
        c, m = self.contract, self.model
        big_t = c.maturity
        det = (
            -float(c.log_penalty(t))
            - c.guarantee_rate * big_t
            + self._curve_int_t
            + self._int_a[(float(t), big_t)]
            - m.omega(t)
        )
        return (
            det
            - paths.sigma_integral(t, big_t, m)
            + paths.equity_integral(t, m)
        )

    def log_moneyness_at(self, paths: _MarketPaths, t: float) -> np.ndarray:
        """log(I S_t / G(t)) = Y(t) - delta t along each path."""
        c, m = self.contract, self.model
        det = (
            m.curve.integral(t)
            + self._int_a[(float(t), float(t))]
            - m.omega(t)
            - c.guarantee_rate * t
        )
        return (
            det
            - paths.sigma_integral(t, float(t), m)
            + paths.equity_integral(t, m)
        )

    def discount(self, paths: _MarketPaths, t: float) -> np.ndarray:
        """Pathwise stochastic discount factor exp(-int_0^t r)."""
        m = self.model
        return m.zero_bond(t) * np.exp(
            -self._int_a[(float(t), float(t))] + paths.sigma_integral(t, float(t), m)
        )

    def discounted_stock(self, paths: _MarketPaths, t: float) -> np.ndarray:
        """exp(-int_0^t r) S_t (S_0 = 1)."""
        m = self.model
        return np.exp(paths.equity_integral(t, m) - m.omega(t))

    def forward_weight(self, paths: _MarketPaths, t: float) -> np.ndarray:
        """Radon-Nikodym weight dQ^t/dQ along each path."""
        return self.discount(paths, t) / self.model.zero_bond(t)

    def hazard_sums(
        self, paths: _MarketPaths, surrender: SurrenderParams, *, bounded: bool
    ) -> np.ndarray:
        """Cumulative surrender hazard int_0^{t_i} lambda^s along each path,
        for i = 1..K; column i-1 holds the integral up to t_i."""
        c = self.contract
        k = c.n_surrender
        n = paths.l1.shape[0]
        w_fn = bounded_surrender_intensity if bounded else surrender_intensity
        out = np.zeros((n, k))
        acc = np.zeros(n)
        for l in range(1, k):
            d_l = self.spread(paths, c.surrender_grid[l])
            acc = acc + w_fn(d_l, surrender) * c.grid_step(l + 1)
            out[:, l] = acc
        return out


@dataclass
class OracleEstimates:
    gmab: float
    gmab_se: float
    death: float
    death_se: float
    surrender: float
    surrender_se: float

    @property
    def total(self) -> float:
        return self.gmab + self.death + self.surrender

    @property
    def total_se(self) -> float:
        return (self.gmab_se**2 + self.death_se**2 + self.surrender_se**2) ** 0.5


def simulate_contract(
    contract: ContractSpec,
    model: HybridMarketModel,
    mortality: MortalityParams,
    surrender: SurrenderParams,
    *,
    n_paths: int = 100_000,
    seed: int = 0,
    step: float = 1.0 / 256.0,
    batches: int = 10,
    bounded_intensity: bool = False,
) -> OracleEstimates:
    """Simulate all three benefit legs.  Mortality and the surrender time are
    integrated out analytically conditional on the market paths, which
    removes their sampling noise entirely."""
    engine = OracleEngine(contract, model, step=step)
    survival = SurvivalCurve(mortality)
    c = contract
    big_t = c.maturity
    k = c.n_surrender
    surv_t = float(survival.survival(big_t))
    q_death = [
        survival.death_interval_probability(i, c.mortality_grid)
        for i in range(1, c.n_mortality + 1)
    ]
    surv_lapse = [float(survival.survival(t)) for t in c.surrender_grid[1:k]]
    grid_arr = np.asarray(c.surrender_grid)

    per_batch = n_paths // batches
    if per_batch < 1:
        raise ValueError("n_paths must be at least the number of batches")
    means = np.zeros((batches, 3))
    for b in range(batches):
        rng = _oracle_rng(seed, 1, b)
        paths = engine.paths(per_batch, rng)
        hazard = engine.hazard_sums(paths, surrender, bounded=bounded_intensity)
        stay_full = np.exp(-hazard[:, k - 1])

        # Guaranteed accumulation benefit.
        disc_t = engine.discount(paths, big_t)
        stock_t = engine.discounted_stock(paths, big_t)
        payoff_t = np.maximum(c.notional * stock_t, float(c.guarantee(big_t)) * disc_t)
        gmab = surv_t * np.mean(stay_full * payoff_t)

        # Death benefit: in-force means the policy was not surrendered at any
        # grid date strictly before the payment date.
        death = 0.0
        for i, t_bar in enumerate(c.mortality_grid):
            j = min(k - 1, int(np.sum(grid_arr[1:] < t_bar - 1e-12)))
            in_force = np.exp(-hazard[:, j])
            disc = engine.discount(paths, t_bar)
            stock = engine.discounted_stock(paths, t_bar)
            payoff = np.maximum(c.notional * stock, float(c.guarantee(t_bar)) * disc)
            death += q_death[i] * np.mean(in_force * payoff)

        # Surrender benefit: lapse probability mass at t_i is the difference
        # of hazard survivals to t_i and t_{i+1}.
        sb = 0.0
        for i in range(1, k):
            t_i = c.surrender_grid[i]
            mass = np.exp(-hazard[:, i - 1]) - np.exp(-hazard[:, i])
            value = c.notional * float(c.penalty(t_i)) * engine.discounted_stock(paths, t_i)
            sb += surv_lapse[i - 1] * np.mean(mass * value)

        means[b] = (gmab, death, sb)

    est = means.mean(axis=0)
    se = means.std(axis=0, ddof=1) / math.sqrt(batches)
    return OracleEstimates(
        gmab=est[0], gmab_se=se[0], death=est[1], death_se=se[1],
        surrender=est[2], surrender_se=se[2],
    )


@dataclass
class SpreadMoments:
    """Simulation estimates of the moments entering the truncation bounds."""

    c2_terminal: float
    c2_by_date: list[float]
    exceedance: float          # forward-measure mass of any |D(t_i)| > trunc_L
    exceedance_se: float
    n_paths: int


def simulate_spread_moments(
    contract: ContractSpec,
    model: HybridMarketModel,
    surrender: SurrenderParams,
    *,
    n_paths: int = 100_000,
    seed: int = 0,
    step: float = 1.0 / 256.0,
    batches: int = 10,
) -> SpreadMoments:
    """Estimate the terminal and per-death-date second moments of the payoff
    spread under the respective forward measures, plus the probability that
    any surrender-date spread leaves [-L, L]."""
    engine = OracleEngine(contract, model, step=step)
    c = contract
    big_t = c.maturity
    k = c.n_surrender
    per_batch = n_paths // batches
    sq_t = np.zeros(batches)
    sq_dates = np.zeros((batches, c.n_mortality))
    exceed = np.zeros(batches)
    for b in range(batches):
        rng = _oracle_rng(seed, 2, b)
        paths = engine.paths(per_batch, rng)
        w_term = engine.forward_weight(paths, big_t)
        d_term = engine.spread(paths, big_t)
        sq_t[b] = np.mean(w_term * (np.exp(d_term) - 1.0) ** 2)
        over = np.zeros(per_batch, dtype=bool)
        for l in range(1, k):
            over |= np.abs(engine.spread(paths, c.surrender_grid[l])) > surrender.trunc_L
        exceed[b] = np.mean(w_term * over)
        for i, t_bar in enumerate(c.mortality_grid):
            w_i = engine.forward_weight(paths, t_bar)
            m_i = engine.log_moneyness_at(paths, t_bar)
            sq_dates[b, i] = np.mean(w_i * (np.exp(m_i) - 1.0) ** 2)
    return SpreadMoments(
        c2_terminal=math.sqrt(max(0.0, sq_t.mean())),
        c2_by_date=[math.sqrt(max(0.0, v)) for v in sq_dates.mean(axis=0)],
        exceedance=float(exceed.mean()),
        exceedance_se=float(exceed.std(ddof=1) / math.sqrt(batches)),
        n_paths=n_paths,
    )


def simulate_martingale_checks(
    contract: ContractSpec,
    model: HybridMarketModel,
    *,
    t: float,
    n_paths: int = 50_000,
    seed: int = 0,
    step: float = 1.0 / 256.0,
    batches: int = 10,
) -> dict[str, tuple[float, float]]:
    """Estimates (mean, se) of E[exp(-int r) S_t] (target 1) and of
    E[exp(-int r)] (target B(0,t))."""
    engine = OracleEngine(contract, model, step=step)
    per_batch = n_paths // batches
    stock = np.zeros(batches)
    bond = np.zeros(batches)
    for b in range(batches):
        rng = _oracle_rng(seed, 3, b)
        paths = engine.paths(per_batch, rng)
        stock[b] = np.mean(engine.discounted_stock(paths, t))
        bond[b] = np.mean(engine.discount(paths, t))
    return {
        "discounted_stock": (float(stock.mean()), float(stock.std(ddof=1) / math.sqrt(batches))),
        "discounted_bond": (float(bond.mean()), float(bond.std(ddof=1) / math.sqrt(batches))),
    }


def simulate_survival(
    mortality: MortalityParams,
    t: float,
    *,
    n_paths: int = 1_000_000,
    seed: int = 0,
    step: float = 1.0 / 256.0,
    batches: int = 10,
) -> tuple[float, float]:
    """Monte Carlo estimate of Q(tau > t) = E[exp(-int_0^t lambda^m)].

    The OU improvement factor is advanced with its exact Gaussian transition
    (no discretisation error in the state), and the hazard integral uses the
    trapezoid rule on the uniform grid."""
    n_steps = int(round(t / step))
    if abs(n_steps * step - t) > 1e-9:
        raise ValueError(f"step {step} does not divide t = {t}")
    p = mortality
    kappa, lam, sig = p.ou_kappa, p.ou_lambda, p.ou_sigma
    times = np.arange(n_steps + 1) * step
    lam0 = base_mortality(p.age_x + times, p)
    e_k = math.exp(-kappa * step)
    if abs(kappa - lam) > 1e-12:
        drift_scale = kappa / (kappa - lam)
    else:
        drift_scale = None
    sd = sig * math.sqrt((1.0 - e_k * e_k) / (2.0 * kappa)) if kappa > 0 else sig * math.sqrt(step)

    per_batch = n_paths // batches
    est = np.zeros(batches)
    for b in range(batches):
        rng = _oracle_rng(seed, 4, b)
        xi = np.zeros(per_batch)
        # Trapezoid accumulation of lambda^{m,0}(x+s) (1 + xi_s).
        acc = 0.5 * step * lam0[0] * (1.0 + xi)
        for j in range(1, n_steps + 1):
            s_prev = times[j - 1]
            if drift_scale is not None:
                mean = e_k * xi + drift_scale * math.exp(-lam * s_prev) * (
                    math.exp(-lam * step) - e_k
                )
            else:
                mean = e_k * xi + kappa * step * math.exp(-lam * s_prev) * e_k
            xi = mean + sd * rng.standard_normal(per_batch)
            weight = step if j < n_steps else 0.5 * step
            acc += weight * lam0[j] * (1.0 + xi)
        est[b] = np.mean(np.exp(-acc))
    return float(est.mean()), float(est.std(ddof=1) / math.sqrt(batches))
