"""Vectorised Fourier integrands for the benefit legs.

Every pricing integral in this library has the same anatomy.  With
W = v - i*damp the (possibly dampened) integration variable,

    f(v) = exp(i <W, w>)                                   -- phase
         * exp( int_0^h theta1(base1(s) + i sum_k W_k c_k(s)) ds
              + int_0^h theta2(base2   + i sum_k W_k sigma2 1{s<=tau_k}) ds )
         * prod_{k Gaussian} sqrt(pi/(beta_s dt_k)) exp(-v_k^2/(4 beta_s dt_k))
         * [ exp(p_shift * iW_kc) / ((iW_kc - 1) iW_kc) ]   -- optional kernel
         * exp(const_exponent),

where c_k(s) = (b - Sigma(s, M_k)) 1{s <= tau_k} with a per-coordinate
maturity M_k, and base1 is either the bond volatility Sigma(s, T_base) or
the constant equity loading b.  Gaussian factors come from transforming the
squared-spread surrender hazard; the kernel comes from transforming the
dampened call payoff.

:class:`IntegrandBundle` packages one such integrand with its scalar
prefactor (hazard constant, drift discount and (2 pi)^-d), Monte Carlo
proposal scales, and quadrature truncation boxes.  Builders at the bottom
assemble the bundles for the guaranteed accumulation, death and surrender
benefits; the degenerate cases (no quadratic surrender term, single-period
grids) fall out naturally as lower-dimensional or zero-dimensional bundles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .actuarial import SurrenderParams
from .market import ContractSpec, HybridMarketModel, w_coefficient
from .nig import gauss_legendre_panels, nig_cumulant


@dataclass(frozen=True)
class IntegrandBundle:
    """A vectorised integrand over R^d plus the metadata its integrators need.

    ``evaluator`` maps an (n, d) array of real points to (n,) complex values.
    ``prefactor`` multiplies the integral's value (it already contains the
    (2 pi)^-d normalisation).  ``proposal_std``/``proposal_kind`` steer the
    importance sampler ("gauss" or "laplace" per axis); ``quad_edges`` gives
    symmetric panel edges (positive half, mirrored) per axis for the
    deterministic quadrature.
    """

    label: str
    dimension: int
    evaluator: Callable[[np.ndarray], np.ndarray]
    prefactor: float
    proposal_std: tuple[float, ...]
    proposal_kind: tuple[str, ...]
    quad_edges: tuple[tuple[float, ...], ...]
    eval_cost: int
    conjugate_symmetric: bool = True


@dataclass(frozen=True)
class _Coordinate:
    """One integration coordinate of a theta block."""

    cutoff: float              # indicator date tau_k
    coef_maturity: float       # maturity inside (b - Sigma(s, .))
    w_phase: float             # deterministic phase coefficient
    damp: float = 0.0          # imaginary shift (r for the dampened payoff coordinate)
    gauss_dt: float | None = None  # surrender-grid step for the Gaussian factor


class _ThetaBlock:
    """Shared evaluation engine for all Fourier integrands."""

    def __init__(
        self,
        *,
        model: HybridMarketModel,
        surrender: SurrenderParams,
        horizon: float,
        coords: Sequence[_Coordinate],
        base1: str,                   # "bond" or "equity"
        base1_maturity: float | None,
        base2: float,
        kernel_coord: int | None = None,
        kernel_p_shift: float = 0.0,
        const_exponent: float = 0.0,
    ) -> None:
        self.model = model
        self.surrender = surrender
        self.horizon = float(horizon)
        self.coords = list(coords)
        self.kernel_coord = kernel_coord
        self.kernel_p_shift = kernel_p_shift
        self.const_exponent = const_exponent
        d = len(self.coords)

        cutoffs = np.array([c.cutoff for c in self.coords], dtype=float)
        if np.any(cutoffs > self.horizon + 1e-12):
            raise ValueError("coordinate cutoffs must not exceed the theta horizon")

        # Driver-1 quadrature grid, with panels split at every cutoff so the
        # integrand is smooth on each panel.  The cumulant argument drifts in
        # s only through exp(-a (T - s)) with a tiny mean-reversion speed, so
        # a modest fixed node count per panel is spectrally accurate.
        edges = np.unique(np.concatenate([[0.0, self.horizon], cutoffs]))
        edges = edges[(edges >= 0.0) & (edges <= self.horizon)]
        s, w = gauss_legendre_panels(edges, model.nodes_per_year, nodes_per_panel=8)
        self._s, self._w = s, w
        if base1 == "bond":
            self._base1 = model.sigma_bond(s, base1_maturity)
        elif base1 == "equity":
            self._base1 = np.full(s.shape, model.b_loading)
        else:
            raise ValueError(f"unknown base1 kind {base1!r}")
        self._c1 = np.empty((s.size, d))
        for k, c in enumerate(self.coords):
            self._c1[:, k] = (model.b_loading - model.sigma_bond(s, c.coef_maturity)) * (
                s <= c.cutoff
            )

        # Driver-2 time integral is exact: the argument is piecewise constant
        # in s between consecutive cutoffs.
        seg_edges = edges
        self._seg_len = np.diff(seg_edges)
        self._c2 = np.empty((self._seg_len.size, d))
        for k, c in enumerate(self.coords):
            self._c2[:, k] = model.sigma2 * (seg_edges[1:] <= c.cutoff + 1e-12)
        self._base2 = float(base2)

        self._w_vec = np.array([c.w_phase for c in self.coords])
        self._damp = np.array([c.damp for c in self.coords])
        self._has_damp = bool(np.any(self._damp != 0.0))
        self.eval_cost = s.size + self._seg_len.size

        self._verify_strips()

    def _verify_strips(self) -> None:
        """The real part of every cumulant argument is independent of the
        (real) sample coordinates, so admissibility can be certified at
        construction time against both strips and moment budgets."""
        m = self.model
        re1 = self._base1 + self._c1 @ self._damp
        re2 = self._base2 + self._c2 @ self._damp
        for re, driver, name in ((re1, m.driver1, "driver 1"), (re2, m.driver2, "driver 2")):
            lo, hi = driver.params.strip
            if re.size and (re.min() <= lo or re.max() >= hi):
                raise ValueError(f"{name} cumulant argument leaves its analyticity strip")
            if re.size and np.max(np.abs(re)) > driver.budget.padded + 1e-12:
                raise ValueError(
                    f"{name} argument magnitude {np.max(np.abs(re)):.6g} exceeds the "
                    f"padded moment budget {driver.budget.padded:.6g}"
                )

    def __call__(self, points: np.ndarray) -> np.ndarray:
        m = self.model
        v = np.asarray(points, dtype=float)
        if self._has_damp:
            w_cplx = v - 1j * self._damp
        else:
            w_cplx = v
        out_exp = np.zeros(v.shape[0], dtype=np.complex128)
        # Phase from the deterministic w coefficients.
        out_exp += 1j * (w_cplx @ self._w_vec)
        # Driver 1: Gauss-Legendre in s, vectorised over samples.
        z1 = self._base1[None, :] + 1j * (w_cplx @ self._c1.T)
        out_exp += nig_cumulant(m.driver1.params, z1, check=False) @ self._w
        # Driver 2: exact segment sums.
        z2 = self._base2 + 1j * (w_cplx @ self._c2.T)
        out_exp += nig_cumulant(m.driver2.params, z2, check=False) @ self._seg_len
        out_exp += self.const_exponent
        vals = np.exp(out_exp)
        # Gaussian surrender factors on the undampened coordinates.
        beta = self.surrender.beta_s
        for k, c in enumerate(self.coords):
            if c.gauss_dt is not None:
                denom = 4.0 * beta * c.gauss_dt
                vals *= math.sqrt(math.pi / (beta * c.gauss_dt)) * np.exp(
                    -v[:, k] ** 2 / denom
                )
        # Dampened payoff kernel.
        if self.kernel_coord is not None:
            iw = 1j * w_cplx[:, self.kernel_coord]
            vals *= np.exp(self.kernel_p_shift * iw) / ((iw - 1.0) * iw)
        return vals


def _bundle_from_block(
    block: _ThetaBlock,
    *,
    label: str,
    hazard_constant: float,
    drift_discount: float,
) -> IntegrandBundle:
    """Wrap a theta block with prefactors, proposal scales and quadrature
    boxes derived from the block's own decay structure."""
    d = len(block.coords)
    beta = block.surrender.beta_s
    stds, kinds, edges = [], [], []
    for c in block.coords:
        if c.gauss_dt is not None:
            # Target density ~ exp(-v^2 / (4 beta dt)): std sqrt(2 beta dt).
            target = math.sqrt(2.0 * beta * c.gauss_dt)
            stds.append(1.2 * target)
            kinds.append("gauss")
            radius = 8.0 * target
            edges.append(tuple(np.linspace(0.0, radius, 4)))
        else:
            # Dampened coordinate: the integrand decays exponentially (via
            # the driver cumulants) on top of the |v|^-2 kernel, so a Laplace
            # proposal keeps the importance weights bounded.  The width is an
            # empirically tuned function of the horizon (longer horizons
            # concentrate the integrand near the origin).
            stds.append(min(2.0, max(0.6, 1.5 / math.sqrt(block.horizon))))
            kinds.append("laplace")
            edges.append((0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 20.0, 40.0))
    prefactor = hazard_constant * drift_discount / (2.0 * math.pi) ** d
    return IntegrandBundle(
        label=label,
        dimension=d,
        evaluator=block,
        prefactor=prefactor,
        proposal_std=tuple(stds),
        proposal_kind=tuple(kinds),
        quad_edges=tuple(edges),
        eval_cost=block.eval_cost,
    )


def _interior_coords(
    contract: ContractSpec,
    model: HybridMarketModel,
    surrender: SurrenderParams,
    count: int,
    *,
    coef_maturity: float,
    w_maturity: float | None = None,
) -> list[_Coordinate]:
    """Gaussian-paired coordinates for the surrender dates t_1..t_count.
    Dropped entirely when the quadratic surrender loading vanishes."""
    if surrender.beta_s == 0.0:
        return []
    coords = []
    for l in range(1, count + 1):
        coords.append(
            _Coordinate(
                cutoff=contract.surrender_grid[l],
                coef_maturity=coef_maturity,
                w_phase=w_coefficient(
                    contract, model, "interior", index=l, maturity=w_maturity
                ),
                gauss_dt=contract.grid_step(l + 1),
            )
        )
    return coords


def build_gmab_integrands(
    contract: ContractSpec,
    model: HybridMarketModel,
    surrender: SurrenderParams,
    *,
    maturity: float | None = None,
    n_interior: int | None = None,
    hazard_end_index: int | None = None,
    label_prefix: str = "gmab",
) -> tuple[IntegrandBundle, IntegrandBundle]:
    """Bundles for the no-surrender factor and the dampened call factor of a
    guaranteed accumulation payoff.

    With the defaults this is the terminal benefit at the contract maturity
    over interior dates t_1..t_{K-1}.  The death-benefit approximation reuses
    the same construction at ``maturity`` = tbar_i with ``n_interior`` = j
    interior dates and the surrender hazard accrued to t_{j+1}
    (``hazard_end_index`` = j+1).
    """
    big_t = contract.maturity if maturity is None else float(maturity)
    k_eff = contract.n_surrender if n_interior is None else n_interior + 1
    hazard_idx = (contract.n_surrender if hazard_end_index is None else hazard_end_index)
    hazard_end = contract.surrender_grid[hazard_idx]
    t1 = contract.surrender_grid[1]
    hazard_constant = math.exp(-surrender.c_base * (hazard_end - t1))
    drift_discount = math.exp(-model.int_drift_A(big_t, big_t))

    interior = _interior_coords(
        contract, model, surrender, k_eff - 1, coef_maturity=big_t, w_maturity=big_t
    )
    block_m = _ThetaBlock(
        model=model,
        surrender=surrender,
        horizon=big_t,
        coords=interior,
        base1="bond",
        base1_maturity=big_t,
        base2=0.0,
    )
    terminal = _Coordinate(
        cutoff=big_t,
        coef_maturity=big_t,
        w_phase=w_coefficient(contract, model, "terminal", maturity=big_t),
        damp=contract.dampening_r,
    )
    block_n = _ThetaBlock(
        model=model,
        surrender=surrender,
        horizon=big_t,
        coords=[*interior, terminal],
        base1="bond",
        base1_maturity=big_t,
        base2=0.0,
        kernel_coord=len(interior),
    )
    return (
        _bundle_from_block(
            block_m,
            label=f"{label_prefix}-stay",
            hazard_constant=hazard_constant,
            drift_discount=drift_discount,
        ),
        _bundle_from_block(
            block_n,
            label=f"{label_prefix}-call",
            hazard_constant=hazard_constant,
            drift_discount=drift_discount,
        ),
    )


@dataclass(frozen=True)
class DeathTerm:
    """Fourier work for one death-benefit payment date."""

    index: int                      # 1-based position on the mortality grid
    date: float
    early: bool                     # date on or before the first surrender date
    stay_bundle: IntegrandBundle | None  # None for early dates (factor is exactly 1)
    call_bundle: IntegrandBundle


def _death_branch_index(contract: ContractSpec, t_bar: float) -> int:
    """Largest j with t_j < t_bar, capped at K-1: the surrender interval that
    governs the hazard accrued before a death at t_bar."""
    grid = np.asarray(contract.surrender_grid)
    j = int(np.searchsorted(grid, t_bar, side="left")) - 1
    return min(j, contract.n_surrender - 1)


def build_death_integrands(
    contract: ContractSpec,
    model: HybridMarketModel,
    surrender: SurrenderParams,
) -> list[DeathTerm]:
    """One :class:`DeathTerm` per death-benefit date tbar_i.

    Dates with tbar_i <= t_1 carry no accrued surrender hazard: their value
    splits as 1 plus a one-dimensional dampened call integral.  Later dates
    additionally integrate over the spreads at the surrender dates preceding
    tbar_i.
    """
    terms: list[DeathTerm] = []
    t1 = contract.surrender_grid[1]
    for i in range(1, contract.n_mortality + 1):
        t_bar = contract.mortality_grid[i - 1]
        w_death = w_coefficient(contract, model, "death", index=i)
        p_shift = float(contract.log_penalty(t_bar))
        drift_discount = math.exp(-model.int_drift_A(t_bar, t_bar))
        damped = _Coordinate(
            cutoff=t_bar,
            coef_maturity=t_bar,
            w_phase=w_death,
            damp=contract.dampening_r,
        )
        if t_bar <= t1 + 1e-12 or contract.n_surrender == 1:
            block = _ThetaBlock(
                model=model,
                surrender=surrender,
                horizon=t_bar,
                coords=[damped],
                base1="bond",
                base1_maturity=t_bar,
                base2=0.0,
                kernel_coord=0,
                kernel_p_shift=p_shift,
            )
            call = _bundle_from_block(
                block,
                label=f"death-{i}-call",
                hazard_constant=1.0,
                drift_discount=drift_discount,
            )
            terms.append(DeathTerm(i, t_bar, True, None, call))
            continue
        j = _death_branch_index(contract, t_bar)
        hazard_end = contract.surrender_grid[j + 1]
        hazard_constant = math.exp(-surrender.c_base * (hazard_end - t1))
        # Interior spread coordinates keep the contract maturity inside their
        # volatility coefficients; only the death coordinate sees tbar_i.
        interior = _interior_coords(
            contract, model, surrender, j, coef_maturity=contract.maturity
        )
        block_stay = _ThetaBlock(
            model=model,
            surrender=surrender,
            horizon=t_bar,
            coords=interior,
            base1="bond",
            base1_maturity=t_bar,
            base2=0.0,
        )
        block_call = _ThetaBlock(
            model=model,
            surrender=surrender,
            horizon=t_bar,
            coords=[*interior, damped],
            base1="bond",
            base1_maturity=t_bar,
            base2=0.0,
            kernel_coord=len(interior),
            kernel_p_shift=p_shift,
        )
        stay = _bundle_from_block(
            block_stay,
            label=f"death-{i}-stay",
            hazard_constant=hazard_constant,
            drift_discount=drift_discount,
        )
        call = _bundle_from_block(
            block_call,
            label=f"death-{i}-call",
            hazard_constant=hazard_constant,
            drift_discount=drift_discount,
        )
        terms.append(DeathTerm(i, t_bar, False, stay, call))
    return terms


@dataclass(frozen=True)
class SurrenderTerm:
    """Fourier work for one surrender date t_i: the lapse probability mass is
    the difference of the hazard survivals to t_i and to t_{i+1}."""

    index: int
    date: float
    stay_bundle: IntegrandBundle | None  # None for i = 1 (value exactly 1)
    lapse_bundle: IntegrandBundle


def build_surrender_integrands(
    contract: ContractSpec,
    model: HybridMarketModel,
    surrender: SurrenderParams,
) -> list[SurrenderTerm]:
    """One :class:`SurrenderTerm` per surrender date t_1..t_{K-1}.

    These are stock-numeraire expectations: there is no drift discount and
    no dampening, the equity loadings shift both cumulant arguments, and the
    compensator exp(-omega(t_i)) enters as a constant exponent.
    """
    terms: list[SurrenderTerm] = []
    t1 = contract.surrender_grid[1]
    big_t = contract.maturity
    for i in range(1, contract.n_surrender):
        t_i = contract.surrender_grid[i]
        omega_i = float(model.omega(t_i))
        common = dict(
            model=model,
            surrender=surrender,
            horizon=t_i,
            base1="equity",
            base1_maturity=None,
            base2=model.sigma2,
            const_exponent=-omega_i,
        )
        if i == 1:
            stay = None
        else:
            interior = _interior_coords(
                contract, model, surrender, i - 1, coef_maturity=big_t
            )
            block = _ThetaBlock(coords=interior, **common)
            stay = _bundle_from_block(
                block,
                label=f"surrender-{i}-stay",
                hazard_constant=math.exp(-surrender.c_base * (t_i - t1)),
                drift_discount=1.0,
            )
        # The lapse factor integrates the hazard through t_{i+1}, so the
        # spread at t_i itself enters with the step dt_{i+1}.
        lapse_coords = _interior_coords(
            contract, model, surrender, i, coef_maturity=big_t
        )
        block = _ThetaBlock(coords=lapse_coords, **common)
        lapse = _bundle_from_block(
            block,
            label=f"surrender-{i}-lapse",
            hazard_constant=math.exp(
                -surrender.c_base * (contract.surrender_grid[i + 1] - t1)
            ),
            drift_discount=1.0,
        )
        terms.append(SurrenderTerm(i, t_i, stay, lapse))
    return terms
