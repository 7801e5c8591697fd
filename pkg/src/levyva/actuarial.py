"""Mortality and surrender models.

Mortality follows a Gompertz baseline modulated by an Ornstein-Uhlenbeck
improvement factor: the instantaneous force of mortality of a head aged x is

    lambda^m(t) = lambda^{m,0}(x + t) * (1 + xi_t),
    lambda^{m,0}(y) = (1/gm_b) * exp((y - gm_z) / gm_b),
    d xi_t = ou_kappa * (exp(-ou_lambda t) - xi_t) dt + ou_sigma dW_t,
    xi_0 = 0,

with W independent of the market.  Survival probabilities
Q(tau > t) = E[exp(-int_0^t lambda^m)] are available in closed form because
(xi, int lambda) is jointly Gaussian.

Surrender is modelled through an intensity that refreshes at each surrender
date and depends on the prevailing log-moneyness spread d:
lambda^s = beta_s * d^2 + c_base, optionally with the quadratic growth
truncated at a level L to keep exponential moments finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class MortalityParams:
    """Gompertz baseline (gm_b, gm_z), OU improvement (ou_kappa, ou_lambda,
    ou_sigma) and the insured's age at inception."""

    gm_b: float
    gm_z: float
    ou_kappa: float
    ou_lambda: float
    ou_sigma: float
    age_x: float = 40.0

    def __post_init__(self) -> None:
        if self.gm_b <= 0.0:
            raise ValueError(f"gm_b must be positive, got {self.gm_b}")
        if self.ou_kappa < 0.0 or self.ou_sigma < 0.0:
            raise ValueError("ou_kappa and ou_sigma must be nonnegative")
        if self.age_x < 0.0:
            raise ValueError(f"age_x must be nonnegative, got {self.age_x}")


def base_mortality(age, params: MortalityParams):
    """Gompertz force of mortality at the given age."""
    return np.exp((np.asarray(age, dtype=float) - params.gm_z) / params.gm_b) / params.gm_b


@dataclass(frozen=True)
class SurvivalCurve:
    """Closed-form survival probabilities Q(tau > t) for one head.

    The five constants below depend only on the parameters and are cached at
    construction; each evaluation is then a handful of exponentials.
    """

    params: MortalityParams
    _c: tuple[float, float, float, float, float] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        p = self.params
        scale = math.exp((p.age_x - p.gm_z) / p.gm_b)
        c1 = p.ou_kappa / p.gm_b * scale
        c2 = 1.0 / p.gm_b - p.ou_lambda
        c3 = p.ou_kappa - 1.0 / p.gm_b
        c4 = p.ou_sigma / p.gm_b * scale
        c5 = 1.0 / p.gm_b
        object.__setattr__(self, "_c", (c1, c2, c3, c4, c5))

    def survival(self, t):
        """Q(tau > t), elementwise over t >= 0."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0.0):
            raise ValueError("survival requires t >= 0")
        p = self.params
        c1, c2, c3, c4, c5 = self._c
        lam0 = base_mortality(p.age_x + t, p)
        # Deterministic Gompertz part: -int_0^t lambda^{m,0}(x+s) ds.
        gomp = -(lam0 - base_mortality(p.age_x, p)) * p.gm_b
        # Gaussian correction from the OU improvement factor (xi_0 = 0, so
        # the term linear in the initial improvement drops out).
        e2 = np.exp(c2 * t)
        e5 = np.exp(2.0 * c5 * t)
        # Skip vanishing groups: their denominators can be zero in the
        # degenerate cases kappa = 0 (c1 = 0) and sigma = 0 (c4 = 0).
        a_t = np.zeros_like(t)
        if c1 != 0.0:
            a_t = a_t + (
                c1 * e2 / (c3 * (c2 + c3)) * (1.0 - np.exp(-(c2 + c3) * t))
                - c1 * e2 / (c2 * c3) * (1.0 - np.exp(-c2 * t))
            )
        if c4 != 0.0:
            ratio = (c4 / c3) ** 2
            a_t = a_t + (
                0.25 * ratio * e5 / c5 * (1.0 - np.exp(-2.0 * c5 * t))
                - ratio * e5 / (2.0 * c5 + c3) * (1.0 - np.exp(-(2.0 * c5 + c3) * t))
                + 0.25 * ratio * e5 / (c3 + c5) * (1.0 - np.exp(-2.0 * (c3 + c5) * t))
            )
        out = np.exp(gomp + a_t)
        return float(out) if out.ndim == 0 else out

    def death_interval_probability(self, i: int, mortality_grid: tuple[float, ...]) -> float:
        """Q(tbar_{i-1} < tau <= tbar_i) on the given payment grid
        (1-based i, with tbar_0 = 0)."""
        if not 1 <= i <= len(mortality_grid):
            raise ValueError(f"death interval index out of range: {i}")
        left = 0.0 if i == 1 else mortality_grid[i - 2]
        right = mortality_grid[i - 1]
        return float(self.survival(left) - self.survival(right))


def survival_probability(t, params: MortalityParams):
    """Convenience wrapper around :class:`SurvivalCurve`."""
    return SurvivalCurve(params).survival(t)


@dataclass(frozen=True)
class SurrenderParams:
    """Spread-dependent surrender intensity lambda^s(d) = beta_s d^2 + c_base,
    with optional truncation of the quadratic at |d| = trunc_L chosen so that
    the induced pricing error stays below ``eps_tail``."""

    beta_s: float
    c_base: float
    trunc_L: float = 10.0
    eps_tail: float = 1e-4

    def __post_init__(self) -> None:
        if self.beta_s < 0.0 or self.c_base < 0.0:
            raise ValueError("beta_s and c_base must be nonnegative")
        if self.trunc_L <= 0.0:
            raise ValueError(f"trunc_L must be positive, got {self.trunc_L}")
        if not 0.0 < self.eps_tail <= 1.0:
            raise ValueError(f"eps_tail must lie in (0, 1], got {self.eps_tail}")


def surrender_intensity(d, params: SurrenderParams):
    """Unbounded quadratic intensity beta_s d^2 + c_base."""
    d = np.asarray(d, dtype=float)
    out = params.beta_s * d * d + params.c_base
    return float(out) if out.ndim == 0 else out


def bounded_surrender_intensity(d, params: SurrenderParams):
    """Bounded variant of the quadratic intensity: it matches the quadratic
    on [-L, L], is frozen at the boundary value beta_s L^2 + c_base for
    d > L, and decays exponentially as (beta_s L^2 + c_base) exp(L + d) for
    d < -L.  Continuous everywhere, bounded by beta_s L^2 + c_base."""
    d = np.asarray(d, dtype=float)
    L = params.trunc_L
    top = params.beta_s * L * L + params.c_base
    quad = params.beta_s * np.minimum(d * d, L * L) + params.c_base
    cap = top * np.exp(np.minimum(L + d, 0.0))
    out = np.where(d < -L, cap, quad)
    return float(out) if out.ndim == 0 else out


def tail_level(eps: float, moment_sums: float) -> float:
    """Smallest nonnegative truncation level L with
    exp(-L) * moment_sums <= eps, i.e. L = log(moment_sums / eps) clipped
    at zero.  ``moment_sums`` is the sum over surrender dates of the
    forward-measure moments E[e^{D}] + E[e^{-D}]."""
    if eps <= 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    if moment_sums <= 0.0:
        raise ValueError(f"moment_sums must be positive, got {moment_sums}")
    return max(0.0, math.log(moment_sums) - math.log(eps))


@dataclass(frozen=True)
class TruncationBounds:
    """Upper bounds on the pricing error of each benefit leg induced by
    truncating the surrender intensity at the tail level for ``eps``."""

    gmab: float
    death: float
    surrender: float


def truncation_error_bounds(
    *,
    eps: float,
    guarantee_maturity: float,
    bond_maturity: float,
    survival_maturity: float,
    c2_terminal: float,
    death_terms: list[tuple[float, float, float, float]],
    surrender_terms: list[tuple[float, float]],
    notional: float,
) -> TruncationBounds:
    """Assemble the closed-form error bounds.

    * ``c2_terminal``: L^2 norm E[(e^{D(T)} - 1)^2]^{1/2} under the forward
      measure, estimated by simulation.
    * ``death_terms``: per death date with tbar_i > t_1, tuples
      (q_i, bond_i, guarantee_i, c2_i).
    * ``surrender_terms``: per surrender date t_i, tuples
      (penalty_value_i, survival_i); the first entry corresponds to t_1.
    """
    if eps < 0.0:
        raise ValueError("eps must be nonnegative")
    if c2_terminal < 0.0 or any(c2 < 0.0 for *_, c2 in death_terms):
        raise ValueError("second-moment constants must be nonnegative")
    root = math.sqrt(eps)
    gmab = 2.0 * survival_maturity * bond_maturity * guarantee_maturity * (eps + c2_terminal * root)
    death = 2.0 * sum(
        q * bond * g * (eps + c2 * root) for q, bond, g, c2 in death_terms
    )
    if surrender_terms:
        p1, s1 = surrender_terms[0]
        surrender = 2.0 * notional * p1 * s1 * eps + 4.0 * notional * eps * sum(
            p * s for p, s in surrender_terms[1:]
        )
    else:
        surrender = 0.0
    return TruncationBounds(gmab=gmab, death=death, surrender=surrender)
