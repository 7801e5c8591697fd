"""Variable annuity pricing under a Levy-driven hybrid rate/equity model.

The package values a unit-linked contract with a guaranteed minimum
accumulation benefit, a death benefit and a surrender benefit.  Interest
rates follow a forward-rate model driven by a normal inverse Gaussian
process with Vasicek-type bond volatility; the equity account loads on the
same driver plus an independent NIG factor.  Mortality has a Gompertz
baseline with a stochastic improvement factor; surrender is intensity-based
and moneyness-dependent.

Prices are closed-form Fourier integrals evaluated either by
importance-sampled Monte Carlo or by deterministic quadrature, and are
cross-checked by an independent path-simulation oracle.
"""

from .actuarial import (
    MortalityParams,
    SurrenderParams,
    SurvivalCurve,
    bounded_surrender_intensity,
    surrender_intensity,
    survival_probability,
    tail_level,
)
from .curves import ForwardCurve
from .integrate import McSettings, QuadSettings
from .market import ContractSpec, HybridMarketModel, LevyDriver, w_coefficient
from .nig import MomentBudget, NigParams, nig_cumulant
from .pricing import (
    ContractValuation,
    McIntegrator,
    PriceReport,
    QuadIntegrator,
    price_contract,
    price_death_benefit,
    price_death_benefit_approx,
    price_gmab,
    price_surrender_benefit,
)

__all__ = [
    "ContractSpec",
    "ContractValuation",
    "ForwardCurve",
    "HybridMarketModel",
    "LevyDriver",
    "McIntegrator",
    "McSettings",
    "MomentBudget",
    "MortalityParams",
    "NigParams",
    "PriceReport",
    "QuadIntegrator",
    "QuadSettings",
    "SurrenderParams",
    "SurvivalCurve",
    "bounded_surrender_intensity",
    "nig_cumulant",
    "price_contract",
    "price_death_benefit",
    "price_death_benefit_approx",
    "price_gmab",
    "price_surrender_benefit",
    "surrender_intensity",
    "survival_probability",
    "tail_level",
    "w_coefficient",
]

__version__ = "0.1.0"
