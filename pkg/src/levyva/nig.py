"""Normal inverse Gaussian (NIG) cumulant machinery.

The two market risk drivers are NIG Levy processes.  Everything downstream
(bond drifts, equity compensators, Fourier integrands) is expressed through
the cumulant function of a unit-time increment,

    theta(z) = mu*z + delta * (sqrt(alpha^2 - beta^2) - sqrt(alpha^2 - (beta+z)^2)),

which is analytic on the vertical strip Re(z) in (-alpha-beta, alpha-beta).
This module provides the parameter container, strip/validity checks, the
cumulant itself (vectorised over complex arrays), and time integrals of the
cumulant along deterministic complex-valued curves.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


class StripError(ValueError):
    """Raised when a cumulant argument leaves the strip of analyticity."""


@dataclass(frozen=True)
class NigParams:
    """Parameters of a NIG process: tail heaviness ``alpha``, skew ``beta_skew``,
    scale ``delta_scale`` and linear drift ``mu``."""

    alpha: float
    beta_skew: float
    delta_scale: float
    mu: float = 0.0

    def __post_init__(self) -> None:
        if not self.alpha > 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not abs(self.beta_skew) < self.alpha:
            raise ValueError(
                f"need |beta_skew| < alpha, got beta_skew={self.beta_skew}, alpha={self.alpha}"
            )
        if not self.delta_scale > 0.0:
            raise ValueError(f"delta_scale must be positive, got {self.delta_scale}")

    @property
    def gamma(self) -> float:
        """sqrt(alpha^2 - beta^2), the decay rate of exponential moments."""
        return float(np.sqrt(self.alpha**2 - self.beta_skew**2))

    @property
    def strip(self) -> tuple[float, float]:
        """Open interval of admissible real parts of cumulant arguments."""
        return (-self.alpha - self.beta_skew, self.alpha - self.beta_skew)


@dataclass(frozen=True)
class MomentBudget:
    """Exponential-moment headroom: all cumulant arguments appearing in the
    pricing formulas are kept with real part of magnitude at most
    ``(1 + epsilon_slack) * m_bound``, and the driver must have an
    exponential moment at that level."""

    m_bound: float
    epsilon_slack: float = 0.1

    def __post_init__(self) -> None:
        if not self.m_bound > 0.0:
            raise ValueError(f"m_bound must be positive, got {self.m_bound}")
        if not self.epsilon_slack > 0.0:
            raise ValueError(f"epsilon_slack must be positive, got {self.epsilon_slack}")

    @property
    def padded(self) -> float:
        return (1.0 + self.epsilon_slack) * self.m_bound


def verify_moment_budget(params: NigParams, budget: MomentBudget) -> None:
    """Check that the NIG driver has exponential moments up to the padded bound.

    A NIG process has E[exp(u * L_t)] < infinity exactly for
    u in [-alpha - beta, alpha - beta]; requiring the padded bound to sit
    strictly inside |u| < alpha - |beta| is sufficient for both signs.
    Raises ValueError when the budget is not honoured.
    """
    ceiling = params.alpha - abs(params.beta_skew)
    if not budget.padded < ceiling:
        raise ValueError(
            "moment budget violated: (1+eps)*M = "
            f"{budget.padded:.6g} must be < alpha - |beta| = {ceiling:.6g}"
        )


def _check_strip(params: NigParams, z: np.ndarray) -> None:
    lo, hi = params.strip
    re = np.real(z)
    if re.size and (np.min(re) <= lo or np.max(re) >= hi):
        bad = re[(re <= lo) | (re >= hi)]
        raise StripError(
            f"cumulant argument has real part {bad.flat[0]:.6g} outside the "
            f"open strip ({lo:.6g}, {hi:.6g})"
        )


def nig_cumulant(params: NigParams, z, *, check: bool = True):
    """Cumulant theta(z) of a unit-time NIG increment, elementwise over ``z``.

    Accepts real or complex scalars/arrays.  With ``check=True`` (default)
    the argument is validated against the strip of analyticity; hot loops
    that have verified their strips at construction time may pass
    ``check=False``.
    """
    z = np.asarray(z)
    if check:
        _check_strip(params, z)
    a, b, d, m = params.alpha, params.beta_skew, params.delta_scale, params.mu
    inner = a * a - (b + z) ** 2
    # Principal square root.  For arguments in the strip, inner never touches
    # the branch cut (its imaginary part vanishes only where its real part is
    # positive), so the principal branch is the analytic continuation.
    if np.iscomplexobj(inner):
        root = np.sqrt(inner.astype(np.complex128))
    else:
        root = np.sqrt(inner)
    return m * z + d * (params.gamma - root)


def gauss_legendre_panels(
    breakpoints: np.ndarray,
    nodes_per_year: int,
    *,
    nodes_per_panel: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule on [b_0, b_last] split at the given
    breakpoints.  By default each panel gets a node count proportional to
    its length (at least 4) so accuracy per unit time is uniform; a fixed
    ``nodes_per_panel`` can be requested instead when the integrand is known
    to be slowly varying within every panel.

    Returns (nodes, weights) as flat arrays.
    """
    breakpoints = np.asarray(breakpoints, dtype=float)
    if breakpoints.ndim != 1 or breakpoints.size < 2:
        raise ValueError("need at least two breakpoints")
    if np.any(np.diff(breakpoints) <= 0):
        raise ValueError("breakpoints must be strictly increasing")
    nodes, weights = [], []
    for left, right in zip(breakpoints[:-1], breakpoints[1:]):
        if nodes_per_panel is not None:
            n = nodes_per_panel
        else:
            n = max(4, int(np.ceil((right - left) * nodes_per_year)))
        x, w = np.polynomial.legendre.leggauss(n)
        half = 0.5 * (right - left)
        nodes.append(half * (x + 1.0) + left)
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


def time_integrated_cumulant(
    params: NigParams,
    argument: Callable[[np.ndarray], np.ndarray],
    t_end: float,
    *,
    nodes_per_year: int = 64,
    breakpoints: np.ndarray | None = None,
) -> complex:
    """Integral of theta(argument(s)) over s in [0, t_end].

    ``argument`` maps an array of times to (possibly complex) cumulant
    arguments; it must stay inside the strip, which is checked at every
    quadrature node.  Optional interior ``breakpoints`` split the panels at
    known kinks of the argument curve.
    """
    if t_end < 0.0:
        raise ValueError(f"t_end must be nonnegative, got {t_end}")
    if t_end == 0.0:
        return 0.0 + 0.0j
    if breakpoints is None:
        edges = np.array([0.0, t_end])
    else:
        interior = np.asarray(breakpoints, dtype=float)
        interior = interior[(interior > 0.0) & (interior < t_end)]
        edges = np.unique(np.concatenate([[0.0, t_end], interior]))
    s, w = gauss_legendre_panels(edges, nodes_per_year)
    vals = nig_cumulant(params, argument(s))
    return complex(np.sum(w * vals))
