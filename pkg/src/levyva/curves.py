"""Initial forward curves.

The model is calibrated to an initial instantaneous forward curve
f(0, .).  We keep it deliberately simple: piecewise-linear interpolation
between knots, constant extrapolation on both sides, with the integral
int_0^T f(0,s) ds evaluated exactly (the integrand is piecewise linear).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ForwardCurve:
    """Piecewise-linear instantaneous forward curve f(0, .)."""

    maturities: tuple[float, ...]
    rates: tuple[float, ...]
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        t = np.asarray(self.maturities, dtype=float)
        r = np.asarray(self.rates, dtype=float)
        if t.ndim != 1 or t.size == 0 or t.shape != r.shape:
            raise ValueError("maturities and rates must be matching 1-d sequences")
        if t[0] < 0.0 or np.any(np.diff(t) <= 0):
            raise ValueError("maturities must be nonnegative and strictly increasing")
        # Exact cumulative integral of the piecewise-linear curve at each knot,
        # with constant extrapolation before the first knot.
        cum = np.zeros_like(t)
        cum[0] = r[0] * t[0]
        seg = 0.5 * (r[1:] + r[:-1]) * np.diff(t)
        cum[1:] = cum[0] + np.cumsum(seg)
        object.__setattr__(self, "_cum", cum)

    @classmethod
    def flat(cls, rate: float) -> "ForwardCurve":
        return cls((0.0, 1.0), (rate, rate))

    @classmethod
    def zero(cls) -> "ForwardCurve":
        return cls.flat(0.0)

    @classmethod
    def from_csv(cls, path: str) -> "ForwardCurve":
        """Load a curve from a two-column CSV with header ``maturity,rate``."""
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [c.strip().lower() for c in header] != ["maturity", "rate"]:
                raise ValueError(f"{path}: expected header 'maturity,rate'")
            rows = [(float(a), float(b)) for a, b in reader]
        if not rows:
            raise ValueError(f"{path}: no curve rows")
        mats, rates = zip(*rows)
        return cls(tuple(mats), tuple(rates))

    def rate(self, t):
        """f(0, t), elementwise; constant beyond the knot range."""
        return np.interp(t, self.maturities, self.rates)

    def integral(self, t):
        """int_0^t f(0, s) ds, exact for the piecewise-linear curve."""
        t_arr = np.asarray(t, dtype=float)
        knots = np.asarray(self.maturities)
        rates = np.asarray(self.rates)
        idx = np.searchsorted(knots, t_arr, side="right") - 1
        idx = np.clip(idx, 0, knots.size - 1)
        base = self._cum[idx]
        dt = t_arr - knots[idx]
        # Mean rate over the partial segment: trapezoid between f(knot) and f(t).
        partial = 0.5 * (rates[idx] + self.rate(t_arr)) * dt
        below = t_arr < knots[0]
        out = np.where(below, rates[0] * t_arr, base + partial)
        return float(out) if np.isscalar(t) else out
