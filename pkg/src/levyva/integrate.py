"""Numerical integration engines for the Fourier pricing integrals.

Two interchangeable evaluators are provided for integrals of the form
int_{R^d} f(x) dx with rapidly decaying complex-valued integrands f:

* importance-sampled Monte Carlo with a diagonal Gaussian proposal,
  counter-based (Philox) random numbers for scheduling-independent
  reproducibility, and antithetic symmetrisation so that estimates of
  conjugate-symmetric integrands are real to machine precision;

* deterministic tensorised Gauss-Kronrod quadrature on truncated boxes,
  with panel-doubling refinement driven by the embedded error estimate.

Both consume :class:`IntegrandBundle` objects (see :mod:`levyva.bundles`)
which expose a vectorised evaluator together with proposal scales and
truncation radii appropriate for the integrand's decay.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.special import ndtri

if TYPE_CHECKING:  # pragma: no cover
    from .bundles import IntegrandBundle

# Cap on rows * quadrature-nodes handled per evaluator call, to bound the
# size of intermediate complex matrices.
_CHUNK_BUDGET = 4_000_000


@dataclass(frozen=True)
class McSettings:
    """Monte Carlo controls.  The estimate is the mean of per-batch means;
    the standard error is the sample standard deviation of the batch means
    divided by sqrt(batches)."""

    samples_per_batch: int = 1_000_000
    batches: int = 100
    seed: int = 0

    def __post_init__(self) -> None:
        if self.samples_per_batch < 2:
            raise ValueError("samples_per_batch must be at least 2")
        if self.batches < 2:
            raise ValueError("batches must be at least 2 to estimate a standard error")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")


@dataclass(frozen=True)
class QuadSettings:
    """Deterministic quadrature controls."""

    tolerance: float = 1e-6
    max_subdivisions: int = 2

    def __post_init__(self) -> None:
        if self.tolerance <= 0.0:
            raise ValueError("tolerance must be positive")
        if self.max_subdivisions < 0:
            raise ValueError("max_subdivisions must be nonnegative")


def worker_count() -> int:
    """Number of evaluation threads, from LEVYVA_WORKERS (default 1)."""
    raw = os.environ.get("LEVYVA_WORKERS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"LEVYVA_WORKERS must be an integer, got {raw!r}") from exc
    if n < 1:
        raise ValueError(f"LEVYVA_WORKERS must be >= 1, got {n}")
    return n


def _batch_uniforms(seed: int, stream: int, batch: int, shape: tuple[int, int]) -> np.ndarray:
    """Uniforms in (0, 1) keyed by (seed, stream, batch).

    A counter-based Philox generator is keyed so that every
    (integral stream, batch) pair owns an independent substream; the draw is
    therefore independent of scheduling and worker count.
    """
    bits = np.random.Philox(key=(seed << 64) + (stream << 32) + batch)
    gen = np.random.Generator(bits)
    u = gen.random(shape)
    # Guard the open interval: random() already excludes 1.
    tiny = np.finfo(float).tiny
    return np.maximum(u, tiny)


def _proposal_sample(
    bundle: "IntegrandBundle", u: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Transform uniforms into proposal draws; returns (points, log_density).

    Per axis the proposal is either Gaussian (via the inverse normal CDF) or
    Laplace (via its closed-form inverse CDF), scaled by the bundle's
    proposal widths.  Laplace axes keep the importance weights of
    exponentially decaying integrands bounded.
    """
    std = np.asarray(bundle.proposal_std, dtype=float)
    x = np.empty_like(u)
    log_q = np.zeros(u.shape[0])
    for k, kind in enumerate(bundle.proposal_kind):
        s = std[k]
        if kind == "gauss":
            z = ndtri(u[:, k])
            x[:, k] = s * z
            log_q += -0.5 * z * z - 0.5 * np.log(2.0 * np.pi) - np.log(s)
        elif kind == "laplace":
            c = u[:, k] - 0.5
            mag = -np.log1p(-2.0 * np.abs(c))
            x[:, k] = s * np.sign(c) * mag
            log_q += -mag - np.log(2.0 * s)
        else:
            raise ValueError(f"unknown proposal kind {kind!r}")
    return x, log_q


def _check_finite(values: np.ndarray, points: np.ndarray, label: str) -> None:
    bad = ~np.isfinite(values)
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise RuntimeError(
            f"integrand {label!r} returned a non-finite value at point "
            f"{np.asarray(points)[idx]!r}"
        )


def _eval_chunked(bundle: "IntegrandBundle", points: np.ndarray) -> np.ndarray:
    """Evaluate the bundle on (n, d) points in memory-bounded chunks."""
    n = points.shape[0]
    rows = max(1, _CHUNK_BUDGET // max(1, bundle.eval_cost))
    if n <= rows:
        vals = bundle.evaluator(points)
        _check_finite(vals, points, bundle.label)
        return vals
    out = np.empty(n, dtype=np.complex128)
    for start in range(0, n, rows):
        stop = min(start + rows, n)
        out[start:stop] = bundle.evaluator(points[start:stop])
        _check_finite(out[start:stop], points[start:stop], bundle.label)
    return out


def _mc_batch_mean(bundle: "IntegrandBundle", settings: McSettings, stream: int, batch: int) -> complex:
    d = bundle.dimension
    u = _batch_uniforms(settings.seed, stream, batch, (settings.samples_per_batch, d))
    x, log_q = _proposal_sample(bundle, u)
    inv_q = np.exp(-log_q)
    vals = _eval_chunked(bundle, x)
    if bundle.conjugate_symmetric:
        # Antithetic symmetrisation: (f(x) + f(-x)) / 2 shares the proposal
        # weight of x and makes conjugate-symmetric estimates exactly real.
        vals = 0.5 * (vals + _eval_chunked(bundle, -x))
    return complex(np.mean(vals * inv_q))


def mc_importance_integrate(
    bundle: "IntegrandBundle",
    settings: McSettings,
    *,
    stream: int = 0,
    workers: int | None = None,
) -> tuple[complex, float]:
    """Importance-sampled MC estimate of int f dx.  Returns (estimate, se).

    The reduction over batches is performed in a fixed order regardless of
    the number of worker threads, so results are bit-identical for any
    worker count.
    """
    if bundle.dimension == 0:
        # Zero-dimensional integrals are just the bare integrand value.
        val = bundle.evaluator(np.empty((1, 0)))
        return complex(val[0]), 0.0
    n_workers = worker_count() if workers is None else workers
    means: list[complex | None] = [None] * settings.batches
    if n_workers == 1:
        for b in range(settings.batches):
            means[b] = _mc_batch_mean(bundle, settings, stream, b)
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            futures = {
                pool.submit(_mc_batch_mean, bundle, settings, stream, b): b
                for b in range(settings.batches)
            }
            for fut, b in futures.items():
                means[b] = fut.result()
    arr = np.asarray(means, dtype=np.complex128)
    estimate = complex(np.mean(arr))
    se = float(np.std(arr, ddof=1) / np.sqrt(settings.batches))
    return estimate, se


# ----- Gauss-Kronrod 7/15 --------------------------------------------------

# Nodes and weights of the 15-point Kronrod extension of 7-point
# Gauss-Legendre on [-1, 1]; odd-indexed nodes are the Gauss nodes.
_K15_NODES = np.array([
    -0.991455371120812639206854697526329,
    -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926,
    -0.741531185599394439863864773280788,
    -0.586087235467691130294144838258730,
    -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245,
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
])
_K15_WEIGHTS = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
])
_G7_WEIGHTS = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
])


def _axis_rule(edges: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-axis Kronrod nodes plus Kronrod and embedded-Gauss weights on the
    union of panels described by ``edges``."""
    nodes, wk, wg = [], [], []
    for left, right in zip(edges[:-1], edges[1:]):
        half = 0.5 * (right - left)
        mid = 0.5 * (right + left)
        nodes.append(half * _K15_NODES + mid)
        wk.append(half * _K15_WEIGHTS)
        g = np.zeros(15)
        g[1::2] = half * _G7_WEIGHTS
        wg.append(g)
    return np.concatenate(nodes), np.concatenate(wk), np.concatenate(wg)


def _split_edges(edges: np.ndarray) -> np.ndarray:
    mids = 0.5 * (edges[:-1] + edges[1:])
    return np.sort(np.concatenate([edges, mids]))


def adaptive_quadrature(
    bundle: "IntegrandBundle",
    settings: QuadSettings,
) -> tuple[complex, float]:
    """Tensorised Gauss-Kronrod quadrature over the bundle's truncation box.

    The error estimate is the difference between the Kronrod value and the
    embedded Gauss value; if it exceeds the tolerance every axis has its
    panels halved, up to ``max_subdivisions`` times.  Raises RuntimeError if
    the tolerance is still not met.  Returns (estimate, error_estimate).
    Supported up to dimension 3.
    """
    d = bundle.dimension
    if d == 0:
        val = bundle.evaluator(np.empty((1, 0)))
        return complex(val[0]), 0.0
    if d > 3:
        raise ValueError(f"deterministic quadrature supports dimension <= 3, got {d}")
    # Bundle edges describe the positive half-axis; mirror them so every
    # panel set is exactly symmetric about the origin.
    axis_edges = [
        np.concatenate([-np.asarray(e, dtype=float)[:0:-1], np.asarray(e, dtype=float)])
        for e in bundle.quad_edges
    ]
    for attempt in range(settings.max_subdivisions + 1):
        rules = [_axis_rule(e) for e in axis_edges]
        sizes = [r[0].size for r in rules]
        total = int(np.prod(sizes))
        # Accumulate the full tensor contraction in flat chunks so the grid
        # is never materialised: per point, the Kronrod/Gauss weight is the
        # product of the per-axis weights.
        rows = max(1, _CHUNK_BUDGET // max(1, bundle.eval_cost))
        i_kron = 0.0 + 0.0j
        i_gauss = 0.0 + 0.0j
        for start in range(0, total, rows):
            stop = min(start + rows, total)
            flat = np.arange(start, stop)
            points = np.empty((stop - start, d))
            wk = np.ones(stop - start)
            wg = np.ones(stop - start)
            stride = total
            for axis in range(d):
                stride //= sizes[axis]
                idx = (flat // stride) % sizes[axis]
                points[:, axis] = rules[axis][0][idx]
                wk *= rules[axis][1][idx]
                wg *= rules[axis][2][idx]
            vals = bundle.evaluator(points)
            _check_finite(vals, points, bundle.label)
            i_kron += complex(np.sum(wk * vals))
            i_gauss += complex(np.sum(wg * vals))
        err = abs(i_kron - i_gauss)
        scale = max(1.0, abs(i_kron))
        if err <= settings.tolerance * scale:
            return i_kron, err
        if attempt < settings.max_subdivisions:
            axis_edges = [_split_edges(e) for e in axis_edges]
    raise RuntimeError(
        f"quadrature for {bundle.label!r} did not reach tolerance "
        f"{settings.tolerance:g}: error estimate {err:.3g} after "
        f"{settings.max_subdivisions} subdivisions"
    )


__all__ = [
    "McSettings",
    "QuadSettings",
    "adaptive_quadrature",
    "mc_importance_integrate",
    "worker_count",
]
