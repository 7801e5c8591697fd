"""Unit tests for the Monte Carlo and quadrature integrators."""

import math
import os

import numpy as np
import pytest

from levyva.bundles import IntegrandBundle
from levyva.integrate import (
    McSettings,
    QuadSettings,
    adaptive_quadrature,
    mc_importance_integrate,
    worker_count,
)


def gaussian_bundle(dim=1, label="unit-gaussian"):
    """Integrand exp(-|x|^2) whose integral is pi^{d/2}."""
    return IntegrandBundle(
        label=label,
        dimension=dim,
        evaluator=lambda p: np.exp(-np.sum(p * p, axis=1)).astype(np.complex128),
        prefactor=1.0,
        proposal_std=(1.0,) * dim,
        proposal_kind=("gauss",) * dim,
        quad_edges=((0.0, 1.0, 2.0, 4.0, 8.0),) * dim,
        eval_cost=1,
    )


def laplace_bundle():
    """Integrand exp(-|x|) with integral 2, heavy tails vs a Gaussian."""
    return IntegrandBundle(
        label="unit-laplace",
        dimension=1,
        evaluator=lambda p: np.exp(-np.abs(p[:, 0])).astype(np.complex128),
        prefactor=1.0,
        proposal_std=(1.5,),
        proposal_kind=("laplace",),
        quad_edges=((0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0),),
        eval_cost=1,
    )


def test_quadrature_gaussian_1d():
    val, err = adaptive_quadrature(gaussian_bundle(), QuadSettings())
    assert val.real == pytest.approx(math.sqrt(math.pi), rel=1e-10)
    assert abs(val.imag) < 1e-14


def test_quadrature_gaussian_2d():
    val, _ = adaptive_quadrature(gaussian_bundle(dim=2), QuadSettings())
    assert val.real == pytest.approx(math.pi, rel=1e-9)


def test_quadrature_polynomial_exact():
    # (1 - x^2/16) on [-4, 4]: K15 panels integrate degree-2 exactly.
    b = IntegrandBundle(
        label="poly",
        dimension=1,
        evaluator=lambda p: (1.0 - p[:, 0] ** 2 / 16.0).astype(np.complex128),
        prefactor=1.0,
        proposal_std=(1.0,),
        proposal_kind=("gauss",),
        quad_edges=((0.0, 4.0),),
        eval_cost=1,
    )
    val, err = adaptive_quadrature(b, QuadSettings())
    assert val.real == pytest.approx(8.0 - 2.0 * 4.0**3 / 48.0, rel=1e-13)
    assert err < 1e-13


def test_quadrature_raises_when_tolerance_unreachable():
    # An oscillation one coarse panel cannot resolve at the requested tolerance.
    b = IntegrandBundle(
        label="needle",
        dimension=1,
        evaluator=lambda p: (np.cos(20.0 * p[:, 0]) * np.exp(-p[:, 0] ** 2)).astype(np.complex128),
        prefactor=1.0,
        proposal_std=(1.0,),
        proposal_kind=("gauss",),
        quad_edges=((0.0, 8.0),),
        eval_cost=1,
    )
    with pytest.raises(RuntimeError, match="needle"):
        adaptive_quadrature(b, QuadSettings(tolerance=1e-12, max_subdivisions=0))


def test_mc_matches_quadrature_gaussian():
    val, se = mc_importance_integrate(gaussian_bundle(), McSettings(20_000, 10, seed=3))
    assert se < 0.01
    assert abs(val.real - math.sqrt(math.pi)) < 4 * se


def test_mc_laplace_proposal_heavy_tails():
    val, se = mc_importance_integrate(laplace_bundle(), McSettings(20_000, 10, seed=3))
    assert abs(val.real - 2.0) < 4 * se


def test_mc_se_scales_with_samples():
    _, se_small = mc_importance_integrate(gaussian_bundle(), McSettings(2_000, 16, seed=5))
    _, se_big = mc_importance_integrate(gaussian_bundle(), McSettings(32_000, 16, seed=5))
    # 16x the samples per batch: SE should fall by ~4 (allow slack).
    assert se_big < se_small / 2.0


def test_mc_deterministic_given_seed():
    a = mc_importance_integrate(gaussian_bundle(), McSettings(5_000, 4, seed=11))
    b = mc_importance_integrate(gaussian_bundle(), McSettings(5_000, 4, seed=11))
    assert a == b
    c = mc_importance_integrate(gaussian_bundle(), McSettings(5_000, 4, seed=12))
    assert a != c


def test_mc_bit_identical_across_worker_counts():
    settings = McSettings(5_000, 8, seed=2)
    vals = [
        mc_importance_integrate(gaussian_bundle(), settings, workers=w) for w in (1, 2, 4)
    ]
    assert vals[0] == vals[1] == vals[2]


def test_mc_distinct_streams_decorrelate():
    settings = McSettings(5_000, 4, seed=2)
    a, _ = mc_importance_integrate(gaussian_bundle(), settings, stream=1)
    b, _ = mc_importance_integrate(gaussian_bundle(), settings, stream=2)
    assert a != b


def test_worker_count_env(monkeypatch):
    monkeypatch.delenv("LEVYVA_WORKERS", raising=False)
    assert worker_count() >= 1
    monkeypatch.setenv("LEVYVA_WORKERS", "3")
    assert worker_count() == 3


def test_settings_validation():
    with pytest.raises(ValueError):
        McSettings(samples_per_batch=0, batches=10)
    with pytest.raises(ValueError):
        McSettings(samples_per_batch=100, batches=1)
    with pytest.raises(ValueError):
        QuadSettings(tolerance=0.0)
