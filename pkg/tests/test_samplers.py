"""Tests for the mixture, Gaussian and Langevin samplers."""

import math

import numpy as np
import pytest

from mrmap.data.samplers import (
    MixtureSpec,
    ar1_stationary_cov,
    ar1_variance_fraction,
    langevin_run,
    mixture_log_density,
    nearest_component,
    power_iteration,
    precision_inverse,
    sample_gaussian_precision,
    sample_mixture,
    sample_mixture_labeled,
)
from tests.builders import generator

THETA_T = np.array([[1000.0, -1.0], [-1.0, 2.0]])


def _slow_axis(Theta: np.ndarray) -> tuple[np.ndarray, float]:
    lam, vecs = np.linalg.eigh(Theta)
    return vecs[:, 0], float(lam[0])


def _cov_within(sample: np.ndarray, target: np.ndarray, n_se: float = 4.0) -> bool:
    """Entrywise comparison of a sample covariance with *target*."""
    n = sample.shape[1]
    emp = sample @ sample.T / n
    diag = np.diag(target)
    se = np.sqrt((np.outer(diag, diag) + target**2) / n)
    return bool(np.all(np.abs(emp - target) <= n_se * se))


class TestMixture:
    def test_ring_layout(self):
        spec = MixtureSpec.ring()
        assert spec.count == 6 and spec.dim == 2
        assert np.linalg.norm(spec.means, axis=1) == pytest.approx(np.full(6, 8.0))
        assert spec.means[0] == pytest.approx([8.0, 0.0])

    def test_component_counts(self):
        X, labels = sample_mixture_labeled(MixtureSpec.ring(), 600, generator(3))
        assert X.shape == (2, 600)
        counts = np.bincount(labels, minlength=6)
        assert np.all((counts >= 60) & (counts <= 140))

    def test_single_component_mean(self):
        spec = MixtureSpec(np.array([[10.0, -3.0]]))
        X = sample_mixture(spec, 100_000, generator(4))
        assert np.all(np.abs(X.mean(axis=1) - [10.0, -3.0]) <= 0.02)

    def test_origin_component_is_standard_normal(self):
        X = sample_mixture(MixtureSpec(np.zeros((1, 2))), 100_000, generator(5))
        assert _cov_within(X, np.eye(2))

    def test_deterministic(self):
        spec = MixtureSpec.ring()
        assert np.array_equal(sample_mixture(spec, 50, generator(8)), sample_mixture(spec, 50, generator(8)))

    def test_empty_sample(self, rng):
        with pytest.raises(ValueError):
            sample_mixture(MixtureSpec.ring(), 0, rng)

    def test_needs_a_component(self):
        with pytest.raises(ValueError):
            MixtureSpec(np.zeros((0, 2)))


class TestMixtureDensity:
    def test_normalizer_at_origin(self):
        value = mixture_log_density(MixtureSpec(np.zeros((1, 2))), np.zeros(2))
        assert value == pytest.approx(-math.log(2 * math.pi), abs=1e-12)

    def test_symmetric_pair(self):
        pair = MixtureSpec(np.array([[1.0, 0.0], [-1.0, 0.0]]))
        single = MixtureSpec(np.array([[1.0, 0.0]]))
        assert mixture_log_density(pair, np.zeros(2)) == pytest.approx(
            mixture_log_density(single, np.zeros(2)), abs=1e-12
        )
        assert mixture_log_density(single, np.zeros(2)) == pytest.approx(-math.log(2 * math.pi) - 0.5)

    def test_far_field_is_finite(self):
        spec = MixtureSpec.ring()
        far = np.array([58.0, 0.0])
        value = mixture_log_density(spec, far)
        assert np.isfinite(value)
        assert value == pytest.approx(-0.5 * 50.0**2 - math.log(2 * math.pi) - math.log(6), rel=1e-9)

    def test_columns(self):
        spec = MixtureSpec.ring()
        X = sample_mixture(spec, 5, generator(2))
        values = mixture_log_density(spec, X)
        assert values.shape == (5,)
        assert values[2] == pytest.approx(mixture_log_density(spec, X[:, 2]))

    def test_integrates_to_one(self):
        spec = MixtureSpec.ring()
        h = 0.1
        axis = np.arange(-14.0 + h / 2, 14.0, h)
        gy, gx = np.meshgrid(axis, axis, indexing="ij")
        pts = np.stack([gx.ravel(), gy.ravel()])
        total = np.sum(np.exp(mixture_log_density(spec, pts))) * h * h
        assert total == pytest.approx(1.0, abs=0.01)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            mixture_log_density(MixtureSpec.ring(), np.zeros(3))

    def test_nearest_component(self):
        spec = MixtureSpec.ring()
        assert nearest_component(spec, spec.means.T).tolist() == list(range(6))


class TestGaussianPrecision:
    def test_sample_covariance(self):
        Theta = np.array([[2.0, 0.5], [0.5, 1.0]])
        X = sample_gaussian_precision(Theta, 100_000, generator(6))
        assert _cov_within(X, np.linalg.inv(Theta))

    def test_precision_inverse(self):
        Theta = np.array([[4.0, 1.0], [1.0, 3.0]])
        assert precision_inverse(Theta) @ Theta == pytest.approx(np.eye(2), abs=1e-12)
        with pytest.raises(np.linalg.LinAlgError):
            precision_inverse(np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_power_iteration(self):
        assert power_iteration(np.diag([3.0, 1.0])) == pytest.approx(3.0)
        assert power_iteration(THETA_T) == pytest.approx(np.linalg.eigvalsh(THETA_T)[-1], rel=1e-9)


class TestLangevin:
    def test_noiseless_step(self, rng):
        run = langevin_run(np.eye(2), 1.0, 1, 1, rng, init=np.array([[2.0], [0.0]]), noise=False)
        assert run.samples.ravel().tolist() == [1.0, 0.0]

    def test_zero_iterations_return_init(self, rng):
        init = rng.standard_normal((2, 7))
        run = langevin_run(THETA_T, 0.01, 7, 0, rng, init=init, record_at=[0])
        assert np.array_equal(run.samples, init)
        assert np.array_equal(run.snapshots[0], init)
        assert run.grad_evals == 0

    def test_unstable_step(self, rng):
        with pytest.raises(RuntimeError, match="unstable"):
            langevin_run(np.array([[1000.0]]), 0.1, 1, 10, rng)
        with pytest.raises(RuntimeError):
            ar1_stationary_cov(np.array([[1000.0]]), 0.1)

    def test_init_shape(self, rng):
        with pytest.raises(ValueError):
            langevin_run(np.eye(2), 0.1, 3, 1, rng, init=np.zeros((2, 2)))

    def test_snapshots(self, rng):
        run = langevin_run(np.eye(2), 0.5, 4, 10, rng, record_at=[3, 10, 11])
        assert sorted(run.snapshots) == [3, 10]
        assert np.array_equal(run.snapshots[10], run.samples)
        assert run.grad_evals == 10

    def test_deterministic(self):
        a = langevin_run(THETA_T, 0.01, 5, 20, generator(1, 2)).samples
        b = langevin_run(THETA_T, 0.01, 5, 20, generator(1, 2)).samples
        assert np.array_equal(a, b)

    def test_scalar_long_run_variance(self):
        run = langevin_run(np.array([[1.0]]), 0.1, 2000, 3000, generator(7))
        target = 1.002506
        se = target * math.sqrt(2.0 / 2000)
        assert abs(np.mean(run.samples**2) - target) <= 4 * se

    def test_long_run_covariance_matches_stationary(self):
        Theta = np.array([[2.0, 0.5], [0.5, 1.0]])
        run = langevin_run(Theta, 0.3, 2000, 400, generator(8))
        assert _cov_within(run.samples, ar1_stationary_cov(Theta, 0.3))

    def test_slow_direction_mixes_slowly(self):
        v, lam = _slow_axis(THETA_T)
        target = ar1_stationary_cov(THETA_T, 0.01)
        truth = float(v @ target @ v)
        assert truth == pytest.approx(1.0 / lam, rel=1e-3)
        run = langevin_run(THETA_T, 0.01, 4000, 50_000, generator(9), record_at=[1000])
        early = np.mean((v @ run.snapshots[1000]) ** 2)
        late = np.mean((v @ run.samples) ** 2)
        assert early < 0.5 * truth
        assert abs(late - truth) <= 0.1 * truth

    def test_larger_step_mixes_within_a_thousand_iterations(self):
        fraction = ar1_variance_fraction(THETA_T, 0.044, 1000)
        assert fraction[0] > 0.95
        assert ar1_variance_fraction(THETA_T, 0.01, 1000)[0] < 0.5


class TestStationaryCovariance:
    def test_scalar_series(self):
        assert ar1_stationary_cov(np.array([[1.0]]), 0.1)[0, 0] == pytest.approx(1.002506, abs=1e-6)

    def test_fixed_point(self):
        Theta = np.array([[2.0, 0.5], [0.5, 1.0]])
        delta = 0.3
        S = ar1_stationary_cov(Theta, delta)
        A = np.eye(2) - 0.5 * delta**2 * Theta
        assert S == pytest.approx(A @ S @ A.T + delta**2 * np.eye(2), abs=1e-10)

    def test_small_step_limit(self):
        Theta = np.array([[2.0, 0.5], [0.5, 1.0]])
        S = ar1_stationary_cov(Theta, 1e-3)
        inv = np.linalg.inv(Theta)
        assert np.max(np.abs(S - inv)) <= 1e-5 * np.max(np.abs(inv))

    def test_diagonal_precision(self):
        S = ar1_stationary_cov(np.diag([3.0, 1.0, 0.5]), 0.2)
        off = S - np.diag(np.diag(S))
        assert np.max(np.abs(off)) <= 1e-12

    def test_variance_fraction_limits(self):
        assert np.all(ar1_variance_fraction(np.eye(2), 0.1, 0) == 0.0)
        assert ar1_variance_fraction(np.eye(2), 0.5, 10_000) == pytest.approx([1.0, 1.0])
