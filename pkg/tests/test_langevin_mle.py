"""Tests for the Langevin-trained precision MLE baseline."""

import numpy as np
import pytest

from mrmap.data.samplers import sample_gaussian_precision
from mrmap.estimators.langevin_mle import closed_form_precision_mle, fit_precision_mle, project_spd
from tests.builders import generator


class TestClosedForm:
    def test_inverse_second_moment(self):
        X = np.array([[1.0, -1.0, 2.0, -2.0], [0.0, 0.0, 0.0, 2.0]])
        expected = np.linalg.inv(X @ X.T / 4)
        assert closed_form_precision_mle(X) == pytest.approx(expected)

    def test_large_sample(self):
        Theta = np.array([[2.0, 0.4], [0.4, 1.0]])
        X = sample_gaussian_precision(Theta, 100_000, generator(31))
        assert closed_form_precision_mle(X) == pytest.approx(Theta, abs=0.05)

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            closed_form_precision_mle(np.ones((3, 2)))

    def test_rank_deficient_data(self):
        with pytest.raises(ValueError):
            closed_form_precision_mle(np.ones((2, 5)))


class TestProjection:
    def test_clips_negative_eigenvalues(self):
        out = project_spd(np.diag([2.0, -1.0]))
        assert out == pytest.approx(np.diag([2.0, 1e-6]))

    def test_symmetrizes(self):
        out = project_spd(np.array([[2.0, 1.0], [0.0, 2.0]]))
        assert out == pytest.approx(out.T, abs=1e-15)
        assert out == pytest.approx([[2.0, 0.5], [0.5, 2.0]])


class TestFit:
    def test_recovers_diagonal_precision(self):
        X = sample_gaussian_precision(np.diag([2.0, 1.0]), 5000, generator(32))
        fit = fit_precision_mle(X, 0.3, generator(33), n_steps=100, inner_iters=20, n_chains=500, lr=0.5)
        reference = closed_form_precision_mle(X)
        assert np.diag(fit.Theta) == pytest.approx(np.diag(reference), rel=0.25)
        assert abs(fit.Theta[0, 1]) <= 0.3
        assert fit.grad_evals == 100 * 20 * 500
        assert len(fit.history) == 101

    def test_zero_steps(self, rng):
        X = rng.standard_normal((2, 10))
        fit = fit_precision_mle(X, 0.1, rng, n_steps=0)
        assert np.array_equal(fit.Theta, np.eye(2))
        assert fit.grad_evals == 0 and len(fit.history) == 1

    def test_deterministic(self, rng):
        X = rng.standard_normal((2, 50))
        a = fit_precision_mle(X, 0.3, generator(5), n_steps=3, inner_iters=2, n_chains=10)
        b = fit_precision_mle(X, 0.3, generator(5), n_steps=3, inner_iters=2, n_chains=10)
        assert np.array_equal(a.Theta, b.Theta)

    def test_iterates_stay_positive_definite(self, rng):
        X = rng.standard_normal((2, 50))
        fit = fit_precision_mle(X, 0.3, rng, n_steps=10, inner_iters=5, n_chains=50)
        assert all(np.min(np.linalg.eigvalsh(T)) > 0 for T in fit.history)
