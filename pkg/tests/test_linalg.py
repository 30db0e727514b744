"""Tests for the CGLS solver, its reverse pass and the array helpers."""

import numpy as np
import pytest

from mrmap.linalg.arrays import as_matrix, as_vector, rowdot
from mrmap.linalg.solvers import (
    cgls,
    cgls_backward,
    dense_regularized_solve,
    solve_regularized,
    solve_regularized_shifted,
)


def _maps(A: np.ndarray):
    return (lambda v: v @ A.T), (lambda y: y @ A)


def _vjps(A: np.ndarray):
    return (lambda v, y_bar: y_bar @ A), (lambda y, w_bar: w_bar @ A.T)


def _conditioned(rng, m: int, n: int, cond: float) -> np.ndarray:
    U, _ = np.linalg.qr(rng.standard_normal((m, m)))
    V, _ = np.linalg.qr(rng.standard_normal((n, n)))
    k = min(m, n)
    s = np.geomspace(1.0, np.sqrt(cond), k)
    S = np.zeros((m, n))
    S[:k, :k] = np.diag(s)
    return U @ S @ V.T


class TestArrays:
    def test_as_vector_rejects_matrix(self):
        with pytest.raises(ValueError):
            as_vector([[1.0, 2.0]])

    def test_as_matrix_rejects_nan(self):
        with pytest.raises(ValueError):
            as_matrix([[1.0, float("nan")]])

    def test_rowdot_keeps_last_axis(self):
        a = np.arange(6.0).reshape(2, 3)
        assert rowdot(a, a).shape == (2, 1)
        assert rowdot(a, a)[1, 0] == pytest.approx(9 + 16 + 25)


class TestCGLS:
    def test_identity_half_shrinkage(self):
        A = np.eye(2)
        x = solve_regularized(*_maps(A), np.array([2.0, 4.0]), beta=1.0)
        assert x == pytest.approx([1.0, 2.0], abs=1e-12)

    def test_zero_rhs_gives_zero(self):
        A = np.array([[1.0, 2.0], [0.0, 1.0]])
        res = cgls(*_maps(A), np.zeros(2), beta=0.5)
        assert np.all(res.x == 0.0)
        assert res.iterations == 0

    def test_matches_dense_oracle(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 17))
            m = int(rng.integers(n, 20))
            A = _conditioned(rng, m, n, cond=1e3)
            b = rng.standard_normal(m)
            x = solve_regularized(*_maps(A), b, beta=0.1, max_iters=20 * n, tol=1e-14)
            ref = dense_regularized_solve(A, b, beta=0.1)
            assert np.linalg.norm(x - ref) <= 1e-8 * np.linalg.norm(ref)

    def test_shifted_matches_dense_oracle(self, rng):
        A = rng.standard_normal((5, 4))
        b = rng.standard_normal(5)
        shift = rng.standard_normal(4)
        x = solve_regularized_shifted(*_maps(A), b, 0.7, shift, max_iters=50, tol=1e-14)
        assert x == pytest.approx(dense_regularized_solve(A, b, 0.7, shift), abs=1e-10)

    def test_least_squares_residual_non_increasing(self, rng):
        A = _conditioned(rng, 12, 10, cond=1e3)
        res = cgls(*_maps(A), rng.standard_normal(12), beta=0.05, max_iters=10, tol=0.0)
        lsq = np.array(res.lsq_residuals)
        assert np.all(np.diff(lsq) <= 1e-12 * lsq[0])

    def test_exact_within_dimension_iterations(self, rng):
        for n in range(2, 9):
            A = _conditioned(rng, n + 3, n, cond=1e2)
            b = rng.standard_normal(n + 3)
            b /= np.linalg.norm(b)
            res = cgls(*_maps(A), b, beta=0.1, max_iters=n, tol=0.0)
            assert res.iterations <= n
            assert res.residual_norms[-1] <= 1e-8
            ref = dense_regularized_solve(A, b, beta=0.1)
            assert np.linalg.norm(res.x - ref) <= 1e-8 * np.linalg.norm(ref)

    def test_residual_monotone_on_random_systems(self, rng):
        for _ in range(100):
            n = int(rng.integers(1, 17))
            m = int(rng.integers(1, 21))
            A = _conditioned(rng, m, n, cond=10.0 ** rng.uniform(0, 4))
            beta = 10.0 ** rng.uniform(-2, 0)
            res = cgls(*_maps(A), rng.standard_normal(m), beta=beta, max_iters=n, tol=0.0)
            lsq = np.array(res.lsq_residuals)
            assert np.all(np.diff(lsq) <= 1e-10 * lsq[0])

    def test_batched_rows_are_independent_solves(self, rng):
        A = rng.standard_normal((4, 3))
        B = rng.standard_normal((5, 4))
        batched = cgls(*_maps(A), B, beta=0.3, max_iters=3, tol=0.0).x
        for i in range(5):
            single = cgls(*_maps(A), B[i], beta=0.3, max_iters=3, tol=0.0).x
            assert batched[i] == pytest.approx(single, abs=1e-13)

    def test_rejects_nonpositive_beta(self):
        with pytest.raises(ValueError):
            cgls(*_maps(np.eye(2)), np.ones(2), beta=0.0)

    def test_rejects_shift_shape(self):
        with pytest.raises(ValueError):
            cgls(*_maps(np.eye(2)), np.ones(2), beta=1.0, shift=np.ones(3))


class TestCGLSBackward:
    def _loss(self, A, b, shift, c, beta, iters):
        return float(c @ cgls(*_maps(A), b, beta, shift=shift, max_iters=iters, tol=0.0).x)

    def test_matches_finite_differences(self, rng):
        A = rng.standard_normal((5, 4))
        b = rng.standard_normal(5)
        shift = rng.standard_normal(4)
        c = rng.standard_normal(4)
        beta, iters = 0.3, 3
        res = cgls(*_maps(A), b, beta, shift=shift, max_iters=iters, tol=0.0, record=True)
        b_bar, shift_bar = cgls_backward(res.tape, beta, c, *_vjps(A))

        step = 1e-6
        for i in range(5):
            e = np.zeros(5)
            e[i] = step
            fd = (self._loss(A, b + e, shift, c, beta, iters) - self._loss(A, b - e, shift, c, beta, iters)) / (2 * step)
            assert b_bar[i] == pytest.approx(fd, rel=1e-6, abs=1e-8)
        for j in range(4):
            e = np.zeros(4)
            e[j] = step
            fd = (self._loss(A, b, shift + e, c, beta, iters) - self._loss(A, b, shift - e, c, beta, iters)) / (2 * step)
            assert shift_bar[j] == pytest.approx(fd, rel=1e-6, abs=1e-8)

    def test_converged_reverse_pass_matches_implicit_gradient(self, rng):
        A = rng.standard_normal((6, 4))
        b = rng.standard_normal(6)
        c = rng.standard_normal(4)
        beta = 0.5
        res = cgls(*_maps(A), b, beta, max_iters=4, tol=0.0, record=True)
        b_bar, _ = cgls_backward(res.tape, beta, c, *_vjps(A))
        M = A.T @ A + beta * np.eye(4)
        implicit = A @ np.linalg.solve(M, c)
        assert b_bar == pytest.approx(implicit, abs=1e-6)
