"""Tests for forward operators and latent-data construction."""

import numpy as np
import pytest

from mrmap.data.operators import (
    ForwardOperator,
    LatentBatch,
    OperatorBatch,
    OperatorKind,
    make_latent,
    make_latent_batch,
    mask_size,
    sample_mask,
)
from tests.builders import generator


class TestForwardOperator:
    def test_mask_gathers(self):
        op = ForwardOperator.mask([0, 2], 3)
        assert op.apply(np.array([1.0, 2.0, 3.0])).tolist() == [1.0, 3.0]

    def test_identity_copies(self):
        assert ForwardOperator.identity(2).apply(np.array([4.0, 5.0])).tolist() == [4.0, 5.0]

    def test_dense_product(self):
        op = ForwardOperator.dense([[1.0, 1.0], [0.0, 2.0]])
        assert op.apply(np.array([1.0, 3.0])).tolist() == [4.0, 6.0]

    def test_mask_adjoint_scatters(self):
        op = ForwardOperator.mask([0, 2], 3)
        assert op.apply_adjoint(np.array([5.0, 7.0])).tolist() == [5.0, 0.0, 7.0]

    def test_identity_adjoint(self):
        assert ForwardOperator.identity(2).apply_adjoint(np.ones(2)).tolist() == [1.0, 1.0]

    def test_dense_adjoint(self):
        op = ForwardOperator.dense([[1.0, 1.0], [0.0, 2.0]])
        assert op.apply_adjoint(np.ones(2)).tolist() == [1.0, 3.0]

    def test_length_mismatch_raises(self):
        with pytest.raises(ValueError):
            ForwardOperator.mask([0, 2], 3).apply(np.ones(2))
        with pytest.raises(ValueError):
            ForwardOperator.identity(2).apply_adjoint(np.ones(3))

    def test_mask_indices_validated(self):
        with pytest.raises(ValueError):
            ForwardOperator.mask([2, 0], 3)
        with pytest.raises(ValueError):
            ForwardOperator.mask([0, 3], 3)
        with pytest.raises(ValueError):
            ForwardOperator.mask([], 3)

    def test_adjoint_is_transpose(self, rng):
        for op in (sample_mask(7, 0.4, rng), ForwardOperator.dense(rng.standard_normal((3, 7)))):
            x = rng.standard_normal(7)
            y = rng.standard_normal(op.m)
            assert op.apply(x) @ y == pytest.approx(x @ op.apply_adjoint(y), abs=1e-12)
            assert op.to_dense() @ x == pytest.approx(op.apply(x))


class TestMasks:
    def test_cardinality(self, rng):
        op = sample_mask(10, 0.3, rng)
        assert op.m == 3
        assert len(set(op.indices.tolist())) == 3

    def test_full_fraction_selects_everything(self, rng):
        op = sample_mask(4, 1.0, rng)
        P = op.to_dense()
        assert np.array_equal(P.T @ P, np.eye(4))

    def test_expected_gram_is_scaled_identity(self, rng):
        # E[PᵀP] = f·I for a uniform mask with f·p integral.
        draws = 20_000
        total = np.zeros((10, 10))
        for _ in range(draws):
            P = sample_mask(10, 0.3, rng).to_dense()
            total += P.T @ P
        mean = total / draws
        assert np.array_equal(mean, np.diag(np.diag(mean)))
        # SE per diagonal entry is √(0.21/20000) ≈ 0.0032.
        assert np.diag(mean) == pytest.approx(np.full(10, 0.3), abs=0.015)

    def test_mask_size_rounds_up(self):
        assert mask_size(64, 0.05) == 4
        assert mask_size(64, 0.3) == 20
        assert mask_size(10, 0.1) == 1

    @pytest.mark.parametrize("fraction", [0.0, -0.1, 1.5])
    def test_fraction_out_of_range(self, rng, fraction):
        with pytest.raises(ValueError):
            sample_mask(10, fraction, rng)


class TestLatent:
    def test_noiseless_limit(self, rng):
        d = make_latent(np.array([1.0, 2.0]), ForwardOperator.identity(2), 1e-12, rng)
        assert d.d == pytest.approx([1.0, 2.0], abs=1e-10)

    def test_same_seed_same_draw(self):
        op = ForwardOperator.identity(3)
        a = make_latent(np.ones(3), op, 0.5, generator(9, 4))
        b = make_latent(np.ones(3), op, 0.5, generator(9, 4))
        assert np.array_equal(a.d, b.d)

    def test_noise_second_moment(self, rng):
        op = ForwardOperator.identity(1)
        draws = np.array([make_latent(np.zeros(1), op, 1.0, rng).d[0] for _ in range(100_000)])
        assert 0.98 <= np.mean(draws**2) <= 1.02

    def test_sigma_must_be_positive(self, rng):
        with pytest.raises(ValueError):
            make_latent(np.ones(2), ForwardOperator.identity(2), 0.0, rng)

    def test_batch_masks_have_fixed_size(self, rng):
        X = rng.standard_normal((5, 10))
        batch = make_latent_batch(X, 0.3, 0.1, rng)
        assert batch.d.shape == (5, 3)
        assert len(batch) == 5
        assert np.all(np.diff(batch.operator.indices, axis=1) > 0)

    def test_batch_identity(self, rng):
        X = rng.standard_normal((4, 3))
        batch = make_latent_batch(X, 1.0, 1e-12, rng)
        assert batch.operator.kind is OperatorKind.IDENTITY
        assert batch.d == pytest.approx(X, abs=1e-10)

    def test_stack_matches_rowwise_apply(self, rng):
        ops = [sample_mask(6, 0.5, rng) for _ in range(3)]
        X = rng.standard_normal((3, 6))
        batch = OperatorBatch.stack(ops)
        for i, op in enumerate(ops):
            assert np.array_equal(batch.apply(X)[i], op.apply(X[i]))
        Y = rng.standard_normal((3, 3))
        for i, op in enumerate(ops):
            assert np.array_equal(batch.apply_adjoint(Y)[i], op.apply_adjoint(Y[i]))

    def test_stack_rejects_mixed_sizes(self, rng):
        with pytest.raises(ValueError):
            OperatorBatch.stack([sample_mask(6, 0.5, rng), sample_mask(6, 0.2, rng)])
        with pytest.raises(ValueError):
            LatentBatch.stack([])
