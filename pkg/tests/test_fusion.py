import numpy as np
import pytest

from vesselmark.fusion import (
    AttentionBounds,
    align_weights,
    attention_weights,
    fuse,
)


class TestAttentionWeights:
    def test_zero_maps_to_min(self):
        w = attention_weights(np.zeros((3, 3)))
        assert np.all(w == 0.5)

    def test_one_maps_to_max(self):
        w = attention_weights(np.ones((3, 3)))
        assert np.all(w == 1.5)

    def test_midpoint_identity(self):
        w = attention_weights(np.full((2, 2), 0.5))
        assert np.all(w == 1.0)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError, match="normalized"):
            attention_weights(np.array([[1.2]]))
        with pytest.raises(ValueError, match="normalized"):
            attention_weights(np.array([[-0.01]]))

    def test_custom_bounds(self):
        b = AttentionBounds(0.8, 1.2)
        w = attention_weights(np.array([[0.0, 0.5, 1.0]]), b)
        assert w[0] == pytest.approx([0.8, 1.0, 1.2])

    def test_invalid_bounds(self):
        with pytest.raises(ValueError):
            AttentionBounds(0.0, 1.5)
        with pytest.raises(ValueError):
            AttentionBounds(1.5, 0.5)


class TestFuse:
    def test_identity_weights(self, rng):
        r = rng.random((8, 8))
        out = fuse(r, np.ones_like(r))
        assert np.array_equal(out.data, r)

    def test_uniform_half_weights(self, rng):
        r = rng.random((8, 8))
        out = fuse(r, np.full_like(r, 0.5))
        assert np.allclose(out.data, r / 2)

    def test_unclamped_in_memory(self):
        out = fuse(np.array([[0.8]]), np.array([[1.5]]))
        assert out.data[0, 0] == pytest.approx(1.2)

    def test_dim_mismatch(self):
        with pytest.raises(ValueError, match="dimensions differ"):
            fuse(np.zeros((2, 2)), np.ones((3, 3)))

    def test_unnormalized_projection_rejected(self):
        with pytest.raises(ValueError):
            fuse(np.array([[2.0]]), np.array([[1.0]]))

    def test_pointwise_ratio_bounds(self, rng):
        r = rng.random((32, 32))
        a = rng.random((32, 32))
        out = fuse(r, attention_weights(a))
        nz = r > 0
        ratio = out.data[nz] / r[nz]
        assert ratio.min() >= 0.5 - 1e-12
        assert ratio.max() <= 1.5 + 1e-12

    def test_monotone_in_attention(self, rng):
        r = rng.random((16, 16))
        a = rng.random((16, 16))
        a2 = a.copy()
        a2[7, 7] = min(1.0, a[7, 7] + 0.3)
        f1 = fuse(r, attention_weights(a)).data
        f2 = fuse(r, attention_weights(a2)).data
        assert f2[7, 7] >= f1[7, 7]
        mask = np.ones_like(r, dtype=bool)
        mask[7, 7] = False
        assert np.array_equal(f1[mask], f2[mask])

    def test_identity_bounds_regression_guard(self, rng):
        # bounds (1.0, 1.0) reproduce the projection: the no-attention baseline
        r = rng.random((12, 12))
        a = rng.random((12, 12))
        w = attention_weights(a, AttentionBounds(1.0, 1.0))
        assert np.array_equal(fuse(r, w).data, r)


class TestAlignWeights:
    def test_noop_when_shapes_match(self):
        w = np.random.default_rng(0).random((6, 6))
        assert align_weights(w, (6, 6)) is not w or np.array_equal(align_weights(w, (6, 6)), w)

    def test_resamples_with_warning(self):
        w = np.ones((10, 10))
        with pytest.warns(UserWarning, match="resampling"):
            out = align_weights(w, (20, 20))
        assert out.shape == (20, 20)
        assert np.allclose(out, 1.0)
