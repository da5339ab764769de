"""Tests for convolution, dense, activation and normalization layers."""

import numpy as np
import pytest

from cogmap.diffengine import (
    Tensor, batch_norm, conv2d, deconv2d, default_dtype, dense, fold, gradcheck, leaky_relu,
    unfold,
)
from cogmap.models.exceptions import ShapeError


def reference_conv(x, kernel, bias, stride, pad):
    n, c, h, w = x.shape
    o, _, k, _ = kernel.shape
    padded = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    out_h = (h + 2 * pad - k) // stride + 1
    out_w = (w + 2 * pad - k) // stride + 1
    out = np.zeros((n, o, out_h, out_w))
    for b in range(n):
        for f in range(o):
            for i in range(out_h):
                for j in range(out_w):
                    patch = padded[b, :, i * stride:i * stride + k, j * stride:j * stride + k]
                    out[b, f, i, j] = np.sum(patch * kernel[f]) + bias[f]
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(11)


@pytest.mark.unit
class TestConvolution:

    @pytest.mark.parametrize("stride,pad", [(1, 0), (2, 1), (1, 2)])
    def test_matches_direct_loops(self, rng, stride, pad):
        x = rng.standard_normal((2, 3, 8, 8))
        kernel = rng.standard_normal((4, 3, 4, 4))
        bias = rng.standard_normal(4)
        with default_dtype("float64"):
            out = conv2d(Tensor(x), Tensor(kernel), Tensor(bias), stride=stride, pad=pad)
        np.testing.assert_allclose(out.data, reference_conv(x, kernel, bias, stride, pad),
                                   rtol=1e-10, atol=1e-12)

    def test_identity_kernel_returns_input(self, rng):
        x = rng.standard_normal((1, 3, 5, 5))
        kernel = np.eye(3).reshape(3, 3, 1, 1)
        with default_dtype("float64"):
            out = conv2d(Tensor(x), Tensor(kernel))
        np.testing.assert_allclose(out.data, x)

    def test_zero_kernel_returns_bias(self, rng):
        x = rng.standard_normal((2, 3, 6, 6))
        bias = np.array([0.5, -1.0])
        with default_dtype("float64"):
            out = conv2d(Tensor(x), Tensor(np.zeros((2, 3, 3, 3))), Tensor(bias), pad=1)
        np.testing.assert_allclose(out.data[:, 0], 0.5)
        np.testing.assert_allclose(out.data[:, 1], -1.0)

    def test_transposed_convolution_is_adjoint(self, rng):
        x = rng.standard_normal((2, 3, 8, 8))
        kernel = rng.standard_normal((5, 3, 4, 4))
        with default_dtype("float64"):
            y_shape = conv2d(Tensor(x), Tensor(kernel), stride=2, pad=1).shape
            y = rng.standard_normal(y_shape)
            forward = conv2d(Tensor(x), Tensor(kernel), stride=2, pad=1).data
            back = deconv2d(Tensor(y), Tensor(kernel), stride=2, pad=1).data
        assert back.shape == x.shape
        assert np.sum(forward * y) == pytest.approx(np.sum(x * back), rel=1e-10)

    def test_deconv_output_extent(self, rng):
        out = deconv2d(Tensor(rng.standard_normal((1, 2, 4, 4))),
                       Tensor(rng.standard_normal((2, 3, 4, 4))), stride=2, pad=1)
        assert out.shape == (1, 3, 8, 8)

    def test_fold_is_adjoint_of_unfold(self, rng):
        x = rng.standard_normal((1, 2, 6, 6))
        with default_dtype("float64"):
            cols = unfold(Tensor(x), 3, 2, 1).data
            c = rng.standard_normal(cols.shape)
            back = fold(Tensor(c), x.shape, 3, 2, 1).data
        assert np.sum(cols * c) == pytest.approx(np.sum(x * back), rel=1e-10)

    def test_channel_mismatch(self, rng):
        with pytest.raises(ShapeError) as excinfo:
            conv2d(Tensor(np.zeros((1, 3, 8, 8))), Tensor(np.zeros((2, 4, 3, 3))))
        assert excinfo.value.error_code == "SHAPE_MISMATCH"

    def test_empty_output_rejected(self):
        with pytest.raises(ShapeError):
            conv2d(Tensor(np.zeros((1, 1, 2, 2))), Tensor(np.zeros((1, 1, 4, 4))))

    def test_gradients_match_finite_differences(self, rng):
        arrays = [rng.standard_normal((1, 2, 6, 6)), rng.standard_normal((3, 2, 4, 4)),
                  rng.standard_normal(3)]
        assert gradcheck(lambda ts: (conv2d(ts[0], ts[1], ts[2], stride=2, pad=1) ** 2).sum(),
                         arrays, eps=1e-4, rtol=1e-6)

    def test_deconv_gradients_match_finite_differences(self, rng):
        arrays = [rng.standard_normal((1, 3, 3, 3)), rng.standard_normal((3, 2, 4, 4))]
        assert gradcheck(lambda ts: (deconv2d(ts[0], ts[1], stride=2, pad=1) ** 2).sum(),
                         arrays, eps=1e-4, rtol=1e-6)


@pytest.mark.unit
class TestDense:

    def test_matches_matrix_product(self, rng):
        x = rng.standard_normal((4, 3))
        w = rng.standard_normal((3, 2))
        b = rng.standard_normal(2)
        with default_dtype("float64"):
            out = dense(Tensor(x), Tensor(w), Tensor(b))
        np.testing.assert_allclose(out.data, x @ w + b)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            dense(Tensor(np.zeros((4, 3))), Tensor(np.zeros((2, 2))))

    def test_gradients_match_finite_differences(self, rng):
        arrays = [rng.standard_normal((4, 3)), rng.standard_normal((3, 2)), rng.standard_normal(2)]
        assert gradcheck(lambda ts: (dense(ts[0], ts[1], ts[2]) ** 2).sum(), arrays, eps=1e-4)


@pytest.mark.unit
class TestActivations:

    def test_leaky_relu_values(self):
        out = leaky_relu(Tensor([-2.0, 0.0, 3.0]))
        np.testing.assert_allclose(out.data, [-0.4, 0.0, 3.0], rtol=1e-6)

    def test_leaky_relu_gradient(self, rng):
        values = rng.standard_normal(8)
        values[np.abs(values) < 0.1] = 0.5
        assert gradcheck(lambda ts: (leaky_relu(ts[0]) ** 2).sum(), [values], eps=1e-4)


@pytest.mark.unit
class TestBatchNorm:

    def test_training_normalizes_per_channel(self, rng):
        x = rng.standard_normal((8, 3, 4, 4)) * 5.0 + 2.0
        running_mean, running_var = np.zeros(3), np.ones(3)
        with default_dtype("float64"):
            out = batch_norm(Tensor(x), Tensor(np.ones(3)), Tensor(np.zeros(3)),
                             running_mean, running_var, training=True)
        np.testing.assert_allclose(out.data.mean(axis=(0, 2, 3)), 0.0, atol=1e-10)
        np.testing.assert_allclose(out.data.var(axis=(0, 2, 3)), 1.0, rtol=1e-3)

    def test_running_statistics_update(self, rng):
        x = rng.standard_normal((6, 2))
        running_mean, running_var = np.zeros(2), np.ones(2)
        with default_dtype("float64"):
            batch_norm(Tensor(x), Tensor(np.ones(2)), Tensor(np.zeros(2)),
                       running_mean, running_var, training=True)
        np.testing.assert_allclose(running_mean, 0.1 * x.mean(axis=0))
        np.testing.assert_allclose(running_var, 0.9 + 0.1 * x.var(axis=0, ddof=1))

    def test_evaluation_uses_running_statistics(self):
        x = np.array([[1.0, 2.0], [3.0, 4.0]])
        running_mean, running_var = np.array([1.0, 2.0]), np.array([4.0, 1.0])
        with default_dtype("float64"):
            out = batch_norm(Tensor(x), Tensor(np.array([2.0, 1.0])), Tensor(np.array([0.0, 1.0])),
                             running_mean, running_var, training=False)
        expected = (x - running_mean) / np.sqrt(running_var + 1e-5) * [2.0, 1.0] + [0.0, 1.0]
        np.testing.assert_allclose(out.data, expected)

    def test_gradients_match_finite_differences(self, rng):
        weights = rng.standard_normal((5, 3))
        arrays = [rng.standard_normal((5, 3)), rng.standard_normal(3), rng.standard_normal(3)]

        def fn(ts):
            out = batch_norm(ts[0], ts[1], ts[2], np.zeros(3), np.ones(3), training=True)
            return (out * Tensor(weights)).sum()

        assert gradcheck(fn, arrays, eps=1e-4, rtol=1e-5)
