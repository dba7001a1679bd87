import numpy as np
import pytest

from beamsense.engine import BatchNorm2D, Conv2D, Dense, MaxPool2, ReLU, grad_check
from beamsense.errors import ConfigurationError, ShapeError, StateError


class _BNTrainFragment:
    """Adapter fixing train mode so grad_check can drive a BatchNorm2D."""

    def __init__(self, layer):
        self.layer = layer

    def forward(self, x):
        return self.layer.forward(x, mode="train")

    def backward(self, g):
        return self.layer.backward(g)

    def params(self):
        return self.layer.params()

    def grads(self):
        return self.layer.grads()


def test_conv_backward_zero_grad():
    layer = Conv2D(2, 3, 3, np.random.default_rng(0))
    x = np.random.default_rng(1).standard_normal((2, 2, 5, 5))
    out = layer.forward(x)
    gx = layer.backward(np.zeros_like(out))
    assert np.all(gx == 0)
    assert np.all(layer.grad_kernels == 0)
    assert np.all(layer.grad_bias == 0)


def test_conv_bias_grad_is_sum():
    rng = np.random.default_rng(2)
    layer = Conv2D(2, 3, 3, rng)
    x = rng.standard_normal((2, 2, 5, 5))
    out = layer.forward(x)
    g = rng.standard_normal(out.shape)
    layer.backward(g)
    assert np.allclose(layer.grad_bias, g.sum(axis=(0, 2, 3)))


def test_conv_finite_difference():
    rng = np.random.default_rng(3)
    layer = Conv2D(2, 3, 3, rng)
    x = rng.standard_normal((1, 2, 5, 5))
    err = grad_check(layer, x, perturbation=1e-5, rng=np.random.default_rng(4))
    assert err < 1e-6


def test_conv_backward_before_forward():
    layer = Conv2D(2, 3, 3)
    with pytest.raises(StateError):
        layer.backward(np.zeros((1, 3, 3, 3)))


def test_conv_channel_mismatch():
    layer = Conv2D(2, 3, 3)
    with pytest.raises(ConfigurationError, match="channels"):
        layer.forward(np.zeros((1, 4, 5, 5)))


def test_conv_too_small_input():
    layer = Conv2D(2, 3, 7)
    with pytest.raises(ShapeError, match="minimum size"):
        layer.forward(np.zeros((1, 2, 5, 5)))


def test_conv_even_kernel_rejected():
    with pytest.raises(ConfigurationError):
        Conv2D(2, 3, 4)


def test_bn_train_normalizes():
    rng = np.random.default_rng(5)
    bn = BatchNorm2D(3)
    x = 4.0 + 2.5 * rng.standard_normal((8, 3, 4, 4))
    out = bn.forward(x, mode="train")
    assert np.all(np.abs(out.mean(axis=(0, 2, 3))) < 1e-6)
    assert np.all(np.abs(out.var(axis=(0, 2, 3)) - 1.0) < 1e-4)


def test_bn_affine():
    rng = np.random.default_rng(6)
    bn = BatchNorm2D(2)
    x = rng.standard_normal((4, 2, 3, 3))
    ref = bn.forward(x, mode="train")
    bn2 = BatchNorm2D(2)
    bn2.gamma = np.full(2, 2.0)
    bn2.beta = np.full(2, 3.0)
    out = bn2.forward(x, mode="train")
    assert np.allclose(out, 2.0 * ref + 3.0)


def test_bn_eval_formula():
    bn = BatchNorm2D(1)
    bn.running_mean = np.array([1.5])
    bn.running_var = np.array([4.0])
    bn.gamma = np.array([2.0])
    bn.beta = np.array([-1.0])
    x = np.array([0.0, 1.5, 3.0]).reshape(1, 1, 1, 3)
    out = bn.forward(x, mode="eval")
    expect = (x - 1.5) / np.sqrt(4.0 + bn.epsilon) * 2.0 - 1.0
    assert np.allclose(out, expect, atol=1e-12)


def test_bn_small_batch_rejected():
    bn = BatchNorm2D(2)
    with pytest.raises(ConfigurationError):
        bn.forward(np.zeros((1, 2, 3, 3)), mode="train")


def test_bn_backward_after_eval_rejected():
    bn = BatchNorm2D(2)
    bn.forward(np.random.default_rng(0).standard_normal((4, 2, 3, 3)), mode="eval")
    with pytest.raises(StateError):
        bn.backward(np.zeros((4, 2, 3, 3)))


def test_bn_grad_beta_is_sum():
    rng = np.random.default_rng(7)
    bn = BatchNorm2D(2)
    x = rng.standard_normal((4, 2, 3, 3))
    bn.forward(x, mode="train")
    g = rng.standard_normal(x.shape)
    bn.backward(g)
    assert np.allclose(bn.grad_beta, g.sum(axis=(0, 2, 3)))


def test_bn_finite_difference():
    rng = np.random.default_rng(8)
    bn = BatchNorm2D(2)
    x = rng.standard_normal((4, 2, 3, 3))
    err = grad_check(_BNTrainFragment(bn), x, rng=np.random.default_rng(9))
    assert err < 1e-5


def test_bn_running_stats_update():
    rng = np.random.default_rng(10)
    bn = BatchNorm2D(1, momentum=0.1)
    x = 5.0 + rng.standard_normal((16, 1, 4, 4))
    bn.forward(x, mode="train")
    expect = 0.9 * 0.0 + 0.1 * x.mean()
    assert np.allclose(bn.running_mean, expect)


def test_relu():
    r = ReLU()
    out = r.forward(np.array([-1.0, 0.0, 2.0]))
    assert np.array_equal(out, [0.0, 0.0, 2.0])
    grad = r.backward(np.array([1.0, 1.0, 1.0]))
    assert np.array_equal(grad, [0.0, 0.0, 1.0])


def test_relu_nonnegative_identity():
    x = np.abs(np.random.default_rng(0).standard_normal(10)) + 0.1
    assert np.array_equal(ReLU().forward(x), x)


def test_dense_zero_weights():
    d = Dense(3, 4)
    d.weights[:] = 0.0
    d.bias = np.array([1.0, 2.0, 3.0, 4.0])
    out = d.forward(np.random.default_rng(0).standard_normal((5, 3)))
    assert np.allclose(out, d.bias)


def test_dense_identity_passthrough():
    d = Dense(2, 2)
    d.weights = np.eye(2)
    d.bias = np.zeros(2)
    x = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(d.forward(x), x)


def test_dense_finite_difference():
    rng = np.random.default_rng(11)
    d = Dense(5, 3, rng)
    x = rng.standard_normal((4, 5))
    err = grad_check(d, x, rng=np.random.default_rng(12))
    assert err < 1e-7


def test_dense_dim_mismatch():
    with pytest.raises(ConfigurationError):
        Dense(5, 3).forward(np.zeros((2, 4)))
