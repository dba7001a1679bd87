"""Layers for the gesture classifier: conv, batchnorm, relu, maxpool, dense.

All arrays are float64. Each layer caches what its backward pass needs;
backward before forward raises StateError. Batched layout is (N,C,H,W);
the conv/pool layers also accept a single (C,H,W) sample.
"""

import numpy as np

from ..errors import ConfigurationError, ShapeError, StateError
from .backend import kernels


def _as_batch(x):
    if x.ndim == 3:
        return x[None], True
    if x.ndim == 4:
        return x, False
    raise ShapeError(f"expected 3D or 4D input, got shape {x.shape}")


class Conv2D:
    """Valid (no padding) cross-correlation with per-output-channel bias."""

    def __init__(self, in_ch, out_ch, ksize, rng=None):
        if ksize % 2 != 1:
            raise ConfigurationError(f"kernel size must be odd, got {ksize}")
        if out_ch < 1:
            raise ConfigurationError(f"out_ch must be >= 1, got {out_ch}")
        self.in_ch, self.out_ch, self.ksize = in_ch, out_ch, ksize
        fan_in = in_ch * ksize * ksize
        # unit-width uniform scaled by 1/sqrt(fan_in): keeps initial logits
        # tight enough that the starting loss sits at ~ln(n_classes)
        bound = 0.5 / np.sqrt(fan_in)
        if rng is None:
            rng = np.random.default_rng(0)
        self.kernels = rng.uniform(-bound, bound, (out_ch, in_ch, ksize, ksize))
        self.bias = np.zeros(out_ch)
        self._cache = None

    def forward(self, x):
        xb, squeeze = _as_batch(np.asarray(x, dtype=np.float64))
        n, c, h, w = xb.shape
        k = self.ksize
        if c != self.in_ch:
            raise ConfigurationError(
                f"input has {c} channels, layer expects {self.in_ch}")
        if h < k or w < k:
            raise ShapeError(
                f"spatial dims ({h},{w}) below minimum size required ({k},{k})")
        oh, ow = h - k + 1, w - k + 1
        cols = kernels.im2col(xb, k, k)
        out = cols @ self.kernels.reshape(self.out_ch, -1).T + self.bias
        out = out.reshape(n, oh, ow, self.out_ch).transpose(0, 3, 1, 2)
        self._cache = (xb.shape, cols, squeeze)
        return out[0] if squeeze else out

    def backward(self, grad_out):
        if self._cache is None:
            raise StateError("conv backward called before forward")
        (n, c, h, w), cols, squeeze = self._cache
        k = self.ksize
        gb, _ = _as_batch(np.asarray(grad_out, dtype=np.float64))
        if gb.shape != (n, self.out_ch, h - k + 1, w - k + 1):
            raise ShapeError(
                f"grad_out shape {gb.shape} does not match forward output")
        g = gb.transpose(0, 2, 3, 1).reshape(-1, self.out_ch)
        self.grad_bias = g.sum(axis=0)
        self.grad_kernels = (g.T @ cols).reshape(self.kernels.shape)
        grad_cols = g @ self.kernels.reshape(self.out_ch, -1)
        grad_x = kernels.col2im(grad_cols, n, c, h, w, k, k)
        return grad_x[0] if squeeze else grad_x

    def params(self):
        return {"kernels": self.kernels, "bias": self.bias}

    def grads(self):
        return {"kernels": self.grad_kernels, "bias": self.grad_bias}


class BatchNorm2D:
    """Per-channel batch normalization over (N,H,W) with running statistics."""

    def __init__(self, channels, epsilon=1e-5, momentum=0.1):
        self.channels = channels
        self.epsilon = epsilon
        self.momentum = momentum
        self.gamma = np.ones(channels)
        self.beta = np.zeros(channels)
        self.running_mean = np.zeros(channels)
        self.running_var = np.ones(channels)
        self._cache = None

    def forward(self, x, mode="train"):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 4 or x.shape[1] != self.channels:
            raise ShapeError(
                f"expected (N,{self.channels},H,W), got {x.shape}")
        if mode == "train":
            if x.shape[0] < 2:
                raise ConfigurationError(
                    "batch statistics need N >= 2 in train mode")
            mean = x.mean(axis=(0, 2, 3))
            var = x.var(axis=(0, 2, 3))
            inv_std = 1.0 / np.sqrt(var + self.epsilon)
            xhat = (x - mean[:, None, None]) * inv_std[:, None, None]
            m = self.momentum
            self.running_mean = (1 - m) * self.running_mean + m * mean
            self.running_var = (1 - m) * self.running_var + m * var
            self._cache = (xhat, inv_std)
        elif mode == "eval":
            inv_std = 1.0 / np.sqrt(self.running_var + self.epsilon)
            xhat = (x - self.running_mean[:, None, None]) * inv_std[:, None, None]
            self._cache = None
            self._eval_inv_std = inv_std
        else:
            raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
        return self.gamma[:, None, None] * xhat + self.beta[:, None, None]

    def backward(self, grad_out):
        if self._cache is None:
            raise StateError("batchnorm backward requires a train-mode forward")
        xhat, inv_std = self._cache
        g = np.asarray(grad_out, dtype=np.float64)
        if g.shape != xhat.shape:
            raise ShapeError(f"grad_out shape {g.shape} != input shape {xhat.shape}")
        self.grad_beta = g.sum(axis=(0, 2, 3))
        self.grad_gamma = (g * xhat).sum(axis=(0, 2, 3))
        gx = g * self.gamma[:, None, None]
        m = xhat.shape[0] * xhat.shape[2] * xhat.shape[3]
        grad_x = (inv_std[:, None, None] / m) * (
            m * gx
            - gx.sum(axis=(0, 2, 3))[:, None, None]
            - xhat * (gx * xhat).sum(axis=(0, 2, 3))[:, None, None]
        )
        return grad_x

    def params(self):
        return {"gamma": self.gamma, "beta": self.beta}

    def grads(self):
        return {"gamma": self.grad_gamma, "beta": self.grad_beta}

    def input_gradient_eval(self, grad_out):
        """Gradient w.r.t. input after an eval-mode forward (linear map).

        Used for inference-time input attribution; parameter gradients are
        deliberately not produced here.
        """
        g = np.asarray(grad_out, dtype=np.float64)
        return g * (self.gamma * self._eval_inv_std)[:, None, None]


class ReLU:
    def forward(self, x):
        x = np.asarray(x, dtype=np.float64)
        self._mask = x > 0
        return np.where(self._mask, x, 0.0)

    def backward(self, grad_out):
        if not hasattr(self, "_mask"):
            raise StateError("relu backward called before forward")
        return np.where(self._mask, grad_out, 0.0)


class MaxPool2:
    """2x2 max pool, stride 2, trailing odd row/column dropped."""

    def forward(self, x):
        xb, squeeze = _as_batch(np.asarray(x, dtype=np.float64))
        n, c, h, w = xb.shape
        if h < 2 or w < 2:
            raise ShapeError(f"maxpool needs H,W >= 2, got ({h},{w})")
        out, arg = kernels.maxpool2_forward(xb)
        self._cache = (arg, h, w, squeeze)
        return out[0] if squeeze else out

    def backward(self, grad_out):
        if not hasattr(self, "_cache") or self._cache is None:
            raise StateError("maxpool backward called before forward")
        arg, h, w, squeeze = self._cache
        gb, _ = _as_batch(np.asarray(grad_out, dtype=np.float64))
        grad_x = kernels.maxpool2_backward(gb, arg, h, w)
        return grad_x[0] if squeeze else grad_x


class Dense:
    """Affine layer: y = x @ W.T + b."""

    def __init__(self, in_features, out_features, rng=None):
        bound = 0.5 / np.sqrt(in_features)
        if rng is None:
            rng = np.random.default_rng(0)
        self.weights = rng.uniform(-bound, bound, (out_features, in_features))
        self.bias = np.zeros(out_features)
        self._cache = None

    def forward(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.weights.shape[1]:
            raise ConfigurationError(
                f"expected (N,{self.weights.shape[1]}), got {x.shape}")
        self._cache = x
        return x @ self.weights.T + self.bias

    def backward(self, grad_out):
        if self._cache is None:
            raise StateError("dense backward called before forward")
        x = self._cache
        g = np.asarray(grad_out, dtype=np.float64)
        self.grad_weights = g.T @ x
        self.grad_bias = g.sum(axis=0)
        return g @ self.weights

    def params(self):
        return {"weights": self.weights, "bias": self.bias}

    def grads(self):
        return {"weights": self.grad_weights, "bias": self.grad_bias}
