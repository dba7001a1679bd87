"""Bias-corrected Adam over a named dict of parameter arrays."""

import numpy as np

from ..errors import ConfigurationError


class AdamState:
    def __init__(self, params, beta1=0.9, beta2=0.999, eps=1e-8):
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.step = 0
        self.beta1, self.beta2, self.eps = beta1, beta2, eps


def adam_step(params, grads, state, lr):
    """One in-place Adam update on every parameter; increments state.step."""
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.shape or state.m[name].shape != p.shape:
            raise ConfigurationError(
                f"shape mismatch for {name!r}: param {p.shape}, grad {g.shape}")
    state.step += 1
    t = state.step
    b1, b2 = state.beta1, state.beta2
    for name, p in params.items():
        g = grads[name]
        state.m[name] = b1 * state.m[name] + (1 - b1) * g
        state.v[name] = b2 * state.v[name] + (1 - b2) * g * g
        m_hat = state.m[name] / (1 - b1 ** t)
        v_hat = state.v[name] / (1 - b2 ** t)
        p -= lr * m_hat / (np.sqrt(v_hat) + state.eps)
