import numpy as np
import pytest

from beamsense.engine import AdamState, adam_step, softmax_cross_entropy


def test_uniform_logits_loss_is_log8():
    logits = np.zeros((3, 8))
    loss, _ = softmax_cross_entropy(logits, np.array([0, 3, 7]))
    assert abs(loss - np.log(8.0)) < 1e-12


def test_confident_logit_no_overflow():
    logits = np.zeros((1, 8))
    logits[0, 2] = 1000.0
    loss, grad = softmax_cross_entropy(logits, np.array([2]))
    assert np.isfinite(loss) and loss < 1e-6
    assert np.all(np.isfinite(grad))


def test_out_of_range_label():
    with pytest.raises(ValueError):
        softmax_cross_entropy(np.zeros((2, 8)), np.array([0, 8]))


def test_loss_grad_finite_difference():
    rng = np.random.default_rng(0)
    logits = rng.standard_normal((3, 8))
    labels = np.array([1, 4, 6])
    _, grad = softmax_cross_entropy(logits, labels)
    h = 1e-6
    for i in range(logits.size):
        pert = logits.copy()
        pert.flat[i] += h
        up, _ = softmax_cross_entropy(pert, labels)
        pert.flat[i] -= 2 * h
        down, _ = softmax_cross_entropy(pert, labels)
        numeric = (up - down) / (2 * h)
        assert abs(numeric - grad.flat[i]) < 1e-7


def test_adam_zero_grad_fixed_point():
    params = {"w": np.array([1.0, -2.0, 3.0])}
    state = AdamState(params)
    before = params["w"].copy()
    adam_step(params, {"w": np.zeros(3)}, state, lr=3e-4)
    assert np.array_equal(params["w"], before)
    assert state.step == 1


def test_adam_first_step_hand_formula():
    g = 0.5
    lr = 3e-4
    params = {"w": np.array([1.0])}
    state = AdamState(params)
    adam_step(params, {"w": np.array([g])}, state, lr)
    # bias-corrected first step, evaluated from the definitions
    m_hat = (0.1 * g) / (1 - 0.9)
    v_hat = (0.001 * g * g) / (1 - 0.999)
    expect = 1.0 - lr * m_hat / (np.sqrt(v_hat) + 1e-8)
    assert abs(params["w"][0] - expect) < 1e-15


def test_adam_constant_grad_monotone():
    params = {"w": np.array([0.7])}
    state = AdamState(params)
    vals = [params["w"][0]]
    for _ in range(2):
        adam_step(params, {"w": np.array([0.3])}, state, lr=1e-3)
        vals.append(params["w"][0])
    assert vals[0] > vals[1] > vals[2]


def test_adam_shape_mismatch():
    params = {"w": np.zeros(3)}
    state = AdamState(params)
    with pytest.raises(Exception):
        adam_step(params, {"w": np.zeros(4)}, state, lr=1e-3)
