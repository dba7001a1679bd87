"""Softmax cross-entropy with a max-subtraction stabilizer."""

import numpy as np


def softmax_cross_entropy(logits, labels):
    """Mean cross-entropy over the batch and the gradient w.r.t. logits.

    Returns (loss, grad_logits) with grad = (softmax - onehot) / N.
    """
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels)
    n, k = logits.shape
    if labels.shape != (n,):
        raise ValueError(f"labels shape {labels.shape} != ({n},)")
    if labels.min() < 0 or labels.max() >= k:
        raise ValueError(f"labels must lie in [0,{k}), got range "
                         f"[{labels.min()},{labels.max()}]")
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_z
    loss = -log_probs[np.arange(n), labels].mean()
    grad = np.exp(log_probs)
    grad[np.arange(n), labels] -= 1.0
    return loss, grad / n
