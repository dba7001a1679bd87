"""Beam-pair saliency maps from input gradients, plus the beam-index
permutation ablation.

The gradient target is the predicted-class logit of an inference-mode
model; absolute gradients are averaged over samples and the temporal axis,
leaving a 50x56 map over (tx, rx) beam indices.
"""

from dataclasses import dataclass

import numpy as np

from .classifier import N_CLASSES
from .sweepgen import Session


@dataclass
class SaliencyMap:
    values: np.ndarray          # (50,56), non-negative
    n_samples: int
    source_model: str = ""      # checkpoint reference / hash


def compute_saliency(model, test_source, n=1000, seed=0, batch_size=64,
                     source_model=""):
    """Mean absolute input gradient of the predicted-class logit.

    Picks n random test samples (all of them, if fewer are available),
    runs eval-mode forward/backward per batch, and averages |grad| over
    samples and the temporal axis.
    """
    rng = np.random.default_rng(seed)
    avail = len(test_source)
    if avail >= n:
        picks = np.sort(rng.choice(avail, size=n, replace=False))
    else:
        import warnings
        warnings.warn(f"only {avail} test samples available, using all")
        picks = np.arange(avail)
    total = None
    for i in range(0, len(picks), batch_size):
        x, _ = test_source.gather(picks[i:i + batch_size])
        logits = model.forward(x, mode="eval")
        pred = np.argmax(logits, axis=1)
        onehot = np.zeros_like(logits)
        onehot[np.arange(len(pred)), pred] = 1.0
        grad = model.backward(onehot)          # (B,20,50,56)
        contrib = np.abs(grad).mean(axis=1).sum(axis=0)
        total = contrib if total is None else total + contrib
    values = total / len(picks)
    return SaliencyMap(values=values, n_samples=len(picks),
                       source_model=source_model)


def permute_beams(session, seed=0):
    """Re-assign tx and rx beam indices by random permutations, applied
    consistently to every frame. Returns (new session, tx_perm, rx_perm)."""
    rng = np.random.default_rng(seed)
    n_tx, n_rx = session.frames.shape[1:]
    tx_perm = rng.permutation(n_tx)
    rx_perm = rng.permutation(n_rx)
    return apply_permutation(session, tx_perm, rx_perm), tx_perm, rx_perm


def apply_permutation(session, tx_perm, rx_perm):
    frames = session.frames[:, tx_perm][:, :, rx_perm]
    return Session(frames=frames, records=list(session.records),
                   noise_std_db=session.noise_std_db, seed=session.seed)


def central_mass_fraction(smap):
    """Share of map mass in the joint central quarter: central half of tx
    indices crossed with central half of rx indices."""
    n_tx, n_rx = smap.values.shape
    central = smap.values[n_tx // 4: 3 * n_tx // 4, n_rx // 4: 3 * n_rx // 4]
    total = smap.values.sum()
    return float(central.sum() / total) if total > 0 else 0.0


def central_axis_mass(smap):
    """Per-axis concentration: (tx, rx) marginal mass fractions inside the
    central half of each beam-index axis."""
    total = smap.values.sum()
    if total <= 0:
        return 0.0, 0.0
    n_tx, n_rx = smap.values.shape
    tx = smap.values.sum(axis=1)[n_tx // 4: 3 * n_tx // 4].sum() / total
    rx = smap.values.sum(axis=0)[n_rx // 4: 3 * n_rx // 4].sum() / total
    return float(tx), float(rx)


def export_saliency(smap, path, fmt="csv"):
    """csv: 50 rows x 56 decimal columns; pgm: 8-bit min-max grayscale."""
    if fmt == "csv":
        with open(path, "w") as f:
            for row in smap.values:
                f.write(",".join(f"{v:.10g}" for v in row) + "\n")
    elif fmt == "pgm":
        lo, hi = smap.values.min(), smap.values.max()
        if hi > lo:
            scaled = np.round((smap.values - lo) / (hi - lo) * 255)
        else:
            scaled = np.zeros_like(smap.values)
        pixels = scaled.astype(np.uint8)
        with open(path, "wb") as f:
            f.write(f"P5\n{pixels.shape[1]} {pixels.shape[0]}\n255\n".encode())
            f.write(pixels.tobytes())
    else:
        raise ValueError(f"unknown saliency format {fmt!r}")


def load_saliency_csv(path):
    with open(path) as f:
        return np.array([[float(v) for v in line.split(",")] for line in f])
