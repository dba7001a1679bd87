"""Sensing-airtime reduction: uniform subsampling plans along time/tx/rx,
repetition upsampling back to the original grid, and exact-rational
actual-factor / airtime-fraction accounting.

Actual factors are kept as Fractions throughout so that result rows sharing
the same achieved factor group exactly, with no float drift.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ShapeError

AXIS_LENGTHS = (20, 50, 56)          # (t, tx, rx)
AXES = {"time": 0, "tx": 1, "rx": 2}
MODES = ("none", "time", "tx", "rx", "txrx")


def actual_factor(d, s):
    """Achieved subsampling factor d / ceil(d/s) when keeping every s-th of
    d indices starting at 0. Equals s iff s divides d."""
    if d < 1 or s < 1:
        raise ValueError(f"d and s must be >= 1, got d={d} s={s}")
    return Fraction(d, math.ceil(d / s))


@dataclass
class SubsamplePlan:
    mode: str
    target_factor: int
    axis_factors: dict          # axis index -> per-axis keep factor
    kept_indices: dict          # axis index -> tuple of kept indices
    actual: Fraction
    axis_lengths: tuple = AXIS_LENGTHS

    def describe(self):
        return f"mode={self.mode} s={self.target_factor} s'={self.actual}"


@dataclass
class AirtimeReport:
    sensing_fraction: Fraction
    comms_fraction: Fraction


def make_plan(mode, s, axis_lengths=AXIS_LENGTHS):
    """Build the subsampling plan for one (mode, target factor) grid entry."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}, expected one of {MODES}")
    if s < 1:
        raise ValueError(f"target factor must be >= 1, got {s}")
    if mode == "none" or s == 1:
        factors = {}
    elif mode == "txrx":
        root = math.isqrt(s)
        if root * root != s:
            raise ValueError(f"txrx mode needs a perfect-square factor, got {s}")
        factors = {1: root, 2: root}
    else:
        factors = {AXES[mode]: s}
    kept = {
        ax: tuple(range(0, axis_lengths[ax], f)) for ax, f in factors.items()
    }
    actual = Fraction(1)
    for ax, f in factors.items():
        actual *= actual_factor(axis_lengths[ax], f)
    return SubsamplePlan(mode, s, factors, kept, actual, tuple(axis_lengths))


def _check_dims(x, expected):
    if x.shape[-3:] != tuple(expected):
        raise ShapeError(f"trailing dims {x.shape[-3:]} != expected {tuple(expected)}")


def subsample(window, plan):
    """Keep every f-th entry along each subsampled axis of a (...,t,tx,rx)
    array; untouched axes pass through."""
    x = np.asarray(window)
    _check_dims(x, plan.axis_lengths)
    for ax, idx in plan.kept_indices.items():
        x = np.take(x, idx, axis=x.ndim - 3 + ax)
    return x


def _reduced_lengths(plan):
    out = list(plan.axis_lengths)
    for ax, idx in plan.kept_indices.items():
        out[ax] = len(idx)
    return tuple(out)


def upsample(reduced, plan):
    """Repeat each kept value f times in a row along its axis, truncating at
    the original length; output trailing dims are always axis_lengths."""
    x = np.asarray(reduced)
    _check_dims(x, _reduced_lengths(plan))
    for ax, f in plan.axis_factors.items():
        a = x.ndim - 3 + ax
        x = np.repeat(x, f, axis=a)
        x = np.take(x, range(plan.axis_lengths[ax]), axis=a)
    return x


def upsample_tiled(reduced, plan):
    """Rejected-variant ablation: tile the whole kept sequence cyclically to
    the original length instead of repeating elementwise."""
    x = np.asarray(reduced)
    _check_dims(x, _reduced_lengths(plan))
    for ax, f in plan.axis_factors.items():
        a = x.ndim - 3 + ax
        d = plan.axis_lengths[ax]
        reps = [1] * x.ndim
        reps[a] = f
        x = np.take(np.tile(x, reps), range(d), axis=a)
    return x


def subsample_1d(values, s):
    """Keep every s-th entry of a 1-D sequence, starting with the first."""
    return np.asarray(values)[::s]


def upsample_1d(kept, s, d):
    """Repeat each kept value s times in a row, truncated to length d."""
    return np.repeat(np.asarray(kept), s)[:d]


def upsample_tiled_1d(kept, s, d):
    """Tile the full kept sequence cyclically to length d (rejected variant)."""
    return np.tile(np.asarray(kept), s)[:d]


def airtime_report(plan):
    sensing = 1 / plan.actual
    return AirtimeReport(sensing_fraction=sensing, comms_fraction=1 - sensing)
