"""Windowing, leak-free splitting and on-disk storage of sweep sessions.

Windows are kept as (start_index, label, subject, sequence) records over the
shared frame array; the (t,50,56) stacks are materialized per batch, which
keeps the desk-scale dataset well inside memory.
"""

import os
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, FormatError
from .sweepgen import Session, SessionRecord

WINDOW_T = 20

_REC_DTYPE = np.dtype([
    ("start", np.int64), ("gesture", np.int16),
    ("subject", np.int16), ("sequence", np.int16),
])


@dataclass
class SplitSpec:
    train: float = 0.72
    val: float = 0.08
    test: float = 0.20

    def __post_init__(self):
        if abs(self.train + self.val + self.test - 1.0) > 1e-12:
            raise ConfigurationError("split fractions must sum to 1")


class WindowSet:
    """A set of sliding windows over a shared frame array."""

    def __init__(self, frames, records, t=WINDOW_T):
        self.frames = frames
        self.records = np.asarray(records, dtype=_REC_DTYPE)
        self.t = t

    def __len__(self):
        return len(self.records)

    @property
    def labels(self):
        return self.records["gesture"].astype(np.int64)

    def gather(self, indices):
        """Materialize windows as a float64 (B,t,50,56) batch plus labels."""
        recs = self.records[np.asarray(indices)]
        batch = np.empty((len(recs), self.t) + self.frames.shape[1:],
                         dtype=np.float64)
        for i, s in enumerate(recs["start"]):
            batch[i] = self.frames[s:s + self.t]
        return batch, recs["gesture"].astype(np.int64)

    def subset(self, mask_or_idx):
        return WindowSet(self.frames, self.records[mask_or_idx], self.t)

    def value_stats(self):
        """Mean/std of the dB power over all frames touched by any window."""
        touched = np.zeros(len(self.frames), dtype=bool)
        for s in self.records["start"]:
            touched[s:s + self.t] = True
        vals = self.frames[touched]
        return float(vals.mean()), float(vals.std())


def window_stream(session, t=WINDOW_T, stride=1):
    """All sliding windows within contiguous same-gesture runs.

    A run of length L yields floor((L - t)/stride) + 1 windows (0 if L < t).
    """
    recs = []
    for rec in session.records:
        for start in range(rec.start, rec.stop - t + 1, stride):
            recs.append((start, rec.gesture, rec.subject, rec.sequence))
    return WindowSet(session.frames, recs, t)


def split(windows, spec=None):
    """Temporal (train, val, test) split per (subject, gesture) group.

    Within each group ordered by start index: first floor(train*n) windows,
    then floor(val*n), remainder to test. Any window whose frame span
    overlaps a later split's span is dropped from the earlier split
    (bleeding guard). Shuffling is left to the training loop.
    """
    spec = spec or SplitSpec()
    recs = windows.records
    t = windows.t
    order = np.lexsort((recs["start"], recs["gesture"], recs["subject"]))
    recs = recs[order]
    parts = {"train": [], "val": [], "test": []}
    keys = np.stack([recs["subject"], recs["gesture"]], axis=1)
    uniq = np.unique(keys, axis=0)
    for subj, gest in uniq:
        grp = recs[(recs["subject"] == subj) & (recs["gesture"] == gest)]
        n = len(grp)
        if n < 3:
            raise ConfigurationError(
                f"group subject={subj} gesture={gest} has only {n} windows")
        n_train = int(spec.train * n)
        n_val = int(spec.val * n)
        train, val, test = (grp[:n_train], grp[n_train:n_train + n_val],
                            grp[n_train + n_val:])
        # bleeding guard: drop earlier-split windows whose frame span
        # overlaps the start of any later split
        if len(val) or len(test):
            later = np.concatenate([val, test])
            train = train[train["start"] + t <= later["start"].min()]
        if len(val) and len(test):
            val = val[val["start"] + t <= test["start"].min()]
        parts["train"].append(train)
        parts["val"].append(val)
        parts["test"].append(test)
    out = []
    for name in ("train", "val", "test"):
        merged = np.concatenate(parts[name]) if parts[name] else \
            np.empty(0, dtype=_REC_DTYPE)
        out.append(WindowSet(windows.frames, merged, t))
    return tuple(out)


class ArrayWindows:
    """In-memory (X, y) pair exposing the same batch interface as WindowSet."""

    def __init__(self, x, y):
        self.x = np.asarray(x, dtype=np.float64)
        self.y = np.asarray(y, dtype=np.int64)

    def __len__(self):
        return len(self.y)

    @property
    def labels(self):
        return self.y

    def gather(self, indices):
        idx = np.asarray(indices)
        return self.x[idx], self.y[idx]


class TransformedWindows:
    """Applies a batch transform (subsample/upsample, normalization) lazily."""

    def __init__(self, base, transform):
        self.base = base
        self.transform = transform

    def __len__(self):
        return len(self.base)

    @property
    def labels(self):
        return self.base.labels

    def gather(self, indices):
        x, y = self.base.gather(indices)
        return self.transform(x), y


def make_transform(plan=None, mean=0.0, std=1.0, upsampler=None):
    """Standard batch pipeline: emulate reduced airtime, restore the grid,
    then affine-normalize with train-split statistics."""
    from . import airtime as _airtime
    up = upsampler or _airtime.upsample

    def transform(x):
        if plan is not None and plan.axis_factors:
            x = up(_airtime.subsample(x, plan), plan)
        return (x - mean) / std

    return transform


# --- on-disk session format ----------------------------------------------

MAGIC = b"ISACSWP1"
VERSION = 1
_SCALE_NOTE = b"dB-power".ljust(16, b"\0")
_HEADER = struct.Struct("<8sI3I16s")


def save_session(session, path):
    """Binary frame payload plus a line-oriented sidecar index at path.idx."""
    n, n_tx, n_rx = session.frames.shape
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, VERSION, n, n_tx, n_rx, _SCALE_NOTE))
        f.write(np.ascontiguousarray(session.frames, dtype="<f4").tobytes())
    with open(str(path) + ".idx", "w") as f:
        f.write("# subject sequence gesture start stop\n")
        f.write(f"# noise_std_db={session.noise_std_db} seed={session.seed}\n")
        for r in session.records:
            f.write(f"{r.subject} {r.sequence} {r.gesture} {r.start} {r.stop}\n")


def load_session(path):
    with open(path, "rb") as f:
        header = f.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise FormatError(
                f"truncated header: {len(header)} of {_HEADER.size} bytes")
        magic, version, n, n_tx, n_rx, _note = _HEADER.unpack(header)
        if magic != MAGIC:
            raise FormatError(f"bad magic {magic!r} at byte 0")
        if version != VERSION:
            raise FormatError(f"unsupported version {version} (expected {VERSION})")
        payload = f.read()
    expected = n * n_tx * n_rx * 4
    if len(payload) != expected:
        raise FormatError(
            f"truncated payload: {len(payload)} of {expected} bytes "
            f"after byte {_HEADER.size}")
    frames = np.frombuffer(payload, dtype="<f4").reshape(n, n_tx, n_rx).copy()
    records = []
    noise_std_db, seed = 1.0, 0
    with open(str(path) + ".idx") as f:
        for line in f:
            line = line.strip()
            if line.startswith("#"):
                if "noise_std_db=" in line:
                    for tok in line[1:].split():
                        key, _, val = tok.partition("=")
                        if key == "noise_std_db":
                            noise_std_db = float(val)
                        elif key == "seed":
                            seed = int(val)
                continue
            subj, seq, g, start, stop = (int(v) for v in line.split())
            records.append(SessionRecord(subj, seq, g, start, stop))
    return Session(frames=frames, records=records,
                   noise_std_db=noise_std_db, seed=seed)
