"""Three-block CNN gesture classifier and its training/evaluation protocol.

Architecture (fixed): conv3x3(20->16)+BN+ReLU+pool, conv3x3(16->32)+BN+ReLU
+pool, conv7x7(32->64)+BN+ReLU+pool, flatten(384) -> dense(8). Inputs are
(N,20,50,56): the 20-sweep window enters as the channel dimension of the 2D
convolutions over the 50x56 beam grid.
"""

import struct
from dataclasses import dataclass, field

import numpy as np

from .engine import (
    AdamState, BatchNorm2D, Conv2D, Dense, MaxPool2, ReLU, adam_step,
    softmax_cross_entropy,
)
from .errors import ConfigurationError, FormatError, ShapeError

INPUT_SHAPE = (20, 50, 56)
N_CLASSES = 8
FLAT_FEATURES = 64 * 2 * 3     # 50x56 ->conv3 48x54 ->pool 24x27 ->conv3
                               # 22x25 ->pool 11x12 ->conv7 5x6 ->pool 2x3


@dataclass
class TrainConfig:
    epochs: int = 100
    learning_rate: float = 3e-4
    batch_size: int = 512
    repeats: int = 25
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigurationError("epochs must be >= 1")
        if self.batch_size < 2:
            raise ConfigurationError("batch_size must be >= 2 (batchnorm)")


@dataclass
class RunMetrics:
    train_loss: list
    train_acc: list
    val_acc: list
    best_epoch: int
    test_accuracy: float
    confusion: np.ndarray      # (8,8), rows true class, cols predicted
    seed: int


@dataclass
class RepeatSummary:
    mean: float
    stddev: float
    runs: list


class ClassifierModel:
    def __init__(self, seed=0):
        rng = np.random.default_rng(seed)
        self.conv1 = Conv2D(INPUT_SHAPE[0], 16, 3, rng)
        self.bn1 = BatchNorm2D(16)
        self.conv2 = Conv2D(16, 32, 3, rng)
        self.bn2 = BatchNorm2D(32)
        self.conv3 = Conv2D(32, 64, 7, rng)
        self.bn3 = BatchNorm2D(64)
        self.head = Dense(FLAT_FEATURES, N_CLASSES, rng)
        self.relus = [ReLU(), ReLU(), ReLU()]
        self.pools = [MaxPool2(), MaxPool2(), MaxPool2()]
        self.adam = AdamState(self.params())
        self.rng_seed = seed
        self._mode = None

    def _blocks(self):
        return [(self.conv1, self.bn1), (self.conv2, self.bn2),
                (self.conv3, self.bn3)]

    def forward(self, x, mode="train"):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 3:
            x = x[None]
        if x.shape[1:] != INPUT_SHAPE:
            raise ShapeError(
                f"input {x.shape[1:]} below/beyond the minimum size required "
                f"{INPUT_SHAPE}; upsample subsampled data first")
        for (conv, bn), relu, pool in zip(self._blocks(), self.relus, self.pools):
            x = pool.forward(relu.forward(bn.forward(conv.forward(x), mode)))
        self._mode = mode
        self._pooled_shape = x.shape
        return self.head.forward(x.reshape(x.shape[0], -1))

    def backward(self, grad_logits):
        """Gradient w.r.t. the input; parameter grads land in the layers.

        After an eval-mode forward only the input gradient is meaningful
        (batchnorm parameters get no gradient in eval mode).
        """
        g = self.head.backward(np.asarray(grad_logits, dtype=np.float64))
        g = g.reshape(self._pooled_shape)
        for (conv, bn), relu, pool in zip(reversed(self._blocks()),
                                          reversed(self.relus),
                                          reversed(self.pools)):
            g = relu.backward(pool.backward(g))
            if self._mode == "train":
                g = bn.backward(g)
            else:
                g = bn.input_gradient_eval(g)
            g = conv.backward(g)
        return g

    def params(self):
        out = {}
        for i, (conv, bn) in enumerate(self._blocks(), start=1):
            out[f"conv{i}.kernels"] = conv.kernels
            out[f"conv{i}.bias"] = conv.bias
            out[f"bn{i}.gamma"] = bn.gamma
            out[f"bn{i}.beta"] = bn.beta
        out["head.weights"] = self.head.weights
        out["head.bias"] = self.head.bias
        return out

    def grads(self):
        out = {}
        for i, (conv, bn) in enumerate(self._blocks(), start=1):
            out[f"conv{i}.kernels"] = conv.grad_kernels
            out[f"conv{i}.bias"] = conv.grad_bias
            out[f"bn{i}.gamma"] = bn.grad_gamma
            out[f"bn{i}.beta"] = bn.grad_beta
        out["head.weights"] = self.head.grad_weights
        out["head.bias"] = self.head.grad_bias
        return out

    def state_dict(self):
        out = {k: v.copy() for k, v in self.params().items()}
        for i, (_, bn) in enumerate(self._blocks(), start=1):
            out[f"bn{i}.running_mean"] = bn.running_mean.copy()
            out[f"bn{i}.running_var"] = bn.running_var.copy()
        return out

    def load_state_dict(self, state):
        params = self.params()
        for k, v in params.items():
            v[...] = state[k]
        for i, (_, bn) in enumerate(self._blocks(), start=1):
            bn.running_mean = state[f"bn{i}.running_mean"].copy()
            bn.running_var = state[f"bn{i}.running_var"].copy()


class TrainFragment:
    """grad_check adapter for the whole model (train-mode forward).

    Conv biases are excluded from the finite-difference comparison: feeding
    a per-channel constant straight into batchnorm has no effect, so their
    true gradient is identically zero and central differences only return
    cancellation noise there. Their analytic gradient is asserted ~0 in a
    dedicated test instead.
    """

    def __init__(self, model):
        self.model = model

    def forward(self, x):
        return self.model.forward(x, mode="train")

    def backward(self, g):
        return self.model.backward(g)

    def params(self):
        return {k: v for k, v in self.model.params().items()
                if not (k.startswith("conv") and k.endswith(".bias"))}

    def grads(self):
        return {k: v for k, v in self.model.grads().items()
                if not (k.startswith("conv") and k.endswith(".bias"))}


def build_model(seed):
    """Deterministic model initialization from a seed."""
    return ClassifierModel(seed)


def _batches(n, batch_size, order=None):
    """Index chunks; a trailing singleton is folded into the previous chunk
    so batchnorm's N >= 2 precondition always holds."""
    idx = np.arange(n) if order is None else order
    chunks = [idx[i:i + batch_size] for i in range(0, n, batch_size)]
    if len(chunks) > 1 and len(chunks[-1]) == 1:
        chunks[-2] = np.concatenate([chunks[-2], chunks[-1]])
        chunks.pop()
    return chunks


def evaluate(model, source, batch_size=256):
    """Accuracy and 8x8 confusion matrix (rows true, cols predicted)."""
    confusion = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    for chunk in _batches(len(source), batch_size):
        x, y = source.gather(chunk)
        logits = model.forward(x, mode="eval")
        pred = np.argmax(logits, axis=1)     # ties -> lowest class index
        np.add.at(confusion, (y, pred), 1)
    total = confusion.sum()
    accuracy = float(np.trace(confusion)) / total if total else 0.0
    return accuracy, confusion


def train(model, splits, config):
    """Train with per-epoch shuffling; keep the epoch with the best
    validation accuracy (ties toward the earlier epoch) and report test
    accuracy with that snapshot."""
    train_src, val_src, test_src = splits
    for name, src in (("train", train_src), ("val", val_src), ("test", test_src)):
        if len(src) == 0:
            raise ConfigurationError(f"empty {name} split")
    rng = np.random.default_rng(model.rng_seed)
    best_acc = -1.0
    best_epoch = 0
    best_state = None
    losses, accs, val_accs = [], [], []
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(train_src))
        loss_sum = 0.0
        hit_sum = 0
        for chunk in _batches(len(train_src), config.batch_size, order):
            x, y = train_src.gather(chunk)
            logits = model.forward(x, mode="train")
            loss, grad = softmax_cross_entropy(logits, y)
            model.backward(grad)
            adam_step(model.params(), model.grads(), model.adam,
                      config.learning_rate)
            loss_sum += loss * len(chunk)
            hit_sum += int((np.argmax(logits, axis=1) == y).sum())
        losses.append(loss_sum / len(train_src))
        accs.append(hit_sum / len(train_src))
        val_acc, _ = evaluate(model, val_src)
        val_accs.append(val_acc)
        if val_acc > best_acc:
            best_acc = val_acc
            best_epoch = epoch
            best_state = model.state_dict()
    model.load_state_dict(best_state)
    test_acc, confusion = evaluate(model, test_src)
    return RunMetrics(train_loss=losses, train_acc=accs, val_acc=val_accs,
                      best_epoch=best_epoch, test_accuracy=test_acc,
                      confusion=confusion, seed=model.rng_seed)


def repeat_experiment(splits, config):
    """Independent repeats with seeds config.seed + i; population stddev."""
    if config.repeats < 1:
        raise ConfigurationError("repeats must be >= 1")
    runs = []
    for i in range(config.repeats):
        model = build_model(config.seed + i)
        runs.append(train(model, splits, config))
    accs = np.array([r.test_accuracy for r in runs])
    return RepeatSummary(mean=float(accs.mean()),
                         stddev=float(accs.std()),
                         runs=runs)


# --- checkpoints ----------------------------------------------------------

CKPT_MAGIC = b"BSCKPT01"
CKPT_VERSION = 1


def save_checkpoint(model, path):
    """Versioned binary: header + manifest + float64 LE blocks in order."""
    state = model.state_dict()
    with open(path, "wb") as f:
        f.write(CKPT_MAGIC)
        f.write(struct.pack("<IqI", CKPT_VERSION, model.rng_seed, len(state)))
        for name, arr in state.items():
            enc = name.encode()
            f.write(struct.pack("<H", len(enc)))
            f.write(enc)
            f.write(struct.pack("<B", arr.ndim))
            f.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        for arr in state.values():
            f.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_checkpoint(path):
    with open(path, "rb") as f:
        magic = f.read(8)
        if magic != CKPT_MAGIC:
            raise FormatError(f"bad checkpoint magic {magic!r}")
        version, seed, n = struct.unpack("<IqI", f.read(16))
        if version != CKPT_VERSION:
            raise FormatError(f"unsupported checkpoint version {version}")
        manifest = []
        for _ in range(n):
            (name_len,) = struct.unpack("<H", f.read(2))
            name = f.read(name_len).decode()
            (ndim,) = struct.unpack("<B", f.read(1))
            shape = struct.unpack(f"<{ndim}I", f.read(4 * ndim))
            manifest.append((name, shape))
        state = {}
        for name, shape in manifest:
            count = int(np.prod(shape, dtype=np.int64)) if shape else 1
            raw = f.read(8 * count)
            if len(raw) < 8 * count:
                raise FormatError(f"truncated parameter block {name!r}")
            state[name] = np.frombuffer(raw, dtype="<f8").reshape(shape).copy()
    model = ClassifierModel(seed)
    model.load_state_dict(state)
    return model
