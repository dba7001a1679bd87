"""Experiment configuration: flat INI-style key=value file with sections.

All defaults live here and can be printed with --dump-config, so a config
file checked into a results directory fully reproduces a run.
"""

import configparser
import io
from dataclasses import dataclass, field

from .. import airtime
from ..classifier import TrainConfig
from ..errors import ConfigurationError

DEFAULT_CONFIG_TEXT = """\
[scene]
subjects = 2
sequences = 2
seconds_per_gesture = 10.0
noise_std_db = 1.0
seed = 0

[windows]
stride = 20

[train]
epochs = 100
learning_rate = 3e-4
batch_size = 512
repeats = 25

[grid]
modes = time,tx,rx
factors = 2,3,4,5,6,7,8,9
txrx_factors = 4,9

[output]
dir = results
"""


def default_grid(modes=("time", "tx", "rx"), factors=range(2, 10),
                 txrx_factors=(4, 9)):
    """Baseline plus every (mode, s) combination: 27 entries by default."""
    grid = [("none", 1)]
    for mode in modes:
        for s in factors:
            grid.append((mode, int(s)))
    for s in txrx_factors:
        grid.append(("txrx", int(s)))
    return grid


@dataclass
class ExperimentConfig:
    subjects: int = 2
    sequences: int = 2
    seconds_per_gesture: float = 10.0
    noise_std_db: float = 1.0
    master_seed: int = 0
    window_stride: int = 20
    epochs: int = 100
    learning_rate: float = 3e-4
    batch_size: int = 512
    repeats: int = 25
    grid: list = field(default_factory=default_grid)
    out_dir: str = "results"

    def __post_init__(self):
        if self.subjects < 1 or self.sequences < 1:
            raise ConfigurationError("subjects and sequences must be >= 1")
        if self.window_stride < 1:
            raise ConfigurationError("window stride must be >= 1")
        for mode, s in self.grid:
            try:
                airtime.make_plan(mode, s)
            except ValueError as exc:
                raise ConfigurationError(
                    f"invalid grid entry ({mode}, {s}): {exc}") from exc

    def train_config(self, seed=0):
        return TrainConfig(epochs=self.epochs, learning_rate=self.learning_rate,
                           batch_size=self.batch_size, repeats=self.repeats,
                           seed=seed)


def _parse(text):
    parser = configparser.ConfigParser()
    parser.read_string(DEFAULT_CONFIG_TEXT)
    parser.read_string(text)
    return parser


def load_config(path=None, text=None, **overrides):
    """Build an ExperimentConfig from a file (or raw text) plus keyword
    overrides. Unknown sections/keys are rejected."""
    if text is None:
        if path is None:
            text = ""
        else:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
    defaults = _parse("")
    parser = _parse(text)
    for section in parser.sections():
        if section not in defaults.sections():
            raise ConfigurationError(f"unknown config section [{section}]")
        for key in parser[section]:
            if key not in defaults[section]:
                raise ConfigurationError(
                    f"unknown config key {key!r} in [{section}]")

    def csv_ints(value):
        return [int(v) for v in value.split(",") if v.strip()]

    grid = default_grid(
        modes=[m.strip() for m in parser["grid"]["modes"].split(",") if m.strip()],
        factors=csv_ints(parser["grid"]["factors"]),
        txrx_factors=csv_ints(parser["grid"]["txrx_factors"]),
    )
    cfg = dict(
        subjects=parser.getint("scene", "subjects"),
        sequences=parser.getint("scene", "sequences"),
        seconds_per_gesture=parser.getfloat("scene", "seconds_per_gesture"),
        noise_std_db=parser.getfloat("scene", "noise_std_db"),
        master_seed=parser.getint("scene", "seed"),
        window_stride=parser.getint("windows", "stride"),
        epochs=parser.getint("train", "epochs"),
        learning_rate=parser.getfloat("train", "learning_rate"),
        batch_size=parser.getint("train", "batch_size"),
        repeats=parser.getint("train", "repeats"),
        grid=grid,
        out_dir=parser.get("output", "dir"),
    )
    cfg.update(overrides)
    return ExperimentConfig(**cfg)


def dump_config(config=None):
    """Render a config back to the INI text format (defaults if None)."""
    if config is None:
        return DEFAULT_CONFIG_TEXT
    parser = _parse("")
    parser["scene"]["subjects"] = str(config.subjects)
    parser["scene"]["sequences"] = str(config.sequences)
    parser["scene"]["seconds_per_gesture"] = repr(config.seconds_per_gesture)
    parser["scene"]["noise_std_db"] = repr(config.noise_std_db)
    parser["scene"]["seed"] = str(config.master_seed)
    parser["windows"]["stride"] = str(config.window_stride)
    parser["train"]["epochs"] = str(config.epochs)
    parser["train"]["learning_rate"] = repr(config.learning_rate)
    parser["train"]["batch_size"] = str(config.batch_size)
    parser["train"]["repeats"] = str(config.repeats)
    modes, factors = [], []
    for mode, s in config.grid:
        if mode in ("none", "txrx"):
            continue
        if mode not in modes:
            modes.append(mode)
        if s not in factors:
            factors.append(s)
    parser["grid"]["modes"] = ",".join(modes)
    parser["grid"]["factors"] = ",".join(str(s) for s in factors)
    parser["grid"]["txrx_factors"] = ",".join(
        str(s) for mode, s in config.grid if mode == "txrx")
    parser["output"]["dir"] = config.out_dir
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()
