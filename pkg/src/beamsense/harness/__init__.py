from .config import DEFAULT_CONFIG_TEXT, ExperimentConfig, default_grid, load_config
from .runner import derive_seed, run_ablations, run_grid, run_single
from .svgplot import emit_plots

__all__ = [
    "DEFAULT_CONFIG_TEXT", "ExperimentConfig", "default_grid", "load_config",
    "derive_seed", "run_ablations", "run_grid", "run_single", "emit_plots",
]
