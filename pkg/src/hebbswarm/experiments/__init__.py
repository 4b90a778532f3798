from .config import ConfigError, ExperimentConfig, profile_config
from .plots import emit_plots
from .protocols import (RunReport, arch_grid, evolve, flex, perturb_experiment, retest,
                        scale)

__all__ = ["ConfigError", "ExperimentConfig", "profile_config", "emit_plots", "RunReport",
           "arch_grid", "evolve", "flex", "perturb_experiment", "retest", "scale"]
