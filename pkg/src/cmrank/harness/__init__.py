"""Experiment orchestration behind the command line."""
from .config import ExperimentConfig, load_config, parse_config
from .seeds import derive_seed, splitmix64

__all__ = ["ExperimentConfig", "load_config", "parse_config", "derive_seed", "splitmix64"]
