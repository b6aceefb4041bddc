"""
核心基礎設施：設定、例外、日誌、亂數種子
"""

from .config import (
    ConfigManager,
    DataConfig,
    EncoderConfig,
    EvalConfig,
    ImaginatorConfig,
    LoggingConfig,
    RunConfig,
    TrainConfig,
    load_run_config,
)
from .exceptions import *  # noqa: F401,F403
from .exceptions import __all__ as _exception_names
from .logging_setup import setup_logging
from .seeding import derive_seed, init_uniform_fan_in_, numpy_rng, resolve_dtype, seed_everything, torch_generator

__all__ = [
    "ConfigManager",
    "DataConfig",
    "EncoderConfig",
    "EvalConfig",
    "ImaginatorConfig",
    "LoggingConfig",
    "RunConfig",
    "TrainConfig",
    "load_run_config",
    "setup_logging",
    "derive_seed",
    "init_uniform_fan_in_",
    "numpy_rng",
    "resolve_dtype",
    "seed_everything",
    "torch_generator",
    *_exception_names,
]
