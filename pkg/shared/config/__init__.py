"""
Configuration management package.
"""
from .config_manager import (
    ConfigManager,
    get_config,
    set_config,
    load_run_config,
    ApplicationConfig,
    RunConfig,
)

__all__ = [
    'ConfigManager',
    'get_config',
    'set_config',
    'load_run_config',
    'ApplicationConfig',
    'RunConfig',
]
