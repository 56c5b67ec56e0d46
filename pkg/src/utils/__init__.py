"""
Módulo de utilidades do MorreyLab.
"""

from .logger import setup_logger, get_logger, configure_root_logger
from .config import load_config, save_config, get_setting, set_setting, CONFIG_FILE, DEFAULT_CONFIG
from .exceptions import MorreyLabError, HypothesisError
from .helpers import (
    format_timestamp,
    file_sha256,
    write_json
)

__all__ = [
    'setup_logger',
    'get_logger',
    'configure_root_logger',
    'load_config',
    'save_config',
    'get_setting',
    'set_setting',
    'CONFIG_FILE',
    'DEFAULT_CONFIG',
    'MorreyLabError',
    'HypothesisError',
    'format_timestamp',
    'file_sha256',
    'write_json'
]
