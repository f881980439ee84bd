"""
Core module containing essential configurations and utilities for the toolkit.

This module provides:
- Toolkit settings and configuration
- Logging configuration
- The domain exception hierarchy
"""

from .config import get_settings, Settings
from .logging import LoggerConfig, logger
from .exceptions import DecoderToolkitError

__all__ = [
    'get_settings',
    'Settings',
    'LoggerConfig',
    'logger',
    'DecoderToolkitError',
]
