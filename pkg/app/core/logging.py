import logging
import sys
from pathlib import Path
from typing import Optional, Union

from .config import get_settings

settings = get_settings()

LOG_FORMAT = '%(asctime)s | %(levelname)-8s | %(processName)s | %(name)s | %(message)s'
LOG_DATEFMT = '%Y-%m-%d %H:%M:%S'

ROOT_LOGGER = "app"


def _as_level(level: Union[str, int, None]) -> int:
    if level is None:
        level = settings.LOG_LEVEL
    if isinstance(level, str):
        return getattr(logging, level.upper(), logging.INFO)
    return level


class LoggerConfig:
    """Logging for the API, the CLI and Monte Carlo worker processes.

    Everything is written to stderr so JSON and CSV results on stdout stay
    machine-readable. Service modules log through children of ``app``.
    """

    @classmethod
    def setup_logger(
        cls,
        name: str = ROOT_LOGGER,
        log_level: Optional[Union[str, int]] = None,
        log_file: Optional[Union[str, Path]] = None,
        console: bool = True,
        propagate: bool = False
    ) -> logging.Logger:
        """
        Configure and return a logger instance.

        Args:
            name: Logger name; ``app`` covers every service module
            log_level: Level name or logging constant, LOG_LEVEL when omitted
            log_file: Extra file sink, LOG_FILE when omitted
            console: Attach a stderr handler
            propagate: Pass records on to the root logger

        Returns:
            The configured logger. A logger that already has handlers is returned unchanged.
        """
        logger = logging.getLogger(name)
        if logger.handlers:
            return logger

        level = _as_level(log_level)
        logger.setLevel(level)
        formatter = logging.Formatter(LOG_FORMAT, datefmt=LOG_DATEFMT)

        if console:
            handler = logging.StreamHandler(sys.stderr)
            handler.setFormatter(formatter)
            logger.addHandler(handler)

        log_file = settings.LOG_FILE if log_file is None else log_file
        if log_file:
            Path(log_file).parent.mkdir(parents=True, exist_ok=True)
            handler = logging.FileHandler(log_file)
            handler.setFormatter(formatter)
            logger.addHandler(handler)

        logger.propagate = propagate
        return logger

    @classmethod
    def set_level(cls, level: Union[str, int], name: str = ROOT_LOGGER) -> None:
        """Change the level of a configured logger (``--log-level`` on the CLI)."""
        logging.getLogger(name).setLevel(_as_level(level))

    @classmethod
    def current_level(cls, name: str = ROOT_LOGGER) -> int:
        return logging.getLogger(name).getEffectiveLevel()

    @classmethod
    def init_worker(cls, level: int) -> None:
        """Pool initializer: spawned processes start with unconfigured logging."""
        cls.setup_logger(ROOT_LOGGER, log_level=level)
        cls.set_level(level)


logger = LoggerConfig.setup_logger(ROOT_LOGGER)
