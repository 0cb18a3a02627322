"""Utility functions"""
import logging
import math
from datetime import datetime, timezone

import numpy as np

from .exceptions import InvalidSpecError

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def str_bool(inp: str) -> bool:
    inp = inp.upper()
    if not inp or inp == "0" or inp.startswith("F") or inp.startswith("N"):
        return False
    return True


def str_now() -> str:
    return datetime.isoformat(datetime.now(timezone.utc))


def get_logger(name: str, quiet: bool, debug: bool) -> logging.Logger:
    """Return a logger with a single stream handler at the level implied
    by the quiet and debug flags.  Debug wins over quiet."""
    logger = logging.getLogger(name)
    if not logger.handlers:
        ch = logging.StreamHandler()
        ch.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(ch)
    logger.setLevel("INFO")
    if quiet:
        logger.setLevel("CRITICAL")
    if debug:
        logger.setLevel("DEBUG")
        logger.debug(f"Debugging enabled for {name}")
    return logger


def check_nonnegative(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value) or value < 0:
            raise InvalidSpecError(f"{name} must be finite and >= 0: {value}")


def freeze(arr: np.ndarray) -> np.ndarray:
    """Return a read-only copy of an array held by a frozen dataclass."""
    out = np.array(arr, copy=True)
    out.setflags(write=False)
    return out
