"""
Configuration and logging setup for the quantum filter simulator
"""
import logging
import os
import sys
from functools import lru_cache
from typing import Optional

from dotenv import load_dotenv


class SimulatorConfig:
    def __init__(self):
        load_dotenv()

        # Fock space settings
        self.photon_cap = self._read_int("FOCK_PHOTON_CAP", 8)
        self.prune_tolerance = self._read_float("FOCK_PRUNE_TOLERANCE", 1e-14)
        if self.photon_cap < 1:
            raise ValueError("FOCK_PHOTON_CAP must be at least 1")
        if not 0.0 <= self.prune_tolerance < 1e-6:
            raise ValueError("FOCK_PRUNE_TOLERANCE must be in [0, 1e-6)")

        # Detector defaults
        self.eta = self._read_probability("FILTER_ETA", 0.88)
        self.dark = self._read_probability("FILTER_DARK", 0.0)
        self.dark_rate_cps = self._read_float("FILTER_DARK_RATE_CPS", 1e4)
        self.window_s = self._read_float("FILTER_WINDOW_S", 1e-9)

        # Runtime settings
        self.log_level = os.getenv("LOG_LEVEL", "INFO").upper()
        self.log_file = os.getenv("LOG_FILE") or None
        self.sweep_workers = self._read_int("SWEEP_WORKERS", 1)

    @staticmethod
    def _read_int(name: str, default: int) -> int:
        raw = os.getenv(name)
        if raw is None or raw == "":
            return default
        try:
            return int(raw)
        except ValueError as e:
            raise ValueError(f"{name} must be an integer, got {raw!r}") from e

    @staticmethod
    def _read_float(name: str, default: float) -> float:
        raw = os.getenv(name)
        if raw is None or raw == "":
            return default
        try:
            return float(raw)
        except ValueError as e:
            raise ValueError(f"{name} must be a number, got {raw!r}") from e

    @classmethod
    def _read_probability(cls, name: str, default: float) -> float:
        value = cls._read_float(name, default)
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {value}")
        return value


@lru_cache(maxsize=1)
def get_config() -> SimulatorConfig:
    """Settings shared by the whole process; call get_config.cache_clear() to re-read"""
    return SimulatorConfig()


def setup_logging(level: Optional[str] = None, log_file: Optional[str] = None) -> None:
    """Configure the root logger for an entry point (CLI, API, dashboard)"""
    config = get_config()
    handlers = [logging.StreamHandler(sys.stderr)]
    log_file = log_file or config.log_file
    if log_file:
        handlers.append(logging.FileHandler(log_file))

    logging.basicConfig(
        level=(level or config.log_level).upper(),
        format='%(asctime)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )
