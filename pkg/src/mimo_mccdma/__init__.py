"""Link-level simulator for a 2x3 MIMO-MC-CDMA system with rate-1/2 convolutional coding."""

from .config import parse_config, serialize_config
from .link import BerRecord, LinkConfig, run_sweep, run_trial, simulate_point

__all__ = ["LinkConfig", "BerRecord", "run_trial", "simulate_point", "run_sweep", "parse_config", "serialize_config"]
__version__ = "0.1.0"
