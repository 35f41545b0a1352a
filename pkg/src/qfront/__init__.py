"""Quantization-aware fronthaul for cell-free massive MIMO-OFDM uplink.

Simulates one access point with low-resolution ADCs, reconstructs the clean
time-domain signal with ADMM, and compares fronthaul NMSE of the
reconstruction against directly quantizing the ADC output.
"""

from .admm import AdmmConfig, AdmmResult, GramFactor, run as run_admm
from .config import ExperimentConfig, load_config, parse_config
from .pipeline import RealizationResult, aggregate_nmse, run_realization
from .quant import ScalarQuantizer, design_lloyd_max, gaussian_lloyd_max
from .signal import make_constellation
from .sweep import run_sweep

__version__ = "0.1.0"

__all__ = [
    "AdmmConfig", "AdmmResult", "ExperimentConfig", "GramFactor", "RealizationResult",
    "ScalarQuantizer", "aggregate_nmse", "design_lloyd_max", "gaussian_lloyd_max",
    "load_config", "make_constellation", "parse_config", "run_admm", "run_realization",
    "run_sweep",
]
