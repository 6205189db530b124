"""
Transition-density histograms and the empirical density-versus-action check.
"""

from .histogram import DensityHistogram, default_box, estimate_density
from .sheu import ExcludedProbe, ProbeResult, SheuReport, default_probes, sheu_sandwich_check

__all__ = [
    "DensityHistogram",
    "ExcludedProbe",
    "ProbeResult",
    "SheuReport",
    "default_box",
    "default_probes",
    "estimate_density",
    "sheu_sandwich_check",
]
