"""
Euler-Maruyama Monte Carlo for neural SDEs: readout estimates, V_pi(F) and the 1/N rate.
"""

from .maurey import (
    LinearizedGaussian,
    MaureyResult,
    MaureyRow,
    flow_second_moment,
    linear_reference,
    linearized_gaussian,
    maurey_rate_experiment,
    vpi_upper_bound,
)
from .rng import derive_generator, derive_seed
from .simulate import (
    BoxSampler,
    GaussianSampler,
    McEstimate,
    NeuralSdeModel,
    Sampler,
    em_endpoint,
    em_endpoints,
    estimate_F,
    estimate_Vpi,
    sample_pi,
    sampler_from_config,
)

__all__ = [
    "BoxSampler",
    "GaussianSampler",
    "LinearizedGaussian",
    "MaureyResult",
    "MaureyRow",
    "McEstimate",
    "NeuralSdeModel",
    "Sampler",
    "derive_generator",
    "derive_seed",
    "em_endpoint",
    "em_endpoints",
    "estimate_F",
    "estimate_Vpi",
    "flow_second_moment",
    "linear_reference",
    "linearized_gaussian",
    "maurey_rate_experiment",
    "sample_pi",
    "sampler_from_config",
    "vpi_upper_bound",
]
