"""
Control-affine systems, the built-in model families and drift-regularity quantities.
"""

from .families import (
    SIGMOIDS,
    LinearParams,
    RnnParams,
    build_expression_system,
    build_linear_system,
    build_rnn_system,
    build_system,
    get_sigmoid,
)
from .regularity import (
    certified_M,
    check_jacobian,
    estimate_lipschitz,
    estimate_M,
    gershgorin_M_bound,
    gershgorin_M_bound_uniform,
    matrix_measure,
    network_constants,
    spectral_norm,
    symmetric_eigenvalues,
    validate_ellipticity,
)
from .system import ControlAffineSystem, central_difference_jacobian

__all__ = [
    "SIGMOIDS",
    "ControlAffineSystem",
    "LinearParams",
    "RnnParams",
    "build_expression_system",
    "build_linear_system",
    "build_rnn_system",
    "build_system",
    "central_difference_jacobian",
    "certified_M",
    "check_jacobian",
    "estimate_M",
    "estimate_lipschitz",
    "gershgorin_M_bound",
    "gershgorin_M_bound_uniform",
    "get_sigmoid",
    "matrix_measure",
    "network_constants",
    "spectral_norm",
    "symmetric_eigenvalues",
    "validate_ellipticity",
]
