"""Exact and asymptotic lower tails of last-passage percolation with geometric weights."""

from .core import DomainError, ModelParams, ScalingConstants, md_coordinate, scaling_constants
from .endpoint import EndpointData, solve_endpoint
from .toeplitz import DistributionTable, SymbolSpec, build_table, log_cdf, y21

__all__ = [
    "DomainError", "ModelParams", "ScalingConstants", "md_coordinate", "scaling_constants",
    "EndpointData", "solve_endpoint",
    "DistributionTable", "SymbolSpec", "build_table", "log_cdf", "y21",
]
__version__ = "0.1.0"
