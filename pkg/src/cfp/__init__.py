"""Colourful feasibility: solvers, generators, oracle and benchmarks.

Given d+1 colour classes of d+1 points in R^d whose convex hulls all
contain the origin, find one point per colour whose simplex contains the
origin. The package ships seven pivoting solvers, six seeded instance
generators, a brute-force depth oracle and a benchmarking CLI.
"""

__version__ = "0.1.0"

from .core import (
    BasisCertificate,
    ColourConfiguration,
    ColourfulSimplex,
    check_core,
    load_configuration,
    normalize_configuration,
    parse_configuration,
    reduce_to_basis,
    save_configuration,
    write_configuration,
)
from .generators import GeneratorSpec, RngStream, generate
from .oracle import DepthReport, count_containing, expected_a7_iterations
from .solvers import SolveOutcome, SolveStatus, solve

__all__ = [
    "BasisCertificate",
    "ColourConfiguration",
    "ColourfulSimplex",
    "DepthReport",
    "GeneratorSpec",
    "RngStream",
    "SolveOutcome",
    "SolveStatus",
    "__version__",
    "check_core",
    "count_containing",
    "expected_a7_iterations",
    "generate",
    "load_configuration",
    "normalize_configuration",
    "parse_configuration",
    "reduce_to_basis",
    "save_configuration",
    "solve",
    "write_configuration",
]
