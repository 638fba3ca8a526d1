"""Benchmark problems, seeded generators and the portfolio file format."""

from .io import InstanceFormatError, format_portfolio, read_portfolio_file, write_portfolio_file
from .matrix_completion import (
    MatrixCompletionInstance,
    gen_matrix_completion,
    matrix_completion_problem,
    random_start,
)
from .portfolio import PortfolioInstance, feasibility_probe, gen_portfolio, portfolio_problem
from .rng import SplitMix64, derive_seed
from .rosenbrock import rosenbrock_problem

__all__ = [
    "InstanceFormatError",
    "MatrixCompletionInstance",
    "PortfolioInstance",
    "SplitMix64",
    "derive_seed",
    "feasibility_probe",
    "format_portfolio",
    "gen_matrix_completion",
    "gen_portfolio",
    "matrix_completion_problem",
    "portfolio_problem",
    "random_start",
    "read_portfolio_file",
    "rosenbrock_problem",
    "write_portfolio_file",
]
