"""Augmented Lagrangian solver with PANOC+ subproblems for constrained
composite optimization ``min f(x) + g(x) s.t. c(x) in D``."""

from .alm import AlmOptions, AlmReport, alm_solve
from .core import NumericalError, OracleError, Problem, eval_q, primal_infeasibility
from .panoc import CompositeProblem, PanocOptions, StepsizeCollapse, panoc_solve

__version__ = "0.1.0"

__all__ = [
    "AlmOptions",
    "AlmReport",
    "CompositeProblem",
    "NumericalError",
    "OracleError",
    "PanocOptions",
    "Problem",
    "StepsizeCollapse",
    "alm_solve",
    "eval_q",
    "panoc_solve",
    "primal_infeasibility",
]
