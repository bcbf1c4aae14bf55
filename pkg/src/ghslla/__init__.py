"""MAP estimation of sparse precision matrices under the graphical horseshoe penalty."""

__version__ = "0.1.0"

from .exceptions import DegeneracyError, DomainError, InputError
from .linalg import gaussian_nll, read_csv_matrix, sample_scatter, write_csv_matrix
from .metrics import EvaluationReport, evaluate, frobenius_error, steins_loss, support_metrics
from .penalty import PenaltyConfig, pen_deriv, pen_deriv_bounds, pen_value
from .simgen import StructureSpec, generate_precision, sample_gaussian
from .solver import SolverConfig, lla_solve, multistart_estimate
from .tuning import CVConfig, cv_select

__all__ = [
    "CVConfig",
    "DegeneracyError",
    "DomainError",
    "EvaluationReport",
    "InputError",
    "PenaltyConfig",
    "SolverConfig",
    "StructureSpec",
    "cv_select",
    "evaluate",
    "frobenius_error",
    "gaussian_nll",
    "generate_precision",
    "lla_solve",
    "multistart_estimate",
    "pen_deriv",
    "pen_deriv_bounds",
    "pen_value",
    "read_csv_matrix",
    "sample_gaussian",
    "sample_scatter",
    "steins_loss",
    "support_metrics",
    "write_csv_matrix",
]
