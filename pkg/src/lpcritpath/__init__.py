"""Critical paths of l_p-penalized and l_p-constrained least squares, 0 < p < 1."""

from .config import DEFAULT, Settings
from .critical import classify_P, classify_Q, criticality_residual, implied_lambda, is_breakpoint
from .model import (
    F_p,
    PathPoint,
    ProblemInstance,
    Support,
    f_lambda,
    grad_F,
    grad_phi,
    hessian_K,
    load_instance,
    ols_solution,
    phi,
    restricted_ols,
)
from .scalar import (
    brute_force_global_P,
    brute_force_global_Q,
    enumerate_orthogonal_critical_points,
    lambda_bar,
    lambda_global_jump,
    scalar_critical_points,
)
from .strategies import (
    Path,
    check_omp_coincidence,
    greedy_path,
    main_path,
    minkowskian_direction,
    omp,
)
from .tracer import enter_coordinate, tangent_direction, trace_segment, verify_tangential_connection

__version__ = "0.1.0"

__all__ = [
    "DEFAULT",
    "F_p",
    "Path",
    "PathPoint",
    "ProblemInstance",
    "Settings",
    "Support",
    "brute_force_global_P",
    "brute_force_global_Q",
    "check_omp_coincidence",
    "classify_P",
    "classify_Q",
    "criticality_residual",
    "enter_coordinate",
    "enumerate_orthogonal_critical_points",
    "f_lambda",
    "grad_F",
    "grad_phi",
    "greedy_path",
    "hessian_K",
    "implied_lambda",
    "is_breakpoint",
    "lambda_bar",
    "lambda_global_jump",
    "load_instance",
    "main_path",
    "minkowskian_direction",
    "ols_solution",
    "omp",
    "phi",
    "restricted_ols",
    "scalar_critical_points",
    "tangent_direction",
    "trace_segment",
    "verify_tangential_connection",
]
