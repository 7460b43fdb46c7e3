"""Inexact proximal augmented Lagrangian method for nonconvex conic programs."""

from ._core import (
    AugLagEval,
    ConeKind,
    ConeSpec,
    InputError,
    NumericalError,
    ParseError,
    PrimitiveCone,
    Problem,
    ReferenceSolution,
    RegistryIntegrityError,
    SubproblemResult,
    Trace,
    TraceRecord,
    UnknownProblemError,
    aug_lagrangian,
    check_error_bound,
    check_quadratic_growth,
    check_step_error_bound,
    dist_sq,
    eps_rule,
    estimate_rates,
    estimate_rates_from,
    kkt_residual,
    lagrangian_grad_x,
    load_problem_file,
    multiplier_update,
    normal_cone_gap,
    parse_problem,
    proj_generalized_jacobian,
    project,
    registry_get,
    registry_names,
    run_alm,
    run_cli,
    run_palm,
    solve_subproblem,
)

__all__ = [name for name in dir() if not name.startswith("_")]
