"""Adaptive multiresolution ultra-weak DG solver for NLS equations."""

from ._mrdg import (
    Aggregation,
    ElementSet,
    GridMode,
    HierState,
    RunConfig,
    RunReport,
    RunStatus,
    SolverOptions,
    build_set,
    default_config,
    emit_outputs,
    exact,
    initial_state,
    laplacian,
    load_config,
    max_abs,
    orders,
    problem_names,
    project,
    run,
    time_step,
)

__all__ = [name for name in dir() if not name.startswith("_")]
