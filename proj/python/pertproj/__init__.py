"""Perturbed projection methods for convex feasibility and level-set optimization."""

from ._core import (
    ConfigError,
    Disk,
    DoseModel,
    PhantomConfig,
    build_linear_problem,
    build_phantom,
    condition_c,
    dose_function,
    extend_linear_problem,
    heavy_ball_direction,
    imrt_values,
    normalized_inner_product,
    reproduce_table,
    run_imrt_level_set,
    run_spec,
    solve_linear,
    surrogate_direction,
)

__all__ = [
    "ConfigError",
    "Disk",
    "DoseModel",
    "PhantomConfig",
    "build_linear_problem",
    "build_phantom",
    "condition_c",
    "dose_function",
    "extend_linear_problem",
    "heavy_ball_direction",
    "imrt_values",
    "normalized_inner_product",
    "reproduce_table",
    "run_imrt_level_set",
    "run_spec",
    "solve_linear",
    "surrogate_direction",
]
