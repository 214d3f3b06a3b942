"""Point-based planning for partially observable semi-Markov decision processes."""

from ._chronos import (
    ImpossibleEvidence,
    InitializationError,
    Model,
    ParseError,
    SampleBank,
    SolveResult,
    ValueFunction,
    bus_problem,
    collect,
    constant_value_function,
    evaluate,
    initial_value_function,
    load_model,
    maintenance_problem,
    solve,
    stage_rewards,
    update_with_time,
    update_without_time,
)

__all__ = [
    "ImpossibleEvidence",
    "InitializationError",
    "Model",
    "ParseError",
    "SampleBank",
    "SolveResult",
    "ValueFunction",
    "bus_problem",
    "collect",
    "constant_value_function",
    "evaluate",
    "initial_value_function",
    "load_model",
    "maintenance_problem",
    "solve",
    "stage_rewards",
    "update_with_time",
    "update_without_time",
]
