from .basic import (
    EXIT_ASSERTION,
    EXIT_CONFIG,
    EXIT_CONVERGENCE,
    EXIT_PASS,
    RunOutcome,
    classify_exception,
    execute,
    get_output_dir,
    load_experiment_config,
)
from .report import emit_report

__all__ = [
    "EXIT_PASS",
    "EXIT_ASSERTION",
    "EXIT_CONFIG",
    "EXIT_CONVERGENCE",
    "RunOutcome",
    "classify_exception",
    "execute",
    "get_output_dir",
    "load_experiment_config",
    "emit_report",
]
