from .default import (
    DEFAULT_CONFIG,
    DEFAULT_SOLVER_CONFIG,
    LOG_LEVELS,
    OUTPUT_DIR_ENV,
    TOLERANCES,
    VERSION,
)

__all__ = [
    "DEFAULT_CONFIG",
    "DEFAULT_SOLVER_CONFIG",
    "LOG_LEVELS",
    "VERSION",
    "TOLERANCES",
    "OUTPUT_DIR_ENV",
]
