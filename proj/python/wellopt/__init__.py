"""Joint well placement and control optimization.

Thin wrapper over the C++ core: run experiment configs, re-simulate solutions, and drive the
optimizers on plain Python objectives.
"""

from ._wellopt import (
    ConfigError,
    WelloptError,
    evaluate,
    halton,
    latin_hypercube,
    optimize,
    ortho_directions,
    run,
    simulate_solution,
    validate,
)

__all__ = [
    "ConfigError",
    "WelloptError",
    "evaluate",
    "halton",
    "latin_hypercube",
    "optimize",
    "ortho_directions",
    "run",
    "simulate_solution",
    "validate",
]
