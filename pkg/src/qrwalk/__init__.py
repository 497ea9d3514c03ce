"""Monte Carlo random-walk linear solver on Hamming-cube matrices.

Solves (1 - gamma P) x = b for row-stochastic P built from per-bit coins, by
sampling truncated walk paths. Includes trajectory-level simulation of
quantum noise channels, detection statistics for structurally-forbidden
(invalid) transitions, a detect-and-retry mitigation mode, and a sweep
harness with reproducible CSV output and SVG plots.
"""

from .circuit import (
    StepOutcome,
    apply_depolarizing_2q,
    apply_readout_error,
    apply_thermal_relaxation,
    coin_unitary,
    step_sample,
    step_sample_reference,
)
from .harness import DEFAULT_SHOT_GRID, ExperimentPlan, aggregate, run_plan
from .kernels import BACKEND as kernel_backend
from .model import (
    CoinAngles,
    ProblemInstance,
    TransitionMatrix,
    apply_sparsity,
    build_transition_matrix,
    coin_flip_probability,
    generate_problem,
    instance_record,
    measure_sparsity,
    parse_instance_record,
)
from .noise import NOISE_PRESETS, NOISELESS, NoiseParams, noise_backend
from .oracle import (
    ExactSolution,
    enumerate_walk_expectation,
    exact_solve,
    neumann_truncated,
    relative_error,
)
from .rng import WalkRng, derive_seed
from .solver import (
    InvalidStepStats,
    RetryExhaustedError,
    SolveReport,
    SolverConfig,
    WalkRecord,
    detect_invalid,
    run_walk,
    solve,
    truncation_length,
)

__version__ = "0.1.0"

__all__ = [
    "CoinAngles",
    "DEFAULT_SHOT_GRID",
    "ExactSolution",
    "ExperimentPlan",
    "InvalidStepStats",
    "NOISELESS",
    "NOISE_PRESETS",
    "NoiseParams",
    "ProblemInstance",
    "RetryExhaustedError",
    "SolveReport",
    "SolverConfig",
    "StepOutcome",
    "TransitionMatrix",
    "WalkRecord",
    "WalkRng",
    "aggregate",
    "apply_depolarizing_2q",
    "apply_readout_error",
    "apply_sparsity",
    "apply_thermal_relaxation",
    "build_transition_matrix",
    "coin_flip_probability",
    "coin_unitary",
    "derive_seed",
    "detect_invalid",
    "enumerate_walk_expectation",
    "exact_solve",
    "generate_problem",
    "instance_record",
    "kernel_backend",
    "measure_sparsity",
    "neumann_truncated",
    "noise_backend",
    "parse_instance_record",
    "relative_error",
    "run_plan",
    "run_walk",
    "solve",
    "step_sample",
    "step_sample_reference",
    "truncation_length",
]
