"""Monte Carlo walk estimator for components of x = (1 - gamma P)^{-1} b.

Component I0 of the truncated series is estimated as the mean over shots of
sum_{s=0}^{c} gamma^s b[I_s] along sampled walks starting at I0 (the s = 0
term counts b[I0] before any step, so each shot takes exactly c steps).

Under noise a sampled transition can land on a structurally zero entry of P;
such an invalid step biases the estimate beyond sampling error. Unmitigated
runs accept and count these. Mitigated runs check each sample against the
structural-zero mask (an O(1) lookup) and re-sample from the same node until
valid, counting retries; exhausting the retry budget raises rather than
accepting a biased sample.

Per-(component, shot) seeds derive from the master seed by counter-based
mixing, so results are independent of execution order.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels, oracle
from .circuit import flip_probabilities
from .model import ProblemInstance, TransitionMatrix
from .noise import NOISELESS, NoiseParams, kernel_noise_probs


class RetryExhaustedError(RuntimeError):
    """Mitigation retry budget exhausted on one step of one walk."""

    def __init__(self, component: int, shot: int, step: int, max_retries: int):
        self.component = component
        self.shot = shot
        self.step = step
        super().__init__(
            f"mitigation retries exhausted ({max_retries}) at step {step} "
            f"of shot {shot}, component {component}"
        )


def truncation_length(gamma: float, epsilon: float) -> int:
    """Walk length for a target sampling error: ceil(log(1/eps)/log(1/gamma))."""
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must be in (0, 1), got {gamma}")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    ratio = math.log(1.0 / epsilon) / math.log(1.0 / gamma)
    return max(1, math.ceil(ratio - 1e-12))


def detect_invalid(P: TransitionMatrix, i: int, j: int) -> bool:
    """True iff the i -> j transition is a structural zero (O(1) mask lookup)."""
    return bool(P.structural_zero_mask[i, j])


@dataclass(frozen=True)
class SolverConfig:
    shots: int
    epsilon: float = 0.01
    c_override: int | None = None
    mitigation: bool = False
    max_retries: int = 1000
    noise: NoiseParams = NOISELESS
    master_seed: int = 0

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError(f"shots must be >= 1, got {self.shots}")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if self.c_override is not None and self.c_override < 1:
            raise ValueError(f"c_override must be >= 1, got {self.c_override}")
        if self.max_retries < 1:
            raise ValueError(f"max_retries must be >= 1, got {self.max_retries}")

    def effective_c(self, gamma: float) -> int:
        if self.c_override is not None:
            return self.c_override
        return truncation_length(gamma, self.epsilon)


@dataclass(frozen=True)
class WalkRecord:
    """One shot: its trajectory and what it contributed to the estimate."""

    start_component: int
    trajectory: tuple[int, ...]
    contribution: float
    invalid_steps: int
    retries: int


@dataclass
class InvalidStepStats:
    total_invalid: int = 0
    total_retries: int = 0
    per_shot_mean: float = 0.0
    by_step_index: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))

    def merge(self, other: "InvalidStepStats") -> None:
        self.total_invalid += other.total_invalid
        self.total_retries += other.total_retries
        if self.by_step_index.size == 0:
            self.by_step_index = other.by_step_index.copy()
        else:
            self.by_step_index += other.by_step_index


@dataclass(frozen=True)
class SolveReport:
    estimate: np.ndarray
    exact: np.ndarray
    relative_error: float
    invalid_stats: InvalidStepStats
    config: SolverConfig
    wall_time_s: float


def _kernel_args(instance: ProblemInstance, config: SolverConfig):
    c = config.effective_c(instance.gamma)
    p_flip = flip_probabilities(instance.angles)
    zero_x = np.ascontiguousarray(instance.P.zero_profile(), dtype=np.uint8)
    b = np.ascontiguousarray(instance.b, dtype=np.float64)
    probs = kernel_noise_probs(config.noise)
    return c, b, p_flip, zero_x, config.noise.enabled, probs


def run_walk(I0, instance: ProblemInstance, config: SolverConfig, rng) -> WalkRecord:
    """Run a single recorded walk from component I0, advancing `rng`."""
    if not 0 <= I0 < instance.dim:
        raise ValueError(f"component {I0} out of range")
    c, b, p_flip, zero_x, noisy, probs = _kernel_args(instance, config)
    contrib, invalid, retries, status, traj, rng.state = kernels.walk_once(
        I0, c, instance.gamma, b, p_flip, zero_x, config.mitigation,
        config.max_retries, noisy, probs, rng.state,
    )
    if status:
        raise RetryExhaustedError(I0, 0, status, config.max_retries)
    return WalkRecord(
        start_component=int(I0),
        trajectory=tuple(int(v) for v in traj),
        contribution=float(contrib),
        invalid_steps=int(invalid),
        retries=int(retries),
    )


def estimate_component(
    I0, instance: ProblemInstance, config: SolverConfig
) -> tuple[float, InvalidStepStats]:
    """Estimate component I0 as the mean over config.shots walk contributions."""
    if not 0 <= I0 < instance.dim:
        raise ValueError(f"component {I0} out of range")
    c, b, p_flip, zero_x, noisy, probs = _kernel_args(instance, config)
    mean, invalid, retries, err_shot, err_step, by_step = kernels.estimate_component(
        I0, config.shots, config.master_seed, c, instance.gamma, b, p_flip,
        zero_x, config.mitigation, config.max_retries, noisy, probs,
    )
    if err_shot >= 0:
        raise RetryExhaustedError(I0, err_shot, err_step, config.max_retries)
    stats = InvalidStepStats(
        total_invalid=int(invalid),
        total_retries=int(retries),
        per_shot_mean=(int(invalid) + int(retries)) / config.shots,
        by_step_index=np.asarray(by_step, dtype=np.int64),
    )
    return float(mean), stats


def solve(instance: ProblemInstance, config: SolverConfig) -> SolveReport:
    """Estimate every component, then compare against the direct solve."""
    t0 = time.perf_counter()
    N = instance.dim
    estimate = np.empty(N)
    stats = InvalidStepStats()
    for I0 in range(N):
        estimate[I0], comp_stats = estimate_component(I0, instance, config)
        stats.merge(comp_stats)
    stats.per_shot_mean = (stats.total_invalid + stats.total_retries) / (
        N * config.shots
    )
    exact = oracle.exact_solve(instance).x
    rel = oracle.relative_error(estimate, exact)
    estimate.setflags(write=False)
    return SolveReport(
        estimate=estimate,
        exact=exact,
        relative_error=rel,
        invalid_stats=stats,
        config=config,
        wall_time_s=time.perf_counter() - t0,
    )


def report_text(report: SolveReport, instance: ProblemInstance) -> str:
    """Plain-text record of a solve; floats use repr for exact round-trip."""
    cfg = report.config
    lines = [
        "qrwalk-report v1",
        f"n = {instance.n}",
        f"k = {instance.k}",
        f"sparsity_level = {instance.sparsity_level!r}",
        f"gamma = {instance.gamma!r}",
        f"instance_seed = {instance.seed}",
        f"shots = {cfg.shots}",
        f"epsilon = {cfg.epsilon!r}",
        f"c = {cfg.effective_c(instance.gamma)}",
        f"mitigation = {'on' if cfg.mitigation else 'off'}",
        f"noise_enabled = {'true' if cfg.noise.enabled else 'false'}",
        f"master_seed = {cfg.master_seed}",
        f"relative_error = {report.relative_error!r}",
        f"total_invalid = {report.invalid_stats.total_invalid}",
        f"total_retries = {report.invalid_stats.total_retries}",
        f"per_shot_mean_invalid = {report.invalid_stats.per_shot_mean!r}",
        "estimate = " + ",".join(repr(v) for v in report.estimate.tolist()),
        "exact = " + ",".join(repr(v) for v in report.exact.tolist()),
        f"wall_time_s = {report.wall_time_s!r}",
    ]
    return "\n".join(lines) + "\n"
