"""Reference computations the Monte Carlo estimator is checked against.

Three independent routes to the solution: a dense direct solve of
(1 - gamma P) x = b, the truncated power series evaluated by repeated
matrix-vector products, and an exhaustive enumeration of every length-c walk
path. The first provides relative-error denominators; the agreement of the
last two is the core cross-check of the estimator's expectation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ProblemInstance

_RESIDUAL_RTOL = 1e-10
_ENUM_MAX_DIM = 8
_ENUM_MAX_STEPS = 8


@dataclass(frozen=True)
class ExactSolution:
    x: np.ndarray
    residual_norm: float


def exact_solve(instance: ProblemInstance) -> ExactSolution:
    """Direct dense solve via LU with partial pivoting (LAPACK gesv)."""
    A = instance.system_matrix()
    b = instance.b
    x = np.linalg.solve(A, b)
    residual = float(np.linalg.norm(A @ x - b))
    if residual > _RESIDUAL_RTOL * float(np.linalg.norm(b)):
        raise ArithmeticError(
            f"direct solve residual {residual:.3e} exceeds tolerance"
        )
    x.setflags(write=False)
    return ExactSolution(x=x, residual_norm=residual)


def neumann_truncated(instance: ProblemInstance, c: int) -> np.ndarray:
    """Sum_{s=0}^{c} gamma^s P^s b by iterated matrix-vector products."""
    if c < 0:
        raise ValueError(f"c must be nonnegative, got {c}")
    P = instance.P.entries
    gamma = instance.gamma
    term = instance.b.copy()
    x = instance.b.copy()
    for _ in range(c):
        term = gamma * (P @ term)
        x += term
    return x


def enumerate_walk_expectation(instance: ProblemInstance, I0: int, c: int) -> float:
    """Exact expectation of the walk estimator by exhaustive path enumeration.

    Every length-c path from I0 is carried explicitly with its probability and
    accumulated sum of gamma^s b[I_s]; no matrix-power shortcut is taken, so
    this is an independent check of the truncated series. Work and memory grow
    as N^c (about 400 MB at the N=8, c=8 guard corner).
    """
    N = instance.dim
    if N > _ENUM_MAX_DIM or not 0 <= c <= _ENUM_MAX_STEPS:
        raise ValueError(
            f"enumeration guard: need N <= {_ENUM_MAX_DIM} and "
            f"0 <= c <= {_ENUM_MAX_STEPS}, got N={N}, c={c}"
        )
    if not 0 <= I0 < N:
        raise ValueError(f"component {I0} out of range")
    P = instance.P.entries
    b = instance.b
    gamma = instance.gamma
    probs = np.array([1.0])
    acc = np.array([b[I0]])
    last = np.array([I0], dtype=np.uint8)
    all_nodes = np.arange(N, dtype=np.uint8)
    gp = 1.0
    for _ in range(c):
        gp *= gamma
        probs = (probs[:, None] * P[last, :]).ravel()
        acc = (acc[:, None] + gp * b[None, :]).ravel()
        last = np.broadcast_to(all_nodes, (last.size, N)).ravel()
    return float(probs @ acc)


def relative_error(estimate: np.ndarray, exact: np.ndarray) -> float:
    """L2 norm of the difference divided by the L2 norm of the exact solution."""
    estimate = np.asarray(estimate, dtype=float)
    exact = np.asarray(exact, dtype=float)
    if estimate.shape != exact.shape:
        raise ValueError(
            f"shape mismatch: {estimate.shape} vs {exact.shape}"
        )
    denom = float(np.linalg.norm(exact))
    if denom == 0.0:
        raise ValueError("relative error undefined for a zero exact solution")
    return float(np.linalg.norm(estimate - exact)) / denom
