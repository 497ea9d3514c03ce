"""Hamming-cube walk matrices.

A walk on N = 2^n nodes is defined by n coins. Coin l flips bit l of the
current node with probability sin^2(theta_l / 2), so the single-step
transition probability between two nodes is a product of per-bit stay/flip
factors that depends only on the XOR of the node labels. Setting theta
angles to exactly zero introduces structural zeros and raises the sparsity
of the matrix in steps of 1 - (1/2)^k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import WalkRng

MAX_QUBITS = 8

Triplet = tuple[float, float, float]


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class CoinAngles:
    """The n per-coin angle triplets (theta, phi, lambda), in radians."""

    triplets: tuple[Triplet, ...]

    def __post_init__(self):
        trips = tuple(tuple(float(a) for a in t) for t in self.triplets)
        object.__setattr__(self, "triplets", trips)
        if not 1 <= len(trips) <= MAX_QUBITS:
            raise ValueError(f"coin count must be in 1..{MAX_QUBITS}, got {len(trips)}")
        for t in trips:
            if len(t) != 3:
                raise ValueError("each triplet must be (theta, phi, lambda)")
            for a in t:
                if not -math.pi <= a <= math.pi:
                    raise ValueError(f"angle {a!r} outside [-pi, pi]")

    @property
    def n(self) -> int:
        return len(self.triplets)

    @property
    def thetas(self) -> tuple[float, ...]:
        return tuple(t[0] for t in self.triplets)

    @property
    def zeroed_count(self) -> int:
        """Number of coins whose theta is exactly zero."""
        return sum(1 for t in self.triplets if t[0] == 0.0)


def coin_flip_probability(triplet) -> tuple[float, float]:
    """(p_stay, p_flip) for one coin.

    Exact 0.0 / 1.0 at theta in {0, +-pi} so structural zeros are genuine
    zeros rather than small floats; phi and lambda never enter. p_stay is
    computed as 1 - p_flip so the pair sums to one exactly.
    """
    theta = float(triplet[0])
    if theta == 0.0:
        return 1.0, 0.0
    if abs(theta) == math.pi:
        return 0.0, 1.0
    p_flip = math.sin(0.5 * theta) ** 2
    return 1.0 - p_flip, p_flip


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic symmetric transition matrix with structural-zero bookkeeping.

    entries[i, j] depends only on i ^ j. structural_zero_mask marks entries
    that are exactly zero by construction (a zero trigonometric factor); those
    entries are stored as exact 0.0, never a small float.
    """

    entries: np.ndarray
    structural_zero_mask: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    def xor_profile(self) -> np.ndarray:
        """Entries as a function of x = i ^ j (equal to row 0)."""
        return self.entries[0]

    def zero_profile(self) -> np.ndarray:
        """Structural-zero mask as a function of x = i ^ j."""
        return self.structural_zero_mask[0]


def build_transition_matrix(angles: CoinAngles) -> TransitionMatrix:
    """Build the N x N matrix of per-bit stay/flip factor products."""
    n = angles.n
    size = 1 << n
    xs = np.arange(size)
    g = np.ones(size)
    zero = np.zeros(size, dtype=bool)
    for l, triplet in enumerate(angles.triplets):
        p_stay, p_flip = coin_flip_probability(triplet)
        theta = triplet[0]
        bit = (xs >> l) & 1
        g = g * np.where(bit == 1, p_flip, p_stay)
        # structural zeros are tracked symbolically, not by thresholding
        if theta == 0.0:
            zero |= bit == 1
        elif abs(theta) == math.pi:
            zero |= bit == 0
    g[zero] = 0.0
    xor = xs[:, None] ^ xs[None, :]
    return TransitionMatrix(_readonly(g[xor]), _readonly(zero[xor]))


def apply_sparsity(angles: CoinAngles, k: int) -> CoinAngles:
    """Zero the theta of the first k coins (phi, lambda unchanged).

    For k >= 1 with generic remaining thetas the resulting matrix sparsity is
    1 - (1/2)^k; k may run up to n, where the matrix becomes the identity.
    """
    if not 0 <= k <= angles.n:
        raise ValueError(f"k must be in 0..{angles.n}, got {k}")
    new = tuple(
        (0.0, t[1], t[2]) if l < k else t for l, t in enumerate(angles.triplets)
    )
    return CoinAngles(new)


def measure_sparsity(P: TransitionMatrix) -> float:
    """Fraction of structurally zero entries."""
    return int(P.structural_zero_mask.sum()) / P.dim**2


@dataclass(frozen=True)
class ProblemInstance:
    """One linear system (1 - gamma P) x = b, with its generating data."""

    angles: CoinAngles
    P: TransitionMatrix
    gamma: float
    b: np.ndarray
    sparsity_level: float
    seed: int
    condition_number: float | None = None

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must be in (0, 1), got {self.gamma}")
        b = np.ascontiguousarray(np.asarray(self.b, dtype=float))
        if b.shape != (self.P.dim,):
            raise ValueError(f"b must have shape ({self.P.dim},), got {b.shape}")
        if np.any(np.abs(b) > 1.0):
            raise ValueError("b components must lie in [-1, 1]")
        object.__setattr__(self, "b", _readonly(b))

    @property
    def n(self) -> int:
        return self.angles.n

    @property
    def dim(self) -> int:
        return self.P.dim

    @property
    def k(self) -> int:
        return self.angles.zeroed_count

    def system_matrix(self) -> np.ndarray:
        return np.eye(self.dim) - self.gamma * self.P.entries


def generate_problem(
    n: int,
    k: int,
    gamma: float,
    seed: int,
    b: np.ndarray | None = None,
) -> ProblemInstance:
    """Draw a random instance: angles uniform in [-pi, pi], b uniform in [-1, 1].

    The stream draws all angles before b and the zeroing happens afterwards,
    so a fixed (n, seed) yields the same base angles and the same b for every
    k; sparsity levels of one sample differ only in the zeroed thetas. Pass b
    to share one right-hand side across instances.
    """
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"n must be in 1..{MAX_QUBITS}, got {n}")
    if not 0 <= k <= n:
        raise ValueError(f"k must be in 0..{n}, got {k}")
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must be in (0, 1), got {gamma}")
    rng = WalkRng(seed)
    trips = tuple(
        (
            rng.uniform(-math.pi, math.pi),
            rng.uniform(-math.pi, math.pi),
            rng.uniform(-math.pi, math.pi),
        )
        for _ in range(n)
    )
    if b is None:
        b = np.array([rng.uniform(-1.0, 1.0) for _ in range(1 << n)])
    angles = apply_sparsity(CoinAngles(trips), k)
    P = build_transition_matrix(angles)
    A = np.eye(1 << n) - gamma * P.entries
    cond = float(np.linalg.cond(A))
    return ProblemInstance(
        angles=angles,
        P=P,
        gamma=gamma,
        b=b,
        sparsity_level=measure_sparsity(P),
        seed=seed,
        condition_number=cond,
    )


def instance_record(inst: ProblemInstance) -> str:
    """Plain-text record of an instance; floats use repr for exact round-trip."""
    angle_txt = "; ".join(
        ",".join(repr(a) for a in t) for t in inst.angles.triplets
    )
    b_txt = ",".join(repr(v) for v in inst.b.tolist())
    cond = "" if inst.condition_number is None else repr(inst.condition_number)
    lines = [
        "qrwalk-instance v1",
        f"n = {inst.n}",
        f"k = {inst.k}",
        f"gamma = {inst.gamma!r}",
        f"seed = {inst.seed}",
        f"angles = {angle_txt}",
        f"b = {b_txt}",
        f"condition_number = {cond}",
    ]
    return "\n".join(lines) + "\n"


def parse_instance_record(text: str) -> ProblemInstance:
    """Rebuild an instance from its record; P is regenerated bit-exactly."""
    lines = [ln.strip() for ln in text.strip().splitlines()]
    if not lines or lines[0] != "qrwalk-instance v1":
        raise ValueError("not a qrwalk instance record")
    fields: dict[str, str] = {}
    for ln in lines[1:]:
        if not ln or ln.startswith("#"):
            continue
        key, _, value = ln.partition("=")
        fields[key.strip()] = value.strip()
    try:
        k = int(fields["k"])
        gamma = float(fields["gamma"])
        seed = int(fields["seed"])
        trips = tuple(
            tuple(float(a) for a in part.split(","))
            for part in fields["angles"].split(";")
        )
        b = np.array([float(v) for v in fields["b"].split(",")])
    except KeyError as exc:
        raise ValueError(f"instance record missing field {exc}") from exc
    angles = CoinAngles(trips)
    if int(fields["n"]) != angles.n:
        raise ValueError("instance record n does not match angle count")
    if angles.zeroed_count != k:
        raise ValueError("instance record k does not match zeroed thetas")
    cond_txt = fields.get("condition_number", "")
    cond = float(cond_txt) if cond_txt else None
    P = build_transition_matrix(angles)
    return ProblemInstance(
        angles=angles,
        P=P,
        gamma=gamma,
        b=b,
        sparsity_level=measure_sparsity(P),
        seed=seed,
        condition_number=cond,
    )
