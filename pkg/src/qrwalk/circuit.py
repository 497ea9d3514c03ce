"""Single walk-step circuit simulation.

One step prepares n node qubits in the bits of the current node, pairs each
with a coin qubit, applies the coin unitary followed by a CNOT onto the node
qubit, and measures the node register; the measured bits become the next
node. Noise is simulated as a stochastic trajectory: amplitude damping and
pure dephasing per qubit per gate window, a two-qubit depolarizing channel
after each CNOT, and independent classical readout flips.

`step_sample` is the production path and runs on the selected walk kernel.
`step_sample_reference` simulates the literal layered circuit on the full
2n-qubit statevector using the channel operations below; it is slower and
consumes randomness differently, but must agree in distribution, which is
what the test suite checks the kernel against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import CoinAngles, coin_flip_probability
from .noise import NoiseParams, kernel_noise_probs, relaxation_probs
from .rng import WalkRng

# 2x2 complex matrix U(theta, phi, lambda); alias for documentation purposes
CoinUnitary = np.ndarray


@dataclass(frozen=True)
class StepOutcome:
    """Measured result of one step: node index and its bit decomposition."""

    next_node: int
    measured_bits: tuple[int, ...]

    def __post_init__(self):
        enc = sum(bit << l for l, bit in enumerate(self.measured_bits))
        if enc != self.next_node:
            raise ValueError("measured_bits do not encode next_node")


def coin_unitary(theta: float, phi: float, lam: float) -> CoinUnitary:
    """U = [[cos(t/2), -e^{i lam} sin(t/2)], [e^{i phi} sin(t/2), e^{i(lam+phi)} cos(t/2)]]."""
    c = math.cos(0.5 * theta)
    s = math.sin(0.5 * theta)
    return np.array(
        [
            [c, -np.exp(1j * lam) * s],
            [np.exp(1j * phi) * s, np.exp(1j * (lam + phi)) * c],
        ]
    )


def apply_1q_gate(
    state: np.ndarray, n_qubits: int, qubit: int, gate: np.ndarray
) -> np.ndarray:
    """Apply a 2x2 gate to one qubit of a little-endian statevector."""
    s = state.reshape(1 << (n_qubits - qubit - 1), 2, 1 << qubit)
    return np.einsum("ij,hjl->hil", gate, s).reshape(-1)


def apply_cnot(
    state: np.ndarray, n_qubits: int, control: int, target: int
) -> np.ndarray:
    """CNOT as an index permutation on the statevector."""
    idx = np.arange(1 << n_qubits)
    flipped = np.where(((idx >> control) & 1) == 1, idx ^ (1 << target), idx)
    return state[flipped]


def apply_readout_error(bits, p: float, rng: WalkRng) -> tuple[int, ...]:
    """Flip each measured bit independently with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"readout probability must be in [0, 1], got {p}")
    return tuple(int(b) ^ 1 if rng.next_double() < p else int(b) for b in bits)


_PAULIS = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def apply_depolarizing_2q(
    state: np.ndarray,
    n_qubits: int,
    qubits: tuple[int, int],
    p: float,
    rng: WalkRng,
) -> np.ndarray:
    """With probability p apply one of the 15 non-identity two-qubit Paulis,
    chosen uniformly, to the pair; otherwise leave the state unchanged."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing probability must be in [0, 1], got {p}")
    if rng.next_double() >= p:
        return state
    idx = int(rng.next_double() * 15.0) + 1
    pa, pb = idx >> 2, idx & 3
    if pa:
        state = apply_1q_gate(state, n_qubits, qubits[0], _PAULIS[pa])
    if pb:
        state = apply_1q_gate(state, n_qubits, qubits[1], _PAULIS[pb])
    return state


def apply_thermal_relaxation(
    state: np.ndarray,
    n_qubits: int,
    qubit: int,
    duration_ns: float,
    noise: NoiseParams,
    rng: WalkRng,
) -> np.ndarray:
    """One trajectory realization of T1/T2 relaxation over a gate window.

    Amplitude damping with p_amp = 1 - exp(-t/T1) (jump probability scaled by
    the excited population, state renormalized either way), then a phase flip
    with probability p_phi/2, which realizes pure dephasing of strength p_phi.
    """
    if duration_ns <= 0.0:
        raise ValueError(f"duration must be positive, got {duration_ns}")
    p_amp, p_phi = relaxation_probs(duration_ns, noise)
    mask = (np.arange(1 << n_qubits) >> qubit) & 1 == 1
    pop1 = float(np.sum(np.abs(state[mask]) ** 2))
    if rng.next_double() < p_amp * pop1:
        new = np.zeros_like(state)
        new[~mask] = state[mask] / math.sqrt(pop1)
        state = new
    else:
        state = state.copy()
        state[mask] *= math.sqrt(1.0 - p_amp)
        state /= math.sqrt(1.0 - p_amp * pop1)
    if rng.next_double() < 0.5 * p_phi:
        state = state.copy()
        state[mask] *= -1.0
    return state


def flip_probabilities(angles: CoinAngles) -> np.ndarray:
    """Per-coin flip probabilities sin^2(theta/2) as a kernel-ready array."""
    return np.array([coin_flip_probability(t)[1] for t in angles.triplets])


def step_sample(
    current: int, angles: CoinAngles, noise: NoiseParams, rng: WalkRng
) -> StepOutcome:
    """Sample the next node from `current` (production kernel path)."""
    n = angles.n
    if not 0 <= current < (1 << n):
        raise ValueError(f"node {current} out of range for n={n}")
    nxt, rng.state = kernels.step_once(
        current,
        flip_probabilities(angles),
        noise.enabled,
        kernel_noise_probs(noise),
        rng.state,
    )
    return StepOutcome(int(nxt), tuple((int(nxt) >> l) & 1 for l in range(n)))


def step_sample_reference(
    current: int, angles: CoinAngles, noise: NoiseParams, rng: WalkRng
) -> StepOutcome:
    """Sample one step by simulating the layered circuit on 2n qubits.

    Node qubits are 0..n-1 (loaded classically with the bits of `current`),
    coin qubits are n..2n-1. Noise follows the channel operations above:
    node-qubit relaxation during the conditional-X load, coin relaxation
    after each coin unitary, depolarizing plus relaxation around each CNOT,
    relaxation of every qubit during measurement, then readout flips.
    """
    n = angles.n
    if not 0 <= current < (1 << n):
        raise ValueError(f"node {current} out of range for n={n}")
    nq = 2 * n
    state = np.zeros(1 << nq, dtype=complex)
    state[current] = 1.0  # coin qubits |0>, node qubits = bits of current
    noisy = noise.enabled
    if noisy:
        for l in range(n):
            state = apply_thermal_relaxation(
                state, nq, l, noise.time_1q_ns, noise, rng
            )
    for l, (theta, phi, lam) in enumerate(angles.triplets):
        state = apply_1q_gate(state, nq, n + l, coin_unitary(theta, phi, lam))
        if noisy:
            state = apply_thermal_relaxation(
                state, nq, n + l, noise.time_1q_ns, noise, rng
            )
    for l in range(n):
        state = apply_cnot(state, nq, n + l, l)
        if noisy:
            state = apply_depolarizing_2q(
                state, nq, (n + l, l), noise.cnot_error, rng
            )
            state = apply_thermal_relaxation(
                state, nq, n + l, noise.time_2q_ns, noise, rng
            )
            state = apply_thermal_relaxation(
                state, nq, l, noise.time_2q_ns, noise, rng
            )
    if noisy:
        for q in range(nq):
            state = apply_thermal_relaxation(
                state, nq, q, noise.time_measure_ns, noise, rng
            )
    # measure the node register: marginal over the coin qubits
    probs = np.abs(state) ** 2
    node_probs = probs.reshape(1 << n, 1 << n).sum(axis=0)
    u = rng.next_double()
    acc = 0.0
    node = (1 << n) - 1
    for j in range(1 << n):
        acc += node_probs[j]
        if u < acc:
            node = j
            break
    bits = tuple((node >> l) & 1 for l in range(n))
    if noisy:
        bits = apply_readout_error(bits, noise.readout_error, rng)
        node = sum(bit << l for l, bit in enumerate(bits))
    return StepOutcome(int(node), tuple(int(b) for b in bits))
