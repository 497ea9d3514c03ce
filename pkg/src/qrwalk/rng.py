"""Deterministic randomness for the whole package.

SplitMix64 is the single generator used everywhere: it is tiny, passes the
usual statistical batteries for this kind of Monte Carlo work, and can be
implemented bit-identically in Python and C, which is what lets the pure and
compiled walk kernels produce the same streams. numpy generators are not used
so that results do not depend on numpy's version-specific stream guarantees.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX_A = 0xBF58476D1CE4E5B9
MIX_B = 0x94D049BB133111EB

_INV_2_53 = 2.0**-53


def mix64(z: int) -> int:
    """SplitMix64 finalizer; a bijective avalanche on 64-bit words."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX_A) & MASK64
    z = ((z ^ (z >> 27)) * MIX_B) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, *values: int) -> int:
    """Mix a master seed with an ordered tuple of nonnegative identifiers.

    Counter-based: the result depends only on (master, values), never on call
    order, so seeds for (component, shot) pairs are stable under any execution
    schedule.
    """
    h = mix64((master + GOLDEN) & MASK64)
    for v in values:
        # h is scaled, v is avalanched: absorption is position-asymmetric
        h = mix64((h * MIX_A + mix64((v + GOLDEN) & MASK64) + GOLDEN) & MASK64)
    return h


class WalkRng:
    """A SplitMix64 stream holding its 64-bit state.

    The state advances by the golden-ratio increment once per draw, so a
    stream can be handed to the compiled kernel and back without losing
    position.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * MIX_A) & MASK64
        z = ((z ^ (z >> 27)) * MIX_B) & MASK64
        return z ^ (z >> 31)

    def next_double(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * _INV_2_53

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.next_double()
