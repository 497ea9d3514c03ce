"""Pure-Python walk kernel.

This module and _walk_cy.pyx are twins: every floating-point operation is
performed in the same order on IEEE doubles and every random draw comes from
the same SplitMix64 positions, so both backends produce bit-identical
trajectories, estimates and sweep rows for the same seeds. Keep the two files
in lockstep when changing either.

One noisy step per coin is a stochastic trajectory over the coin/node qubit
pair. Because the only superposition-creating gate (the coin unitary) acts on
a fresh |0> coin and everything after it is a permutation, scaling or
population transfer, tracking the four basis-state populations m[2*coin+node]
is exact; phases can never reach the measured node-bit statistics.

Per-coin draw order (noisy): node relax during init load, coin relax after
the coin unitary, depolarizing decision (plus one draw for the Pauli index
when it fires), coin+node relax for the CNOT window, coin+node relax for the
measurement window, node-bit measurement, readout flip. Noiseless steps draw
once per coin.
"""

from __future__ import annotations

BACKEND_NAME = "python"

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB
_INV53 = 2.0**-53


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MIX_A) & _MASK
    z = ((z ^ (z >> 27)) * _MIX_B) & _MASK
    return z ^ (z >> 31)


def derive_seed2(master: int, a: int, b: int) -> int:
    """Two-value counter mixing; equals rng.derive_seed(master, a, b)."""
    h = _mix((master + _GOLDEN) & _MASK)
    for v in (a, b):
        h = _mix((h * _MIX_A + _mix((v + _GOLDEN) & _MASK) + _GOLDEN) & _MASK)
    return h


def stream_doubles(seed: int, count: int) -> list[float]:
    """First `count` uniform doubles of the stream with the given seed."""
    state = seed & _MASK
    out = []
    for _ in range(count):
        state = (state + _GOLDEN) & _MASK
        z = state
        z = ((z ^ (z >> 30)) * _MIX_A) & _MASK
        z = ((z ^ (z >> 27)) * _MIX_B) & _MASK
        out.append(((z ^ (z >> 31)) >> 11) * _INV53)
    return out


def _relax_node(m0, m1, m2, m3, p_amp, state):
    """Amplitude damping on the node qubit of one coin block (one draw)."""
    state = (state + _GOLDEN) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * _MIX_A) & _MASK
    z = ((z ^ (z >> 27)) * _MIX_B) & _MASK
    u = ((z ^ (z >> 31)) >> 11) * _INV53
    pop1 = m1 + m3
    if u < p_amp * pop1:
        m0 = m1 / pop1
        m2 = m3 / pop1
        m1 = 0.0
        m3 = 0.0
    else:
        s = 1.0 - p_amp
        d = 1.0 - p_amp * pop1
        m1 = m1 * s / d
        m3 = m3 * s / d
        m0 = m0 / d
        m2 = m2 / d
    return m0, m1, m2, m3, state


def _relax_coin(m0, m1, m2, m3, p_amp, state):
    """Amplitude damping on the coin qubit of one coin block (one draw)."""
    state = (state + _GOLDEN) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * _MIX_A) & _MASK
    z = ((z ^ (z >> 27)) * _MIX_B) & _MASK
    u = ((z ^ (z >> 31)) >> 11) * _INV53
    pop1 = m2 + m3
    if u < p_amp * pop1:
        m0 = m2 / pop1
        m1 = m3 / pop1
        m2 = 0.0
        m3 = 0.0
    else:
        s = 1.0 - p_amp
        d = 1.0 - p_amp * pop1
        m2 = m2 * s / d
        m3 = m3 * s / d
        m0 = m0 / d
        m1 = m1 / d
    return m0, m1, m2, m3, state


def _step_noisy(cur, n, p_flip, probs, state):
    p_amp_1q = probs[0]
    p_amp_2q = probs[1]
    p_amp_meas = probs[2]
    p_cnot = probs[3]
    p_read = probs[4]
    nxt = 0
    for l in range(n):
        if (cur >> l) & 1:
            m0 = 0.0
            m1 = 1.0
        else:
            m0 = 1.0
            m1 = 0.0
        m2 = 0.0
        m3 = 0.0
        m0, m1, m2, m3, state = _relax_node(m0, m1, m2, m3, p_amp_1q, state)
        # coin unitary from |0>: p_flip of the population moves to coin=1
        f = p_flip[l]
        stay = 1.0 - f
        m2 = f * m0
        m3 = f * m1
        m0 = stay * m0
        m1 = stay * m1
        m0, m1, m2, m3, state = _relax_coin(m0, m1, m2, m3, p_amp_1q, state)
        # CNOT coin -> node
        m2, m3 = m3, m2
        # two-qubit depolarizing on the (coin, node) pair
        state = (state + _GOLDEN) & _MASK
        z = state
        z = ((z ^ (z >> 30)) * _MIX_A) & _MASK
        z = ((z ^ (z >> 27)) * _MIX_B) & _MASK
        u = ((z ^ (z >> 31)) >> 11) * _INV53
        if u < p_cnot:
            state = (state + _GOLDEN) & _MASK
            z = state
            z = ((z ^ (z >> 30)) * _MIX_A) & _MASK
            z = ((z ^ (z >> 27)) * _MIX_B) & _MASK
            v = ((z ^ (z >> 31)) >> 11) * _INV53
            idx = int(v * 15.0) + 1
            pa = idx >> 2
            pb = idx & 3
            if pa == 1 or pa == 2:  # X or Y on the coin
                m0, m2 = m2, m0
                m1, m3 = m3, m1
            if pb == 1 or pb == 2:  # X or Y on the node
                m0, m1 = m1, m0
                m2, m3 = m3, m2
        m0, m1, m2, m3, state = _relax_coin(m0, m1, m2, m3, p_amp_2q, state)
        m0, m1, m2, m3, state = _relax_node(m0, m1, m2, m3, p_amp_2q, state)
        m0, m1, m2, m3, state = _relax_coin(m0, m1, m2, m3, p_amp_meas, state)
        m0, m1, m2, m3, state = _relax_node(m0, m1, m2, m3, p_amp_meas, state)
        # measure the node bit, then the classical readout flip
        p1 = m1 + m3
        state = (state + _GOLDEN) & _MASK
        z = state
        z = ((z ^ (z >> 30)) * _MIX_A) & _MASK
        z = ((z ^ (z >> 27)) * _MIX_B) & _MASK
        u = ((z ^ (z >> 31)) >> 11) * _INV53
        bit = 1 if u < p1 else 0
        state = (state + _GOLDEN) & _MASK
        z = state
        z = ((z ^ (z >> 30)) * _MIX_A) & _MASK
        z = ((z ^ (z >> 27)) * _MIX_B) & _MASK
        u = ((z ^ (z >> 31)) >> 11) * _INV53
        if u < p_read:
            bit ^= 1
        nxt |= bit << l
    return nxt, state


def _step_noiseless(cur, n, p_flip, state):
    nxt = cur
    for l in range(n):
        state = (state + _GOLDEN) & _MASK
        z = state
        z = ((z ^ (z >> 30)) * _MIX_A) & _MASK
        z = ((z ^ (z >> 27)) * _MIX_B) & _MASK
        u = ((z ^ (z >> 31)) >> 11) * _INV53
        if u < p_flip[l]:
            nxt ^= 1 << l
    return nxt, state


def step_once(cur, p_flip, noisy, probs, state):
    """Sample one step from node `cur`; returns (next_node, new_state)."""
    pf = [float(v) for v in p_flip]
    n = len(pf)
    if noisy:
        return _step_noisy(cur, n, pf, [float(v) for v in probs], state)
    return _step_noiseless(cur, n, pf, state)


def _walk(
    I0, c, gamma, b, n, pf, zx, mitigate, max_retries, noisy, probs, state,
    by_step, traj,
):
    cur = I0
    contrib = b[I0]
    gp = 1.0
    invalid = 0
    retries = 0
    if traj is not None:
        traj.append(cur)
    for s in range(1, c + 1):
        if noisy:
            nxt, state = _step_noisy(cur, n, pf, probs, state)
        else:
            nxt, state = _step_noiseless(cur, n, pf, state)
        if zx[cur ^ nxt]:
            if mitigate:
                tries = 0
                while zx[cur ^ nxt]:
                    if tries == max_retries:
                        return contrib, invalid, retries, s, state
                    tries += 1
                    retries += 1
                    by_step[s - 1] += 1
                    if noisy:
                        nxt, state = _step_noisy(cur, n, pf, probs, state)
                    else:
                        nxt, state = _step_noiseless(cur, n, pf, state)
            else:
                invalid += 1
                by_step[s - 1] += 1
        cur = nxt
        gp *= gamma
        contrib += gp * b[cur]
        if traj is not None:
            traj.append(cur)
    return contrib, invalid, retries, 0, state


def walk_once(
    I0, c, gamma, b, p_flip, zero_x, mitigate, max_retries, noisy, probs, state
):
    """Run one walk of c steps from I0.

    Returns (contribution, invalid_steps, retries, status, trajectory, state);
    status is 0 on success or the 1-based step index whose mitigation retries
    were exhausted.
    """
    bl = [float(v) for v in b]
    pf = [float(v) for v in p_flip]
    zx = [int(v) for v in zero_x]
    pr = [float(v) for v in probs]
    by_step = [0] * c
    traj: list[int] = []
    contrib, invalid, retries, status, state = _walk(
        I0, c, float(gamma), bl, len(pf), pf, zx, bool(mitigate),
        int(max_retries), bool(noisy), pr, state, by_step, traj,
    )
    return contrib, invalid, retries, status, traj, state


def estimate_component(
    I0, shots, master_seed, c, gamma, b, p_flip, zero_x, mitigate, max_retries,
    noisy, probs,
):
    """Mean walk contribution over `shots` seeds derived from (master, I0, shot).

    Returns (mean, total_invalid, total_retries, err_shot, err_step, by_step);
    err_shot is -1 on success, otherwise the shot whose retries were exhausted
    at 1-based step err_step.
    """
    bl = [float(v) for v in b]
    pf = [float(v) for v in p_flip]
    zx = [int(v) for v in zero_x]
    pr = [float(v) for v in probs]
    n = len(pf)
    g = float(gamma)
    mit = bool(mitigate)
    mr = int(max_retries)
    noi = bool(noisy)
    by_step = [0] * c
    total = 0.0
    total_invalid = 0
    total_retries = 0
    for shot in range(shots):
        state = derive_seed2(master_seed, I0, shot)
        contrib, invalid, retries, status, state = _walk(
            I0, c, g, bl, n, pf, zx, mit, mr, noi, pr, state, by_step, None
        )
        total_invalid += invalid
        total_retries += retries
        if status:
            return 0.0, total_invalid, total_retries, shot, status, by_step
        total += contrib
    return total / shots, total_invalid, total_retries, -1, 0, by_step


def sample_histogram(cur, count, seed, p_flip, noisy, probs):
    """Histogram of `count` sampled next nodes from one sequential stream."""
    pf = [float(v) for v in p_flip]
    pr = [float(v) for v in probs]
    n = len(pf)
    counts = [0] * (1 << n)
    state = seed & _MASK
    if noisy:
        for _ in range(count):
            nxt, state = _step_noisy(cur, n, pf, pr, state)
            counts[nxt] += 1
    else:
        for _ in range(count):
            nxt, state = _step_noiseless(cur, n, pf, state)
            counts[nxt] += 1
    return counts
