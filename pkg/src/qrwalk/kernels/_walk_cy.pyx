# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled walk kernel; the bit-identical twin of _walk_py.

Every floating-point operation mirrors _walk_py in the same order on IEEE
doubles and every draw comes from the same SplitMix64 positions. The build
disables FMA contraction and fast-math so this holds on any conforming
compiler. Keep the two files in lockstep when changing either.
"""

from libc.stdint cimport uint64_t, int64_t, uint8_t

import numpy as np

BACKEND_NAME = "compiled"

cdef uint64_t _GOLDEN = 0x9E3779B97F4A7C15UL
cdef uint64_t _MIX_A = 0xBF58476D1CE4E5B9UL
cdef uint64_t _MIX_B = 0x94D049BB133111EBUL
cdef double _INV53 = 2.0**-53


cdef inline uint64_t _mix(uint64_t z) noexcept:
    z = (z ^ (z >> 30)) * _MIX_A
    z = (z ^ (z >> 27)) * _MIX_B
    return z ^ (z >> 31)


cdef inline double _next_double(uint64_t *state) noexcept:
    state[0] = state[0] + _GOLDEN
    return <double>(_mix(state[0]) >> 11) * _INV53


def derive_seed2(master, a, b):
    """Two-value counter mixing; equals rng.derive_seed(master, a, b)."""
    cdef uint64_t h = _mix(<uint64_t>master + _GOLDEN)
    cdef uint64_t v
    for value in (a, b):
        v = <uint64_t>value
        h = _mix(h * _MIX_A + _mix(v + _GOLDEN) + _GOLDEN)
    return h


def stream_doubles(seed, count):
    """First `count` uniform doubles of the stream with the given seed."""
    cdef uint64_t state = <uint64_t>seed
    cdef Py_ssize_t i
    out = []
    for i in range(count):
        out.append(_next_double(&state))
    return out


cdef inline void _relax_node(
    double *m0, double *m1, double *m2, double *m3, double p_amp,
    uint64_t *state,
) noexcept:
    cdef double u = _next_double(state)
    cdef double pop1 = m1[0] + m3[0]
    cdef double s, d
    if u < p_amp * pop1:
        m0[0] = m1[0] / pop1
        m2[0] = m3[0] / pop1
        m1[0] = 0.0
        m3[0] = 0.0
    else:
        s = 1.0 - p_amp
        d = 1.0 - p_amp * pop1
        m1[0] = m1[0] * s / d
        m3[0] = m3[0] * s / d
        m0[0] = m0[0] / d
        m2[0] = m2[0] / d


cdef inline void _relax_coin(
    double *m0, double *m1, double *m2, double *m3, double p_amp,
    uint64_t *state,
) noexcept:
    cdef double u = _next_double(state)
    cdef double pop1 = m2[0] + m3[0]
    cdef double s, d
    if u < p_amp * pop1:
        m0[0] = m2[0] / pop1
        m1[0] = m3[0] / pop1
        m2[0] = 0.0
        m3[0] = 0.0
    else:
        s = 1.0 - p_amp
        d = 1.0 - p_amp * pop1
        m2[0] = m2[0] * s / d
        m3[0] = m3[0] * s / d
        m0[0] = m0[0] / d
        m1[0] = m1[0] / d


cdef long _step_noisy(
    long cur, int n, const double[::1] p_flip, const double[::1] probs,
    uint64_t *state,
) noexcept:
    cdef double p_amp_1q = probs[0]
    cdef double p_amp_2q = probs[1]
    cdef double p_amp_meas = probs[2]
    cdef double p_cnot = probs[3]
    cdef double p_read = probs[4]
    cdef long nxt = 0
    cdef int l, bit, idx, pa, pb
    cdef double m0, m1, m2, m3, f, stay, tmp, u, v, p1
    for l in range(n):
        if (cur >> l) & 1:
            m0 = 0.0
            m1 = 1.0
        else:
            m0 = 1.0
            m1 = 0.0
        m2 = 0.0
        m3 = 0.0
        _relax_node(&m0, &m1, &m2, &m3, p_amp_1q, state)
        # coin unitary from |0>: p_flip of the population moves to coin=1
        f = p_flip[l]
        stay = 1.0 - f
        m2 = f * m0
        m3 = f * m1
        m0 = stay * m0
        m1 = stay * m1
        _relax_coin(&m0, &m1, &m2, &m3, p_amp_1q, state)
        # CNOT coin -> node
        tmp = m2
        m2 = m3
        m3 = tmp
        # two-qubit depolarizing on the (coin, node) pair
        u = _next_double(state)
        if u < p_cnot:
            v = _next_double(state)
            idx = <int>(v * 15.0) + 1
            pa = idx >> 2
            pb = idx & 3
            if pa == 1 or pa == 2:  # X or Y on the coin
                tmp = m0
                m0 = m2
                m2 = tmp
                tmp = m1
                m1 = m3
                m3 = tmp
            if pb == 1 or pb == 2:  # X or Y on the node
                tmp = m0
                m0 = m1
                m1 = tmp
                tmp = m2
                m2 = m3
                m3 = tmp
        _relax_coin(&m0, &m1, &m2, &m3, p_amp_2q, state)
        _relax_node(&m0, &m1, &m2, &m3, p_amp_2q, state)
        _relax_coin(&m0, &m1, &m2, &m3, p_amp_meas, state)
        _relax_node(&m0, &m1, &m2, &m3, p_amp_meas, state)
        # measure the node bit, then the classical readout flip
        p1 = m1 + m3
        u = _next_double(state)
        bit = 1 if u < p1 else 0
        u = _next_double(state)
        if u < p_read:
            bit ^= 1
        nxt |= (<long>bit) << l
    return nxt


cdef long _step_noiseless(
    long cur, int n, const double[::1] p_flip, uint64_t *state
) noexcept:
    cdef long nxt = cur
    cdef int l
    cdef double u
    for l in range(n):
        u = _next_double(state)
        if u < p_flip[l]:
            nxt ^= (<long>1) << l
    return nxt


cdef int _walk(
    long I0, int c, double gamma, const double[::1] b, int n,
    const double[::1] pf, const uint8_t[::1] zx, bint mitigate,
    long long max_retries, bint noisy, const double[::1] probs,
    uint64_t *state, int64_t[::1] by_step, int64_t *traj,
    double *contrib_out, int64_t *invalid_out, int64_t *retries_out,
) noexcept:
    cdef long cur = I0
    cdef long nxt
    cdef double contrib = b[I0]
    cdef double gp = 1.0
    cdef int64_t invalid = 0
    cdef int64_t retries = 0
    cdef long long tries
    cdef int s
    if traj != NULL:
        traj[0] = cur
    for s in range(1, c + 1):
        if noisy:
            nxt = _step_noisy(cur, n, pf, probs, state)
        else:
            nxt = _step_noiseless(cur, n, pf, state)
        if zx[cur ^ nxt] != 0:
            if mitigate:
                tries = 0
                while zx[cur ^ nxt] != 0:
                    if tries == max_retries:
                        contrib_out[0] = contrib
                        invalid_out[0] = invalid
                        retries_out[0] = retries
                        return s
                    tries += 1
                    retries += 1
                    by_step[s - 1] += 1
                    if noisy:
                        nxt = _step_noisy(cur, n, pf, probs, state)
                    else:
                        nxt = _step_noiseless(cur, n, pf, state)
            else:
                invalid += 1
                by_step[s - 1] += 1
        cur = nxt
        gp *= gamma
        contrib += gp * b[cur]
        if traj != NULL:
            traj[s] = cur
    contrib_out[0] = contrib
    invalid_out[0] = invalid
    retries_out[0] = retries
    return 0


def step_once(cur, p_flip, noisy, probs, state):
    """Sample one step from node `cur`; returns (next_node, new_state)."""
    cdef const double[::1] pf = np.ascontiguousarray(p_flip, dtype=np.float64)
    cdef const double[::1] pr = np.ascontiguousarray(probs, dtype=np.float64)
    cdef uint64_t st = <uint64_t>state
    cdef long nxt
    if noisy:
        nxt = _step_noisy(<long>cur, <int>pf.shape[0], pf, pr, &st)
    else:
        nxt = _step_noiseless(<long>cur, <int>pf.shape[0], pf, &st)
    return nxt, st


def walk_once(I0, c, gamma, b, p_flip, zero_x, mitigate, max_retries, noisy,
              probs, state):
    """Run one walk of c steps from I0.

    Returns (contribution, invalid_steps, retries, status, trajectory, state);
    status is 0 on success or the 1-based step index whose mitigation retries
    were exhausted.
    """
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef const double[::1] pf = np.ascontiguousarray(p_flip, dtype=np.float64)
    cdef const uint8_t[::1] zx = np.ascontiguousarray(zero_x, dtype=np.uint8)
    cdef const double[::1] pr = np.ascontiguousarray(probs, dtype=np.float64)
    cdef int cc = <int>c
    by_step_np = np.zeros(cc, dtype=np.int64)
    traj_np = np.zeros(cc + 1, dtype=np.int64)
    cdef int64_t[::1] by_step = by_step_np
    cdef int64_t[::1] traj = traj_np
    cdef uint64_t st = <uint64_t>state
    cdef double contrib = 0.0
    cdef int64_t invalid = 0
    cdef int64_t retries = 0
    cdef int status = _walk(
        <long>I0, cc, <double>gamma, bv, <int>pf.shape[0], pf, zx,
        <bint>mitigate, <long long>max_retries, <bint>noisy, pr, &st,
        by_step, &traj[0], &contrib, &invalid, &retries,
    )
    # on retry exhaustion at step s only I0..I_{s-1} were accepted
    traj_list = traj_np[:status].tolist() if status else traj_np.tolist()
    return contrib, invalid, retries, status, traj_list, st


def estimate_component(I0, shots, master_seed, c, gamma, b, p_flip, zero_x,
                       mitigate, max_retries, noisy, probs):
    """Mean walk contribution over `shots` seeds derived from (master, I0, shot).

    Returns (mean, total_invalid, total_retries, err_shot, err_step, by_step);
    err_shot is -1 on success, otherwise the shot whose retries were exhausted
    at 1-based step err_step.
    """
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef const double[::1] pf = np.ascontiguousarray(p_flip, dtype=np.float64)
    cdef const uint8_t[::1] zx = np.ascontiguousarray(zero_x, dtype=np.uint8)
    cdef const double[::1] pr = np.ascontiguousarray(probs, dtype=np.float64)
    cdef int cc = <int>c
    cdef int n = <int>pf.shape[0]
    cdef long start = <long>I0
    cdef long nshots = <long>shots
    cdef uint64_t master = <uint64_t>master_seed
    cdef double g = <double>gamma
    cdef bint mit = <bint>mitigate
    cdef long long mr = <long long>max_retries
    cdef bint noi = <bint>noisy
    by_step_np = np.zeros(cc, dtype=np.int64)
    cdef int64_t[::1] by_step = by_step_np
    cdef double total = 0.0
    cdef int64_t total_invalid = 0
    cdef int64_t total_retries = 0
    cdef double contrib = 0.0
    cdef int64_t invalid = 0
    cdef int64_t retries = 0
    cdef uint64_t st, h
    cdef long shot
    cdef int status
    for shot in range(nshots):
        # inline derive_seed2(master, I0, shot)
        h = _mix(master + _GOLDEN)
        h = _mix(h * _MIX_A + _mix(<uint64_t>start + _GOLDEN) + _GOLDEN)
        h = _mix(h * _MIX_A + _mix(<uint64_t>shot + _GOLDEN) + _GOLDEN)
        st = h
        status = _walk(
            start, cc, g, bv, n, pf, zx, mit, mr, noi, pr, &st, by_step,
            NULL, &contrib, &invalid, &retries,
        )
        total_invalid += invalid
        total_retries += retries
        if status:
            return 0.0, total_invalid, total_retries, shot, status, \
                by_step_np.tolist()
        total += contrib
    return total / nshots, total_invalid, total_retries, -1, 0, \
        by_step_np.tolist()


def sample_histogram(cur, count, seed, p_flip, noisy, probs):
    """Histogram of `count` sampled next nodes from one sequential stream."""
    cdef const double[::1] pf = np.ascontiguousarray(p_flip, dtype=np.float64)
    cdef const double[::1] pr = np.ascontiguousarray(probs, dtype=np.float64)
    cdef int n = <int>pf.shape[0]
    cdef long start = <long>cur
    cdef long m = <long>count
    cdef uint64_t st = <uint64_t>seed
    cdef bint noi = <bint>noisy
    counts_np = np.zeros(1 << n, dtype=np.int64)
    cdef int64_t[::1] counts = counts_np
    cdef long i, nxt
    for i in range(m):
        if noi:
            nxt = _step_noisy(start, n, pf, pr, &st)
        else:
            nxt = _step_noiseless(start, n, pf, &st)
        counts[nxt] += 1
    return counts_np.tolist()
