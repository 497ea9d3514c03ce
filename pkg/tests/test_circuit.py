import math

import numpy as np
import pytest

from qrwalk.circuit import (
    StepOutcome,
    apply_1q_gate,
    apply_cnot,
    apply_depolarizing_2q,
    apply_readout_error,
    apply_thermal_relaxation,
    coin_unitary,
    step_sample,
    step_sample_reference,
)
from qrwalk.model import CoinAngles, apply_sparsity, build_transition_matrix
from qrwalk.noise import NOISELESS, NoiseParams
from qrwalk.rng import WalkRng

from conftest import chi_square_pvalue


def _random_angles(rng, n):
    return CoinAngles(
        tuple(tuple(rng.uniform(-math.pi, math.pi, 3)) for _ in range(n))
    )


class TestCoinUnitary:
    def test_theta_zero(self):
        phi, lam = 0.7, -1.1
        U = coin_unitary(0.0, phi, lam)
        expected = np.array([[1.0, 0.0], [0.0, np.exp(1j * (lam + phi))]])
        assert np.allclose(U, expected, atol=1e-15)

    def test_theta_pi(self):
        U = coin_unitary(math.pi, 0.0, 0.0)
        assert np.allclose(U, np.array([[0.0, -1.0], [1.0, 0.0]]), atol=1e-12)

    def test_unitarity(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            t, p, l = rng.uniform(-math.pi, math.pi, 3)
            U = coin_unitary(t, p, l)
            assert np.allclose(U.conj().T @ U, np.eye(2), atol=1e-12)
            assert abs(U[0, 0]) ** 2 == pytest.approx(
                math.cos(t / 2) ** 2, abs=1e-12
            )
            assert abs(U[1, 0]) ** 2 == pytest.approx(
                math.sin(t / 2) ** 2, abs=1e-12
            )


class TestStepOutcome:
    def test_encoding_checked(self):
        StepOutcome(5, (1, 0, 1))
        with pytest.raises(ValueError):
            StepOutcome(4, (1, 0, 1))


class TestReadoutError:
    def test_p_zero(self):
        rng = WalkRng(0)
        assert apply_readout_error((1, 0, 1), 0.0, rng) == (1, 0, 1)

    def test_p_one(self):
        rng = WalkRng(0)
        assert apply_readout_error((1, 0, 1), 1.0, rng) == (0, 1, 0)

    def test_flip_fraction_boeblingen(self):
        # 1e6 bits at the Boeblingen readout error, 4 sigma band
        p = 0.05258
        rng = WalkRng(314159)
        bits = apply_readout_error([0] * 1_000_000, p, rng)
        frac = sum(bits) / 1_000_000
        sigma = math.sqrt(p * (1 - p) / 1_000_000)
        assert abs(frac - p) < 4 * sigma

    def test_validation(self):
        with pytest.raises(ValueError):
            apply_readout_error((0,), 1.5, WalkRng(0))


class TestDepolarizing2Q:
    def test_p_zero_unchanged(self):
        state = np.zeros(4, complex)
        state[0] = 1.0
        out = apply_depolarizing_2q(state, 2, (0, 1), 0.0, WalkRng(3))
        assert np.array_equal(out, state)

    def test_p_one_outcome_frequencies(self):
        # from |00>: X/Y on either qubit flips its bit, Z/I leaves it;
        # outcome pattern frequencies are 3/15 for 00 and 4/15 for the rest
        counts = {0: 0, 1: 0, 2: 0, 3: 0}
        rng = WalkRng(2718)
        trials = 100_000
        for _ in range(trials):
            state = np.zeros(4, complex)
            state[0] = 1.0
            out = apply_depolarizing_2q(state, 2, (0, 1), 1.0, rng)
            counts[int(np.argmax(np.abs(out) ** 2))] += 1
        for basis, expected in ((0, 3 / 15), (1, 4 / 15), (2, 4 / 15), (3, 4 / 15)):
            sigma = math.sqrt(expected * (1 - expected) / trials)
            assert abs(counts[basis] / trials - expected) < 4 * sigma

    def test_norm_preserved(self):
        rng_np = np.random.default_rng(9)
        rng = WalkRng(5)
        for _ in range(200):
            state = rng_np.normal(size=8) + 1j * rng_np.normal(size=8)
            state /= np.linalg.norm(state)
            out = apply_depolarizing_2q(state, 3, (0, 2), 1.0, rng)
            assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-10)


class TestThermalRelaxation:
    def test_short_time_is_identity_like(self, casablanca):
        state = np.array([0.6, 0.8], complex)
        out = apply_thermal_relaxation(state, 1, 0, 1e-9, casablanca, WalkRng(1))
        assert np.allclose(out, state, atol=1e-9)

    def test_excited_state_survival(self, casablanca):
        # qubit in |1> for t = T1: survival frequency ~ 1/e over 1e5 trials
        t_ns = casablanca.t1_us * 1000.0
        rng = WalkRng(777)
        survived = 0
        trials = 100_000
        for _ in range(trials):
            state = np.array([0.0, 1.0], complex)
            out = apply_thermal_relaxation(state, 1, 0, t_ns, casablanca, rng)
            survived += int(abs(out[1]) ** 2 > 0.5)
        expected = math.exp(-1.0)
        sigma = math.sqrt(expected * (1 - expected) / trials)
        assert abs(survived / trials - expected) < 4 * sigma

    def test_ground_state_invariant(self, casablanca):
        state = np.array([1.0, 0.0], complex)
        rng = WalkRng(4)
        for _ in range(100):
            out = apply_thermal_relaxation(state, 1, 0, 500.0, casablanca, rng)
            assert abs(out[0]) == 1.0 and out[1] == 0.0

    def test_norm_after_jumps(self, casablanca):
        rng = WalkRng(6)
        rng_np = np.random.default_rng(10)
        for _ in range(300):
            state = rng_np.normal(size=4) + 1j * rng_np.normal(size=4)
            state /= np.linalg.norm(state)
            out = apply_thermal_relaxation(state, 2, 1, 2000.0, casablanca, rng)
            assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-10)

    def test_duration_validation(self, casablanca):
        with pytest.raises(ValueError):
            apply_thermal_relaxation(
                np.array([1.0, 0j]), 1, 0, 0.0, casablanca, WalkRng(0)
            )


class TestGateHelpers:
    def test_cnot_truth_table(self):
        for control_val in (0, 1):
            state = np.zeros(4, complex)
            state[control_val << 1] = 1.0  # qubit1 = control, qubit0 = target
            out = apply_cnot(state, 2, 1, 0)
            expect = (control_val << 1) | control_val
            assert abs(out[expect]) == 1.0

    def test_1q_gate_norm(self):
        rng = np.random.default_rng(2)
        state = rng.normal(size=8) + 1j * rng.normal(size=8)
        state /= np.linalg.norm(state)
        U = coin_unitary(1.1, 0.3, -0.7)
        for q in range(3):
            out = apply_1q_gate(state, 3, q, U)
            assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-12)


class TestStepSampleNoiseless:
    def test_zero_thetas_stay_put(self):
        angles = CoinAngles(((0.0, 0.1, 0.2), (0.0, 0.3, 0.4)))
        rng = WalkRng(8)
        for node in range(4):
            for _ in range(50):
                out = step_sample(node, angles, NOISELESS, rng)
                assert out.next_node == node

    def test_bits_encode_node(self):
        rng_np = np.random.default_rng(12)
        angles = _random_angles(rng_np, 3)
        rng = WalkRng(9)
        for _ in range(100):
            out = step_sample(2, angles, NOISELESS, rng)
            assert out.next_node == sum(b << l for l, b in enumerate(out.measured_bits))

    def test_distribution_matches_matrix_row(self):
        rng_np = np.random.default_rng(13)
        for case in range(5):
            n = int(rng_np.integers(1, 5))
            k = int(rng_np.integers(0, n + 1))
            angles = apply_sparsity(_random_angles(rng_np, n), k)
            P = build_transition_matrix(angles)
            start = int(rng_np.integers(0, 1 << n))
            rng = WalkRng(1000 + case)
            counts = np.zeros(1 << n, int)
            for _ in range(100_000):
                counts[step_sample(start, angles, NOISELESS, rng).next_node] += 1
            assert chi_square_pvalue(counts, P.entries[start]) > 0.001

    def test_out_of_range_node(self):
        angles = CoinAngles(((1.0, 0, 0),))
        with pytest.raises(ValueError):
            step_sample(2, angles, NOISELESS, WalkRng(0))

    def test_determinism(self):
        rng_np = np.random.default_rng(14)
        angles = _random_angles(rng_np, 3)
        a = [step_sample(5, angles, NOISELESS, WalkRng(42)).next_node for _ in range(1)]
        b = [step_sample(5, angles, NOISELESS, WalkRng(42)).next_node for _ in range(1)]
        assert a == b


class TestStepSampleNoisy:
    def test_readout_only_flips_bits_independently(self):
        # all thetas zero and only readout error: each bit flips with prob p
        p = 0.07
        noise = NoiseParams(
            t1_us=1e9, t2_us=1e9, cnot_error=0.0, readout_error=p,
            time_1q_ns=1e-6, time_2q_ns=1e-6, time_measure_ns=1e-6,
        )
        angles = CoinAngles(((0.0, 0, 0), (0.0, 0, 0), (0.0, 0, 0)))
        rng = WalkRng(2025)
        trials = 100_000
        start = 0b101
        flips = np.zeros(3)
        joint = np.zeros(8, int)
        for _ in range(trials):
            out = step_sample(start, angles, noise, rng)
            joint[out.next_node] += 1
            for l in range(3):
                flips[l] += (out.next_node >> l & 1) != (start >> l & 1)
        sigma = math.sqrt(p * (1 - p) / trials)
        for l in range(3):
            assert abs(flips[l] / trials - p) < 4 * sigma
        # joint distribution factorizes as independent per-bit flips
        probs = np.array(
            [
                math.prod(
                    p if (x >> l & 1) != (start >> l & 1) else 1 - p
                    for l in range(3)
                )
                for x in range(8)
            ]
        )
        assert chi_square_pvalue(joint, probs) > 0.001

    def test_masked_transitions_reachable_under_noise(self, casablanca):
        rng_np = np.random.default_rng(15)
        angles = apply_sparsity(_random_angles(rng_np, 2), 1)
        P = build_transition_matrix(angles)
        rng = WalkRng(31415)
        hit = 0
        for _ in range(100_000):
            out = step_sample(1, angles, casablanca, rng)
            hit += int(P.structural_zero_mask[1, out.next_node])
        assert hit > 0

    def test_determinism(self, casablanca):
        rng_np = np.random.default_rng(16)
        angles = _random_angles(rng_np, 2)
        seq1 = [
            step_sample(3, angles, casablanca, WalkRng(c)).next_node
            for c in range(200)
        ]
        seq2 = [
            step_sample(3, angles, casablanca, WalkRng(c)).next_node
            for c in range(200)
        ]
        assert seq1 == seq2


class TestReferenceAgreement:
    """The layered-circuit statevector path and the production kernel are
    independent implementations; their next-node distributions must agree."""

    @pytest.mark.parametrize(
        "n,k,start,seed",
        [(1, 0, 1, 50), (2, 0, 2, 51), (2, 1, 3, 52), (3, 1, 5, 53)],
    )
    def test_noisy_distributions_match(self, casablanca, n, k, start, seed):
        from scipy.stats import chi2_contingency

        rng_np = np.random.default_rng(seed)
        angles = apply_sparsity(_random_angles(rng_np, n), k)
        ref_counts = np.zeros(1 << n, int)
        rng = WalkRng(seed * 7 + 1)
        for _ in range(20_000):
            ref_counts[
                step_sample_reference(start, angles, casablanca, rng).next_node
            ] += 1
        ker_counts = np.zeros(1 << n, int)
        rng = WalkRng(seed * 7 + 2)
        for _ in range(100_000):
            ker_counts[step_sample(start, angles, casablanca, rng).next_node] += 1
        table = np.vstack([ref_counts, ker_counts])
        table = table[:, table.sum(axis=0) > 0]
        _, pvalue, _, _ = chi2_contingency(table)
        assert pvalue > 0.001

    def test_noiseless_reference_matches_row(self):
        rng_np = np.random.default_rng(60)
        angles = _random_angles(rng_np, 2)
        P = build_transition_matrix(angles)
        rng = WalkRng(61)
        counts = np.zeros(4, int)
        for _ in range(20_000):
            counts[step_sample_reference(1, angles, NOISELESS, rng).next_node] += 1
        assert chi_square_pvalue(counts, P.entries[1]) > 0.001

    def test_phi_lambda_invariance_of_samples(self):
        thetas = (0.9, -1.7)
        a = CoinAngles(tuple((t, 0.0, 0.0) for t in thetas))
        b = CoinAngles(tuple((t, 1.3, -2.1) for t in thetas))
        sa = [step_sample(2, a, NOISELESS, WalkRng(s)).next_node for s in range(500)]
        sb = [step_sample(2, b, NOISELESS, WalkRng(s)).next_node for s in range(500)]
        assert sa == sb  # kernel consumes only theta, so streams coincide
