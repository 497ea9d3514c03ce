import math

import numpy as np
import pytest

from qrwalk.model import build_transition_matrix, generate_problem
from qrwalk.noise import NOISE_PRESETS, NOISELESS, relaxation_probs
from qrwalk.oracle import enumerate_walk_expectation, exact_solve, neumann_truncated
from qrwalk.rng import WalkRng
from qrwalk.solver import (
    RetryExhaustedError,
    SolverConfig,
    detect_invalid,
    estimate_component,
    run_walk,
    solve,
    truncation_length,
)


def _identity_instance(n=2, gamma=0.5, seed=99):
    return generate_problem(n, n, gamma, seed)


class TestTruncationLength:
    @pytest.mark.parametrize(
        "gamma,epsilon,expected",
        [(0.5, 0.5, 1), (0.5, 0.01, 7), (0.1, 0.1, 1), (0.5, 0.125, 3)],
    )
    def test_values(self, gamma, epsilon, expected):
        assert truncation_length(gamma, epsilon) == expected

    def test_minimum_one(self):
        assert truncation_length(0.9, 0.95) == 1

    def test_validation(self):
        for gamma, epsilon in [(0.0, 0.5), (1.0, 0.5), (0.5, 0.0), (0.5, 1.0)]:
            with pytest.raises(ValueError):
                truncation_length(gamma, epsilon)


class TestSolverConfig:
    def test_effective_c(self):
        cfg = SolverConfig(shots=24)
        assert cfg.effective_c(0.5) == 7  # epsilon default 0.01
        assert SolverConfig(shots=24, c_override=3).effective_c(0.5) == 3

    def test_validation(self):
        with pytest.raises(ValueError):
            SolverConfig(shots=0)
        with pytest.raises(ValueError):
            SolverConfig(shots=1, epsilon=1.0)
        with pytest.raises(ValueError):
            SolverConfig(shots=1, max_retries=0)
        with pytest.raises(ValueError):
            SolverConfig(shots=1, c_override=0)


class TestDetectInvalid:
    def test_identity_off_diagonal(self):
        inst = _identity_instance()
        assert detect_invalid(inst.P, 0, 1)
        assert not detect_invalid(inst.P, 2, 2)

    def test_dense_everywhere_valid(self):
        inst = generate_problem(2, 0, 0.5, 3)
        for i in range(4):
            for j in range(4):
                assert not detect_invalid(inst.P, i, j)

    def test_single_zero_theta_pattern(self):
        inst = generate_problem(2, 1, 0.5, 4)
        for i in range(4):
            for j in range(4):
                assert detect_invalid(inst.P, i, j) == bool((i ^ j) & 1)


class TestRunWalk:
    def test_identity_noiseless_geometric(self):
        inst = _identity_instance(gamma=0.5)
        cfg = SolverConfig(shots=1)  # c = 7
        for I0 in range(4):
            rec = run_walk(I0, inst, cfg, WalkRng(5))
            assert rec.trajectory == (I0,) * 8
            expected = inst.b[I0] * (1 - 0.5**8) / 0.5
            assert rec.contribution == pytest.approx(expected, rel=1e-14)
            assert rec.invalid_steps == 0 and rec.retries == 0

    def test_identity_noisy_mitigated_equals_noiseless(self, casablanca):
        # every deviation is invalid and retried, so the trajectory is pinned
        inst = _identity_instance(n=3)
        noisy = SolverConfig(shots=1, mitigation=True, noise=casablanca)
        clean = SolverConfig(shots=1)
        total_retries = 0
        for I0 in (0, 3, 7):
            for seed in range(20):
                rec_noisy = run_walk(I0, inst, noisy, WalkRng(seed))
                rec_clean = run_walk(I0, inst, clean, WalkRng(seed))
                assert rec_noisy.trajectory == rec_clean.trajectory == (I0,) * 8
                assert rec_noisy.contribution == rec_clean.contribution
                assert rec_noisy.invalid_steps == 0
                total_retries += rec_noisy.retries
        assert total_retries > 0  # noise does propose invalid moves

    def test_trajectory_length(self, casablanca):
        inst = generate_problem(3, 1, 0.5, 6)
        cfg = SolverConfig(shots=1, noise=casablanca, c_override=5)
        rec = run_walk(2, inst, cfg, WalkRng(7))
        assert len(rec.trajectory) == 6

    def test_mitigation_soundness(self, casablanca):
        # no record in mitigated mode may contain a masked transition
        inst = generate_problem(3, 2, 0.5, 8)
        cfg = SolverConfig(shots=1, mitigation=True, noise=casablanca)
        mask = inst.P.structural_zero_mask
        for seed in range(200):
            rec = run_walk(1, inst, cfg, WalkRng(seed))
            assert rec.invalid_steps == 0
            for a, b in zip(rec.trajectory, rec.trajectory[1:]):
                assert not mask[a, b]

    def test_unmitigated_counts_invalid(self, casablanca):
        inst = _identity_instance(n=3)
        cfg = SolverConfig(shots=1, noise=casablanca)
        total = 0
        for seed in range(300):
            total += run_walk(0, inst, cfg, WalkRng(seed)).invalid_steps
        assert total > 0

    def test_out_of_range(self):
        inst = _identity_instance()
        with pytest.raises(ValueError):
            run_walk(4, inst, SolverConfig(shots=1), WalkRng(0))


class TestInvalidStepRateOracle:
    """Single-step invalid rate for the all-zero-theta instance, checked
    against an independent per-bit probability chain."""

    def _per_bit_flip_prob(self, start_bit, noise):
        p1 = float(start_bit)
        for window in (noise.time_1q_ns,):
            p_amp, _ = relaxation_probs(window, noise)
            p1 *= 1.0 - p_amp
        # theta=0: coin stays |0>, CNOT is a no-op on the node
        f = noise.cnot_error * (8.0 / 15.0)  # node Pauli in {X, Y}
        p1 = p1 * (1 - f) + (1 - p1) * f
        for window in (noise.time_2q_ns, noise.time_measure_ns):
            p_amp, _ = relaxation_probs(window, noise)
            p1 *= 1.0 - p_amp
        r = noise.readout_error
        p1 = p1 * (1 - r) + (1 - p1) * r
        return p1 if start_bit == 0 else 1.0 - p1

    def test_single_step_invalid_rate(self, casablanca):
        inst = _identity_instance(n=3)
        cfg = SolverConfig(shots=1, c_override=1, noise=casablanca)
        for I0 in (0b000, 0b101, 0b111):
            q = 1.0 - math.prod(
                1.0 - self._per_bit_flip_prob((I0 >> l) & 1, casablanca)
                for l in range(3)
            )
            trials = 40_000
            invalid = sum(
                run_walk(I0, inst, cfg, WalkRng(10_000 + s)).invalid_steps
                for s in range(trials)
            )
            sigma = math.sqrt(q * (1 - q) / trials)
            assert abs(invalid / trials - q) < 4 * sigma


class TestEstimateComponent:
    def test_identity_exact_any_shots(self):
        inst = _identity_instance(gamma=0.5)
        for shots in (1, 24, 100):
            cfg = SolverConfig(shots=shots, master_seed=3)
            est, stats = estimate_component(2, inst, cfg)
            assert est == pytest.approx(
                inst.b[2] * (1 - 0.5**8) / 0.5, rel=1e-14
            )
            assert stats.total_invalid == 0

    def test_deterministic(self, casablanca):
        inst = generate_problem(3, 1, 0.5, 12)
        cfg = SolverConfig(shots=200, master_seed=77, noise=casablanca)
        a, _ = estimate_component(1, inst, cfg)
        b, _ = estimate_component(1, inst, cfg)
        assert a == b

    def test_unbiased_against_enumeration(self):
        # estimator mean over many shots approaches the exact expectation
        inst = generate_problem(2, 0, 0.5, 14)
        cfg = SolverConfig(shots=100_000, master_seed=5)
        c = cfg.effective_c(inst.gamma)
        for I0 in (0, 3):
            est, _ = estimate_component(I0, inst, cfg)
            exact = enumerate_walk_expectation(inst, I0, c)
            # empirical spread of single-walk contributions bounds the SE
            contributions = [
                run_walk(I0, inst, cfg, WalkRng(s)).contribution
                for s in range(2000)
            ]
            se = np.std(contributions) / math.sqrt(cfg.shots)
            assert abs(est - exact) < 4 * se + 1e-12

    def test_stats_shape(self, casablanca):
        inst = generate_problem(3, 2, 0.5, 15)
        cfg = SolverConfig(shots=100, master_seed=1, noise=casablanca)
        _, stats = estimate_component(0, inst, cfg)
        c = cfg.effective_c(inst.gamma)
        assert stats.by_step_index.shape == (c,)
        assert stats.by_step_index.sum() == stats.total_invalid
        assert stats.per_shot_mean == pytest.approx(
            (stats.total_invalid + stats.total_retries) / 100
        )


class TestRetryExhaustion:
    def test_raises_with_location(self):
        inst = _identity_instance(n=2)
        bad_noise = NOISE_PRESETS["fake-casablanca"]
        # readout error that rejects nearly every sample, budget of one retry
        from qrwalk.noise import NoiseParams

        noise = NoiseParams(
            t1_us=1e9, t2_us=1e9, cnot_error=0.0, readout_error=0.45,
        )
        cfg = SolverConfig(
            shots=200, mitigation=True, max_retries=1, noise=noise, master_seed=2
        )
        with pytest.raises(RetryExhaustedError) as err:
            estimate_component(0, inst, cfg)
        assert err.value.component == 0
        assert err.value.shot >= 0
        assert 1 <= err.value.step <= cfg.effective_c(inst.gamma)

    def test_run_walk_raises(self):
        from qrwalk.noise import NoiseParams

        inst = _identity_instance(n=2)
        noise = NoiseParams(t1_us=1e9, t2_us=1e9, cnot_error=0.0, readout_error=0.45)
        cfg = SolverConfig(shots=1, mitigation=True, max_retries=1, noise=noise)
        raised = False
        for seed in range(50):
            try:
                run_walk(0, inst, cfg, WalkRng(seed))
            except RetryExhaustedError:
                raised = True
                break
        assert raised


class TestSolve:
    def test_identity_relative_error_closed_form(self):
        # gamma = 0.5, c = 7: the truncation error collapses to gamma^(c+1)
        inst = _identity_instance(n=3, gamma=0.5)
        report = solve(inst, SolverConfig(shots=24, master_seed=9))
        assert abs(report.relative_error - 0.5**8) < 1e-12

    def test_report_recomputable(self, casablanca):
        inst = generate_problem(2, 1, 0.5, 23)
        report = solve(
            inst, SolverConfig(shots=96, master_seed=4, noise=casablanca)
        )
        recomputed = np.linalg.norm(report.estimate - report.exact) / np.linalg.norm(
            report.exact
        )
        assert report.relative_error == pytest.approx(recomputed, rel=1e-15)
        assert np.array_equal(report.exact, exact_solve(inst).x)
        assert report.wall_time_s >= 0.0

    def test_mitigation_noop_on_dense_bitwise(self, casablanca):
        inst = generate_problem(2, 0, 0.5, 25)
        base = dict(shots=96, master_seed=11, noise=casablanca)
        rep_off = solve(inst, SolverConfig(**base))
        rep_on = solve(inst, SolverConfig(mitigation=True, **base))
        assert np.array_equal(rep_off.estimate, rep_on.estimate)
        assert rep_off.relative_error == rep_on.relative_error
        assert rep_on.invalid_stats.total_retries == 0

    def test_estimator_converges_to_series(self):
        inst = generate_problem(2, 0, 0.5, 26)
        cfg = SolverConfig(shots=50_000, master_seed=13)
        report = solve(inst, cfg)
        series = neumann_truncated(inst, cfg.effective_c(inst.gamma))
        assert np.linalg.norm(report.estimate - series) < 0.02

    def test_more_shots_lower_median_error(self):
        # noiseless dense N=4: the 1008-shot median error over 50 instances
        # sits below the 24-shot median
        meds = {}
        for shots in (24, 1008):
            errs = []
            for sample in range(50):
                inst = generate_problem(2, 0, 0.5, 9000 + sample)
                cfg = SolverConfig(shots=shots, master_seed=41)
                errs.append(solve(inst, cfg).relative_error)
            meds[shots] = float(np.median(errs))
        assert meds[1008] < meds[24]

    def test_invalid_stats_aggregate(self, casablanca):
        inst = generate_problem(2, 1, 0.5, 27)
        report = solve(
            inst, SolverConfig(shots=200, master_seed=6, noise=casablanca)
        )
        stats = report.invalid_stats
        assert stats.total_invalid > 0
        assert stats.by_step_index.sum() == stats.total_invalid
        assert stats.per_shot_mean == pytest.approx(
            (stats.total_invalid + stats.total_retries) / (4 * 200)
        )
