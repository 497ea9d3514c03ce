import math

import pytest

from qrwalk.noise import (
    NOISE_PRESETS,
    NOISELESS,
    NoiseParams,
    format_noise_config,
    kernel_noise_probs,
    load_noise_config,
    noise_backend,
    relaxation_probs,
    save_noise_config,
)


class TestPresets:
    def test_boeblingen_values(self, boeblingen):
        assert boeblingen.t1_us == 72.775
        assert boeblingen.t2_us == 153.457
        assert boeblingen.cnot_error == 0.03211
        assert boeblingen.readout_error == 0.05258
        assert boeblingen.enabled

    def test_casablanca_values(self, casablanca):
        assert casablanca.t1_us == 89.968
        assert casablanca.t2_us == 85.496
        assert casablanca.cnot_error == 0.01274
        assert casablanca.readout_error == 0.01898

    def test_default_durations(self, casablanca):
        assert casablanca.time_1q_ns == 50.0
        assert casablanca.time_2q_ns == 300.0
        assert casablanca.time_measure_ns == 1000.0

    def test_t2_clamp(self, boeblingen, casablanca):
        # Boeblingen averages violate T2 <= 2*T1; the effective value clamps
        assert boeblingen.t2_eff_us == 2 * 72.775
        assert casablanca.t2_eff_us == 85.496


class TestValidation:
    def test_bad_times(self):
        with pytest.raises(ValueError):
            NoiseParams(t1_us=0.0, t2_us=1.0, cnot_error=0, readout_error=0)
        with pytest.raises(ValueError):
            NoiseParams(t1_us=1.0, t2_us=1.0, cnot_error=0, readout_error=0,
                        time_2q_ns=-5.0)

    def test_bad_probs(self):
        with pytest.raises(ValueError):
            NoiseParams(t1_us=1.0, t2_us=1.0, cnot_error=1.5, readout_error=0)
        with pytest.raises(ValueError):
            NoiseParams(t1_us=1.0, t2_us=1.0, cnot_error=0, readout_error=-0.1)


class TestRelaxationProbs:
    def test_zero_duration(self, casablanca):
        assert relaxation_probs(0.0, casablanca) == (0.0, 0.0)

    def test_amp_formula(self, casablanca):
        p_amp, _ = relaxation_probs(1000.0, casablanca)
        assert p_amp == pytest.approx(1.0 - math.exp(-1.0 / 89.968), rel=1e-12)

    def test_no_dephasing_at_clamp(self, boeblingen):
        # T2_eff == 2*T1 makes the pure-dephasing rate exactly zero
        _, p_phi = relaxation_probs(300.0, boeblingen)
        assert p_phi == 0.0

    def test_dephasing_positive_below_clamp(self, casablanca):
        _, p_phi = relaxation_probs(300.0, casablanca)
        assert 0.0 < p_phi < 1.0

    def test_kernel_probs_layout(self, casablanca):
        probs = kernel_noise_probs(casablanca)
        assert probs.shape == (5,)
        assert probs[3] == casablanca.cnot_error
        assert probs[4] == casablanca.readout_error
        assert probs[0] < probs[1] < probs[2]  # longer window, more damping

    def test_kernel_probs_disabled(self):
        assert not kernel_noise_probs(NOISELESS).any()


class TestConfigIO:
    def test_round_trip(self, tmp_path, casablanca):
        path = tmp_path / "noise.cfg"
        save_noise_config(casablanca, str(path))
        assert load_noise_config(path.read_text()) == casablanca

    def test_disabled_round_trip(self, tmp_path):
        path = tmp_path / "noise.cfg"
        save_noise_config(NOISELESS, str(path))
        assert load_noise_config(path.read_text()) == NOISELESS

    def test_exact_keys(self):
        text = (
            "qrwalk-noise v1\n"
            "t1_us = 89.968\n"
            "t2_us = 85.496\n"
            "cnot_error = 0.01274\n"
            "readout_error = 0.01898\n"
        )
        params = load_noise_config(text)
        assert params == NOISE_PRESETS["fake-casablanca"]

    def test_missing_key(self):
        with pytest.raises(ValueError, match="missing required"):
            load_noise_config("qrwalk-noise v1\nt1_us = 1.0\n")

    def test_unknown_key(self):
        with pytest.raises(ValueError, match="unknown"):
            load_noise_config(
                "qrwalk-noise v1\nt1_us = 1\nt2_us = 1\ncnot_error = 0\n"
                "readout_error = 0\nbogus = 3\n"
            )

    def test_header_required(self):
        with pytest.raises(ValueError, match="noise config"):
            load_noise_config("t1_us = 1\n")


class TestBackendResolution:
    def test_noiseless(self):
        assert noise_backend("noiseless") is NOISELESS

    def test_presets(self):
        assert noise_backend("fake-boeblingen") == NOISE_PRESETS["fake-boeblingen"]
        assert noise_backend("fake-casablanca") == NOISE_PRESETS["fake-casablanca"]

    def test_config_file(self, tmp_path, boeblingen):
        path = tmp_path / "custom.cfg"
        save_noise_config(boeblingen, str(path))
        assert noise_backend(str(path)) == boeblingen

    def test_unknown(self):
        with pytest.raises(ValueError, match="unknown backend"):
            noise_backend("fake-yorktown")
