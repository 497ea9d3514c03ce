"""Noise parameter sets for the simulated backends.

Two built-in presets carry the averaged calibration values of the legacy
5-qubit Boeblingen and 7-qubit Casablanca devices. Gate durations are not
part of those averages; the defaults below are representative of that
hardware generation and are configurable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_CONFIG_HEADER = "qrwalk-noise v1"


@dataclass(frozen=True)
class NoiseParams:
    """Relaxation times, error probabilities and gate durations for one backend."""

    t1_us: float
    t2_us: float
    cnot_error: float
    readout_error: float
    time_1q_ns: float = 50.0
    time_2q_ns: float = 300.0
    time_measure_ns: float = 1000.0
    enabled: bool = True

    def __post_init__(self):
        for name in ("t1_us", "t2_us", "time_1q_ns", "time_2q_ns", "time_measure_ns"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        for name in ("cnot_error", "readout_error"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")

    @property
    def t2_eff_us(self) -> float:
        """T2 clamped to 2*T1: averaged calibration data can violate the
        physical bound, which would make the dephasing channel invalid."""
        return min(self.t2_us, 2.0 * self.t1_us)


NOISELESS = NoiseParams(
    t1_us=1.0, t2_us=1.0, cnot_error=0.0, readout_error=0.0, enabled=False
)

NOISE_PRESETS: dict[str, NoiseParams] = {
    "fake-boeblingen": NoiseParams(
        t1_us=72.775, t2_us=153.457, cnot_error=0.03211, readout_error=0.05258
    ),
    "fake-casablanca": NoiseParams(
        t1_us=89.968, t2_us=85.496, cnot_error=0.01274, readout_error=0.01898
    ),
}


def relaxation_probs(duration_ns: float, params: NoiseParams) -> tuple[float, float]:
    """(p_amp, p_phi) for one thermal-relaxation window of the given duration.

    p_amp = 1 - exp(-t/T1); p_phi = 1 - exp(-t/T2phi) with
    1/T2phi = 1/T2_eff - 1/(2 T1), zero when T2_eff saturates the bound.
    """
    if duration_ns <= 0.0:
        return 0.0, 0.0
    t1_ns = params.t1_us * 1000.0
    t2_eff_ns = params.t2_eff_us * 1000.0
    p_amp = 1.0 - math.exp(-duration_ns / t1_ns)
    inv_t2phi = 1.0 / t2_eff_ns - 1.0 / (2.0 * t1_ns)
    p_phi = 1.0 - math.exp(-duration_ns * inv_t2phi) if inv_t2phi > 0.0 else 0.0
    return p_amp, p_phi


def kernel_noise_probs(params: NoiseParams) -> np.ndarray:
    """Precomputed per-window probabilities consumed by the walk kernels.

    Layout: [p_amp_1q, p_amp_2q, p_amp_measure, p_cnot_depol, p_readout].
    Pure dephasing is omitted on purpose: in the step circuit a phase flip
    never changes the measured node-bit distribution, so the kernels track
    only amplitude populations (the statevector channel ops keep it).
    """
    if not params.enabled:
        return np.zeros(5)
    p1, _ = relaxation_probs(params.time_1q_ns, params)
    p2, _ = relaxation_probs(params.time_2q_ns, params)
    pm, _ = relaxation_probs(params.time_measure_ns, params)
    return np.array([p1, p2, pm, params.cnot_error, params.readout_error])


def noise_backend(name_or_path: str) -> NoiseParams:
    """Resolve a backend argument: 'noiseless', a preset name, or a config file."""
    if name_or_path == "noiseless":
        return NOISELESS
    if name_or_path in NOISE_PRESETS:
        return NOISE_PRESETS[name_or_path]
    try:
        with open(name_or_path, "r", encoding="utf-8") as fh:
            return load_noise_config(fh.read())
    except FileNotFoundError:
        raise ValueError(
            f"unknown backend {name_or_path!r}: expected 'noiseless', one of "
            f"{sorted(NOISE_PRESETS)}, or a noise config file"
        ) from None


def format_noise_config(params: NoiseParams) -> str:
    lines = [_CONFIG_HEADER]
    for name in (
        "t1_us",
        "t2_us",
        "cnot_error",
        "readout_error",
        "time_1q_ns",
        "time_2q_ns",
        "time_measure_ns",
    ):
        lines.append(f"{name} = {getattr(params, name)!r}")
    lines.append(f"enabled = {'true' if params.enabled else 'false'}")
    return "\n".join(lines) + "\n"


def load_noise_config(text: str) -> NoiseParams:
    """Parse a key-value noise config; keys are the NoiseParams field names."""
    lines = [ln.strip() for ln in text.strip().splitlines()]
    if not lines or lines[0] != _CONFIG_HEADER:
        raise ValueError("not a qrwalk noise config")
    values: dict[str, str] = {}
    for ln in lines[1:]:
        if not ln or ln.startswith("#"):
            continue
        key, sep, value = ln.partition("=")
        if not sep:
            raise ValueError(f"malformed noise config line: {ln!r}")
        values[key.strip()] = value.strip()
    required = ("t1_us", "t2_us", "cnot_error", "readout_error")
    for name in required:
        if name not in values:
            raise ValueError(f"noise config missing required key {name!r}")
    known = {
        "t1_us",
        "t2_us",
        "cnot_error",
        "readout_error",
        "time_1q_ns",
        "time_2q_ns",
        "time_measure_ns",
        "enabled",
    }
    unknown = set(values) - known
    if unknown:
        raise ValueError(f"unknown noise config keys: {sorted(unknown)}")
    kwargs: dict = {}
    for name in known - {"enabled"}:
        if name in values:
            kwargs[name] = float(values[name])
    if "enabled" in values:
        flag = values["enabled"].lower()
        if flag not in ("true", "false"):
            raise ValueError(f"enabled must be true or false, got {flag!r}")
        kwargs["enabled"] = flag == "true"
    return NoiseParams(**kwargs)


def save_noise_config(params: NoiseParams, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_noise_config(params))
