import numpy as np
import pytest

from qrwalk.noise import NOISE_PRESETS


def chi_square_pvalue(counts, probs) -> float:
    """Goodness-of-fit p-value; structurally zero bins must be empty."""
    from scipy.stats import chi2

    counts = np.asarray(counts, dtype=float)
    probs = np.asarray(probs, dtype=float)
    total = counts.sum()
    expected = total * probs
    zero_bins = expected == 0.0
    assert counts[zero_bins].sum() == 0, "samples landed in zero-probability bins"
    obs = counts[~zero_bins]
    exp = expected[~zero_bins]
    dof = obs.size - 1
    if dof == 0:
        return 1.0
    stat = float(((obs - exp) ** 2 / exp).sum())
    return float(chi2.sf(stat, dof))


def strip_wall_time(csv_text: str) -> str:
    """Drop the wall_time_ms column so reruns can be compared byte-wise."""
    lines = csv_text.strip().split("\n")
    header = lines[0].split(",")
    idx = header.index("wall_time_ms")
    out = []
    for line in lines:
        parts = line.split(",")
        del parts[idx]
        out.append(",".join(parts))
    return "\n".join(out)


@pytest.fixture
def casablanca():
    return NOISE_PRESETS["fake-casablanca"]


@pytest.fixture
def boeblingen():
    return NOISE_PRESETS["fake-boeblingen"]
