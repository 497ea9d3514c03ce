"""Experiment sweeps: size x sparsity x shots x backend x mitigation.

A plan expands into a canonical list of cells. Each cell regenerates its
problem instance deterministically from the master seed, runs the solver, and
yields one CSV row; the same instance (same base angles, same right-hand
side) is reused across shot counts, backends and mitigation modes so that
only the variable under study changes. A manifest records everything needed
to reproduce the CSV byte-for-byte (wall-time columns aside).

Seed layout, all derived from the plan master seed by counter mixing:
  instance angles/b   derive(master, 1, n, sample)   shared across k levels,
                      so one sample's sparsity levels zero the same angles
  shared b per size   derive(master, 3, n)           default; per-sample b
                      reuses the instance stream
  solver stream       derive(master, 2, n, k, sample, backend_tag)
                      shared across shot counts and mitigation modes
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .model import MAX_QUBITS, generate_problem
from .noise import NoiseParams, noise_backend
from .rng import WalkRng, derive_seed
from .solver import SolverConfig, solve

DEFAULT_SHOT_GRID = (24, 48, 96, 216, 456, 1008)

CSV_FIELDS = (
    "run_id",
    "n",
    "N",
    "sparsity_level",
    "k",
    "shots",
    "sample_index",
    "backend",
    "mitigation",
    "gamma",
    "c",
    "relative_error",
    "total_invalid",
    "total_retries",
    "condition_number",
    "seed",
    "wall_time_ms",
)

MANIFEST_FORMAT = "qrwalk-sweep-manifest v1"

# stream-domain tags for derive_seed
_TAG_INSTANCE = 1
_TAG_SOLVER = 2
_TAG_SHARED_B = 3


@dataclass(frozen=True)
class ExperimentPlan:
    sizes: tuple[int, ...]
    ks_by_size: dict[int, tuple[int, ...]]
    shot_grid: tuple[int, ...] = DEFAULT_SHOT_GRID
    samples_per_cell: int = 50
    gamma: float = 0.5
    epsilon: float = 0.01
    backends: tuple[str, ...] = ("noiseless",)
    mitigation_modes: tuple[bool, ...] = (False,)
    master_seed: int = 0
    out_dir: str = "."
    shared_b: bool = True
    max_retries: int = 1000
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        object.__setattr__(
            self,
            "ks_by_size",
            {int(n): tuple(int(k) for k in ks) for n, ks in self.ks_by_size.items()},
        )
        object.__setattr__(self, "shot_grid", tuple(int(s) for s in self.shot_grid))
        object.__setattr__(self, "backends", tuple(self.backends))
        object.__setattr__(
            self, "mitigation_modes", tuple(bool(m) for m in self.mitigation_modes)
        )
        if not self.sizes:
            raise ValueError("plan needs at least one size")
        for n in self.sizes:
            if not 1 <= n <= MAX_QUBITS:
                raise ValueError(f"size n={n} outside 1..{MAX_QUBITS}")
            ks = self.ks_by_size.get(n)
            if not ks:
                raise ValueError(f"no sparsity levels given for n={n}")
            for k in ks:
                if not 0 <= k <= n:
                    raise ValueError(f"k={k} invalid for n={n}")
        if not self.shot_grid or any(s < 1 for s in self.shot_grid):
            raise ValueError("shot grid must be positive")
        if self.samples_per_cell < 1:
            raise ValueError("samples_per_cell must be >= 1")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must be in (0, 1), got {self.gamma}")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if not self.backends:
            raise ValueError("plan needs at least one backend")
        if not self.mitigation_modes:
            raise ValueError("plan needs at least one mitigation mode")
        if len(set(self.mitigation_modes)) != len(self.mitigation_modes):
            raise ValueError("duplicate mitigation modes")
        if self.max_retries < 1:
            raise ValueError("max_retries must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class CellSpec:
    n: int
    k: int
    backend: str
    mitigate: bool
    shots: int
    sample: int


@dataclass(frozen=True)
class SweepResult:
    rows: list[dict]
    csv_path: str
    manifest_path: str
    run_id: str


def plan_cells(plan: ExperimentPlan) -> list[CellSpec]:
    """Canonical cell order: size, k, backend, mode, shots, sample."""
    cells = []
    for n in plan.sizes:
        for k in plan.ks_by_size[n]:
            for backend in plan.backends:
                for mitigate in plan.mitigation_modes:
                    for shots in plan.shot_grid:
                        for sample in range(plan.samples_per_cell):
                            cells.append(
                                CellSpec(n, k, backend, mitigate, shots, sample)
                            )
    return cells


def _backend_tag(name: str) -> int:
    """Stable 63-bit tag so solver seeds differ between backends."""
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def shared_b_vector(master_seed: int, n: int) -> np.ndarray:
    """The per-size right-hand side shared by all samples of that size."""
    rng = WalkRng(derive_seed(master_seed, _TAG_SHARED_B, n))
    return np.array([rng.uniform(-1.0, 1.0) for _ in range(1 << n)])


def _plan_dict(plan: ExperimentPlan) -> dict:
    return {
        "sizes": list(plan.sizes),
        "ks_by_size": {str(n): list(ks) for n, ks in plan.ks_by_size.items()},
        "shot_grid": list(plan.shot_grid),
        "samples_per_cell": plan.samples_per_cell,
        "gamma": plan.gamma,
        "epsilon": plan.epsilon,
        "backends": list(plan.backends),
        "mitigation_modes": ["on" if m else "off" for m in plan.mitigation_modes],
        "master_seed": plan.master_seed,
        "shared_b": plan.shared_b,
        "max_retries": plan.max_retries,
    }


def compute_run_id(plan: ExperimentPlan) -> str:
    """Deterministic run identifier; excludes out_dir and workers on purpose."""
    canonical = json.dumps(_plan_dict(plan), sort_keys=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


def _noise_tuple(params: NoiseParams) -> tuple:
    return (
        params.t1_us,
        params.t2_us,
        params.cnot_error,
        params.readout_error,
        params.time_1q_ns,
        params.time_2q_ns,
        params.time_measure_ns,
        params.enabled,
    )


def _run_cell(args: tuple) -> dict:
    (
        run_id,
        cell,
        gamma,
        epsilon,
        master_seed,
        shared_b,
        max_retries,
        noise_tuple,
    ) = args
    noise = NoiseParams(*noise_tuple)
    inst_seed = derive_seed(master_seed, _TAG_INSTANCE, cell.n, cell.sample)
    b = shared_b_vector(master_seed, cell.n) if shared_b else None
    instance = generate_problem(cell.n, cell.k, gamma, inst_seed, b=b)
    config = SolverConfig(
        shots=cell.shots,
        epsilon=epsilon,
        mitigation=cell.mitigate,
        max_retries=max_retries,
        noise=noise,
        master_seed=derive_seed(
            master_seed, _TAG_SOLVER, cell.n, cell.k, cell.sample,
            _backend_tag(cell.backend),
        ),
    )
    row = {
        "run_id": run_id,
        "n": cell.n,
        "N": instance.dim,
        "sparsity_level": instance.sparsity_level,
        "k": cell.k,
        "shots": cell.shots,
        "sample_index": cell.sample,
        "backend": cell.backend,
        "mitigation": "on" if cell.mitigate else "off",
        "gamma": gamma,
        "c": config.effective_c(gamma),
        "condition_number": instance.condition_number,
        "seed": inst_seed,
    }
    try:
        report = solve(instance, config)
    except Exception as exc:  # error rows are recorded, not fatal to the sweep
        row["relative_error"] = f"ERROR:{type(exc).__name__}"
        row["total_invalid"] = ""
        row["total_retries"] = ""
        row["wall_time_ms"] = ""
        return row
    row["relative_error"] = report.relative_error
    row["total_invalid"] = report.invalid_stats.total_invalid
    row["total_retries"] = report.invalid_stats.total_retries
    row["wall_time_ms"] = report.wall_time_s * 1000.0
    return row


def resolve_backends(plan: ExperimentPlan) -> dict[str, NoiseParams]:
    return {name: noise_backend(name) for name in plan.backends}


def run_plan(
    plan: ExperimentPlan,
    noise_map: dict[str, NoiseParams] | None = None,
) -> SweepResult:
    """Run every cell, write results.csv plus manifest.json, return the rows.

    `noise_map` overrides backend-name resolution; a manifest rerun passes the
    recorded parameter values so the CSV reproduces even if a config file
    named by the plan has changed or disappeared.
    """
    import os

    if noise_map is None:
        noise_map = resolve_backends(plan)
    run_id = compute_run_id(plan)
    cells = plan_cells(plan)
    tasks = [
        (
            run_id,
            cell,
            plan.gamma,
            plan.epsilon,
            plan.master_seed,
            plan.shared_b,
            plan.max_retries,
            _noise_tuple(noise_map[cell.backend]),
        )
        for cell in cells
    ]
    if plan.workers > 1:
        chunk = max(1, len(tasks) // (plan.workers * 8))
        with ProcessPoolExecutor(max_workers=plan.workers) as pool:
            rows = list(pool.map(_run_cell, tasks, chunksize=chunk))
    else:
        rows = [_run_cell(t) for t in tasks]
    os.makedirs(plan.out_dir, exist_ok=True)
    csv_path = os.path.join(plan.out_dir, "results.csv")
    manifest_path = os.path.join(plan.out_dir, "manifest.json")
    write_rows_csv(rows, csv_path)
    write_manifest(plan, noise_map, run_id, manifest_path)
    return SweepResult(rows, csv_path, manifest_path, run_id)


def _format_value(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv_text(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for row in rows:
        writer.writerow([_format_value(row[f]) for f in CSV_FIELDS])
    return buf.getvalue()


def write_rows_csv(rows: list[dict], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(rows_to_csv_text(rows))


def load_rows_csv(path: str) -> list[dict]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_FIELDS:
            raise ValueError(f"unexpected CSV header: {header}")
        return [dict(zip(CSV_FIELDS, row)) for row in reader]


def write_manifest(
    plan: ExperimentPlan,
    noise_map: dict[str, NoiseParams],
    run_id: str,
    path: str,
) -> None:
    doc = {
        "format": MANIFEST_FORMAT,
        "run_id": run_id,
        "plan": _plan_dict(plan),
        "noise_params": {
            name: {
                "t1_us": p.t1_us,
                "t2_us": p.t2_us,
                "cnot_error": p.cnot_error,
                "readout_error": p.readout_error,
                "time_1q_ns": p.time_1q_ns,
                "time_2q_ns": p.time_2q_ns,
                "time_measure_ns": p.time_measure_ns,
                "enabled": p.enabled,
            }
            for name, p in noise_map.items()
        },
        "csv": "results.csv",
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_manifest(
    path: str, out_dir: str | None = None, workers: int = 1
) -> tuple[ExperimentPlan, dict[str, NoiseParams]]:
    """Reconstruct a plan (and recorded noise values) from a manifest."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != MANIFEST_FORMAT:
        raise ValueError(f"not a {MANIFEST_FORMAT} file: {path}")
    p = doc["plan"]
    plan = ExperimentPlan(
        sizes=tuple(p["sizes"]),
        ks_by_size={int(n): tuple(ks) for n, ks in p["ks_by_size"].items()},
        shot_grid=tuple(p["shot_grid"]),
        samples_per_cell=p["samples_per_cell"],
        gamma=p["gamma"],
        epsilon=p["epsilon"],
        backends=tuple(p["backends"]),
        mitigation_modes=tuple(m == "on" for m in p["mitigation_modes"]),
        master_seed=p["master_seed"],
        out_dir=out_dir if out_dir is not None else ".",
        shared_b=p["shared_b"],
        max_retries=p["max_retries"],
        workers=workers,
    )
    noise_map = {
        name: NoiseParams(**vals) for name, vals in doc["noise_params"].items()
    }
    return plan, noise_map


AGGREGATE_FIELDS = (
    "n",
    "N",
    "k",
    "sparsity_level",
    "backend",
    "mitigation",
    "shots",
    "count",
    "mean_relative_error",
    "sem_relative_error",
    "mean_total_invalid",
    "sem_total_invalid",
    "mean_total_retries",
    "sem_total_retries",
    "flagged",
)


def _mean_sem(values: list[float]) -> tuple[float, float]:
    mean = sum(values) / len(values)
    if len(values) < 2:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (len(values) - 1)
    return mean, math.sqrt(var) / math.sqrt(len(values))


def aggregate(rows: list[dict]) -> list[dict]:
    """Per-cell mean and standard error over sample_index.

    Error-marked rows are skipped. A group left with a single row keeps
    SEM 0 by convention and is flagged.
    """
    if not rows:
        raise ValueError("no rows to aggregate")
    groups: dict[tuple, list[dict]] = {}
    order: list[tuple] = []
    for row in rows:
        rel = str(row["relative_error"])
        if rel.startswith("ERROR"):
            continue
        key = (
            int(row["n"]),
            int(row["k"]),
            str(row["backend"]),
            str(row["mitigation"]),
            int(row["shots"]),
        )
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(row)
    if not groups:
        raise ValueError("every row is an error row; nothing to aggregate")
    out = []
    for key in order:
        group = groups[key]
        n, k, backend, mitigation, shots = key
        rel_mean, rel_sem = _mean_sem([float(r["relative_error"]) for r in group])
        inv_mean, inv_sem = _mean_sem([float(r["total_invalid"]) for r in group])
        ret_mean, ret_sem = _mean_sem([float(r["total_retries"]) for r in group])
        out.append(
            {
                "n": n,
                "N": int(group[0]["N"]),
                "k": k,
                "sparsity_level": float(group[0]["sparsity_level"]),
                "backend": backend,
                "mitigation": mitigation,
                "shots": shots,
                "count": len(group),
                "mean_relative_error": rel_mean,
                "sem_relative_error": rel_sem,
                "mean_total_invalid": inv_mean,
                "sem_total_invalid": inv_sem,
                "mean_total_retries": ret_mean,
                "sem_total_retries": ret_sem,
                "flagged": "yes" if len(group) < 2 else "no",
            }
        )
    return out


def write_aggregate_csv(agg_rows: list[dict], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(AGGREGATE_FIELDS)
        for row in agg_rows:
            writer.writerow([_format_value(row[f]) for f in AGGREGATE_FIELDS])


def load_aggregate_csv(path: str) -> list[dict]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != AGGREGATE_FIELDS:
            raise ValueError(f"unexpected aggregate CSV header: {header}")
        out = []
        for raw in reader:
            row = dict(zip(AGGREGATE_FIELDS, raw))
            for name in ("n", "N", "k", "shots", "count"):
                row[name] = int(row[name])
            for name in (
                "sparsity_level",
                "mean_relative_error",
                "sem_relative_error",
                "mean_total_invalid",
                "sem_total_invalid",
                "mean_total_retries",
                "sem_total_retries",
            ):
                row[name] = float(row[name])
            out.append(row)
        return out
