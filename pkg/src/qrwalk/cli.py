"""Command-line interface.

Subcommands: generate (emit a problem instance), solve (one instance),
sweep (run an experiment plan or rerun a manifest), aggregate, plot, table1.

Exit codes: 0 success, 1 usage error, 2 runtime/solver error, 3 incomplete
data in a reporting command.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import harness, plotting
from .model import generate_problem, instance_record, parse_instance_record
from .noise import NOISE_PRESETS, noise_backend
from .rng import derive_seed
from .solver import RetryExhaustedError, SolverConfig, report_text, solve

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2
EXIT_INCOMPLETE = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _backend_choices() -> str:
    return "noiseless|" + "|".join(sorted(NOISE_PRESETS)) + "|<config-file>"


def _build_parser() -> _Parser:
    parser = _Parser(prog="qrwalk", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="emit a problem instance record")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--k", type=int, default=0)
    gen.add_argument("--gamma", type=float, default=0.5)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)

    sol = sub.add_parser("solve", help="solve one instance")
    sol.add_argument("--instance", help="instance record file (from generate)")
    sol.add_argument("--n", type=int)
    sol.add_argument("--k", type=int, default=0)
    sol.add_argument("--gamma", type=float, default=0.5)
    sol.add_argument("--epsilon", type=float, default=0.01)
    sol.add_argument("--shots", type=int, default=1008)
    sol.add_argument("--backend", default="noiseless", help=_backend_choices())
    sol.add_argument("--mitigate", choices=("on", "off"), default="off")
    sol.add_argument("--max-retries", type=int, default=1000)
    sol.add_argument("--seed", type=int, default=0)
    sol.add_argument("--out")

    sw = sub.add_parser("sweep", help="run an experiment plan")
    sw.add_argument("--manifest", help="rerun a recorded sweep manifest")
    sw.add_argument("--sizes", default="2,3", help="comma list of n values")
    sw.add_argument(
        "--ks",
        default="all",
        help="'all' or semicolon-separated comma lists, one per size",
    )
    sw.add_argument(
        "--shot-grid",
        default=",".join(str(s) for s in harness.DEFAULT_SHOT_GRID),
    )
    sw.add_argument("--shots", type=int, help="single shot count instead of a grid")
    sw.add_argument("--samples", type=int, default=50)
    sw.add_argument("--gamma", type=float, default=0.5)
    sw.add_argument("--epsilon", type=float, default=0.01)
    sw.add_argument(
        "--backend",
        default="noiseless",
        help=f"comma list of {_backend_choices()}",
    )
    sw.add_argument("--mitigate", choices=("on", "off", "both"), default="off")
    sw.add_argument("--seed", type=int, default=0)
    sw.add_argument("--per-sample-b", action="store_true",
                    help="draw a fresh b per sample instead of one per size")
    sw.add_argument("--max-retries", type=int, default=1000)
    sw.add_argument("--workers", type=int, default=1)
    sw.add_argument("--out", required=True, help="output directory")

    ag = sub.add_parser("aggregate", help="per-cell mean and standard error")
    ag.add_argument("--in", dest="input", required=True)
    ag.add_argument("--out", required=True)

    pl = sub.add_parser("plot", help="emit SVG plots from sweep results")
    pl.add_argument("--in", dest="input", required=True,
                    help="raw results.csv or an aggregate csv")
    pl.add_argument("--out-dir", required=True)

    tb = sub.add_parser("table1", help="two-mode percentage table, N=16 / 1008 shots")
    tb.add_argument("--in", dest="input", required=True)
    tb.add_argument("--backend", default="fake-casablanca")
    tb.add_argument("--out")
    return parser


def _cmd_generate(args) -> int:
    inst = generate_problem(args.n, args.k, args.gamma, args.seed)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(instance_record(inst))
    print(
        f"wrote {args.out}: n={inst.n} N={inst.dim} k={inst.k} "
        f"sparsity={inst.sparsity_level:g} cond={inst.condition_number:.4g}"
    )
    return EXIT_OK


def _cmd_solve(args) -> int:
    if args.instance:
        with open(args.instance, "r", encoding="utf-8") as fh:
            inst = parse_instance_record(fh.read())
    else:
        if args.n is None:
            raise _UsageError("solve needs --instance or --n")
        inst = generate_problem(
            args.n, args.k, args.gamma, derive_seed(args.seed, 1, args.n, 0)
        )
    config = SolverConfig(
        shots=args.shots,
        epsilon=args.epsilon,
        mitigation=args.mitigate == "on",
        max_retries=args.max_retries,
        noise=noise_backend(args.backend),
        master_seed=derive_seed(args.seed, 2, inst.n, inst.k, 0, 0),
    )
    report = solve(inst, config)
    text = report_text(report, inst)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    print(text, end="")
    return EXIT_OK


def _parse_sweep_plan(args) -> tuple[harness.ExperimentPlan, dict | None]:
    if args.manifest:
        return harness.load_manifest(
            args.manifest, out_dir=args.out, workers=args.workers
        )
    sizes = tuple(int(v) for v in args.sizes.split(","))
    if args.ks == "all":
        ks_by_size = {n: tuple(range(n + 1)) for n in sizes}
    else:
        groups = args.ks.split(";")
        if len(groups) == 1 and len(sizes) > 1:
            groups = groups * len(sizes)
        if len(groups) != len(sizes):
            raise _UsageError("--ks needs one comma list per size")
        ks_by_size = {
            n: tuple(int(v) for v in grp.split(","))
            for n, grp in zip(sizes, groups)
        }
    shot_grid = (
        (args.shots,)
        if args.shots
        else tuple(int(v) for v in args.shot_grid.split(","))
    )
    modes = {"on": (True,), "off": (False,), "both": (False, True)}[args.mitigate]
    plan = harness.ExperimentPlan(
        sizes=sizes,
        ks_by_size=ks_by_size,
        shot_grid=shot_grid,
        samples_per_cell=args.samples,
        gamma=args.gamma,
        epsilon=args.epsilon,
        backends=tuple(args.backend.split(",")),
        mitigation_modes=modes,
        master_seed=args.seed,
        out_dir=args.out,
        shared_b=not args.per_sample_b,
        max_retries=args.max_retries,
        workers=args.workers,
    )
    return plan, None


def _cmd_sweep(args) -> int:
    plan, noise_map = _parse_sweep_plan(args)
    result = harness.run_plan(plan, noise_map=noise_map)
    n_err = sum(
        1 for r in result.rows if str(r["relative_error"]).startswith("ERROR")
    )
    print(
        f"run {result.run_id}: {len(result.rows)} rows "
        f"({n_err} error rows) -> {result.csv_path}"
    )
    print(f"manifest -> {result.manifest_path}")
    return EXIT_OK


def _cmd_aggregate(args) -> int:
    rows = harness.load_rows_csv(args.input)
    try:
        agg = harness.aggregate(rows)
    except ValueError as exc:
        print(f"incomplete data: {exc}", file=sys.stderr)
        return EXIT_INCOMPLETE
    harness.write_aggregate_csv(agg, args.out)
    print(f"{len(agg)} aggregated cells -> {args.out}")
    return EXIT_OK


def _load_any_rows(path: str) -> list[dict]:
    try:
        return harness.load_aggregate_csv(path)
    except ValueError:
        pass
    rows = harness.load_rows_csv(path)
    try:
        return harness.aggregate(rows)
    except ValueError as exc:
        raise _IncompleteData(str(exc)) from None


class _IncompleteData(Exception):
    pass


def _cmd_plot(args) -> int:
    try:
        agg = _load_any_rows(args.input)
    except _IncompleteData as exc:
        print(f"incomplete data: {exc}", file=sys.stderr)
        return EXIT_INCOMPLETE
    os.makedirs(args.out_dir, exist_ok=True)
    groups: dict[tuple, list[dict]] = {}
    for row in agg:
        groups.setdefault(
            (int(row["n"]), str(row["backend"]), str(row["mitigation"])), []
        ).append(row)
    # shared y ranges per (n, backend) so mitigated/unmitigated pairs compare
    written = []
    pair_axes: dict[tuple, plotting.AxesSpec] = {}
    for (n, backend, mode), rows in groups.items():
        pair_key = (n, backend)
        if pair_key not in pair_axes:
            pair = [g for key, g in groups.items() if key[:2] == pair_key]
            pair_axes[pair_key] = plotting.axes_for_groups(
                pair, "mean_relative_error", "sem_relative_error"
            )
    for (n, backend, mode), rows in sorted(groups.items(), key=lambda kv: kv[0]):
        name = f"relerr_n{n}_{backend}_mitigation-{mode}.svg"
        path = os.path.join(args.out_dir, name)
        title = f"N={1 << n}, {backend}, mitigation {mode}"
        plotting.emit_plot(rows, pair_axes[(n, backend)], path, title)
        written.append(path)
        print(f"wrote {path}")
    if not written:
        print("no plottable groups found", file=sys.stderr)
        return EXIT_INCOMPLETE
    return EXIT_OK


def _cmd_table1(args) -> int:
    try:
        agg = _load_any_rows(args.input)
    except _IncompleteData as exc:
        print(f"incomplete data: {exc}", file=sys.stderr)
        return EXIT_INCOMPLETE
    text, complete = plotting.emit_table1(agg, backend=args.backend)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    print(text, end="")
    if not complete:
        print("table1: missing cells (see '--' entries)", file=sys.stderr)
        return EXIT_INCOMPLETE
    return EXIT_OK


_COMMANDS = {
    "generate": _cmd_generate,
    "solve": _cmd_solve,
    "sweep": _cmd_sweep,
    "aggregate": _cmd_aggregate,
    "plot": _cmd_plot,
    "table1": _cmd_table1,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RetryExhaustedError, ArithmeticError, OSError,
            np.linalg.LinAlgError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
