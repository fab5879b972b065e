"""Command-line harness: ``run`` one cell, ``sweep`` seeds x optimizers, ``summarize`` a manifest.

Example
-------
Run the compiling task with the latency-aware Adam and the bundled
superconducting latency profile::

    wecans run --task compile --n 3 --depth 3 --optimizer we-adamcans \\
        --seed 0 --latency superconducting --budget-time 2000 --out trace.ndjson
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import zlib
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Sequence

import numpy as np

from .clock import load_latency
from .optimizers import Budget, ConfigError, OptimizerConfig, OptimizerKind, RunTrace, run_optimizer
from .pauli import ObservableError
from .statevector import CircuitError
from .tasks import ANSATZE, TASK_KINDS, TaskError, TaskSpec, build_task
from .traces import AXES, median_curve, time_to_threshold, trace_emit, trace_parse

log = logging.getLogger("wecans")

EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_TASK = 3
MANIFEST_VERSION = 1


def parse_seeds(text: str) -> list[int]:
    """``"0..29"`` (inclusive) or ``"0,3,7"``."""
    seeds: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            seeds.extend(range(int(lo), int(hi) + 1))
        elif part:
            seeds.append(int(part))
    if not seeds:
        raise ConfigError(f"no seeds in {text!r}")
    return seeds


def stream_seed(master: int, seed: int, salt: str) -> np.random.SeedSequence:
    return np.random.SeedSequence([master, seed, zlib.crc32(salt.encode())])


def _cell_from_args(args, optimizer: str, seed: int) -> dict:
    budget = {
        "max_time": args.budget_time,
        "max_cost": args.budget_cost,
        "max_shots": args.budget_shots,
        "max_iterations": args.max_iterations,
    }
    task = {
        "kind": args.task,
        "n": args.n,
        "depth": args.depth,
        "task_seed": seed if args.task_seed is None else args.task_seed,
        "J": args.J,
        "g": args.g,
        "path": args.path,
        "ansatz": args.ansatz,
    }
    config = {
        "kind": optimizer,
        "budget": budget,
        "alpha": args.alpha,
        "L": args.L,
        "s_min": args.s_min,
        "mu": args.mu,
        "r": args.r,
        "clipping": args.clipping,
        "shots_per_eval": args.shots,
        "seed": seed,
        "exact": args.exact,
        "mode": args.mode,
    }
    return {
        "task": task,
        "config": config,
        "latency": args.latency,
        "pricing": args.pricing,
        "master_seed": args.master_seed,
    }


def execute_cell(cell: dict) -> RunTrace:
    """Run one (task, optimizer, seed) cell described by plain data."""
    task = build_task(TaskSpec(**cell["task"]))
    config = OptimizerConfig.from_dict(cell["config"])
    latency = load_latency(cell["latency"])
    pricing = load_latency(cell["pricing"])
    seed = config.seed
    # initial point shared by every optimizer for a given seed
    theta0 = np.random.default_rng(stream_seed(cell["master_seed"], seed, "theta0")).uniform(
        0.0, 2 * math.pi, task.circuit.d
    )
    rng = np.random.default_rng(stream_seed(cell["master_seed"], seed, config.kind.value))
    trace = run_optimizer(task.circuit, task.obs, config, latency, rng, theta0=theta0, pricing=pricing)
    trace.header.update(
        {
            "task": task.spec.to_dict(),
            "reference_energy": task.reference_energy,
            "energy_scale": task.energy_scale,
            "master_seed": cell["master_seed"],
            "latency_source": str(cell["latency"]),
            "pricing_source": str(cell["pricing"]),
        }
    )
    return trace


def _execute_to(cell_and_path: tuple[dict, str]) -> str:
    cell, path = cell_and_path
    trace_emit(execute_cell(cell), path)
    return path


def _validate_budget(args) -> None:
    if all(v is None for v in (args.budget_time, args.budget_cost, args.budget_shots, args.max_iterations)):
        raise ConfigError("give at least one of --budget-time, --budget-cost, --budget-shots, --max-iterations")


def cmd_run(args) -> int:
    _validate_budget(args)
    cell = _cell_from_args(args, args.optimizer, args.seed)
    trace = execute_cell(cell)
    nd, mirror = trace_emit(trace, args.out)
    print(f"wrote {nd} ({len(trace)} iterations) and {mirror}")
    return 0


def _run_cells(jobs: list[tuple[dict, str]], workers: int) -> None:
    if workers <= 1:
        for job in jobs:
            _execute_to(job)
            log.info("finished %s", job[1])
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for path in pool.map(_execute_to, jobs):
            log.info("finished %s", path)


def cmd_sweep(args) -> int:
    out_dir = Path(args.out_dir)
    if args.manifest:
        with open(args.manifest, encoding="utf-8") as fh:
            source = json.load(fh)
        cells = [entry["cell"] for entry in source["cells"]]
        labels = [(entry["optimizer"], entry["seed"]) for entry in source["cells"]]
    else:
        _validate_budget(args)
        optimizers = [o.strip() for o in args.optimizers.split(",") if o.strip()]
        for o in optimizers:
            OptimizerKind(o)
        seeds = parse_seeds(args.seeds)
        cells, labels = [], []
        for o in optimizers:
            for s in seeds:
                cells.append(_cell_from_args(args, o, s))
                labels.append((o, s))
    out_dir.mkdir(parents=True, exist_ok=True)
    entries, jobs = [], []
    for cell, (o, s) in zip(cells, labels):
        rel = f"{o}/seed{s:03d}.ndjson"
        entries.append({"optimizer": o, "seed": s, "trace": rel, "cell": cell})
        jobs.append((cell, str(out_dir / rel)))
    manifest = {"version": MANIFEST_VERSION, "cells": entries}
    manifest_path = out_dir / "manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    _run_cells(jobs, args.workers)
    print(f"wrote {len(jobs)} traces and {manifest_path}")
    return 0


def load_manifest_traces(manifest_path: str | Path) -> dict[str, list[RunTrace]]:
    manifest_path = Path(manifest_path)
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    grouped: dict[str, list[RunTrace]] = {}
    for entry in manifest["cells"]:
        trace = trace_parse(manifest_path.parent / entry["trace"])
        grouped.setdefault(entry["optimizer"], []).append(trace)
    return grouped


def summarize(
    grouped: dict[str, list[RunTrace]],
    threshold: float,
    axis: str = "sim_time",
    points: int = 200,
) -> tuple[np.ndarray, dict[str, np.ndarray], dict[str, float]]:
    """Median curves on a shared log grid and per-optimizer time-to-threshold."""
    everything = [t for traces in grouped.values() for t in traces if len(t)]
    if not everything:
        raise ConfigError("manifest contains no non-empty traces")
    lo = max(min(t.column(axis)[0] for t in everything), 1e-12)
    hi = max(max(t.column(axis)[-1] for t in everything), lo * (1 + 1e-9))
    grid = np.geomspace(lo, hi, points)
    medians, reach = {}, {}
    for name, traces in grouped.items():
        curve = median_curve(traces, grid, axis=axis)
        medians[name] = curve.median
        reach[name] = time_to_threshold(curve, threshold)
    return grid, medians, reach


def cmd_summarize(args) -> int:
    if args.axis not in AXES:
        raise ConfigError(f"--axis must be one of {AXES}")
    grouped = load_manifest_traces(args.manifest)
    grid, medians, reach = summarize(grouped, args.threshold, args.axis, args.grid_points)
    out_dir = Path(args.out_dir) if args.out_dir else Path(args.manifest).parent
    out_dir.mkdir(parents=True, exist_ok=True)
    names = sorted(medians)
    with open(out_dir / "median_curves.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([args.axis, *names])
        for i, x in enumerate(grid):
            writer.writerow([repr(float(x)), *(repr(float(medians[n][i])) for n in names)])
    ranked = sorted(names, key=lambda n: reach[n])
    with open(out_dir / "time_to_threshold.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["optimizer", f"{args.axis}_to_threshold", "threshold"])
        for n in ranked:
            writer.writerow([n, repr(reach[n]), repr(args.threshold)])
    width = max(len(n) for n in names)
    print(f"{'optimizer':<{width}}  {args.axis} to reach {args.threshold:g}")
    for n in ranked:
        value = "not reached" if math.isinf(reach[n]) else f"{reach[n]:.6g}"
        print(f"{n:<{width}}  {value}")
    return 0


def _add_cell_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--task", choices=TASK_KINDS, default="compile")
    p.add_argument("--n", type=int, default=3, help="qubit count")
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--task-seed", type=int, default=None, help="defaults to the run seed")
    p.add_argument("--J", type=float, default=1.0)
    p.add_argument("--g", type=float, default=1.5)
    p.add_argument("--path", default=None, help="Hamiltonian JSON (path or bundled name)")
    p.add_argument("--ansatz", choices=ANSATZE, default=None)
    p.add_argument("--latency", default="superconducting", help="profile path or bundled name")
    p.add_argument("--pricing", default="braket-rigetti", help="profile used for econ_cost")
    p.add_argument("--budget-time", type=float, default=None)
    p.add_argument("--budget-cost", type=float, default=None)
    p.add_argument("--budget-shots", type=int, default=None)
    p.add_argument("--max-iterations", type=int, default=None)
    p.add_argument("--shots", type=int, default=100, help="shots per evaluation for sgd/adam")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--L", type=float, default=None)
    p.add_argument("--s-min", type=int, default=100)
    p.add_argument("--mu", type=float, default=0.99)
    p.add_argument("--r", type=float, default=0.75)
    p.add_argument("--clipping", action="store_true")
    p.add_argument("--exact", action="store_true", help="infinite-shot gradients")
    p.add_argument("--mode", choices=("wrs", "deterministic"), default=None)
    p.add_argument("--master-seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wecans", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one (task, optimizer, seed)")
    _add_cell_options(run_p)
    run_p.add_argument("--optimizer", choices=[k.value for k in OptimizerKind], required=True)
    run_p.add_argument("--seed", type=int, default=0)
    run_p.add_argument("--out", default="trace.ndjson")
    run_p.set_defaults(func=cmd_run)

    sweep_p = sub.add_parser("sweep", help="fan out over seeds and optimizers")
    _add_cell_options(sweep_p)
    sweep_p.add_argument("--optimizers", default="we-adamcans,icans")
    sweep_p.add_argument("--seeds", default="0..9")
    sweep_p.add_argument("--out-dir", required=True)
    sweep_p.add_argument("--workers", type=int, default=1)
    sweep_p.add_argument("--manifest", default=None, help="re-run the cells of an existing manifest")
    sweep_p.set_defaults(func=cmd_sweep)

    sum_p = sub.add_parser("summarize", help="median curves and time-to-threshold table")
    sum_p.add_argument("--manifest", required=True)
    sum_p.add_argument("--threshold", type=float, default=1e-3)
    sum_p.add_argument("--axis", default="sim_time")
    sum_p.add_argument("--grid-points", type=int, default=200)
    sum_p.add_argument("--out-dir", default=None)
    sum_p.set_defaults(func=cmd_summarize)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.DEBUG if args.verbose >= 2 else logging.INFO if args.verbose else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (TaskError, CircuitError, ObservableError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TASK
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
