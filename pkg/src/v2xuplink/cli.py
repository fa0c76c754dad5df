"""Command line interface.

    v2x run <spec.ini> [--preset NAME] [--trials N] [--seed S] [--out DIR]
            [--no-sim] [--mode paper|physical]
    v2x bench [--trials N] [--seed S]

`run` accepts an experiment file, a preset name, or both (the file extends
the preset; flags override both). Environment: V2X_THREADS caps the worker
pool for sweep rows, V2X_BACKEND selects the kernel backend.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from . import bench, experiments

_MODE_ALIASES = {
    "paper": "paper_faithful",
    "paper_faithful": "paper_faithful",
    "physical": "physical",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="v2x",
        description="Analytic + Monte Carlo reliability analysis of cellular "
        "V2X uplinks over a line-process road model.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment (file and/or preset)")
    run_p.add_argument("spec", nargs="?", help="experiment INI file")
    run_p.add_argument("--preset", choices=sorted(experiments.PRESETS),
                       help="named parameter set")
    run_p.add_argument("--trials", type=int, help="Monte Carlo trials per point")
    run_p.add_argument("--seed", type=int, help="root RNG seed")
    run_p.add_argument("--out", default="out", help="output directory (default: out)")
    run_p.add_argument("--no-sim", action="store_true",
                       help="analytic table only, skip Monte Carlo")
    run_p.add_argument("--mode", choices=sorted(_MODE_ALIASES),
                       help="interference exclusion mode")

    bench_p = sub.add_parser("bench", help="benchmark the kernel backends")
    bench_p.add_argument("--trials", type=int, default=20_000)
    bench_p.add_argument("--seed", type=int, default=42)
    return parser


def _resolve_spec(args) -> experiments.ExperimentSpec:
    mode = _MODE_ALIASES[args.mode] if args.mode else None
    if args.spec:
        return experiments.load_spec(
            args.spec, trials=args.trials, seed=args.seed, mode=mode,
            preset=args.preset,
        )
    if not args.preset:
        raise experiments.ExperimentSpecError(
            "nothing to run: give an experiment file or --preset"
        )
    spec = experiments.make_preset_spec(
        args.preset,
        trials=args.trials if args.trials is not None else 100_000,
        seed=args.seed if args.seed is not None else 42,
        mode=mode or "paper_faithful",
    )
    return spec


def _cmd_run(args) -> int:
    try:
        spec = _resolve_spec(args)
    except experiments.ExperimentSpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.no_sim:
        spec = replace(spec, sim=replace(spec.sim, trials=0))
    result = experiments.run(spec)

    name = spec.preset or "experiment"
    os.makedirs(args.out, exist_ok=True)
    csv_path = spec.csv_path or os.path.join(args.out, f"{name}.csv")
    svg_path = spec.svg_path or os.path.join(args.out, f"{name}.svg")
    experiments.emit_csv(result, csv_path)
    try:
        experiments.emit_plot(result, svg_path)
    except ValueError as exc:
        print(f"plot skipped: {exc}", file=sys.stderr)
        svg_path = None

    n_fail = sum(1 for row in result.rows if not row.ok)
    print(f"{name}: {len(result.rows)} rows, {n_fail} failed")
    print(f"  csv: {csv_path}")
    if svg_path:
        print(f"  svg: {svg_path}")
    if n_fail:
        for row in result.rows:
            if not row.ok:
                print(f"  row {result.parameter}={row.value:g}: {row.error}",
                      file=sys.stderr)
        return 1
    return 0


def _cmd_bench(args) -> int:
    rows = bench.run_benchmark(trials=args.trials, seed=args.seed)
    print(bench.format_report(rows, args.trials))
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    return _cmd_bench(args)


if __name__ == "__main__":
    sys.exit(main())
