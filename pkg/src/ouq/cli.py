"""Command-line front end.

    ouq solve <config> [--seed N] [--runs N] [--output-dir PATH]
    ouq eval <response> <coord> [<coord> ...]

`solve` executes `runs` independent seeded restarts and writes, per run k,
`trace_<k>.csv` (generation, best_cost, then the flattened parameters in
layout order) and `result_<k>.json` (bound, expectation, maximizer
measure), plus a `summary.json` naming the best run.  Exit codes: 0 ok,
1 usage or configuration error, 2 solver error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .config import RunConfig, load_config
from .errors import ConfigError, OUQError
from .measures import (
    DiscreteMeasure,
    ParamLayout,
    ProductMeasure,
    pack,
)
from .registry import check_arity, get_response
from .solver import MeanConstraint, OUQProblem, ouq_solve


def measure_to_dict(p: ProductMeasure) -> dict:
    return {
        "factors": [
            {
                "weights": list(f.weights()),
                "positions": list(f.coords()),
                "lower": f.lower,
                "upper": f.upper,
            }
            for f in p.factors
        ]
    }


def measure_from_dict(doc: dict) -> ProductMeasure:
    return pack(
        [
            DiscreteMeasure.from_arrays(
                f["weights"], f["positions"], f["lower"], f["upper"]
            )
            for f in doc["factors"]
        ]
    )


def _trace_header(layout: ParamLayout) -> list[str]:
    cols = ["generation", "best_cost"]
    for i, n in enumerate(layout.npts_per_dim):
        cols.extend(f"w{i}_{j}" for j in range(n))
        cols.extend(f"x{i}_{j}" for j in range(n))
    return cols


def build_problem(config: RunConfig, seed: int) -> OUQProblem:
    entry = get_response(config.response)
    if len(config.npts_per_dim) != entry.arity:
        raise ConfigError(
            f"response {entry.name!r} takes {entry.arity} axes, "
            f"config has {len(config.npts_per_dim)}"
        )
    layout = ParamLayout(config.npts_per_dim, config.bounds_per_dim)
    return OUQProblem(
        response=entry.func,
        layout=layout,
        constraint=MeanConstraint.from_band(*config.mean_band),
        failure_tolerance=config.failure_tolerance,
        outer=replace(config.outer, seed=seed),
        inner=replace(config.inner, seed=seed),
        outer_termination=config.outer_termination,
        inner_max_generations=config.inner_max_generations,
    )


def run_solve(config: RunConfig) -> int:
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    layout = ParamLayout(config.npts_per_dim, config.bounds_per_dim)
    header = _trace_header(layout)

    best_run = None
    best_bound = None
    bounds = []
    for k in range(config.runs):
        seed = config.seed + k
        problem = build_problem(config, seed)
        trace_path = out_dir / f"trace_{k}.csv"
        with open(trace_path, "w") as fh:
            fh.write(",".join(header) + "\n")

            def hook(generation, best_cost, best_params):
                row = [str(generation), repr(best_cost)]
                row.extend(repr(v) for v in best_params.tolist())
                fh.write(",".join(row) + "\n")

            result = ouq_solve(problem, trace_hook=hook)

        doc = {
            "probability_bound": result.probability_bound,
            "expectation": result.expectation_at_maximizer,
            "maximizer": measure_to_dict(result.maximizer),
            "seed": seed,
            "generations": result.report.generations_run,
            "evaluations": result.report.evaluations,
            "terminated_by": result.report.terminated_by,
        }
        with open(out_dir / f"result_{k}.json", "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")

        bounds.append(result.probability_bound)
        if best_bound is None or result.probability_bound > best_bound:
            best_bound = result.probability_bound
            best_run = k
        print(f"run {k} (seed {seed}): bound = {result.probability_bound:.6f}")

    summary = {
        "best_run": best_run,
        "best_bound": best_bound,
        "bounds": bounds,
        "runs": config.runs,
        "base_seed": config.seed,
    }
    with open(out_dir / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    print(f"best bound = {best_bound:.6f} (run {best_run})")
    return 0


def eval_point(name: str, coords: list[float]) -> int:
    entry = get_response(name)
    check_arity(entry, len(coords))
    value = entry.func(*coords)
    print(f"{value:.6f}")
    if entry.limit_func is not None:
        limit = entry.limit_func(*coords[:-1])
        print(f"v_bl={limit:.6f}")
    return 0


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the documented usage code is 1
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(1)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ouq", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run the OUQ solver from a config file")
    p_solve.add_argument("config", help="path to a YAML run configuration")
    p_solve.add_argument("--seed", type=int, default=None, help="override the base seed")
    p_solve.add_argument("--runs", type=int, default=None, help="override the restart count")
    p_solve.add_argument("--output-dir", default=None, help="override the artifact directory")

    p_eval = sub.add_parser("eval", help="evaluate a registered response pointwise")
    p_eval.add_argument("response", help="registered response name")
    p_eval.add_argument("coords", nargs="+", type=float, help="input coordinates")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code or 0

    try:
        if args.command == "eval":
            return eval_point(args.response, args.coords)

        config = load_config(args.config)
        if args.seed is not None:
            config = replace(config, seed=args.seed)
        if args.runs is not None:
            if args.runs < 1:
                print("--runs must be >= 1", file=sys.stderr)
                return 1
            config = replace(config, runs=args.runs)
        if args.output_dir is not None:
            config = replace(config, output_dir=args.output_dir)
        return run_solve(config)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    except OUQError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
