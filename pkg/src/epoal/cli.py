"""Command-line entry point: solver traces, benchmarks, and certification.

Subcommands and exit codes:

  trace    JSON-lines per-iteration trace of one solver run   0 ok, 2 diverged
  bench    CSV of aggregated benchmark results + JSON sidecar 0 ok, 1 harness error
  certify  JSON certificate for a stored model                0 certified, 3 not

Usage errors exit 64, malformed data files exit 65.  Every output file
starts with a metadata header carrying the tool version, the fully
resolved configuration and the seed; apart from wall-clock columns,
outputs are a pure function of that header.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import certify_epo
from .harness import GridSpec, HarnessError, run_experiment
from .problems import CONVEX, FIG1, NONCONVEX, load_problem, make_problem, sample_initial
from .solvers import (ALGORITHMS, EPO_AL, SMOOTH_MAX, SUBGRADIENT, DivergenceError,
                      SolverConfig, run)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_DIVERGED = 2
EXIT_NOT_CERTIFIED = 3
EXIT_USAGE = 64
EXIT_DATA = 65

_SHORT_KINDS = {"convex": CONVEX, "nonconvex": NONCONVEX}

CSV_COLUMNS = ["kind", "algorithm", "K", "d", "trials", "n_censored",
               "i_o_mean", "i_o_ci_low", "i_o_ci_high",
               "t_o_mean", "t_o_ci_low", "t_o_ci_high", "master_seed"]


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags by default; the documented code is 64.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> list[float]:
    try:
        return [float(piece) for piece in text.split(",") if piece != ""]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(piece) for piece in text.split(",") if piece != ""]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="epoal", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"epoal {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    trace = sub.add_parser("trace", help="write a per-iteration JSON-lines trace")
    kind = trace.add_mutually_exclusive_group(required=True)
    kind.add_argument("--kind", choices=sorted(_SHORT_KINDS))
    kind.add_argument("--fig1", action="store_true",
                      help="two-objective visualization problem (K=2)")
    trace.add_argument("--d", type=int, required=True)
    trace.add_argument("--K", type=int)
    trace.add_argument("--algo", choices=ALGORITHMS, required=True)
    trace.add_argument("--mu", type=float, required=True)
    trace.add_argument("--eta", type=float)
    trace.add_argument("--tau", type=float)
    trace.add_argument("--r", help="comma-separated preference weights (default uniform)")
    trace.add_argument("--iters", type=int, default=1000)
    trace.add_argument("--seed", type=int, default=0)
    trace.add_argument("--out", help="output path (default: stdout)")

    bench = sub.add_parser("bench", help="run the benchmark protocol, write CSV")
    bench.add_argument("--kinds", required=True,
                       help="comma-separated families: convex,nonconvex")
    bench.add_argument("--K", required=True, help="comma-separated objective counts")
    bench.add_argument("--d", type=int, required=True)
    bench.add_argument("--trials", type=int, default=30)
    bench.add_argument("--algos", default=",".join(ALGORITHMS))
    bench.add_argument("--seed", type=int, default=0, help="master seed")
    bench.add_argument("--epsilon", type=float, default=0.01)
    bench.add_argument("--max-iter", type=int, default=1000)
    bench.add_argument("--jobs", type=int, default=1)
    bench.add_argument("--timing-reps", type=int, default=3)
    bench.add_argument("--out", required=True, help="CSV output path")

    certify = sub.add_parser("certify", help="certify a stored model vector")
    certify.add_argument("--problem", required=True, help="problem record file")
    certify.add_argument("--r", required=True, help="comma-separated preference weights")
    certify.add_argument("--model", required=True,
                         help="model vector file, one coordinate per line")
    certify.add_argument("--fair-tol", type=float)
    certify.add_argument("--gap-tol", type=float)
    return parser


def _trace_lines(args) -> tuple[list[str], int]:
    if args.fig1:
        kind, K = FIG1, 2
        if args.K not in (None, 2):
            raise UsageError("--fig1 is a two-objective problem; omit --K or pass 2")
    else:
        if args.K is None:
            raise UsageError("--K is required unless --fig1 is given")
        kind, K = _SHORT_KINDS[args.kind], args.K
    if args.algo == EPO_AL and args.eta is None:
        raise UsageError("--eta is required for --algo epo-al")
    if args.algo == SMOOTH_MAX and args.tau is None:
        raise UsageError("--tau is required for --algo smooth-max")
    if args.iters < 0:
        raise UsageError("--iters must be non-negative")
    if not args.mu > 0:
        raise UsageError("--mu must be positive")
    if args.eta is not None and args.eta < 0:
        raise UsageError("--eta must be non-negative")
    if args.tau is not None and not args.tau > 0:
        raise UsageError("--tau must be positive")
    if args.d < 1:
        raise UsageError("--d must be at least 1")

    r = _float_list(args.r) if args.r else [1.0 / K] * K
    if len(r) != K:
        raise UsageError(f"--r has {len(r)} entries, problem has K={K}")
    if any(x <= 0 for x in r):
        raise UsageError("--r entries must be strictly positive")

    problem = make_problem(kind, args.d, K, args.seed)
    w0 = sample_initial(args.d, args.seed)
    config = SolverConfig(mu=args.mu, eta=args.eta, tau=args.tau,
                          max_iter=args.iters, seed=args.seed)
    header = {"type": "header", "tool": "epoal", "version": __version__,
              "command": "trace",
              "config": {"algorithm": args.algo, "kind": kind, "d": args.d, "K": K,
                         "r": r, "mu": args.mu, "eta": args.eta, "tau": args.tau,
                         "iters": args.iters, "seed": args.seed}}
    lines = [json.dumps(header)]

    def record_line(rec):
        row = {"iter": rec.iter, "jvals": [float(x) for x in rec.jvals],
               "minmax": rec.minmax, "fairness": rec.fairness}
        if args.algo == EPO_AL:
            row["p"] = [float(x) for x in rec.p_snapshot]
        if args.algo == SUBGRADIENT:
            row["active"] = rec.active_index
        return json.dumps(row)

    try:
        records = run(args.algo, problem, r, w0, config)
    except DivergenceError as err:
        lines.extend(record_line(rec) for rec in err.records)
        lines.append(json.dumps({"type": "error", "error": "divergence",
                                 "iteration": err.iteration, "message": str(err)}))
        return lines, EXIT_DIVERGED
    lines.extend(record_line(rec) for rec in records)
    return lines, EXIT_OK


def cmd_trace(args) -> int:
    lines, code = _trace_lines(args)
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


def cmd_bench(args) -> int:
    try:
        kinds = [_SHORT_KINDS[k] for k in args.kinds.split(",") if k]
    except KeyError as err:
        raise UsageError(f"unknown kind {err.args[0]!r}; choose from convex,nonconvex")
    K_values = _int_list(args.K)
    algos = [a for a in args.algos.split(",") if a]
    for algo in algos:
        if algo not in ALGORITHMS:
            raise UsageError(f"unknown algorithm {algo!r}")
    if args.trials < 3:
        raise UsageError("--trials must be at least 3")
    if not args.epsilon > 0:
        raise UsageError("--epsilon must be positive")
    if args.max_iter < 0:
        raise UsageError("--max-iter must be non-negative")
    if args.jobs < 1 or args.timing_reps < 1:
        raise UsageError("--jobs and --timing-reps must be at least 1")
    grid = GridSpec(max_iter=args.max_iter, epsilon=args.epsilon)

    aggregates = run_experiment(kinds, K_values, args.d, args.trials, args.seed,
                                algorithms=algos, grid=grid, jobs=args.jobs,
                                timing_reps=args.timing_reps)

    config = {"kinds": kinds, "K_values": K_values, "d": args.d,
              "trials": args.trials, "algorithms": algos, "master_seed": args.seed,
              "epsilon": grid.epsilon, "max_iter": grid.max_iter, "jobs": args.jobs}
    out = Path(args.out)
    with open(out, "w", newline="") as fh:
        fh.write("# " + json.dumps({"tool": "epoal", "version": __version__,
                                    "command": "bench", "config": config}) + "\n")
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for agg in aggregates:
            writer.writerow([agg.kind, agg.algorithm, agg.K, agg.d, agg.n_trials,
                             agg.n_censored, agg.i_o_mean, agg.i_o_ci_low,
                             agg.i_o_ci_high, agg.t_o_mean, agg.t_o_ci_low,
                             agg.t_o_ci_high, args.seed])

    sidecar = {"tool": "epoal", "version": __version__, "command": "bench",
               "config": config,
               "grids": {"mu": list(grid.mu_grid), "eta": list(grid.eta_grid),
                         "tau": list(grid.tau_grid)},
               "ci": {"method": "normal approximation on the trimmed sample "
                                "(one min and one max removed)",
                      "level": 0.99},
               "timing_note": "t_o_* columns are wall-clock measurements (median "
                              "of timing repetitions) and vary across reruns; all "
                              "other columns are a pure function of the config "
                              "block above"}
    out.with_suffix(".meta.json").write_text(json.dumps(sidecar, indent=2) + "\n")
    return EXIT_OK


def _read_model_file(path) -> np.ndarray:
    try:
        raw = Path(path).read_text()
    except OSError as err:
        raise DataError(f"cannot read model file: {err}")
    entries = []
    for line_no, line in enumerate(raw.splitlines(), start=1):
        text = line.strip()
        if not text:
            continue
        try:
            entries.append(float(text))
        except ValueError:
            raise DataError(f"{path}:{line_no}: not a decimal coordinate: {text!r}")
    if not entries:
        raise DataError(f"{path}: empty model file")
    w = np.asarray(entries)
    if not np.all(np.isfinite(w)):
        raise DataError(f"{path}: model coordinates must be finite")
    return w


def cmd_certify(args) -> int:
    try:
        problem = load_problem(args.problem)
    except (OSError, ValueError) as err:
        raise DataError(f"cannot load problem record: {err}")
    w = _read_model_file(args.model)
    if w.size != problem.d:
        raise DataError(f"model has {w.size} coordinates, problem has d={problem.d}")
    r = _float_list(args.r)
    if len(r) != problem.count:
        raise UsageError(f"--r has {len(r)} entries, problem has K={problem.count}")
    if any(x <= 0 for x in r):
        raise UsageError("--r entries must be strictly positive")
    for name, tol in (("--fair-tol", args.fair_tol), ("--gap-tol", args.gap_tol)):
        if tol is not None and not tol > 0:
            raise UsageError(f"{name} must be positive")

    cert = certify_epo(w, problem, r, fair_tol=args.fair_tol, gap_tol=args.gap_tol)
    print(json.dumps({"fairness": cert.fairness,
                      "stationarity_gap": cert.stationarity_gap,
                      "is_fair": cert.is_fair, "is_stationary": cert.is_stationary,
                      "minmax": cert.minmax}))
    return EXIT_OK if cert.is_fair and cert.is_stationary else EXIT_NOT_CERTIFIED


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"trace": cmd_trace, "bench": cmd_bench, "certify": cmd_certify}
    try:
        return handler[args.command](args)
    except UsageError as err:
        print(f"epoal: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as err:
        print(f"epoal: error: {err}", file=sys.stderr)
        return EXIT_DATA
    except OSError as err:
        print(f"epoal: error: {err}", file=sys.stderr)
        return EXIT_DATA
    except HarnessError as err:
        print(f"epoal: harness error: {err}", file=sys.stderr)
        return EXIT_INTERNAL


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
