"""Benchmark protocol: tuning grids, target accuracy, and complexity measures.

For one random trial (problem instance, preference vector, initial model)
the protocol is:

  1. The target value J* is the minimum weighted min-max value attained by
     the subgradient algorithm over every step size in its grid, scanning
     all iterates of all runs.
  2. For each algorithm and each hyperparameter combination in its grid,
     the iteration complexity of that combination is the first iterate
     whose min-max value lies within ``epsilon`` of J*; the algorithm's
     iteration complexity i_o is the minimum over combinations, and the
     winning combination is re-run for exactly i_o iterations under a
     monotonic clock to measure the wall-clock complexity t_o.
  3. Combinations that never enter the epsilon band are censored, never
     conflated with slow successes.

Aggregation over trials drops one minimum and one maximum sample and
reports the mean of the rest with a normal-approximation confidence
interval.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from statistics import NormalDist

import numpy as np

from .problems import CONVEX, FIG1, NONCONVEX, make_problem, sample_initial, sample_preference
from .solvers import (ALGORITHMS, EPO_AL, SMOOTH_MAX, SUBGRADIENT, DivergenceError,
                      IterationRecord, SolverConfig, run)

CI_LEVEL = 0.99

_KIND_CODE = {CONVEX: 1, NONCONVEX: 2, FIG1: 3}


class HarnessError(RuntimeError):
    """The benchmark protocol could not produce a measurement."""


def log_grid(lo: float, hi: float, n: int) -> np.ndarray:
    """n geometrically spaced values with exact endpoints lo and hi."""
    if not (0 < lo < hi):
        raise ValueError(f"need 0 < lo < hi, got lo={lo}, hi={hi}")
    if n < 2:
        raise ValueError(f"need n >= 2, got n={n}")
    return np.geomspace(lo, hi, n)


@dataclass(frozen=True)
class GridSpec:
    """Hyperparameter search grids and protocol constants."""

    mu_grid: tuple[float, ...] = field(
        default_factory=lambda: tuple(map(float, log_grid(1e-3, 1e-1, 10))))
    eta_grid: tuple[float, ...] = field(
        default_factory=lambda: tuple(map(float, log_grid(1e-1, 1e2, 10))))
    tau_grid: tuple[float, ...] = field(
        default_factory=lambda: tuple(map(float, log_grid(1e-2, 10.0, 10))))
    max_iter: int = 1000
    epsilon: float = 0.01


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of tuning and measuring one algorithm on one random trial.

    ``i_o`` and ``t_o`` are None when every grid combination was censored.
    """

    algorithm: str
    kind: str
    K: int
    d: int
    seed: int
    target: float
    best_config: SolverConfig | None
    i_o: int | None
    t_o: float | None


@dataclass(frozen=True)
class AggregateRecord:
    """Trimmed-mean summary of one (kind, K, algorithm) benchmark cell."""

    kind: str
    algorithm: str
    K: int
    d: int
    n_trials: int
    n_censored: int
    i_o_mean: float
    i_o_ci_low: float
    i_o_ci_high: float
    t_o_mean: float
    t_o_ci_low: float
    t_o_ci_high: float


def trial_seed(master_seed: int, kind: str, K: int, trial: int) -> int:
    """Deterministic per-trial sub-seed derived from the master seed."""
    ss = np.random.SeedSequence(
        entropy=[int(master_seed), _KIND_CODE[kind], int(K), int(trial)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _grid_configs(algorithm: str, grid: GridSpec, seed: int) -> list[SolverConfig]:
    # Enumeration order is lexicographic (mu, then eta/tau), so the first
    # combination attaining the minimal i_o is the deterministic tie-break.
    if algorithm == SUBGRADIENT:
        return [SolverConfig(mu=float(m), max_iter=grid.max_iter, seed=seed)
                for m in grid.mu_grid]
    if algorithm == EPO_AL:
        return [SolverConfig(mu=float(m), eta=float(e), max_iter=grid.max_iter,
                             seed=seed)
                for m in grid.mu_grid for e in grid.eta_grid]
    if algorithm == SMOOTH_MAX:
        return [SolverConfig(mu=float(m), tau=float(t), max_iter=grid.max_iter,
                             seed=seed)
                for m in grid.mu_grid for t in grid.tau_grid]
    raise ValueError(f"unknown algorithm {algorithm!r}")


def _run_allowing_divergence(algorithm, problem, r, w0, config) -> list[IterationRecord]:
    # A diverged run still attained its pre-divergence values; keep them.
    try:
        return run(algorithm, problem, r, w0, config)
    except DivergenceError as err:
        return err.records


def compute_target(problem, r, w0, grid: GridSpec, seed: int = 0) -> float:
    """Target J*: best min-max value the subgradient algorithm ever attains.

    One full-length run per step size in the grid, all re-seeded identically
    so tie-breaking noise does not differ across step sizes; the minimum is
    taken over every iterate of every run, iterate 0 included.
    """
    best = np.inf
    for mu in grid.mu_grid:
        cfg = SolverConfig(mu=float(mu), max_iter=grid.max_iter, seed=seed)
        records = _run_allowing_divergence(SUBGRADIENT, problem, r, w0, cfg)
        if records:
            best = min(best, min(rec.minmax for rec in records))
    if not np.isfinite(best):
        raise HarnessError("every target-scan run diverged before its first iterate")
    return float(best)


def iteration_complexity(trace: list[IterationRecord], target: float,
                         epsilon: float) -> int | None:
    """First iterate index whose min-max value is within epsilon of target.

    Returns None (censored) when the trace never enters the band.
    """
    if not (epsilon > 0):
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if not trace:
        raise ValueError("empty trace")
    for rec in trace:
        if abs(rec.minmax - target) <= epsilon:
            return rec.iter
    return None


def measure_time(algorithm, problem, r, w0, config: SolverConfig, iters: int,
                 reps: int = 3) -> float:
    """Median wall-clock seconds to run exactly ``iters`` iterations.

    Repetitions use a monotonic clock and exclude all tuning work; callers
    are responsible for running this without concurrent load.
    """
    timed_cfg = replace(config, max_iter=iters)
    samples = []
    for _ in range(reps):
        start = time.perf_counter()
        run(algorithm, problem, r, w0, timed_cfg)
        samples.append(time.perf_counter() - start)
    return float(np.median(samples))


def tune_and_measure(algorithm, problem, r, w0, grid: GridSpec, seed: int = 0,
                     target: float | None = None, timing_reps: int = 3,
                     measure: bool = True) -> TrialRecord:
    """Full per-trial protocol for one algorithm: tune i_o, then time t_o.

    ``target`` may be passed in when already computed for this trial (it is
    shared by all algorithms); otherwise the subgradient sweep runs here.
    ``measure=False`` skips the timing runs, leaving t_o None.
    """
    if target is None:
        target = compute_target(problem, r, w0, grid, seed=seed)

    best_i: int | None = None
    best_cfg: SolverConfig | None = None
    for cfg in _grid_configs(algorithm, grid, seed):
        records = _run_allowing_divergence(algorithm, problem, r, w0, cfg)
        if not records:
            continue
        i_o = iteration_complexity(records, target, grid.epsilon)
        if i_o is not None and (best_i is None or i_o < best_i):
            best_i, best_cfg = i_o, cfg

    t_o = None
    if measure and best_i is not None:
        t_o = measure_time(algorithm, problem, r, w0, best_cfg, best_i,
                           reps=timing_reps)
    return TrialRecord(algorithm=algorithm, kind=getattr(problem, "kind", "custom"),
                       K=problem.count, d=np.asarray(w0).size, seed=seed,
                       target=target, best_config=best_cfg, i_o=best_i, t_o=t_o)


def trimmed_mean_ci(samples, level: float = CI_LEVEL) -> tuple[float, float, float]:
    """Drop one min and one max, then mean +- z(level) * s / sqrt(n - 2)."""
    x = np.sort(np.asarray(samples, dtype=np.float64))
    if x.size < 3:
        raise ValueError(f"need at least 3 samples, got {x.size}")
    if not (0 < level < 1):
        raise ValueError(f"level must be in (0, 1), got {level}")
    trimmed = x[1:-1]
    mean = float(trimmed.mean())
    if trimmed.size < 2:
        return mean, mean, mean
    half = (NormalDist().inv_cdf(0.5 + level / 2)
            * float(trimmed.std(ddof=1)) / np.sqrt(trimmed.size))
    return mean, mean - half, mean + half


def _tune_trial(task):
    """Tuning phase of one trial (no timing); picklable for worker pools."""
    kind, K, d, seed, algorithms, grid = task
    problem = make_problem(kind, d, K, seed)
    r = sample_preference(K, seed)
    w0 = sample_initial(d, seed)
    target = compute_target(problem, r, w0, grid, seed=seed)
    return [tune_and_measure(algo, problem, r, w0, grid, seed=seed,
                             target=target, measure=False)
            for algo in algorithms]


def _aggregate(kind, algorithm, K, d, trials: list[TrialRecord]) -> AggregateRecord:
    i_samples = [t.i_o for t in trials if t.i_o is not None]
    t_samples = [t.t_o for t in trials if t.t_o is not None]
    if len(i_samples) >= 3:
        i_stats = trimmed_mean_ci(i_samples)
        t_stats = trimmed_mean_ci(t_samples) if len(t_samples) >= 3 else (np.nan,) * 3
    else:
        i_stats = t_stats = (np.nan,) * 3
    return AggregateRecord(kind=kind, algorithm=algorithm, K=K, d=d,
                           n_trials=len(trials),
                           n_censored=len(trials) - len(i_samples),
                           i_o_mean=i_stats[0], i_o_ci_low=i_stats[1],
                           i_o_ci_high=i_stats[2], t_o_mean=t_stats[0],
                           t_o_ci_low=t_stats[1], t_o_ci_high=t_stats[2])


def run_experiment(kinds, K_values, d: int, n_trials: int, master_seed: int,
                   algorithms=ALGORITHMS, grid: GridSpec | None = None,
                   jobs: int = 1, timing_reps: int = 3,
                   measure: bool = True) -> list[AggregateRecord]:
    """Benchmark every (kind, K, algorithm) cell over seeded random trials.

    Each trial draws fresh anchors, preference vector and initial model from
    a per-trial sub-seed; all algorithms share the trial's instances and its
    target J*.  Tuning work may fan out over ``jobs`` processes, but timing
    always runs sequentially in this process so measurements never contend.
    The result list is ordered by (kind, K, algorithm) in input order and is
    a pure function of the arguments (timing fields aside).
    """
    if n_trials < 3:
        raise ValueError(f"need n_trials >= 3, got {n_trials}")
    grid = grid if grid is not None else GridSpec()
    kinds = list(kinds)
    K_values = [int(K) for K in K_values]
    algorithms = list(algorithms)

    tasks = [(kind, K, d, trial_seed(master_seed, kind, K, t), algorithms, grid)
             for kind in kinds for K in K_values for t in range(n_trials)]

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            tuned = list(pool.map(_tune_trial, tasks))
    else:
        tuned = [_tune_trial(task) for task in tasks]

    trials: list[TrialRecord] = []
    for task, trial_results in zip(tasks, tuned):
        kind, K, d_task, seed = task[0], task[1], task[2], task[3]
        if measure:
            problem = make_problem(kind, d_task, K, seed)
            r = sample_preference(K, seed)
            w0 = sample_initial(d_task, seed)
        for rec in trial_results:
            if measure and rec.i_o is not None:
                t_o = measure_time(rec.algorithm, problem, r, w0,
                                   rec.best_config, rec.i_o, reps=timing_reps)
                rec = replace(rec, t_o=t_o)
            trials.append(rec)

    aggregates = []
    for kind in kinds:
        for K in K_values:
            for algo in algorithms:
                cell = [t for t in trials
                        if t.kind == kind and t.K == K and t.algorithm == algo]
                aggregates.append(_aggregate(kind, algo, K, d, cell))
    return aggregates
