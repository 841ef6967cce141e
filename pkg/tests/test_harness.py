import numpy as np
import pytest

from epoal import (GridSpec, SyntheticProblem, compute_target, gen_anchors,
                   iteration_complexity, log_grid, make_problem, minmax_value,
                   run_experiment, sample_initial, sample_preference,
                   trimmed_mean_ci, tune_and_measure, two_objective_epo_oracle,
                   fig1_problem)
from epoal.harness import _grid_configs
from epoal.solvers import IterationRecord

from test_solvers import CountingObjectives


def fake_trace(minmax_values):
    return [IterationRecord(iter=i, jvals=np.array([v]), minmax=v, fairness=0.0)
            for i, v in enumerate(minmax_values)]


def test_log_grid_matches_protocol_grid():
    g = log_grid(1e-3, 1e-1, 10)
    assert g[0] == pytest.approx(1e-3, rel=1e-15)
    assert g[-1] == pytest.approx(1e-1, rel=1e-15)
    ratios = g[1:] / g[:-1]
    np.testing.assert_allclose(ratios, 100.0 ** (1.0 / 9.0), rtol=1e-12)


def test_log_grid_small_example():
    np.testing.assert_allclose(log_grid(1.0, 100.0, 3), [1.0, 10.0, 100.0])


def test_log_grid_validation():
    with pytest.raises(ValueError):
        log_grid(0.0, 1.0, 5)
    with pytest.raises(ValueError):
        log_grid(1.0, 0.1, 5)
    with pytest.raises(ValueError):
        log_grid(0.1, 1.0, 1)


def test_default_grids_follow_protocol():
    grid = GridSpec()
    for values, lo, hi in [(grid.mu_grid, 1e-3, 1e-1),
                           (grid.eta_grid, 1e-1, 1e2),
                           (grid.tau_grid, 1e-2, 10.0)]:
        values = np.asarray(values)
        assert values.size == 10
        assert values[0] == pytest.approx(lo, rel=1e-15)
        assert values[-1] == pytest.approx(hi, rel=1e-15)
        assert np.all(np.diff(values) > 0)
        ratios = values[1:] / values[:-1]
        np.testing.assert_allclose(ratios, ratios[0], rtol=1e-12)
    assert grid.max_iter == 1000
    assert grid.epsilon == 0.01


def test_iteration_complexity_first_entry_into_band():
    trace = fake_trace([1.0, 0.6, 0.505, 0.52])
    assert iteration_complexity(trace, target=0.5, epsilon=0.01) == 2


def test_iteration_complexity_censored_when_band_never_reached():
    trace = fake_trace([1.0, 0.9, 0.8])
    assert iteration_complexity(trace, target=0.5, epsilon=0.01) is None


def test_iteration_complexity_agrees_with_vectorized_scan():
    rng = np.random.default_rng(8)
    for _ in range(50):
        values = np.abs(rng.standard_normal(40).cumsum() * 0.1 + 1.0)
        trace = fake_trace(values)
        target, eps = float(rng.uniform(0.2, 1.5)), float(rng.uniform(0.01, 0.5))
        hits = np.flatnonzero(np.abs(values - target) <= eps)
        expected = int(hits[0]) if hits.size else None
        assert iteration_complexity(trace, target, eps) == expected


def test_iteration_complexity_monotone_in_epsilon():
    rng = np.random.default_rng(9)
    values = np.abs(rng.standard_normal(60).cumsum() * 0.05 + 1.0)
    trace = fake_trace(values)
    target = float(values.min() + 0.05)
    results = [iteration_complexity(trace, target, eps)
               for eps in (0.01, 0.05, 0.1, 0.5)]
    for narrow, wide in zip(results, results[1:]):
        if narrow is not None:
            assert wide is not None and wide <= narrow


def test_iteration_complexity_validation():
    with pytest.raises(ValueError):
        iteration_complexity([], target=0.0, epsilon=0.1)
    with pytest.raises(ValueError):
        iteration_complexity(fake_trace([1.0]), target=0.0, epsilon=0.0)


def test_trimmed_mean_drops_extremes():
    mean, lo, hi = trimmed_mean_ci(np.arange(1, 31))
    assert mean == pytest.approx(15.5)
    assert lo <= mean <= hi
    assert trimmed_mean_ci([1.0, 2.0, 3.0, 100.0])[0] == pytest.approx(2.5)


def test_trimmed_mean_degenerate_cases():
    assert trimmed_mean_ci([4.0, 4.0, 4.0]) == (4.0, 4.0, 4.0)
    assert trimmed_mean_ci([7.0, 7.0, 7.0, 7.0, 7.0]) == (7.0, 7.0, 7.0)
    with pytest.raises(ValueError):
        trimmed_mean_ci([1.0, 2.0])
    with pytest.raises(ValueError):
        trimmed_mean_ci([1.0, 2.0, 3.0], level=1.0)


def small_grid(max_iter=150):
    return GridSpec(mu_grid=tuple(log_grid(1e-2, 1e-1, 3)),
                    eta_grid=tuple(log_grid(0.1, 10.0, 3)),
                    tau_grid=tuple(log_grid(0.1, 1.0, 2)),
                    max_iter=max_iter)


def trial_inputs(kind="convex-distance", d=6, K=3, seed=4):
    problem = make_problem(kind, d, K, seed)
    return problem, sample_preference(K, seed), sample_initial(d, seed)


def test_compute_target_not_above_initial_value():
    problem, r, w0 = trial_inputs()
    target = compute_target(problem, r, w0, small_grid(), seed=4)
    assert target <= minmax_value(r, problem.values(w0))


def test_compute_target_single_objective_reaches_anchor_value():
    anchors = gen_anchors(6, 2, seed=0)[:1]
    problem = SyntheticProblem(kind="convex-distance", anchors=anchors)
    target = compute_target(problem, [1.0], sample_initial(6, 0), GridSpec(), seed=0)
    assert target <= 0.01


def test_compute_target_fig1_matches_bisection_oracle():
    problem = fig1_problem(3)
    r = [0.2, 0.8]
    target = compute_target(problem, r, sample_initial(3, 0), GridSpec(), seed=0)
    _, jvals = two_objective_epo_oracle(r, problem)
    assert abs(target - minmax_value(r, jvals)) <= 0.01


def test_compute_target_improves_with_more_step_sizes():
    problem, r, w0 = trial_inputs(seed=13)
    base = GridSpec(mu_grid=tuple(log_grid(1e-3, 1e-2, 4)), max_iter=200)
    wider = GridSpec(mu_grid=tuple(log_grid(1e-3, 1e-1, 8)), max_iter=200)
    assert (compute_target(problem, r, w0, wider, seed=13)
            <= compute_target(problem, r, w0, base, seed=13))


def test_tune_run_accounting():
    problem, r, w0 = trial_inputs()
    grid = small_grid(max_iter=20)
    counter = CountingObjectives(problem)
    # target at the starting value: iterate 0 is inside the band, i_o = 0
    target = minmax_value(r, problem.values(w0))
    record = tune_and_measure("epo-al", counter, r, w0, grid, seed=4, target=target)
    n_configs = len(_grid_configs("epo-al", grid, seed=4))
    assert n_configs == 9
    assert record.i_o == 0
    # every grid run records 21 iterates; the 3 timing reps see only iterate 0
    assert counter.evaluations == n_configs * 21 + 3 * 1
    assert record.t_o > 0


def test_tune_best_is_minimum_over_configs():
    problem, r, w0 = trial_inputs(seed=15)
    grid = small_grid()
    target = compute_target(problem, r, w0, grid, seed=15)
    record = tune_and_measure("epo-al", problem, r, w0, grid, seed=15,
                              target=target, measure=False)
    assert record.i_o is not None
    from epoal.harness import _run_allowing_divergence
    for cfg in _grid_configs("epo-al", grid, seed=15):
        recs = _run_allowing_divergence("epo-al", problem, r, w0, cfg)
        i_cfg = iteration_complexity(recs, target, grid.epsilon) if recs else None
        assert i_cfg is None or record.i_o <= i_cfg


def test_tune_smooth_max_through_full_protocol():
    problem, r, w0 = trial_inputs()
    grid = GridSpec(max_iter=400)
    target = compute_target(problem, r, w0, grid, seed=4)
    record = tune_and_measure("smooth-max", problem, r, w0, grid, seed=4,
                              target=target, measure=False)
    assert record.i_o is not None
    assert record.best_config.tau in grid.tau_grid


def test_tune_reports_censoring_when_target_unreachable():
    problem, r, w0 = trial_inputs()
    record = tune_and_measure("subgradient", problem, r, w0, small_grid(max_iter=30),
                              seed=4, target=-5.0)
    assert record.i_o is None and record.t_o is None and record.best_config is None


def test_run_experiment_deterministic_and_ordered():
    kinds = ["convex-distance"]
    kwargs = dict(K_values=[2, 3], d=5, n_trials=3, master_seed=71,
                  algorithms=["epo-al", "subgradient"], grid=small_grid(max_iter=80),
                  measure=False)
    first = run_experiment(kinds, **kwargs)
    second = run_experiment(kinds, **kwargs)
    assert repr(first) == repr(second)  # repr-compare: NaN-valued t_o fields
    assert [(a.kind, a.K, a.algorithm) for a in first] == [
        ("convex-distance", 2, "epo-al"), ("convex-distance", 2, "subgradient"),
        ("convex-distance", 3, "epo-al"), ("convex-distance", 3, "subgradient")]
    for agg in first:
        assert agg.n_trials == 3
        if agg.n_censored == 0:
            assert np.isfinite(agg.i_o_mean)
            assert agg.i_o_ci_low <= agg.i_o_mean <= agg.i_o_ci_high


def test_run_experiment_trial_count_floor():
    with pytest.raises(ValueError):
        run_experiment(["convex-distance"], [2], d=3, n_trials=2, master_seed=0)


def test_run_experiment_parallel_matches_serial():
    kwargs = dict(K_values=[2], d=4, n_trials=3, master_seed=5,
                  algorithms=["subgradient"], grid=small_grid(max_iter=60),
                  measure=False)
    serial = run_experiment(["nonconvex-gaussian"], jobs=1, **kwargs)
    parallel = run_experiment(["nonconvex-gaussian"], jobs=2, **kwargs)
    assert repr(serial) == repr(parallel)


def test_run_experiment_with_timing_produces_positive_times():
    aggs = run_experiment(["convex-distance"], [2], d=4, n_trials=3, master_seed=3,
                          algorithms=["epo-al"], grid=small_grid(max_iter=80),
                          timing_reps=1)
    (agg,) = aggs
    if agg.n_censored == 0:
        assert agg.t_o_mean > 0
