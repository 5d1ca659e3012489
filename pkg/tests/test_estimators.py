import math
from dataclasses import replace

import pytest

from walkvis.estimators import (
    EXACT_STEP_CAP,
    SimulationSpec,
    WalkersMode,
    WatchpointsMode,
    _run_trial,
    aggregate_trials,
    exact_expectation_walkers,
    exact_expectation_watchpoints,
    simulate_walkers_run,
    simulate_watchpoint_run,
)
from walkvis.numtheory import CapacityError
from walkvis.theory import density_walkers, density_watchpoints
from walkvis.visibility import is_b_visible, validate_watchpoint_set
from walkvis.walk import WalkerConfig


def exact_mean_by_enumeration(b, points, alpha, n):
    """Independent oracle: exact binomial coefficients, direct masking."""
    total = 0.0
    for i in range(1, n + 1):
        mass = 0.0
        for k in range(i + 1):
            pos = (k, i - k)
            if pos in points:
                continue
            if all(is_b_visible(b, pos, w) for w in points):
                mass += math.comb(i, k) * alpha**k * (1 - alpha) ** (i - k)
        total += mass
    return total / n


def test_exact_expectation_hand_case():
    # per-step visible masses 1, 1/2, 3/4, 7/8 -> mean 0.78125
    val = exact_expectation_watchpoints((1, 2), [(0, 0)], 0.5, 4)
    assert abs(val - 0.78125) < 1e-12


def test_exact_expectation_first_step_always_visible():
    for b in [(1, 1), (1, 2), (2, 3)]:
        assert abs(exact_expectation_watchpoints(b, [(0, 0)], 0.37, 1) - 1.0) < 1e-12


def test_exact_expectation_matches_enumeration():
    points = [(0, 0), (1, 2), (2, 1)]
    want = exact_mean_by_enumeration((1, 2), points, 0.5, 25)
    got = exact_expectation_watchpoints((1, 2), points, 0.5, 25)
    assert abs(want - got) < 1e-11
    want = exact_mean_by_enumeration((2, 3), [(0, 0)], 0.3, 25)
    got = exact_expectation_watchpoints((2, 3), [(0, 0)], 0.3, 25)
    assert abs(want - got) < 1e-11


def test_exact_walkers_reduces_to_watchpoints_at_r1():
    for b, alpha in [((1, 2), 0.5), ((2, 3), 0.3)]:
        lhs = exact_expectation_walkers(b, [alpha], 60)
        rhs = exact_expectation_watchpoints(b, [(0, 0)], alpha, 60)
        assert abs(lhs - rhs) < 1e-12


def test_exact_walkers_equal_alpha_power_identity():
    # step-i probability for r equal walkers is the one-walker mass to the r-th
    b, alpha, n, r = (2, 3), 0.4, 40, 3

    def one_walker_mass(i):
        return sum(
            math.comb(i, k) * alpha**k * (1 - alpha) ** (i - k)
            for k in range(i + 1)
            if is_b_visible(b, (k, i - k), (0, 0))
        )

    want = sum(one_walker_mass(i) ** r for i in range(1, n + 1)) / n
    got = exact_expectation_walkers(b, [alpha] * r, n)
    assert abs(want - got) < 1e-10


def test_exact_cap():
    with pytest.raises(CapacityError):
        exact_expectation_watchpoints((1, 2), [(0, 0)], 0.5, EXACT_STEP_CAP + 1)
    with pytest.raises(CapacityError):
        exact_expectation_walkers((1, 2), [0.5], EXACT_STEP_CAP + 1)


def test_exact_expectation_near_density_at_n_1000():
    # finite-n bias is ~n^(-1/2), so n=1000 sits close to the limiting density
    got = exact_expectation_watchpoints((1, 2), [(0, 0), (1, 2), (2, 1)], 0.5, 1000)
    assert abs(got - 0.534567) < 0.02
    got = exact_expectation_walkers((2, 3), [0.5, 0.5], 1000)
    assert abs(got - 0.933076) < 0.02


def test_simulate_axis_walk_sees_origin_once():
    # alpha ~ 1: the walk hugs the x-axis, so only step 1 is visible from (0,0)
    res = simulate_watchpoint_run((1, 2), [(0, 0)], 1 - 1e-15, 50, 99)
    assert res.visible_count == 1
    assert res.proportion == 1 / 50


def test_simulate_single_step():
    res = simulate_watchpoint_run((1, 2), [(0, 0)], 0.5, 1, 3)
    assert res.visible_count == 1 and res.proportion == 1.0  # both neighbors visible


def test_walkers_r1_equals_watchpoint_origin_run():
    for seed in (1, 9, 314159):
        a = simulate_walkers_run((2, 3), [0.5], 5000, seed)
        b = simulate_watchpoint_run((2, 3), [(0, 0)], 0.5, 5000, seed)
        assert a.visible_count == b.visible_count


def test_simulation_is_deterministic():
    wset = validate_watchpoint_set((1, 2), [(0, 0), (1, 2), (2, 1)])
    spec = SimulationSpec(wset.b, WatchpointsMode(wset, WalkerConfig(0.5)), 2000, 5, 42)
    theory = density_watchpoints((1, 2), 3)
    a = aggregate_trials(spec, theory)
    b = aggregate_trials(spec, theory)
    assert a == b


def test_aggregate_single_trial_std_zero():
    wset = validate_watchpoint_set((1, 2), [(0, 0)])
    spec = SimulationSpec(wset.b, WatchpointsMode(wset, WalkerConfig(0.5)), 500, 1, 7)
    agg = aggregate_trials(spec, density_watchpoints((1, 2), 1))
    assert agg.sample_std == 0.0
    assert agg.mean_proportion == agg.trial_results[0].proportion


def test_aggregate_matches_independent_trial_order():
    wset = validate_watchpoint_set((2, 3), [(0, 0), (1, 2)])
    spec = SimulationSpec(wset.b, WatchpointsMode(wset, WalkerConfig(0.4)), 1000, 6, 11)
    theory = density_watchpoints((2, 3), 2)
    agg = aggregate_trials(spec, theory)
    # recompute each trial in reverse order; aggregation must not care
    reversed_counts = [_run_trial(spec, t).visible_count for t in range(5, -1, -1)]
    assert reversed_counts[::-1] == [t.visible_count for t in agg.trial_results]
    mean = math.fsum(c / 1000 for c in reversed_counts) / 6
    assert abs(mean - agg.mean_proportion) < 1e-15


def test_threaded_aggregation_identical():
    wset = validate_watchpoint_set((1, 2), [(0, 0), (1, 2), (2, 1)])
    spec = SimulationSpec(wset.b, WatchpointsMode(wset, WalkerConfig(0.5)), 3000, 8, 5)
    theory = density_watchpoints((1, 2), 3)
    assert aggregate_trials(spec, theory, threads=1) == aggregate_trials(spec, theory, threads=4)


def test_batched_small_n_matches_serial():
    wset = validate_watchpoint_set((1, 2), [(0, 0), (1, 2), (2, 1)])
    spec = SimulationSpec(wset.b, WatchpointsMode(wset, WalkerConfig(0.5)), 20, 300, 31)
    theory = density_watchpoints((1, 2), 3)
    agg = aggregate_trials(spec, theory)  # batched: n <= 64 and T >= 128
    serial = [_run_trial(spec, t) for t in range(300)]
    assert [t.visible_count for t in agg.trial_results] == [t.visible_count for t in serial]


def test_monte_carlo_agrees_with_exact_oracle():
    b = (1, 2)
    wset = validate_watchpoint_set(b, [(0, 0), (1, 2), (2, 1)])
    n, trials = 50, 40_000
    exact = exact_expectation_watchpoints(b, wset, 0.5, n)
    spec = SimulationSpec(wset.b, WatchpointsMode(wset, WalkerConfig(0.5)), n, trials, 1234)
    agg = aggregate_trials(spec, density_watchpoints(b, 3))
    stderr = agg.sample_std / math.sqrt(trials)
    assert abs(agg.mean_proportion - exact) <= 5 * stderr


def test_walkers_mode_spec_roundtrip():
    spec = SimulationSpec(
        validate_watchpoint_set((2, 3), [(0, 0)]).b,
        WalkersMode((WalkerConfig(0.5), WalkerConfig(0.3))),
        100,
        4,
        9,
    )
    agg = aggregate_trials(spec, density_walkers((2, 3), 2))
    assert agg.trials == 4
    assert all(0 <= t.visible_count <= 100 for t in agg.trial_results)
    with pytest.raises(ValueError):
        WalkersMode(())
    with pytest.raises(ValueError):
        SimulationSpec(spec.b, spec.mode, 0, 1, 0)
