import numpy as np
import pytest

from socbid import _kernels
from socbid.cost import Trajectory, convex_cost, trajectory_cost
from socbid.dispatch import solve_dispatch
from socbid.errors import EnumerationLimitError, OracleInfeasibleError
from socbid.model import edcr_residuals, validate_bid
from socbid.network import case_from_dict, case_to_dict
from socbid.oracle import (
    GridSpec,
    brute_force_dispatch,
    find_necessity_witness,
    oracle_case,
    random_assumption1_asset,
    random_edcr_asset,
    random_feasible_trajectory,
    run_lemma1_suite,
    run_oracle_comparison,
    run_theorem1_sweep,
)

from conftest import make_asset


def test_grid_spec_validation():
    with pytest.raises(ValueError):
        GridSpec(1)
    g = GridSpec(3)
    gc, gd = g.levels(make_asset(cap=2.0))
    assert gc.tolist() == [0.0, 1.0, 2.0, 0.0, 0.0]
    assert gd.tolist() == [0.0, 0.0, 0.0, 1.0, 2.0]
    assert np.all(gc * gd == 0)


@pytest.mark.parametrize("backend", _kernels.available_backends())
def test_arbitrage_on_grid(arbitrage_case, backend):
    r = brute_force_dispatch(arbitrage_case, GridSpec(21), backend=backend)
    assert r.objective == 52.0
    assert r.charge.tolist() == [[2.0, 0.0]] and r.discharge.tolist() == [[0.0, 2.0]]
    assert r.generation.tolist() == [[2.0, 8.0]]


def test_idle_storage_case(single_bus_case):
    r = brute_force_dispatch(single_bus_case, GridSpec(5))
    assert r.objective == 25.0


def test_zero_demand(arbitrage_case):
    data = case_to_dict(arbitrage_case)
    data["demand"] = [[0, 0]]
    r = brute_force_dispatch(case_from_dict(data), GridSpec(5))
    assert r.objective == 0.0
    assert not r.charge.any() and not r.discharge.any() and not r.generation.any()


def test_size_cap(arbitrage_case):
    with pytest.raises(EnumerationLimitError):
        brute_force_dispatch(arbitrage_case, GridSpec(50), max_evaluations=1000)


def test_infeasible_grid(single_bus_case):
    data = case_to_dict(single_bus_case)
    data["demand"] = [[50]]
    with pytest.raises(OracleInfeasibleError):
        brute_force_dispatch(case_from_dict(data, validate=True), GridSpec(3))


def test_oracle_storage_cost_is_exact_cost(arbitrage_case):
    r = brute_force_dispatch(arbitrage_case, GridSpec(11))
    a = arbitrage_case.storages[0]
    assert r.storage_cost == trajectory_cost(Trajectory(r.charge[0], r.discharge[0], a.initial_soc), a)[0]


def test_lp_is_lower_bound_and_within_grid_bound():
    for c in run_oracle_comparison(8, seed=99):
        assert c.lower_bound_ok, c
        assert c.within_bound, c


@pytest.mark.slow
def test_finer_grid_never_worse():
    case = oracle_case(7, 1)
    coarse = brute_force_dispatch(case, GridSpec(3)).objective
    fine = brute_force_dispatch(case, GridSpec(5)).objective  # contains the coarse grid
    assert fine <= coarse + 1e-12
    assert solve_dispatch(case).objective <= fine + 1e-9


def test_random_trajectory_edge_cases():
    a = make_asset()
    assert random_feasible_trajectory(a, 0, 1).charge == ()
    zero = make_asset(cap=0.0)
    t = random_feasible_trajectory(zero, 5, 1)
    assert t.charge == (0.0,) * 5 and t.discharge == (0.0,) * 5


def test_random_trajectory_deterministic_and_feasible():
    rng = np.random.default_rng(4)
    for seed in range(300):
        a = random_edcr_asset(rng)
        t = random_feasible_trajectory(a, 8, seed)
        assert t == random_feasible_trajectory(a, 8, seed)
        assert all(c == 0 or d == 0 for c, d in zip(t.charge, t.discharge))
        trajectory_cost(t, a)  # raises if infeasible


def test_generated_assets_are_valid():
    rng = np.random.default_rng(8)
    for _ in range(500):
        a = random_edcr_asset(rng)
        assert validate_bid(a).ok
        assert edcr_residuals(a).is_edcr
        b = random_assumption1_asset(rng)
        assert validate_bid(b).ok


def test_sweep_small_and_deterministic():
    r1 = run_theorem1_sweep(200, seed=5)
    r2 = run_theorem1_sweep(200, seed=5)
    assert r1.passed and r1.max_deviation == r2.max_deviation


def test_sweep_single_k1_case_exact():
    # one affine piece: equal up to summation order
    r = run_theorem1_sweep(1, seed=0, k_max=1)
    assert r.max_deviation <= 4 * np.finfo(float).eps


def test_k1_dyadic_case_is_bitwise_exact():
    a = make_asset(E=(0.0, 8.0), cc=(3.0,), cd=(5.0,), cap=4.0, s=2.0)
    t = Trajectory((1.5, 0.0, 0.25), (0.0, 2.5, 0.0), 2.0)
    assert trajectory_cost(t, a)[0] == convex_cost(*t.totals(), 2.0, a)[0]


def test_sweep_zero_cases():
    r = run_theorem1_sweep(0, seed=0)
    assert r.passed and r.to_dict()["num_cases"] == 0


def test_control_arm_deviates():
    r = run_theorem1_sweep(300, seed=1, edcr=False)
    assert r.max_deviation > 0.01
    assert r.failing_cases


def test_witness_found_and_reproducible():
    w = find_necessity_witness(seed=3)
    assert w is not None and w.deviation > 0.01
    assert not edcr_residuals(w.asset).is_edcr
    exact, _ = trajectory_cost(w.trajectory, w.asset)
    assert exact == w.exact_cost


def test_lemma1_suite_small():
    r = run_lemma1_suite(30, seed=4)
    assert r.passed and r.solved + r.infeasible == 30
    assert r.exact + r.precondition_unmet == r.solved
