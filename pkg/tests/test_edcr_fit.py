import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from socbid.edcr_fit import FitSpec, fit_edcr, fit_report
from socbid.errors import ContractViolation, InvalidBidError
from socbid.model import BidCurve, check_assumption1, edcr_residuals_for
from socbid.oracle import random_assumption1_asset, random_edcr_asset

E = (0.0, 2.0, 4.0)


def test_edcr_input_is_fixed_point():
    c = BidCurve(E, (10, 6), (20, 16))
    assert fit_edcr(c, 1.0, 1.0) == c


def test_k1_input_is_fixed_point():
    c = BidCurve((0, 5), (3,), (8,))
    assert fit_edcr(c, 0.9, 0.95) == c


def test_derived_k2_example():
    c = BidCurve(E, (10, 6), (21, 15))
    f = fit_edcr(c, 1.0, 1.0)
    assert f.charge_benefits == pytest.approx((10.5, 5.5), abs=1e-9)
    assert f.discharge_costs == pytest.approx((20.5, 15.5), abs=1e-9)
    rep = fit_report(c, f, 1.0, 1.0)
    assert rep.objective == pytest.approx(1.0, abs=1e-9)
    assert rep.charge_deviation == pytest.approx((0.5, -0.5))
    assert rep.discharge_deviation == pytest.approx((-0.5, 0.5))
    assert rep.worst_marginal_error == pytest.approx(0.5)
    assert rep.max_edcr_residual == 0.0


def test_identical_curves_report_zero():
    c = BidCurve(E, (10, 6), (20, 16))
    rep = fit_report(c, c, 1.0, 1.0)
    assert rep.objective == 0.0 and rep.worst_marginal_error == 0.0


def test_invalid_input_rejected():
    with pytest.raises(InvalidBidError):
        fit_edcr(BidCurve(E, (6, 10), (20, 16)), 1.0, 1.0)


@pytest.mark.parametrize("kw", [dict(weights_c=(1.0, 0.0)), dict(margin=0.0)])
def test_fit_spec_validation(kw):
    with pytest.raises(ContractViolation):
        FitSpec(**kw)


def test_weight_length_checked():
    with pytest.raises(ContractViolation):
        fit_edcr(BidCurve(E, (10, 6), (21, 15)), 1.0, 1.0, FitSpec(weights_c=(1.0,)))


def test_active_spread_constraint():
    # the unconstrained projection would break the spread; the margin binds
    c = BidCurve(E, (19.9, 0.0), (20.0, 19.99))
    spec = FitSpec(margin=1e-3)
    f = fit_edcr(c, 1.0, 1.0, spec)
    assert not check_assumption1(f, 1.0, 1.0)
    assert f.discharge_costs[-1] - f.charge_benefits[0] >= 1e-3 - 1e-12


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), weighted=st.booleans())
def test_fitted_curves_valid_edcr_and_idempotent(seed, weighted):
    rng = np.random.default_rng(seed)
    a = random_assumption1_asset(rng, k_max=6)
    K = a.bid.num_segments
    spec = FitSpec(tuple(rng.uniform(0.1, 3, K)), tuple(rng.uniform(0.1, 3, K))) if weighted else FitSpec()
    f = fit_edcr(a.bid, a.eta_c, a.eta_d, spec)
    assert not check_assumption1(f, a.eta_c, a.eta_d)
    assert edcr_residuals_for(f, a.eta_c, a.eta_d).is_edcr
    assert f.boundaries == a.bid.boundaries
    again = fit_edcr(f, a.eta_c, a.eta_d, spec)
    assert np.abs(np.subtract(again.charge_benefits, f.charge_benefits)).max() <= 1e-12
    assert np.abs(np.subtract(again.discharge_costs, f.discharge_costs)).max() <= 1e-12


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_edcr_inputs_returned_unchanged(seed):
    a = random_edcr_asset(np.random.default_rng(seed))
    assert fit_edcr(a.bid, a.eta_c, a.eta_d) == a.bid


def _kkt_ok(curve, fitted, eta_c, eta_d):
    # compare against a perturbation search: no feasible nearby point is better
    base = fit_report(curve, fitted, eta_c, eta_d).objective
    r = eta_c * eta_d
    z = np.concatenate(([fitted.charge_benefits[0]], fitted.discharge_costs))
    rng = np.random.default_rng(0)
    for _ in range(300):
        w = z + rng.normal(scale=1e-3, size=z.size)
        d = w[1:]
        if np.any(np.diff(d) > 0) or w[0] / eta_c > d[-1] * eta_d - 1e-6:
            continue
        cand = BidCurve(curve.boundaries, tuple(w[0] + r * (d - d[0])), tuple(d))
        assert fit_report(curve, cand, eta_c, eta_d).objective >= base - 1e-9


def test_local_optimality_by_perturbation():
    rng = np.random.default_rng(12)
    for _ in range(20):
        a = random_assumption1_asset(rng, k_max=4)
        _kkt_ok(a.bid, fit_edcr(a.bid, a.eta_c, a.eta_d), a.eta_c, a.eta_d)


def grid_search_k2(curve: BidCurve, eta_c: float, eta_d: float, margin: float, n: int = 41, half: float = 2.0):
    r = eta_c * eta_d
    cc, cd = curve.charge_benefits, curve.discharge_costs
    best = np.inf
    axes = [np.linspace(v - half, v + half, n) for v in (cc[0], cd[0], cd[1])]
    for a, d1, d2 in itertools.product(*axes):
        if d2 > d1 or a / eta_c > d2 * eta_d - margin:
            continue
        c2 = a + r * (d2 - d1)
        best = min(best, (a - cc[0]) ** 2 + (c2 - cc[1]) ** 2 + (d1 - cd[0]) ** 2 + (d2 - cd[1]) ** 2)
    return best


def test_beats_grid_search_on_k2():
    c = BidCurve(E, (10, 6), (21, 15))
    f = fit_edcr(c, 1.0, 1.0)
    assert fit_report(c, f, 1.0, 1.0).objective <= grid_search_k2(c, 1.0, 1.0, 1e-6) + 1e-6
