import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from socbid.errors import CaseFormatError, InvalidBidError, OutOfRangeError
from socbid.model import (
    BidCurve,
    asset_from_dict,
    asset_to_dict,
    edcr_residuals,
    edcr_residuals_for,
    segment_index,
    validate_bid,
)

from conftest import make_asset


def test_valid_example_bid(example_asset):
    assert validate_bid(example_asset).ok


def test_increasing_charge_benefits_named():
    report = validate_bid(make_asset(cc=(6, 10), cd=(20, 16)))
    assert report.messages() == ["charge_benefits not nonincreasing at k=1"]


def test_increasing_discharge_costs_named():
    report = validate_bid(make_asset(cc=(10, 6), cd=(16, 20)))
    assert "discharge_costs not nonincreasing at k=1" in report.messages()


def test_spread_violation_message():
    report = validate_bid(make_asset(cc=(10, 6), cd=(20, 9)))
    assert report.messages() == ["spread: c^C_1/eta_c=10 >= c^D_K*eta_d=9"]


def test_spread_equality_is_a_violation():
    assert not validate_bid(make_asset(cc=(10, 6), cd=(20, 10))).ok


@pytest.mark.parametrize(
    "kw, code",
    [
        (dict(eta_c=0.0), "efficiency"),
        (dict(eta_d=1.2), "efficiency"),
        (dict(cap=-1.0), "power_cap"),
        (dict(s=5.0), "initial_soc"),
        (dict(soc_min=-1.0), "soc_bounds"),
        (dict(soc_min=3.0, soc_max=2.0, s=2.5), "soc_bounds"),
        (dict(E=(0.0, 2.0, 2.0)), "boundaries"),
        (dict(cc=(10.0,)), "length"),
        (dict(cc=(math.nan, 6.0)), "finite"),
    ],
)
def test_each_invariant_reported(kw, code):
    report = validate_bid(make_asset(**kw))
    assert code in {v.code for v in report.violations}


def test_single_breakpoint_rejected():
    report = validate_bid(make_asset(E=(0.0,), cc=(), cd=()))
    assert [v.code for v in report.violations] == ["segments"]


def test_edcr_examples():
    ok = edcr_residuals(make_asset())
    assert ok.residuals == (0.0,) and ok.is_edcr
    bad = edcr_residuals(make_asset(cd=(21, 15)))
    assert bad.residuals == (2.0,) and not bad.is_edcr
    k1 = edcr_residuals(make_asset(E=(0, 4), cc=(3,), cd=(50,)))
    assert k1.residuals == () and k1.is_edcr


def test_edcr_rejects_invalid_bid():
    with pytest.raises(InvalidBidError):
        edcr_residuals(make_asset(cc=(6, 10)))


def test_edcr_tolerance_configurable():
    a = make_asset(cd=(20.0, 16.0 - 1e-8))
    assert not edcr_residuals(a).is_edcr
    assert edcr_residuals(a, tol=1e-7).is_edcr


@given(
    shift=st.floats(-50, 50),
    rt=st.floats(0.3, 1.0),
    d=st.lists(st.floats(0, 10), min_size=1, max_size=5),
    extra=st.lists(st.floats(-3, 3), min_size=5, max_size=5),
)
def test_residuals_depend_only_on_differences(shift, rt, d, extra):
    K = len(d) + 1
    cd = [40.0]
    for step in d:
        cd.append(cd[-1] - step)
    cc = [5.0 - sum(d[:k]) * rt + extra[k - 1] if k else 5.0 for k in range(K)]
    E = tuple(range(K + 1))
    base = edcr_residuals_for(BidCurve(E, cc, cd), rt, 1.0)
    moved = edcr_residuals_for(BidCurve(E, [c + shift for c in cc], [c + shift / rt for c in cd]), rt, 1.0)
    assert moved.residuals == pytest.approx(base.residuals, abs=1e-9)


def test_segment_index_examples():
    curve = BidCurve((0, 2, 4), (10, 6), (20, 16))
    assert segment_index(1, curve) == 0
    assert segment_index(2, curve) == 1
    assert segment_index(4, curve) == 1
    assert segment_index(0, curve) == 0


@pytest.mark.parametrize("e", [-1e-12, 4.0000001, math.nan])
def test_segment_index_out_of_range(e):
    with pytest.raises(OutOfRangeError):
        segment_index(e, BidCurve((0, 2, 4), (10, 6), (20, 16)))


@given(st.lists(st.floats(0.1, 10), min_size=1, max_size=6), st.floats(0, 1))
def test_segment_partition_property(widths, frac):
    E = [0.0]
    for w in widths:
        E.append(E[-1] + w)
    K = len(widths)
    curve = BidCurve(E, [0.0] * K, [1.0] * K)
    e = frac * E[-1]
    k = segment_index(e, curve)
    owners = [j for j in range(K) if E[j] <= e < E[j + 1] or (j == K - 1 and e == E[-1])]
    assert owners == [k]


def test_asset_defaults_bounds_from_partition(example_asset):
    assert (example_asset.soc_min, example_asset.soc_max) == (0.0, 4.0)


def test_asset_dict_round_trip(example_asset):
    assert asset_from_dict(asset_to_dict(example_asset)) == example_asset


def test_asset_from_dict_missing_field():
    with pytest.raises(CaseFormatError, match="eta_c"):
        asset_from_dict({"boundaries": [0, 1], "charge_benefits": [1], "discharge_costs": [2]})


def test_asset_from_dict_bad_type():
    data = asset_to_dict(make_asset())
    data["eta_c"] = "fast"
    with pytest.raises(CaseFormatError):
        asset_from_dict(data)
