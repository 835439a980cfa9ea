from __future__ import annotations

import json
from pathlib import Path

import pytest

from socbid.model import BidCurve, StorageAsset
from socbid.network import case_from_dict

DATA = Path(__file__).resolve().parent.parent / "data"


def make_asset(
    cc=(10.0, 6.0),
    cd=(20.0, 16.0),
    E=(0.0, 2.0, 4.0),
    eta_c: float = 1.0,
    eta_d: float = 1.0,
    cap: float = 2.0,
    s: float = 1.0,
    **kw,
) -> StorageAsset:
    return StorageAsset(BidCurve(E, cc, cd), eta_c, eta_d, cap, cap, s, **kw)


def storage_dict(cc, cd, E, cap, s, eta=1.0) -> dict:
    return {
        "boundaries": list(E),
        "charge_benefits": list(cc),
        "discharge_costs": list(cd),
        "eta_c": eta,
        "eta_d": eta,
        "p_charge_max": cap,
        "p_discharge_max": cap,
        "initial_soc": s,
    }


def load_data(name: str):
    return case_from_dict(json.loads((DATA / name).read_text()))


@pytest.fixture
def example_asset() -> StorageAsset:
    return make_asset()


@pytest.fixture
def single_bus_case():
    return load_data("single_bus.json")


@pytest.fixture
def arbitrage_case():
    return load_data("arbitrage.json")


@pytest.fixture
def two_bus_case():
    return load_data("two_bus.json")


@pytest.fixture
def data_dir() -> Path:
    return DATA


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}")
