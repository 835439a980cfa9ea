"""Case data for the multi-bus, multi-interval dispatch and its JSON file format.

Case file schema (JSON object)::

    num_buses      int M >= 1
    horizon        int T >= 0
    shift_factors  2B rows of M numbers (both flow directions as separate rows)
    branch_limits  2B numbers
    demand         M rows of T numbers (MWh per interval)
    generators     {"<bus>": {"blocks": [[capacity, marginal_cost], ...]}}
    storages       {"<bus>": <bid object>}

Bus keys are 1-based in files and 0-based in memory. Power quantities are
energies per interval with the interval length normalised to one hour.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from .errors import CaseFormatError, CaseValidationError
from .model import StorageAsset, asset_from_dict, asset_to_dict, validate_bid


@dataclass(frozen=True)
class Generator:
    """Piecewise-linear convex offer: ``(capacity, marginal_cost)`` blocks in merit order."""

    blocks: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "blocks", tuple((float(c), float(p)) for c, p in self.blocks))

    @property
    def capacity(self) -> float:
        return sum(c for c, _ in self.blocks)

    def cost(self, output: float) -> float:
        """Offer cost of producing ``output`` by filling blocks in order."""
        remaining = output
        total = 0.0
        for cap, price in self.blocks:
            take = min(cap, remaining)
            if take <= 0:
                break
            total += take * price
            remaining -= take
        return total

    def breakpoints(self) -> list[float]:
        out = [0.0]
        for cap, _ in self.blocks:
            out.append(out[-1] + cap)
        return out


@dataclass(frozen=True)
class Network:
    num_buses: int
    shift_factors: np.ndarray
    branch_limits: np.ndarray

    def __post_init__(self) -> None:
        S = np.array(self.shift_factors, dtype=np.float64).reshape(-1, self.num_buses)
        S.setflags(write=False)
        q = np.array(self.branch_limits, dtype=np.float64).reshape(-1)
        q.setflags(write=False)
        object.__setattr__(self, "shift_factors", S)
        object.__setattr__(self, "branch_limits", q)

    @property
    def num_rows(self) -> int:
        return self.shift_factors.shape[0]


@dataclass(frozen=True)
class Case:
    network: Network
    horizon: int
    demand: np.ndarray
    generators: tuple[Generator | None, ...]
    storages: tuple[StorageAsset | None, ...]

    def __post_init__(self) -> None:
        d = np.array(self.demand, dtype=np.float64).reshape(self.network.num_buses, self.horizon)
        d.setflags(write=False)
        object.__setattr__(self, "demand", d)
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "storages", tuple(self.storages))

    @property
    def num_buses(self) -> int:
        return self.network.num_buses

    def storage_buses(self) -> list[int]:
        return [i for i, s in enumerate(self.storages) if s is not None]

    def generator_buses(self) -> list[int]:
        return [i for i, g in enumerate(self.generators) if g is not None]


def validate_case(case: Case) -> list[str]:
    """Every invariant violation in the case, each naming its location."""
    out: list[str] = []
    net = case.network
    S, q = net.shift_factors, net.branch_limits
    if net.num_rows % 2:
        out.append(f"shift_factors: row count {net.num_rows} is not even (2B rows expected)")
    if not np.all(np.isfinite(S)):
        out.append("shift_factors: non-finite entries")
    for r, v in enumerate(q.tolist()):
        if not (math.isfinite(v) and v >= 0):
            out.append(f"branch_limits[{r + 1}]: {v!r} must be finite and >= 0")
    for i in range(case.num_buses):
        for t in range(case.horizon):
            v = float(case.demand[i, t])
            if not (math.isfinite(v) and v >= 0):
                out.append(f"demand bus {i + 1}, t={t + 1}: {v!r} must be finite and >= 0")
    for i, g in enumerate(case.generators):
        if g is None:
            continue
        if not g.blocks:
            out.append(f"generators.{i + 1}: no blocks")
        for b, (cap, price) in enumerate(g.blocks):
            if not (math.isfinite(cap) and cap > 0):
                out.append(f"generators.{i + 1}.blocks[{b + 1}]: capacity {cap!r} must be > 0")
            if not math.isfinite(price):
                out.append(f"generators.{i + 1}.blocks[{b + 1}]: non-finite cost")
            if b and price < g.blocks[b - 1][1]:
                out.append(f"generators.{i + 1}.blocks[{b + 1}]: marginal cost decreases (nonconvex offer)")
    for i, s in enumerate(case.storages):
        if s is None:
            continue
        for msg in validate_bid(s).messages():
            out.append(f"storages.{i + 1}: {msg}")
    return out


def _bus_key(key: str, M: int, where: str) -> int:
    try:
        bus = int(key)
    except (TypeError, ValueError):
        raise CaseFormatError(f"{where}: bus key {key!r} is not an integer") from None
    if not 1 <= bus <= M:
        raise CaseFormatError(f"{where}: bus {bus} outside 1..{M}")
    return bus - 1


def _number_matrix(value: Any, where: str) -> list[list[float]]:
    if not isinstance(value, list) or not all(isinstance(row, list) for row in value):
        raise CaseFormatError(f"{where}: expected an array of arrays")
    try:
        return [[float(v) for v in row] for row in value]
    except (TypeError, ValueError):
        raise CaseFormatError(f"{where}: non-numeric entry") from None


def case_from_dict(data: Mapping[str, Any], *, validate: bool = True) -> Case:
    """Build a Case from a decoded case file; dimension checks are always applied."""
    if not isinstance(data, Mapping):
        raise CaseFormatError("case: expected a JSON object")
    for key in ("num_buses", "horizon", "shift_factors", "branch_limits", "demand"):
        if key not in data:
            raise CaseFormatError(f"case: missing field {key!r}")
    M, T = data["num_buses"], data["horizon"]
    if not isinstance(M, int) or isinstance(M, bool) or M < 1:
        raise CaseFormatError("num_buses: expected an integer >= 1")
    if not isinstance(T, int) or isinstance(T, bool) or T < 0:
        raise CaseFormatError("horizon: expected an integer >= 0")

    S = _number_matrix(data["shift_factors"], "shift_factors")
    for r, row in enumerate(S):
        if len(row) != M:
            raise CaseFormatError(f"shift_factors[{r + 1}]: dimension mismatch, {len(row)} columns but num_buses={M}")
    if not isinstance(data["branch_limits"], list):
        raise CaseFormatError("branch_limits: expected an array")
    q = _number_matrix([data["branch_limits"]], "branch_limits")[0]
    if len(q) != len(S):
        raise CaseFormatError(f"branch_limits: dimension mismatch, {len(q)} limits for {len(S)} shift-factor rows")
    d = _number_matrix(data["demand"], "demand")
    if len(d) != M or any(len(row) != T for row in d):
        raise CaseFormatError(f"demand: dimension mismatch, expected {M} rows of {T} columns")

    generators: list[Generator | None] = [None] * M
    gens = data.get("generators", {}) or {}
    if not isinstance(gens, Mapping):
        raise CaseFormatError("generators: expected an object keyed by bus")
    for key, spec in gens.items():
        where = f"generators.{key}"
        bus = _bus_key(key, M, where)
        if not isinstance(spec, Mapping) or "blocks" not in spec:
            raise CaseFormatError(f"{where}: expected an object with 'blocks'")
        blocks = _number_matrix(spec["blocks"], f"{where}.blocks")
        if any(len(b) != 2 for b in blocks):
            raise CaseFormatError(f"{where}.blocks: each block must be [capacity, cost]")
        generators[bus] = Generator(tuple((b[0], b[1]) for b in blocks))

    storages: list[StorageAsset | None] = [None] * M
    stores = data.get("storages", {}) or {}
    if not isinstance(stores, Mapping):
        raise CaseFormatError("storages: expected an object keyed by bus")
    for key, spec in stores.items():
        where = f"storages.{key}"
        storages[_bus_key(key, M, where)] = asset_from_dict(spec, where)

    network = Network(M, np.array(S, dtype=np.float64).reshape(len(S), M), np.array(q, dtype=np.float64))
    case = Case(network, T, np.array(d, dtype=np.float64).reshape(M, T), tuple(generators), tuple(storages))
    if validate:
        violations = validate_case(case)
        if violations:
            raise CaseValidationError(violations)
    return case


def load_case(text: str, *, validate: bool = True) -> Case:
    """Parse and validate case-file content. ``json.JSONDecodeError`` propagates for bad JSON."""
    return case_from_dict(json.loads(text), validate=validate)


def case_to_dict(case: Case) -> dict[str, Any]:
    return {
        "num_buses": case.num_buses,
        "horizon": case.horizon,
        "shift_factors": case.network.shift_factors.tolist(),
        "branch_limits": case.network.branch_limits.tolist(),
        "demand": case.demand.tolist(),
        "generators": {
            str(i + 1): {"blocks": [list(b) for b in g.blocks]}
            for i, g in enumerate(case.generators)
            if g is not None
        },
        "storages": {str(i + 1): asset_to_dict(s) for i, s in enumerate(case.storages) if s is not None},
    }


def dump_case(case: Case) -> str:
    return json.dumps(case_to_dict(case), indent=2)


def cases_equal(a: Case, b: Case) -> bool:
    """Exact equality of two cases (array fields compared bitwise)."""
    return (
        a.num_buses == b.num_buses
        and a.horizon == b.horizon
        and np.array_equal(a.network.shift_factors, b.network.shift_factors)
        and np.array_equal(a.network.branch_limits, b.network.branch_limits)
        and np.array_equal(a.demand, b.demand)
        and a.generators == b.generators
        and a.storages == b.storages
    )
