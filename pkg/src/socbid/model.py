"""SoC-dependent bid curves, storage assets and their admissibility checks.

Segment indices are 0-based throughout the Python API: segment ``k`` covers
``[boundaries[k], boundaries[k + 1])``, except the last one, which is closed.
Human-facing messages number segments from 1.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Any, Mapping

from .errors import CaseFormatError, InvalidBidError, OutOfRangeError

DEFAULT_EDCR_TOL = 1e-9


@dataclass(frozen=True)
class BidCurve:
    """Piecewise-constant marginal charge benefits and discharge costs over SoC.

    ``boundaries`` holds the K+1 breakpoints of the SoC partition (MWh).
    ``charge_benefits`` and ``discharge_costs`` hold one marginal ($/MWh) per
    segment. The constructor only normalises types; admissibility is checked by
    :func:`validate_bid` so that invalid candidate data can still be inspected.
    """

    boundaries: tuple[float, ...]
    charge_benefits: tuple[float, ...]
    discharge_costs: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "boundaries", tuple(float(v) for v in self.boundaries))
        object.__setattr__(self, "charge_benefits", tuple(float(v) for v in self.charge_benefits))
        object.__setattr__(self, "discharge_costs", tuple(float(v) for v in self.discharge_costs))

    @property
    def num_segments(self) -> int:
        return len(self.boundaries) - 1

    @property
    def soc_range(self) -> tuple[float, float]:
        return self.boundaries[0], self.boundaries[-1]

    def charge_decrements(self) -> tuple[float, ...]:
        """``c^C_k - c^C_{k+1}`` for consecutive segments."""
        c = self.charge_benefits
        return tuple(c[k] - c[k + 1] for k in range(len(c) - 1))

    def discharge_decrements(self) -> tuple[float, ...]:
        """``c^D_k - c^D_{k+1}`` for consecutive segments."""
        c = self.discharge_costs
        return tuple(c[k] - c[k + 1] for k in range(len(c) - 1))


@dataclass(frozen=True)
class StorageAsset:
    """A storage participant: its bid curve plus physical parameters.

    Power caps are energies per interval (interval length normalised to 1 h).
    ``soc_min``/``soc_max`` default to the ends of the bid partition.
    """

    bid: BidCurve
    eta_c: float
    eta_d: float
    p_charge_max: float
    p_discharge_max: float
    initial_soc: float
    soc_min: float | None = None
    soc_max: float | None = None

    def __post_init__(self) -> None:
        for name in ("eta_c", "eta_d", "p_charge_max", "p_discharge_max", "initial_soc"):
            object.__setattr__(self, name, float(getattr(self, name)))
        lo, hi = (self.bid.soc_range if self.bid.num_segments >= 1 else (math.nan, math.nan))
        object.__setattr__(self, "soc_min", lo if self.soc_min is None else float(self.soc_min))
        object.__setattr__(self, "soc_max", hi if self.soc_max is None else float(self.soc_max))

    @property
    def round_trip(self) -> float:
        return self.eta_c * self.eta_d

    def with_bid(self, bid: BidCurve) -> "StorageAsset":
        return StorageAsset(
            bid=bid,
            eta_c=self.eta_c,
            eta_d=self.eta_d,
            p_charge_max=self.p_charge_max,
            p_discharge_max=self.p_discharge_max,
            initial_soc=self.initial_soc,
            soc_min=self.soc_min,
            soc_max=self.soc_max,
        )


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def __str__(self) -> str:
        return self.message


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def messages(self) -> list[str]:
        return [v.message for v in self.violations]

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class EdcrCheck:
    residuals: tuple[float, ...]
    is_edcr: bool
    tol: float

    @property
    def max_abs_residual(self) -> float:
        return max((abs(r) for r in self.residuals), default=0.0)


def _fmt(x: float) -> str:
    return f"{x:g}"


def check_assumption1(curve: BidCurve, eta_c: float, eta_d: float) -> list[Violation]:
    """Structural, monotonicity and spread checks on a curve for given efficiencies."""
    out: list[Violation] = []
    K = curve.num_segments
    if K < 1:
        out.append(Violation("segments", "boundaries must hold at least 2 breakpoints (K >= 1)"))
        return out
    if len(curve.charge_benefits) != K:
        out.append(Violation("length", f"charge_benefits has {len(curve.charge_benefits)} entries, expected K={K}"))
    if len(curve.discharge_costs) != K:
        out.append(Violation("length", f"discharge_costs has {len(curve.discharge_costs)} entries, expected K={K}"))
    if out:
        return out
    values = curve.boundaries + curve.charge_benefits + curve.discharge_costs
    if not all(math.isfinite(v) for v in values):
        out.append(Violation("finite", "bid curve contains non-finite values"))
        return out

    E, cc, cd = curve.boundaries, curve.charge_benefits, curve.discharge_costs
    for k in range(K):
        if not E[k] < E[k + 1]:
            out.append(Violation("boundaries", f"boundaries not strictly increasing at k={k + 1}"))
    for k in range(K - 1):
        if cc[k] < cc[k + 1]:
            out.append(Violation("charge_monotone", f"charge_benefits not nonincreasing at k={k + 1}"))
        if cd[k] < cd[k + 1]:
            out.append(Violation("discharge_monotone", f"discharge_costs not nonincreasing at k={k + 1}"))
    if eta_c > 0 and eta_d > 0:
        buy = cc[0] / eta_c
        sell = cd[-1] * eta_d
        if not buy < sell:
            out.append(
                Violation(
                    "spread",
                    f"spread: c^C_1/eta_c={_fmt(buy)} >= c^D_K*eta_d={_fmt(sell)}",
                )
            )
    return out


def validate_bid(asset: StorageAsset) -> ValidationReport:
    """Check every BidCurve and StorageAsset invariant; violations are returned, not raised."""
    out: list[Violation] = []
    for name in ("eta_c", "eta_d"):
        eta = getattr(asset, name)
        if not (0.0 < eta <= 1.0):
            out.append(Violation("efficiency", f"{name}={_fmt(eta)} not in (0, 1]"))
    for name in ("p_charge_max", "p_discharge_max"):
        cap = getattr(asset, name)
        if not (math.isfinite(cap) and cap >= 0.0):
            out.append(Violation("power_cap", f"{name}={_fmt(cap)} must be finite and >= 0"))
    curve_violations = check_assumption1(asset.bid, asset.eta_c, asset.eta_d)
    out.extend(curve_violations)
    structural = {"segments", "length", "finite"}
    if not any(v.code in structural for v in curve_violations):
        E1, EK = asset.bid.soc_range
        lo, hi, s = asset.soc_min, asset.soc_max, asset.initial_soc
        if not all(math.isfinite(v) for v in (lo, hi, s)):
            out.append(Violation("soc_bounds", "SoC bounds and initial SoC must be finite"))
        else:
            if lo < E1 or hi > EK:
                out.append(
                    Violation(
                        "soc_bounds",
                        f"SoC bounds [{_fmt(lo)}, {_fmt(hi)}] not inside bid partition [{_fmt(E1)}, {_fmt(EK)}]",
                    )
                )
            if lo > hi:
                out.append(Violation("soc_bounds", f"soc_min={_fmt(lo)} exceeds soc_max={_fmt(hi)}"))
            if not (lo <= s <= hi):
                out.append(
                    Violation("initial_soc", f"initial_soc={_fmt(s)} not in [{_fmt(lo)}, {_fmt(hi)}]")
                )
    return ValidationReport(tuple(out))


def edcr_residuals_for(curve: BidCurve, eta_c: float, eta_d: float, tol: float = DEFAULT_EDCR_TOL) -> EdcrCheck:
    """EDCR residuals without asset-level validation.

    ``r_k = (c^C_{k+1} - c^C_k) - eta_c*eta_d*(c^D_{k+1} - c^D_k)``, so
    c^C=(10, 6), c^D=(21, 15) at unit efficiency gives ``r = (2,)``.
    """
    rt = eta_c * eta_d
    res = tuple(rt * dd - dc for dc, dd in zip(curve.charge_decrements(), curve.discharge_decrements()))
    return EdcrCheck(res, all(abs(r) <= tol for r in res), tol)


def edcr_residuals(asset: StorageAsset, tol: float = DEFAULT_EDCR_TOL) -> EdcrCheck:
    """Residuals of the equal decremental-cost ratio condition, one per segment pair.

    Raises :class:`InvalidBidError` if the asset fails :func:`validate_bid`.
    """
    report = validate_bid(asset)
    if not report.ok:
        raise InvalidBidError("invalid bid: " + "; ".join(report.messages()))
    return edcr_residuals_for(asset.bid, asset.eta_c, asset.eta_d, tol)


def segment_index(e: float, curve: BidCurve) -> int:
    """0-based segment holding SoC ``e``; shared boundaries belong to the upper segment."""
    E = curve.boundaries
    if not (E[0] <= e <= E[-1]):
        raise OutOfRangeError(f"SoC {e!r} outside bid partition [{E[0]!r}, {E[-1]!r}]")
    return min(bisect.bisect_right(E, e) - 1, len(E) - 2)


_BID_KEYS = ("boundaries", "charge_benefits", "discharge_costs")
_ASSET_KEYS = _BID_KEYS + ("eta_c", "eta_d", "p_charge_max", "p_discharge_max", "initial_soc")


def _require(data: Any, keys: tuple[str, ...], where: str) -> None:
    if not isinstance(data, Mapping):
        raise CaseFormatError(f"{where}: expected an object")
    missing = [k for k in keys if k not in data]
    if missing:
        raise CaseFormatError(f"{where}: missing field(s) {', '.join(missing)}")
    for k in _BID_KEYS:
        if k in keys and not isinstance(data[k], (list, tuple)):
            raise CaseFormatError(f"{where}.{k}: expected an array of numbers")


def bid_curve_from_dict(data: Mapping[str, Any], where: str = "bid") -> BidCurve:
    _require(data, _BID_KEYS, where)
    return BidCurve(
        boundaries=tuple(data["boundaries"]),
        charge_benefits=tuple(data["charge_benefits"]),
        discharge_costs=tuple(data["discharge_costs"]),
    )


def asset_from_dict(data: Mapping[str, Any], where: str = "bid") -> StorageAsset:
    """Build a StorageAsset from the bid JSON object."""
    _require(data, _ASSET_KEYS, where)
    try:
        return _asset_from_checked(data, where)
    except (TypeError, ValueError) as exc:
        raise CaseFormatError(f"{where}: {exc}") from exc


def _asset_from_checked(data: Mapping[str, Any], where: str) -> StorageAsset:
    return StorageAsset(
        bid=bid_curve_from_dict(data, where),
        eta_c=data["eta_c"],
        eta_d=data["eta_d"],
        p_charge_max=data["p_charge_max"],
        p_discharge_max=data["p_discharge_max"],
        initial_soc=data["initial_soc"],
        soc_min=data.get("soc_min"),
        soc_max=data.get("soc_max"),
    )


def asset_to_dict(asset: StorageAsset) -> dict[str, Any]:
    return {
        "boundaries": list(asset.bid.boundaries),
        "charge_benefits": list(asset.bid.charge_benefits),
        "discharge_costs": list(asset.bid.discharge_costs),
        "eta_c": asset.eta_c,
        "eta_d": asset.eta_d,
        "p_charge_max": asset.p_charge_max,
        "p_discharge_max": asset.p_discharge_max,
        "soc_min": asset.soc_min,
        "soc_max": asset.soc_max,
        "initial_soc": asset.initial_soc,
    }
