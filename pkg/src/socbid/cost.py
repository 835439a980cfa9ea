"""Storage operating cost: exact nonconvex evaluation and the EDCR closed form.

The exact path walks a trajectory interval by interval using the stage cost
with cross-segment corrections. The closed form collapses the whole horizon
into a maximum of K affine functions of total charge and total discharge,
which is only valid for bids satisfying the EDCR condition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, InfeasibleTrajectoryError, InvalidBidError, OutOfRangeError
from .model import (
    DEFAULT_EDCR_TOL,
    StorageAsset,
    edcr_residuals,
    segment_index,
)

SOC_TOL = 1e-9


@dataclass(frozen=True)
class Trajectory:
    """Per-interval charge and discharge energies starting from ``initial_soc``."""

    charge: tuple[float, ...]
    discharge: tuple[float, ...]
    initial_soc: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "charge", tuple(float(v) for v in self.charge))
        object.__setattr__(self, "discharge", tuple(float(v) for v in self.discharge))
        object.__setattr__(self, "initial_soc", float(self.initial_soc))
        if len(self.charge) != len(self.discharge):
            raise ContractViolation("charge and discharge must have the same length")

    @property
    def horizon(self) -> int:
        return len(self.charge)

    def totals(self) -> tuple[float, float]:
        return float(sum(self.charge)), float(sum(self.discharge))


@dataclass(frozen=True)
class ConvexCostCuts:
    """Affine pieces ``intercept_j + charge_coef_j*Gc + discharge_coef_j*Gd``."""

    intercepts: tuple[float, ...]
    charge_coefs: tuple[float, ...]
    discharge_coefs: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.intercepts)

    def values(self, total_charge: float, total_discharge: float) -> np.ndarray:
        return (
            np.asarray(self.intercepts)
            + np.asarray(self.charge_coefs) * total_charge
            + np.asarray(self.discharge_coefs) * total_discharge
        )

    def evaluate(self, total_charge: float, total_discharge: float) -> tuple[float, int]:
        v = self.values(total_charge, total_discharge)
        j = int(np.argmax(v))
        return float(v[j]), j


def _lookup(e: float, asset: StorageAsset, tol: float) -> int:
    lo, hi = asset.bid.soc_range
    if e < lo - tol or e > hi + tol:
        raise OutOfRangeError(f"SoC {e!r} outside bid partition [{lo!r}, {hi!r}]")
    return segment_index(min(max(e, lo), hi), asset.bid)


def soc_step(e: float, g_c: float, g_d: float, asset: StorageAsset) -> float:
    """SoC after one interval of charging ``g_c`` or discharging ``g_d``."""
    if g_c < 0 or g_d < 0:
        raise ContractViolation(f"negative power: g_c={g_c!r}, g_d={g_d!r}")
    if g_c > 0 and g_d > 0:
        raise ContractViolation(f"simultaneous charge and discharge: g_c={g_c!r}, g_d={g_d!r}")
    return e + g_c * asset.eta_c - g_d / asset.eta_d


def stage_cost(e_t: float, g_c: float, g_d: float, asset: StorageAsset, *, tol: float = SOC_TOL) -> float:
    """Discharge cost minus charge benefit for one interval, starting at SoC ``e_t``.

    When the interval crosses segment boundaries the marginal of the landing
    segment is applied to the whole energy and the correction sums account for
    the segments traversed on the way.
    """
    e_next = soc_step(e_t, g_c, g_d, asset)
    m = _lookup(e_t, asset, tol)
    n = _lookup(e_next, asset, tol)
    E = asset.bid.boundaries
    cc = asset.bid.charge_benefits
    cd = asset.bid.discharge_costs

    benefit = 0.0
    if n >= m:
        benefit = g_c * cc[n]
        for k in range(m, n):
            benefit += (cc[k] - cc[k + 1]) / asset.eta_c * (E[k + 1] - e_t)
    cost = 0.0
    if n <= m:
        cost = g_d * cd[n]
        for k in range(n + 1, m + 1):
            cost += asset.eta_d * (cd[k - 1] - cd[k]) * (E[k] - e_t)
    return cost - benefit


def check_trajectory(traj: Trajectory, asset: StorageAsset, *, tol: float = SOC_TOL) -> list[float]:
    """Return the SoC path, raising on the first violated interval (0-based attribute) and constraint."""
    e = traj.initial_soc
    if not (asset.soc_min - tol <= e <= asset.soc_max + tol):
        raise InfeasibleTrajectoryError(
            f"initial SoC {e!r} outside [{asset.soc_min!r}, {asset.soc_max!r}]", 0, "initial_soc"
        )
    path = [e]
    for t, (gc, gd) in enumerate(zip(traj.charge, traj.discharge)):
        if gc < 0 or gd < 0:
            raise InfeasibleTrajectoryError(f"interval {t + 1}: negative power", t, "nonnegativity")
        if gc > 0 and gd > 0:
            raise InfeasibleTrajectoryError(
                f"interval {t + 1}: simultaneous charge {gc!r} and discharge {gd!r}", t, "complementarity"
            )
        if gc > asset.p_charge_max + tol:
            raise InfeasibleTrajectoryError(
                f"interval {t + 1}: charge {gc!r} exceeds cap {asset.p_charge_max!r}", t, "charge_cap"
            )
        if gd > asset.p_discharge_max + tol:
            raise InfeasibleTrajectoryError(
                f"interval {t + 1}: discharge {gd!r} exceeds cap {asset.p_discharge_max!r}", t, "discharge_cap"
            )
        e = soc_step(e, gc, gd, asset)
        if e < asset.soc_min - tol:
            raise InfeasibleTrajectoryError(f"interval {t + 1}: SoC {e!r} below soc_min", t, "soc_min")
        if e > asset.soc_max + tol:
            raise InfeasibleTrajectoryError(f"interval {t + 1}: SoC {e!r} above soc_max", t, "soc_max")
        path.append(e)
    return path


def trajectory_cost(traj: Trajectory, asset: StorageAsset, *, tol: float = SOC_TOL) -> tuple[float, tuple[float, ...]]:
    """Total cost over the horizon and the SoC path ``e_1..e_{T+1}``."""
    path = check_trajectory(traj, asset, tol=tol)
    total = 0.0
    for t in range(traj.horizon):
        total += stage_cost(path[t], traj.charge[t], traj.discharge[t], asset, tol=tol)
    return total, tuple(path)


def _cumulative_charge_value(j: int, s: float, asset: StorageAsset) -> float:
    # sum_{k<j} dc^C_k (E_{k+1} - E_1)/eta_c + c^C_j (s - E_1)/eta_c
    E = asset.bid.boundaries
    cc = asset.bid.charge_benefits
    acc = 0.0
    for k in range(j):
        acc += (cc[k] - cc[k + 1]) * (E[k + 1] - E[0]) / asset.eta_c
    return acc + cc[j] * (s - E[0]) / asset.eta_c


def h_offset(s: float, asset: StorageAsset) -> float:
    """Offset ``h(s)``: the charging-benefit potential accumulated from ``E_1`` to ``s``."""
    return _cumulative_charge_value(segment_index(s, asset.bid), s, asset)


def alpha(j: int, s: float, asset: StorageAsset) -> float:
    """Intercept of affine piece ``j`` (0-based) for initial SoC ``s``."""
    K = asset.bid.num_segments
    if not 0 <= j < K:
        raise ContractViolation(f"segment index {j} outside 0..{K - 1}")
    return h_offset(s, asset) - _cumulative_charge_value(j, s, asset)


def _cuts_unchecked(s: float, asset: StorageAsset) -> ConvexCostCuts:
    K = asset.bid.num_segments
    h = h_offset(s, asset)
    return ConvexCostCuts(
        intercepts=tuple(h - _cumulative_charge_value(j, s, asset) for j in range(K)),
        charge_coefs=tuple(-c for c in asset.bid.charge_benefits),
        discharge_coefs=asset.bid.discharge_costs,
    )


def cut_values(total_charge: float, total_discharge: float, s: float, asset: StorageAsset) -> np.ndarray:
    """Values of all affine pieces, without requiring EDCR (used to probe non-EDCR bids)."""
    return _cuts_unchecked(s, asset).values(total_charge, total_discharge)


def _require_edcr(asset: StorageAsset, tol: float) -> None:
    check = edcr_residuals(asset, tol)
    if not check.is_edcr:
        raise InvalidBidError(
            f"bid violates EDCR (max residual {check.max_abs_residual:.3g}); the closed form does not apply"
        )


def epigraph_cuts(s: float, asset: StorageAsset, *, edcr_tol: float = DEFAULT_EDCR_TOL) -> ConvexCostCuts:
    """The K affine pieces whose maximum is the horizon cost of an EDCR asset."""
    _require_edcr(asset, edcr_tol)
    return _cuts_unchecked(s, asset)


def convex_cost(
    total_charge: float,
    total_discharge: float,
    s: float,
    asset: StorageAsset,
    *,
    edcr_tol: float = DEFAULT_EDCR_TOL,
) -> tuple[float, int]:
    """Closed-form horizon cost and the maximising piece (smallest index on ties)."""
    return epigraph_cuts(s, asset, edcr_tol=edcr_tol).evaluate(total_charge, total_discharge)

