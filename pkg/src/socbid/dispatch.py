"""Convexified multi-interval economic dispatch with SoC-dependent storage bids.

Each storage contributes an epigraph variable ``theta_i`` bounded below by the
K affine pieces of its EDCR horizon cost; the bilinear no-simultaneous
charge/discharge constraint is dropped and checked after the solve.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field

import numpy as np

from .cost import Trajectory, epigraph_cuts, trajectory_cost
from .errors import InfeasibleDispatchError, InvalidBidError, NumericalError
from .lp import LinearProgram, LpSolution, LpStatus, solve_lp
from .model import DEFAULT_EDCR_TOL, edcr_residuals
from .network import Case, validate_case

EXACTNESS_TOL = 1e-7


@dataclass(frozen=True)
class DispatchIndex:
    """Positions of variables and constraint rows in the dispatch LP (-1 when absent)."""

    gen_blocks: dict[int, np.ndarray]  # bus -> (T, n_blocks) variable indices
    charge: np.ndarray  # (M, T)
    discharge: np.ndarray  # (M, T)
    soc: np.ndarray  # (M, T), variable for e_{i,t+1}
    theta: np.ndarray  # (M,)
    balance_rows: np.ndarray  # (T,) equality rows
    soc_rows: np.ndarray  # (M, T) equality rows
    branch_rows: np.ndarray  # (2B, T) inequality rows
    cut_rows: dict[int, np.ndarray]  # bus -> (K,) inequality rows

    @property
    def num_balance(self) -> int:
        return int(self.balance_rows.size)

    @property
    def num_soc(self) -> int:
        return int(np.count_nonzero(self.soc_rows >= 0))

    @property
    def num_branch(self) -> int:
        return int(self.branch_rows.size)

    @property
    def num_cuts(self) -> int:
        return int(sum(r.size for r in self.cut_rows.values()))


class _Builder:
    def __init__(self) -> None:
        self.c: list[float] = []
        self.lo: list[float] = []
        self.up: list[float] = []
        self.names: list[str] = []

    def var(self, name: str, cost: float, lo: float, up: float) -> int:
        self.c.append(cost)
        self.lo.append(lo)
        self.up.append(up)
        self.names.append(name)
        return len(self.c) - 1


def _require_edcr_case(case: Case, edcr_tol: float) -> None:
    for i in case.storage_buses():
        check = edcr_residuals(case.storages[i], edcr_tol)
        if not check.is_edcr:
            raise InvalidBidError(
                f"storage at bus {i + 1} violates EDCR (max residual {check.max_abs_residual:.3g}); "
                "approximate its bid with fit_edcr first"
            )


def build_dispatch_lp(case: Case, *, edcr_tol: float = DEFAULT_EDCR_TOL) -> tuple[LinearProgram, DispatchIndex]:
    """Assemble the relaxed dispatch LP and the index map used for dual extraction."""
    violations = validate_case(case)
    if violations:
        raise InvalidBidError("invalid case: " + "; ".join(violations))
    _require_edcr_case(case, edcr_tol)

    M, T = case.num_buses, case.horizon
    S, q = case.network.shift_factors, case.network.branch_limits
    b = _Builder()

    gen_blocks: dict[int, np.ndarray] = {}
    for i in case.generator_buses():
        g = case.generators[i]
        idx = np.empty((T, len(g.blocks)), dtype=int)
        for t in range(T):
            for k, (cap, price) in enumerate(g.blocks):
                idx[t, k] = b.var(f"g{i + 1}_{t + 1}_b{k + 1}", price, 0.0, cap)
        gen_blocks[i] = idx

    charge = np.full((M, T), -1)
    discharge = np.full((M, T), -1)
    soc = np.full((M, T), -1)
    theta = np.full(M, -1)
    for i in case.storage_buses():
        a = case.storages[i]
        for t in range(T):
            charge[i, t] = b.var(f"gc{i + 1}_{t + 1}", 0.0, 0.0, a.p_charge_max)
            discharge[i, t] = b.var(f"gd{i + 1}_{t + 1}", 0.0, 0.0, a.p_discharge_max)
            soc[i, t] = b.var(f"e{i + 1}_{t + 2}", 0.0, a.soc_min, a.soc_max)
        theta[i] = b.var(f"theta{i + 1}", 1.0, -np.inf, np.inf)

    n = len(b.c)

    def injection_row(t: int, weights: np.ndarray) -> np.ndarray:
        # coefficients of sum_i weights[i] * (gG_it + gD_it - gC_it)
        row = np.zeros(n)
        for i, idx in gen_blocks.items():
            row[idx[t]] += weights[i]
        for i in case.storage_buses():
            row[discharge[i, t]] += weights[i]
            row[charge[i, t]] -= weights[i]
        return row

    eq_rows: list[np.ndarray] = []
    eq_rhs: list[float] = []
    balance_rows = np.empty(T, dtype=int)
    ones = np.ones(M)
    for t in range(T):
        balance_rows[t] = len(eq_rows)
        eq_rows.append(injection_row(t, ones))
        eq_rhs.append(float(case.demand[:, t].sum()))

    soc_rows = np.full((M, T), -1)
    for i in case.storage_buses():
        a = case.storages[i]
        for t in range(T):
            row = np.zeros(n)
            row[soc[i, t]] = 1.0
            row[charge[i, t]] = -a.eta_c
            row[discharge[i, t]] = 1.0 / a.eta_d
            rhs = 0.0
            if t == 0:
                rhs = a.initial_soc
            else:
                row[soc[i, t - 1]] = -1.0
            soc_rows[i, t] = len(eq_rows)
            eq_rows.append(row)
            eq_rhs.append(rhs)

    ub_rows: list[np.ndarray] = []
    ub_rhs: list[float] = []
    branch_rows = np.empty((S.shape[0], T), dtype=int)
    for t in range(T):
        flow_of_demand = S @ case.demand[:, t]
        for r in range(S.shape[0]):
            branch_rows[r, t] = len(ub_rows)
            ub_rows.append(injection_row(t, S[r]))
            ub_rhs.append(float(q[r] + flow_of_demand[r]))

    cut_rows: dict[int, np.ndarray] = {}
    for i in case.storage_buses():
        a = case.storages[i]
        cuts = epigraph_cuts(a.initial_soc, a, edcr_tol=edcr_tol)
        rows = np.empty(len(cuts), dtype=int)
        for j in range(len(cuts)):
            # theta_i >= alpha_j + coef_c * sum_t gC + coef_d * sum_t gD
            row = np.zeros(n)
            row[theta[i]] = -1.0
            row[charge[i]] = cuts.charge_coefs[j]
            row[discharge[i]] = cuts.discharge_coefs[j]
            rows[j] = len(ub_rows)
            ub_rows.append(row)
            ub_rhs.append(-cuts.intercepts[j])
        cut_rows[i] = rows

    lp = LinearProgram(
        c=np.array(b.c),
        A_ub=np.array(ub_rows).reshape(len(ub_rows), n),
        b_ub=np.array(ub_rhs),
        A_eq=np.array(eq_rows).reshape(len(eq_rows), n),
        b_eq=np.array(eq_rhs),
        lower=np.array(b.lo),
        upper=np.array(b.up),
        var_names=tuple(b.names),
    )
    index = DispatchIndex(
        gen_blocks=gen_blocks,
        charge=charge,
        discharge=discharge,
        soc=soc,
        theta=theta,
        balance_rows=balance_rows,
        soc_rows=soc_rows,
        branch_rows=branch_rows,
        cut_rows=cut_rows,
    )
    return lp, index


def compute_lmps(lam: np.ndarray, mu: np.ndarray, S: np.ndarray) -> np.ndarray:
    """``pi[i, t] = lam[t] - S[:, i] @ mu[:, t]``."""
    lam = np.asarray(lam, dtype=float)
    mu = np.asarray(mu, dtype=float).reshape(S.shape[0], lam.size)
    return lam[None, :] - S.T @ mu


@dataclass(frozen=True)
class DispatchResult:
    case: Case
    generation: np.ndarray  # (M, T)
    charge: np.ndarray  # (M, T)
    discharge: np.ndarray  # (M, T)
    soc: np.ndarray  # (M, T + 1), column 0 is the initial SoC
    theta: np.ndarray  # (M,)
    objective: float
    lam: np.ndarray  # (T,)
    mu: np.ndarray  # (2B, T)
    phi: np.ndarray  # (M, T)
    lmp: np.ndarray  # (M, T)
    lp: LinearProgram | None = field(default=None, repr=False)
    solution: LpSolution | None = field(default=None, repr=False)
    index: DispatchIndex | None = field(default=None, repr=False)

    @property
    def storage_buses(self) -> list[int]:
        return self.case.storage_buses()

    def storage_trajectory(self, bus: int, chop: float = 1e-11) -> Trajectory:
        gc = np.where(self.charge[bus] > chop, self.charge[bus], 0.0)
        gd = np.where(self.discharge[bus] > chop, self.discharge[bus], 0.0)
        return Trajectory(tuple(gc), tuple(gd), self.case.storages[bus].initial_soc)

    def generation_cost(self) -> float:
        total = 0.0
        for i in self.case.generator_buses():
            g = self.case.generators[i]
            total += sum(g.cost(v) for v in self.generation[i])
        return total

    def to_dict(self) -> dict:
        M = self.case.num_buses
        storages = {}
        for i in self.storage_buses:
            storages[str(i + 1)] = {
                "charge": self.charge[i].tolist(),
                "discharge": self.discharge[i].tolist(),
                "soc": self.soc[i].tolist(),
                "theta": float(self.theta[i]),
            }
        return {
            "objective": self.objective,
            "generation": {str(i + 1): self.generation[i].tolist() for i in range(M)},
            "storages": storages,
            "lambda": self.lam.tolist(),
            "mu": self.mu.tolist(),
            "phi": {str(i + 1): self.phi[i].tolist() for i in self.storage_buses},
            "lmp": {str(i + 1): self.lmp[i].tolist() for i in range(M)},
        }


def solve_dispatch(
    case: Case,
    *,
    tol: float = 1e-8,
    edcr_tol: float = DEFAULT_EDCR_TOL,
) -> DispatchResult:
    """Solve the relaxed dispatch; raises :class:`InfeasibleDispatchError` when no schedule exists."""
    lp, idx = build_dispatch_lp(case, edcr_tol=edcr_tol)
    sol = solve_lp(lp, tol=tol)
    if sol.status is LpStatus.INFEASIBLE:
        raise InfeasibleDispatchError("dispatch LP is infeasible (demand cannot be served within limits)")
    if sol.status is not LpStatus.OPTIMAL:
        raise NumericalError(f"dispatch LP reported {sol.status.value}")

    M, T = case.num_buses, case.horizon
    x = sol.x
    gen = np.zeros((M, T))
    for i, blk in idx.gen_blocks.items():
        gen[i] = x[blk].sum(axis=1)
    gc = np.zeros((M, T))
    gd = np.zeros((M, T))
    soc = np.zeros((M, T + 1))
    theta = np.zeros(M)
    phi = np.zeros((M, T))
    for i in case.storage_buses():
        gc[i] = x[idx.charge[i]]
        gd[i] = x[idx.discharge[i]]
        soc[i, 0] = case.storages[i].initial_soc
        soc[i, 1:] = x[idx.soc[i]]
        theta[i] = x[idx.theta[i]]
        phi[i] = sol.y_eq[idx.soc_rows[i]]
    lam = sol.y_eq[idx.balance_rows].copy()
    mu = sol.y_ineq[idx.branch_rows] if idx.branch_rows.size else np.zeros((0, T))
    lmp = compute_lmps(lam, mu, case.network.shift_factors)
    return DispatchResult(
        case=case,
        generation=gen,
        charge=gc,
        discharge=gd,
        soc=soc,
        theta=theta,
        objective=sol.objective,
        lam=lam,
        mu=mu,
        phi=phi,
        lmp=lmp,
        lp=lp,
        solution=sol,
        index=idx,
    )


class Verdict(str, enum.Enum):
    EXACT = "EXACT"
    LEMMA_VIOLATION = "LEMMA-VIOLATION"
    PRECONDITION_UNMET = "PRECONDITION-UNMET"


@dataclass(frozen=True)
class ExactnessReport:
    verdict: Verdict
    min_lmp: float
    simultaneous: tuple[tuple[int, int], ...]  # (bus, t), 0-based
    tol: float

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "min_lmp": self.min_lmp,
            "simultaneous": [[i + 1, t + 1] for i, t in self.simultaneous],
            "tol": self.tol,
        }


def check_exactness(result: DispatchResult, tol: float = EXACTNESS_TOL) -> ExactnessReport:
    """Classify whether the relaxation returned a schedule without simultaneous charge/discharge.

    Simultaneous charge and discharge with nonnegative LMPs contradicts the
    exact-relaxation guarantee and is flagged as LEMMA-VIOLATION; with a
    negative LMP somewhere the guarantee does not apply (PRECONDITION-UNMET).
    """
    both = np.minimum(result.charge, result.discharge)
    pairs = tuple((int(i), int(t)) for i, t in zip(*np.nonzero(both > tol)))
    min_lmp = float(result.lmp.min()) if result.lmp.size else float("inf")
    if not pairs:
        verdict = Verdict.EXACT
    elif min_lmp >= -tol:
        verdict = Verdict.LEMMA_VIOLATION
    else:
        verdict = Verdict.PRECONDITION_UNMET
    return ExactnessReport(verdict, min_lmp, pairs, tol)


def storage_cost_consistency(result: DispatchResult) -> dict[int, tuple[float, float]]:
    """Per storage bus: (theta, exact nonconvex cost of the dispatched trajectory).

    Buses whose schedule charges and discharges in the same interval are skipped,
    since the exact cost is undefined there.
    """
    out: dict[int, tuple[float, float]] = {}
    for i in result.storage_buses:
        traj = result.storage_trajectory(i)
        if any(c > 0 and d > 0 for c, d in zip(traj.charge, traj.discharge)):
            continue
        cost, _ = trajectory_cost(traj, result.case.storages[i], tol=1e-7)
        out[i] = (float(result.theta[i]), cost)
    return out


def _num(v: float) -> str:
    v = round(float(v), 9)
    return repr(v + 0.0)


def schedule_csv(result: DispatchResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bus", "t", "gG", "gC", "gD", "soc"])
    for i in range(result.case.num_buses):
        for t in range(result.case.horizon):
            w.writerow(
                [
                    i + 1,
                    t + 1,
                    _num(result.generation[i, t]),
                    _num(result.charge[i, t]),
                    _num(result.discharge[i, t]),
                    _num(result.soc[i, t + 1]),
                ]
            )
    return buf.getvalue()


def lmp_csv(result: DispatchResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bus", "t", "pi"])
    for i in range(result.case.num_buses):
        for t in range(result.case.horizon):
            w.writerow([i + 1, t + 1, _num(result.lmp[i, t])])
    return buf.getvalue()
