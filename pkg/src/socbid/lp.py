"""Dense revised simplex with Bland's rule and signed dual extraction.

Problem form::

    minimize    c @ x
    subject to  A_ub @ x <= b_ub      (duals y_ineq >= 0)
                A_eq @ x == b_eq      (duals y_eq, free)
                lower <= x <= upper   (entries may be infinite)

Sign conventions: ``y_eq[r]`` is the derivative of the optimal value with
respect to ``b_eq[r]`` and ``-y_ineq[r]`` the derivative with respect to
``b_ub[r]``. ``reduced_costs = c + A_ub.T @ y_ineq - A_eq.T @ y_eq``; at an
optimum it is nonnegative where ``x`` sits at its lower bound and nonpositive
at its upper bound.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError

DEFAULT_TOL = 1e-8
_PIVOT_TOL = 1e-9
_REFACTOR_EVERY = 40


class LpStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


def _as_matrix(a, n: int, name: str) -> np.ndarray:
    if a is None:
        return np.zeros((0, n))
    arr = np.array(a, dtype=np.float64)
    if arr.size == 0:
        return np.zeros((0, n))
    if arr.ndim != 2 or arr.shape[1] != n:
        raise ValueError(f"{name} must have shape (m, {n}), got {arr.shape}")
    return arr


def _as_vector(v, m: int, name: str, fill: float = 0.0) -> np.ndarray:
    if v is None:
        return np.full(m, fill)
    arr = np.array(v, dtype=np.float64).reshape(-1)
    if arr.shape != (m,):
        raise ValueError(f"{name} must have length {m}, got {arr.shape[0]}")
    return arr


@dataclass(frozen=True)
class LinearProgram:
    c: np.ndarray
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    var_names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        c = np.array(self.c, dtype=np.float64).reshape(-1)
        n = c.size
        A_ub = _as_matrix(self.A_ub, n, "A_ub")
        A_eq = _as_matrix(self.A_eq, n, "A_eq")
        b_ub = _as_vector(self.b_ub, A_ub.shape[0], "b_ub")
        b_eq = _as_vector(self.b_eq, A_eq.shape[0], "b_eq")
        lower = _as_vector(self.lower, n, "lower", 0.0)
        upper = _as_vector(self.upper, n, "upper", math.inf)
        for name, arr in (("c", c), ("A_ub", A_ub), ("b_ub", b_ub), ("A_eq", A_eq), ("b_eq", b_eq)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains NaN or infinite entries")
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
            raise ValueError("bounds contain NaN")
        if np.any(lower > upper):
            raise ValueError("lower bound exceeds upper bound")
        if np.any(lower == math.inf) or np.any(upper == -math.inf):
            raise ValueError("infeasible infinite bound")
        for name, arr in (("c", c), ("A_ub", A_ub), ("b_ub", b_ub), ("A_eq", A_eq), ("b_eq", b_eq),
                          ("lower", lower), ("upper", upper)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.var_names is not None and len(self.var_names) != n:
            raise ValueError("var_names length does not match c")

    @property
    def num_vars(self) -> int:
        return self.c.size


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    x: np.ndarray | None = None
    objective: float = math.nan
    y_ineq: np.ndarray | None = None
    y_eq: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    iterations: int = 0
    info: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


class _StandardForm:
    """``min cs @ z  s.t.  As @ z == bs, z >= 0`` with ``x = x0 + P @ z``."""

    def __init__(self, lp: LinearProgram):
        n = lp.num_vars
        lo, up = lp.lower, lp.upper
        cols: list[tuple[int, float]] = []  # (original var, coefficient)
        x0 = np.zeros(n)
        capped: list[tuple[int, float]] = []  # (std column, width)
        for j in range(n):
            if math.isfinite(lo[j]):
                x0[j] = lo[j]
                cols.append((j, 1.0))
                if math.isfinite(up[j]):
                    capped.append((len(cols) - 1, up[j] - lo[j]))
            elif math.isfinite(up[j]):
                x0[j] = up[j]
                cols.append((j, -1.0))
            else:
                cols.append((j, 1.0))
                cols.append((j, -1.0))
        nz = len(cols)
        P = np.zeros((n, nz))
        for k, (j, coef) in enumerate(cols):
            P[j, k] = coef

        m_ub, m_eq, m_cap = lp.A_ub.shape[0], lp.A_eq.shape[0], len(capped)
        m = m_ub + m_eq + m_cap
        n_slack = m_ub + m_cap
        N = nz + n_slack
        A = np.zeros((m, N))
        b = np.zeros(m)
        A[:m_ub, :nz] = lp.A_ub @ P
        b[:m_ub] = lp.b_ub - lp.A_ub @ x0
        A[m_ub:m_ub + m_eq, :nz] = lp.A_eq @ P
        b[m_ub:m_ub + m_eq] = lp.b_eq - lp.A_eq @ x0
        slack_of_row = np.full(m, -1)
        for r in range(m_ub):
            A[r, nz + r] = 1.0
            slack_of_row[r] = nz + r
        for k, (col, width) in enumerate(capped):
            r = m_ub + m_eq + k
            A[r, col] = 1.0
            A[r, nz + m_ub + k] = 1.0
            b[r] = width
            slack_of_row[r] = nz + m_ub + k

        sign = np.where(b < 0, -1.0, 1.0)
        A *= sign[:, None]
        b *= sign

        self.lp = lp
        self.P, self.x0 = P, x0
        self.A, self.b, self.sign = A, b, sign
        self.c = np.concatenate([P.T @ lp.c, np.zeros(n_slack)])
        self.m_ub, self.m_eq = m_ub, m_eq
        self.nz, self.N, self.m = nz, N, m
        self.slack_of_row = slack_of_row


class _Simplex:
    def __init__(self, A: np.ndarray, b: np.ndarray, basis: list[int], tol: float):
        self.A, self.b = A, b
        self.m, self.N = A.shape
        self.basis = list(basis)
        self.tol = tol
        self.iterations = 0
        self._since_refactor = 0
        self.refactor()

    def refactor(self) -> None:
        B = self.A[:, self.basis]
        try:
            self.Binv = np.linalg.inv(B) if self.m else np.zeros((0, 0))
        except np.linalg.LinAlgError as exc:
            raise NumericalError("singular basis matrix") from exc
        self._since_refactor = 0

    def primal(self) -> np.ndarray:
        return self.Binv @ self.b

    def run(self, c: np.ndarray, allowed: np.ndarray, max_iter: int) -> LpStatus:
        opt_tol = self.tol * max(1.0, float(np.max(np.abs(c), initial=0.0)))
        while True:
            y = c[self.basis] @ self.Binv
            d = c - y @ self.A
            d[self.basis] = 0.0
            candidates = np.flatnonzero(allowed & (d < -opt_tol))
            if candidates.size == 0:
                if self._since_refactor:
                    self.refactor()
                    continue
                return LpStatus.OPTIMAL
            if self.iterations >= max_iter:
                raise NumericalError(f"simplex iteration limit {max_iter} reached")
            j = int(candidates[0])  # Bland: smallest index
            col = self.Binv @ self.A[:, j]
            xB = np.maximum(self.primal(), 0.0)
            rows = np.flatnonzero(col > _PIVOT_TOL)
            if rows.size == 0:
                return LpStatus.UNBOUNDED
            ratios = xB[rows] / col[rows]
            best = ratios.min()
            ties = rows[ratios <= best + 1e-12 * (1.0 + best)]
            r = int(min(ties, key=lambda i: self.basis[i]))  # Bland: smallest basic index leaves
            self.pivot(r, j, col)

    def pivot(self, r: int, j: int, col: np.ndarray | None = None) -> None:
        if col is None:
            col = self.Binv @ self.A[:, j]
        piv = col[r]
        row_r = self.Binv[r] / piv
        self.Binv -= np.outer(col, row_r)
        self.Binv[r] = row_r
        self.basis[r] = j
        self.iterations += 1
        self._since_refactor += 1
        if self._since_refactor >= _REFACTOR_EVERY:
            self.refactor()


def solve_lp(lp: LinearProgram, *, tol: float = DEFAULT_TOL, max_iter: int = 100_000) -> LpSolution:
    """Solve ``lp`` to a vertex optimum, or report infeasibility/unboundedness.

    Raises :class:`NumericalError` if the final point fails the feasibility
    check, so a wrong "optimal" is never returned silently.
    """
    sf = _StandardForm(lp)
    m, N = sf.m, sf.N

    basis: list[int] = []
    art_rows: list[int] = []
    for r in range(m):
        s = sf.slack_of_row[r]
        if s >= 0 and sf.sign[r] > 0:
            basis.append(int(s))
        else:
            basis.append(-1)
            art_rows.append(r)
    n_art = len(art_rows)
    A = np.hstack([sf.A, np.zeros((m, n_art))])
    for k, r in enumerate(art_rows):
        A[r, N + k] = 1.0
        basis[r] = N + k

    simplex = _Simplex(A, sf.b, basis, tol)
    allowed = np.ones(N + n_art, dtype=bool)
    scale_b = 1.0 + float(np.max(np.abs(sf.b), initial=0.0))

    if n_art:
        c1 = np.concatenate([np.zeros(N), np.ones(n_art)])
        simplex.run(c1, allowed, max_iter)
        infeas = float(c1[simplex.basis] @ simplex.primal())
        if infeas > tol * scale_b:
            return LpSolution(LpStatus.INFEASIBLE, iterations=simplex.iterations, info={"phase1_objective": infeas})
        # Drive zero-level artificials out of the basis where possible.
        for r in range(m):
            if simplex.basis[r] < N:
                continue
            row = simplex.Binv[r] @ A[:, :N]
            row[[b for b in simplex.basis if b < N]] = 0.0
            cand = np.flatnonzero(np.abs(row) > _PIVOT_TOL)
            if cand.size:
                simplex.pivot(r, int(cand[0]))
        allowed[N:] = False

    c2 = np.concatenate([sf.c, np.zeros(n_art)])
    status = simplex.run(c2, allowed, max_iter)
    if status is LpStatus.UNBOUNDED:
        return LpSolution(LpStatus.UNBOUNDED, iterations=simplex.iterations)

    simplex.refactor()
    z_full = np.zeros(N + n_art)
    z_full[simplex.basis] = simplex.primal()
    z_full[np.abs(z_full) < 1e-13 * scale_b] = 0.0
    z = np.maximum(z_full[:N], 0.0)
    y_std = c2[simplex.basis] @ simplex.Binv * sf.sign

    x = sf.x0 + sf.P @ z[: sf.nz]
    x = np.clip(x, lp.lower, lp.upper)
    y_ineq = -y_std[: sf.m_ub]
    y_eq = y_std[sf.m_ub : sf.m_ub + sf.m_eq].copy()
    y_ineq = np.where(np.abs(y_ineq) < 1e-14, 0.0, y_ineq)
    rc = lp.c + lp.A_ub.T @ y_ineq - lp.A_eq.T @ y_eq

    _check_primal(lp, x, tol)
    return LpSolution(
        LpStatus.OPTIMAL,
        x=x,
        objective=float(lp.c @ x),
        y_ineq=y_ineq,
        y_eq=y_eq,
        reduced_costs=rc,
        iterations=simplex.iterations,
    )


def _check_primal(lp: LinearProgram, x: np.ndarray, tol: float) -> None:
    viol = primal_residual(lp, x)
    scale = 1.0 + max(
        float(np.max(np.abs(lp.b_ub), initial=0.0)),
        float(np.max(np.abs(lp.b_eq), initial=0.0)),
        float(np.max(np.abs(x), initial=0.0)),
    )
    if viol > 100 * tol * scale:
        raise NumericalError(f"simplex returned a point violating constraints by {viol:.3g}")


def primal_residual(lp: LinearProgram, x: np.ndarray) -> float:
    """Largest violation of any constraint or bound at ``x``."""
    parts = [0.0]
    if lp.A_ub.shape[0]:
        parts.append(float(np.max(lp.A_ub @ x - lp.b_ub)))
    if lp.A_eq.shape[0]:
        parts.append(float(np.max(np.abs(lp.A_eq @ x - lp.b_eq))))
    parts.append(float(np.max(lp.lower - x, initial=0.0)))
    parts.append(float(np.max(x - lp.upper, initial=0.0)))
    return max(parts)


def bound_duals(lp: LinearProgram, sol: LpSolution) -> tuple[np.ndarray, np.ndarray]:
    """Split reduced costs into lower- and upper-bound multipliers (both >= 0)."""
    rc = sol.reduced_costs
    return np.maximum(rc, 0.0), np.maximum(-rc, 0.0)


def dual_objective(lp: LinearProgram, sol: LpSolution) -> float:
    z_lo, z_up = bound_duals(lp, sol)
    val = -float(lp.b_ub @ sol.y_ineq) + float(lp.b_eq @ sol.y_eq)
    lo_fin = np.isfinite(lp.lower)
    up_fin = np.isfinite(lp.upper)
    val += float(lp.lower[lo_fin] @ z_lo[lo_fin]) - float(lp.upper[up_fin] @ z_up[up_fin])
    return val


def kkt_residuals(lp: LinearProgram, sol: LpSolution) -> dict[str, float]:
    """Primal/dual feasibility, complementary slackness and duality gap at an optimum."""
    x = sol.x
    z_lo, z_up = bound_duals(lp, sol)
    dual_feas = float(np.max(-sol.y_ineq, initial=0.0))
    # multipliers on infinite bounds must vanish
    dual_feas = max(
        dual_feas,
        float(np.max(z_lo[~np.isfinite(lp.lower)], initial=0.0)),
        float(np.max(z_up[~np.isfinite(lp.upper)], initial=0.0)),
    )
    cs = 0.0
    if lp.A_ub.shape[0]:
        cs = float(np.max(np.abs(sol.y_ineq * (lp.b_ub - lp.A_ub @ x))))
    lo_fin, up_fin = np.isfinite(lp.lower), np.isfinite(lp.upper)
    cs = max(
        cs,
        float(np.max(np.abs(z_lo[lo_fin] * (x[lo_fin] - lp.lower[lo_fin])), initial=0.0)),
        float(np.max(np.abs(z_up[up_fin] * (lp.upper[up_fin] - x[up_fin])), initial=0.0)),
    )
    gap = abs(sol.objective - dual_objective(lp, sol))
    return {
        "primal": primal_residual(lp, x),
        "dual": dual_feas,
        "complementarity": cs,
        "gap": gap,
        "relative_gap": gap / (1.0 + abs(sol.objective)),
    }


def _fmt(v: float) -> str:
    return repr(float(v))


def _linear_expr(coefs: np.ndarray, names: list[str]) -> str:
    terms = [f"{'+' if a >= 0 else '-'} {_fmt(abs(a))} {names[j]}" for j, a in enumerate(coefs) if a != 0.0]
    return " ".join(terms) if terms else f"+ 0 {names[0]}" if names else "0"


def dump_lp(lp: LinearProgram) -> str:
    """CPLEX-LP text of the problem (readable by HiGHS, GLPK, CBC).

    Rows are named ``u<k>`` (inequalities) and ``e<k>`` (equalities), variables
    ``x<k>`` unless ``var_names`` are set, all 1-based. Numbers use ``repr`` so
    the text round-trips exactly.
    """
    n = lp.num_vars
    names = list(lp.var_names) if lp.var_names else [f"x{j + 1}" for j in range(n)]
    lines = ["\\ socbid LP dump", "Minimize", f" obj: {_linear_expr(lp.c, names)}", "Subject To"]
    for r in range(lp.A_ub.shape[0]):
        lines.append(f" u{r + 1}: {_linear_expr(lp.A_ub[r], names)} <= {_fmt(lp.b_ub[r])}")
    for r in range(lp.A_eq.shape[0]):
        lines.append(f" e{r + 1}: {_linear_expr(lp.A_eq[r], names)} = {_fmt(lp.b_eq[r])}")
    lines.append("Bounds")
    for j in range(n):
        lo, up = lp.lower[j], lp.upper[j]
        if lo == -math.inf and up == math.inf:
            lines.append(f" {names[j]} free")
        else:
            lo_s = "-inf" if lo == -math.inf else _fmt(lo)
            up_s = "+inf" if up == math.inf else _fmt(up)
            lines.append(f" {lo_s} <= {names[j]} <= {up_s}")
    lines.append("End")
    return "\n".join(lines) + "\n"
