"""Least-squares projection of a bid curve onto EDCR-compliant curves.

With ``r = eta_c * eta_d`` every EDCR curve is determined by ``c^C_1`` and the
discharge costs, since ``c^C_k = c^C_1 + r (c^D_k - c^D_1)``. The fit works in
those K+1 variables with nonincreasing discharge costs and a strict spread
margin, and solves the resulting convex QP with a primal active-set method.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, InvalidBidError, NumericalError
from .model import BidCurve, check_assumption1, edcr_residuals_for


@dataclass(frozen=True)
class FitSpec:
    """Per-segment weights (``None`` means all ones) and the spread margin."""

    weights_c: tuple[float, ...] | None = None
    weights_d: tuple[float, ...] | None = None
    margin: float = 1e-6

    def __post_init__(self) -> None:
        for name in ("weights_c", "weights_d"):
            w = getattr(self, name)
            if w is not None:
                w = tuple(float(v) for v in w)
                if any(not v > 0 for v in w):
                    raise ContractViolation(f"{name} must be positive")
                object.__setattr__(self, name, w)
        if not self.margin > 0:
            raise ContractViolation("margin must be > 0")

    def weights(self, K: int) -> tuple[np.ndarray, np.ndarray]:
        wc = np.ones(K) if self.weights_c is None else np.asarray(self.weights_c)
        wd = np.ones(K) if self.weights_d is None else np.asarray(self.weights_d)
        if wc.size != K or wd.size != K:
            raise ContractViolation(f"weights must have one entry per segment ({K})")
        return wc, wd


def _maps(K: int, r: float) -> tuple[np.ndarray, np.ndarray]:
    # z = (c^C_1, c^D_1..c^D_K); returns B, D with c^C = B z and c^D = D z
    B = np.zeros((K, K + 1))
    B[:, 0] = 1.0
    B[:, 1:] = r * np.eye(K)
    B[:, 1] -= r
    D = np.zeros((K, K + 1))
    D[:, 1:] = np.eye(K)
    return B, D


def _constraints(K: int, eta_c: float, eta_d: float, margin: float) -> tuple[np.ndarray, np.ndarray]:
    # G z <= h: d_{k+1} - d_k <= 0, then c^C_1/eta_c - d_K eta_d <= -margin
    G = np.zeros((K, K + 1))
    for k in range(K - 1):
        G[k, k + 1], G[k, k + 2] = -1.0, 1.0
    G[K - 1, 0] = 1.0 / eta_c
    G[K - 1, K] = -eta_d
    h = np.zeros(K)
    h[K - 1] = -margin
    return G, h


def _active_set_qp(H: np.ndarray, f: np.ndarray, G: np.ndarray, h: np.ndarray, z: np.ndarray, tol: float = 1e-12):
    """Minimise ``0.5 z'Hz - f'z`` subject to ``Gz <= h`` from a feasible start (H positive definite)."""
    n = z.size
    work: list[int] = []
    scale = 1.0 + float(np.abs(f).max())
    for _ in range(50 * (n + G.shape[0]) + 100):
        g = H @ z - f
        A = G[work]
        m = len(work)
        kkt = np.block([[H, A.T], [A, np.zeros((m, m))]])
        sol = np.linalg.solve(kkt, np.concatenate([-g, np.zeros(m)]))
        p, lam = sol[:n], sol[n:]
        if np.abs(p).max() <= tol * scale:
            if m == 0 or lam.min() >= -tol * scale:
                return z, dict(zip(work, lam))
            work.pop(int(np.argmin(lam)))
            continue
        step, block = 1.0, None
        for i in range(G.shape[0]):
            if i in work:
                continue
            gp = G[i] @ p
            if gp > tol:
                ratio = (h[i] - G[i] @ z) / gp
                if ratio < step:
                    step, block = max(ratio, 0.0), i
        z = z + step * p
        if block is not None:
            work.append(block)
    raise NumericalError("active-set QP did not converge")


def _curve_from(z: np.ndarray, E: tuple[float, ...], r: float, eta_c: float, eta_d: float, margin: float) -> BidCurve:
    d = z[1:].copy()
    for k in range(1, d.size):  # clean roundoff on active monotonicity rows
        d[k] = min(d[k], d[k - 1])
    a = min(float(z[0]), eta_c * (d[-1] * eta_d - margin))
    cc = a + r * (d - d[0])
    return BidCurve(E, tuple(cc.tolist()), tuple(d.tolist()))


def fit_edcr(curve: BidCurve, eta_c: float, eta_d: float, spec: FitSpec | None = None) -> BidCurve:
    """Closest EDCR curve in weighted least squares; the partition is kept.

    The input must satisfy the monotonicity and spread conditions. A curve that
    is already EDCR with at least the requested spread margin is returned as is.
    """
    spec = spec or FitSpec()
    problems = check_assumption1(curve, eta_c, eta_d)
    if problems:
        raise InvalidBidError("cannot fit an invalid bid: " + "; ".join(v.message for v in problems))
    K = curve.num_segments
    r = eta_c * eta_d
    cc = np.asarray(curve.charge_benefits)
    cd = np.asarray(curve.discharge_costs)
    wc, wd = spec.weights(K)
    B, D = _maps(K, r)
    G, h = _constraints(K, eta_c, eta_d, spec.margin)

    z0 = np.concatenate(([cc[0]], cd))
    roundoff = 1e-12 * (1.0 + float(np.abs(z0).max()))
    if np.all(G @ z0 <= h + roundoff) and np.allclose(B @ z0, cc, rtol=0.0, atol=roundoff):
        return curve

    H = 2.0 * (B.T @ (wc[:, None] * B) + D.T @ (wd[:, None] * D))
    f = 2.0 * (B.T @ (wc * cc) + D.T @ (wd * cd))
    z_free = np.linalg.solve(H, f)
    if np.all(G @ z_free <= h):
        z = z_free
    else:
        level = float(np.average(cd, weights=wd))
        start = np.concatenate(([eta_c * (level * eta_d - spec.margin) - 1.0], np.full(K, level)))
        z, _ = _active_set_qp(H, f, G, h, start)
    return _curve_from(z, curve.boundaries, r, eta_c, eta_d, spec.margin)


@dataclass(frozen=True)
class FitReport:
    charge_deviation: tuple[float, ...]  # fitted - true
    discharge_deviation: tuple[float, ...]
    objective: float
    worst_marginal_error: float
    max_edcr_residual: float

    def to_dict(self) -> dict:
        return {
            "charge_deviation": list(self.charge_deviation),
            "discharge_deviation": list(self.discharge_deviation),
            "objective": self.objective,
            "worst_marginal_error": self.worst_marginal_error,
            "max_edcr_residual": self.max_edcr_residual,
        }


def fit_report(
    true_curve: BidCurve,
    fitted: BidCurve,
    eta_c: float,
    eta_d: float,
    spec: FitSpec | None = None,
) -> FitReport:
    spec = spec or FitSpec()
    K = true_curve.num_segments
    if fitted.num_segments != K:
        raise ContractViolation("curves have different segment counts")
    wc, wd = spec.weights(K)
    dc = np.subtract(fitted.charge_benefits, true_curve.charge_benefits)
    dd = np.subtract(fitted.discharge_costs, true_curve.discharge_costs)
    return FitReport(
        charge_deviation=tuple(dc.tolist()),
        discharge_deviation=tuple(dd.tolist()),
        objective=float(wc @ dc**2 + wd @ dd**2),
        worst_marginal_error=float(max(np.abs(dc).max(initial=0.0), np.abs(dd).max(initial=0.0))),
        max_edcr_residual=edcr_residuals_for(fitted, eta_c, eta_d).max_abs_residual,
    )
