"""Post-solve checks: primal residuals and the primal-dual gap."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatch, NotOptimal


@dataclass
class ResidualReport:
    max_residual: float                       # worst row violation over all senses
    by_sense: dict                            # sense -> max violation of rows with that sense
    row_residuals: np.ndarray                 # per-row violation (>= 0)
    violated_rows: list = field(default_factory=list)      # (name, violation) above tol
    bound_violations: list = field(default_factory=list)   # (name, violation) above tol
    tol: float = 1e-9

    @property
    def feasible(self) -> bool:
        return not self.violated_rows and not self.bound_violations

    def __str__(self):
        lines = [f"max row residual {self.max_residual:.3e}"]
        lines += [f"  row {n}: {v:.6g}" for n, v in self.violated_rows]
        lines += [f"  bound {n}: {v:.6g}" for n, v in self.bound_violations]
        return "\n".join(lines)


def row_violations(problem, x) -> np.ndarray:
    ax = problem.A @ x
    r = problem.rhs
    return np.where(problem.sense == "L", np.maximum(ax - r, 0.0),
                    np.where(problem.sense == "G", np.maximum(r - ax, 0.0), np.abs(ax - r)))


def check_feasibility(problem, point, tol=1e-9) -> ResidualReport:
    x = np.asarray(point, dtype=float)
    if x.shape != (problem.n_vars,):
        raise DimensionMismatch(f"point has shape {x.shape}, problem has {problem.n_vars} columns")
    viol = row_violations(problem, x)
    by_sense = {s: float(viol[problem.sense == s].max(initial=0.0)) for s in ("L", "E", "G")}
    rows = [(problem.row_names[i], float(viol[i])) for i in np.flatnonzero(viol > tol)]
    bviol = np.maximum(problem.lb - x, 0.0) + np.maximum(x - problem.ub, 0.0)
    bounds = [(problem.col_names[j], float(bviol[j])) for j in np.flatnonzero(bviol > tol)]
    return ResidualReport(float(viol.max(initial=0.0)), by_sense, viol, rows, bounds, tol)


def dual_objective(problem, y, x=None) -> float:
    """Lagrangian dual value b'y + sum_j min over [lb_j, ub_j] of d_j x_j.

    Where the minimizing bound is infinite (a small reduced cost of the wrong
    sign left by rounding) the primal value ``x_j`` is used instead.
    """
    y = np.asarray(y, dtype=float)
    d = problem.c - problem.A.T @ y
    pick = np.where(d > 0, problem.lb, np.where(d < 0, problem.ub, 0.0))
    bad = ~np.isfinite(pick)
    if np.any(bad):
        if x is None:
            return -math.inf
        pick = np.where(bad, x, pick)
    return float(problem.rhs @ y + d @ pick) + problem.obj_const


def duality_gap(problem, solution) -> float:
    """|primal - dual| / max(1, |primal|) for an optimal solution."""
    if not solution.optimal:
        raise NotOptimal(f"solution status is {solution.status}")
    primal = problem.objective_value(solution.x)
    if problem.n_cons == 0:
        return 0.0
    dual = dual_objective(problem, solution.duals, solution.x)
    return abs(primal - dual) / max(1.0, abs(primal))
