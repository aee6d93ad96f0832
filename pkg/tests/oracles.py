"""Independent reference implementations used as test oracles.

Nothing here imports the package's solver or cost code.
"""
from __future__ import annotations

import itertools
import math

import numpy as np


def crf_mpmath(rate, lifetime, dps=50):
    """Capital recovery factor r(1+r)^L / ((1+r)^L - 1) at high precision."""
    import mpmath

    with mpmath.workdps(dps):
        r = mpmath.mpf(rate)
        g = (1 + r) ** lifetime
        return float(r * g / (g - 1))


class TableauResult:
    def __init__(self, status, objective=None, x=None):
        self.status = status
        self.objective = objective
        self.x = x


def tableau_simplex(c, A, sense, rhs, lb, ub, tol=1e-9, max_pivots=20000):
    """Two-phase dense tableau simplex with Bland's rule.

    Handles general bounds by substitution: shifted lower bounds, reflected
    upper-only bounds, split free variables, and explicit rows for finite
    upper bounds. Returns status "optimal", "infeasible" or "unbounded".
    """
    c = np.asarray(c, float)
    A = np.asarray(A, float)
    rhs = np.asarray(rhs, float)
    m, n = A.shape
    # substitution x_j = off_j + sum_k T[j, k] z_k with z >= 0
    cols, offs, extra = [], np.zeros(n), []
    for j in range(n):
        lo, hi = lb[j], ub[j]
        if math.isfinite(lo):
            offs[j] = lo
            cols.append((j, 1.0))
            if math.isfinite(hi):
                extra.append((len(cols) - 1, hi - lo))
        elif math.isfinite(hi):
            offs[j] = hi
            cols.append((j, -1.0))
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))
    nz = len(cols)
    T = np.zeros((n, nz))
    for k, (j, s) in enumerate(cols):
        T[j, k] = s
    A2 = A @ T
    b2 = rhs - A @ offs
    c2 = c @ T
    rows, rhs_rows, kinds = [], [], []
    for i in range(m):
        rows.append(A2[i])
        rhs_rows.append(b2[i])
        kinds.append(sense[i])
    for k, width in extra:
        r = np.zeros(nz)
        r[k] = 1.0
        rows.append(r)
        rhs_rows.append(width)
        kinds.append("L")
    mm = len(rows)
    n_slack = sum(k != "E" for k in kinds)
    width = nz + n_slack + mm  # structurals, slacks, artificials
    tab = np.zeros((mm, width + 1))
    si = nz
    for i in range(mm):
        tab[i, :nz] = rows[i]
        if kinds[i] == "L":
            tab[i, si] = 1.0
            si += 1
        elif kinds[i] == "G":
            tab[i, si] = -1.0
            si += 1
        tab[i, -1] = rhs_rows[i]
        if tab[i, -1] < 0:
            tab[i] *= -1.0
        tab[i, nz + n_slack + i] = 1.0
    basis = [nz + n_slack + i for i in range(mm)]

    def run(cost, allowed):
        pivots = 0
        while True:
            cb = cost[basis]
            red = cost[:width] - cb @ tab[:, :width]
            enter = next((j for j in range(width) if allowed[j] and red[j] < -tol), None)
            if enter is None:
                return "optimal"
            col = tab[:, enter]
            best, leave = math.inf, None
            for i in range(mm):
                if col[i] > tol:
                    ratio = tab[i, -1] / col[i]
                    if ratio < best - 1e-12 or (abs(ratio - best) <= 1e-12 and basis[i] < basis[leave]):
                        best, leave = ratio, i
            if leave is None:
                return "unbounded"
            tab[leave] /= tab[leave, enter]
            for i in range(mm):
                if i != leave and tab[i, enter] != 0:
                    tab[i] -= tab[i, enter] * tab[leave]
            basis[leave] = enter
            pivots += 1
            if pivots > max_pivots:
                raise RuntimeError("reference simplex did not terminate")

    cost1 = np.zeros(width)
    cost1[nz + n_slack:] = 1.0
    run(cost1, np.ones(width, bool))
    if tab[:, -1] @ cost1[basis] > 1e-7 * max(1.0, np.abs(tab[:, -1]).max()):
        return TableauResult("infeasible")
    # drive remaining artificials out of the basis where possible
    for i in range(mm):
        if basis[i] >= nz + n_slack:
            for j in range(nz + n_slack):
                if abs(tab[i, j]) > 1e-9:
                    tab[i] /= tab[i, j]
                    for k in range(mm):
                        if k != i and tab[k, j] != 0:
                            tab[k] -= tab[k, j] * tab[i]
                    basis[i] = j
                    break
    cost2 = np.zeros(width)
    cost2[:nz] = c2
    allowed = np.ones(width, bool)
    allowed[nz + n_slack:] = False
    st = run(cost2, allowed)
    if st != "optimal":
        return TableauResult(st)
    z = np.zeros(width)
    z[basis] = tab[:, -1]
    x = offs + T @ z[:nz]
    return TableauResult("optimal", float(c @ x), x)


def random_feasible_lp(rng, m, n, density=0.5, eq_frac=0.3):
    """Random LP with a known feasible point and a bounded objective."""
    A = rng.normal(size=(m, n)) * (rng.random((m, n)) < density)
    lb = np.zeros(n)
    ub = np.full(n, np.inf)
    kind = rng.integers(0, 4, n)
    c = rng.normal(size=n)
    for j in range(n):
        if kind[j] == 0:          # boxed
            lb[j], ub[j] = rng.uniform(-2, 0), rng.uniform(0.5, 5)
        elif kind[j] == 1:        # lower only, cost keeps it bounded
            c[j] = abs(c[j]) + 0.1
        elif kind[j] == 2:        # upper only
            lb[j], ub[j] = -np.inf, rng.uniform(0, 3)
            c[j] = -abs(c[j]) - 0.1
        else:                     # fixed or boxed
            lb[j] = rng.uniform(-1, 1)
            ub[j] = lb[j] if rng.random() < 0.2 else lb[j] + rng.uniform(0, 2)
    x0 = np.where(np.isfinite(ub), np.minimum(ub, np.maximum(lb, 0.0) + rng.uniform(0, 1, n)),
                  np.maximum(lb, 0.0) + rng.uniform(0, 1, n))
    x0 = np.where(np.isfinite(lb), np.maximum(x0, lb), x0)
    r = rng.random(m)
    sense = np.where(r < eq_frac, "E", np.where(r < (1 + eq_frac) / 2, "L", "G"))
    ax = A @ x0
    rhs = np.where(sense == "E", ax, np.where(sense == "L", ax + rng.uniform(0, 1, m), ax - rng.uniform(0, 1, m)))
    return c, A, sense, rhs, lb, ub


def tree_paths(branch_probs):
    """All root-to-leaf probability products for per-stage conditional lists."""
    return [math.prod(p) for p in itertools.product(*branch_probs)]


def exact_kmedoids(X, k):
    """Brute-force k-medoids: best medoid subset under squared Euclidean cost."""
    X = np.asarray(X, float)
    D = ((X[:, None, :] - X[None, :, :]) ** 2).sum(-1)
    best = None
    for med in itertools.combinations(range(len(X)), k):
        cost = D[:, med].min(axis=1).sum()
        if best is None or cost < best[0] - 1e-12:
            best = (cost, med)
    return best


def highs_objective(mps_path):
    """Objective value reported by HiGHS for an MPS file (external cross-check)."""
    import highspy

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    status = h.readModel(str(mps_path))
    if status == highspy.HighsStatus.kError:
        raise RuntimeError(f"HiGHS could not read {mps_path}")
    h.run()
    if h.getModelStatus() != highspy.HighsModelStatus.kOptimal:
        raise RuntimeError(f"HiGHS status {h.modelStatusToString(h.getModelStatus())}")
    return h.getInfo().objective_function_value
