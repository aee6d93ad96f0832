"""Bounded-variable revised primal simplex.

The problem is scaled (powers of two, geometric mean over rows and columns),
brought to equality form with one logical column per row, and solved in two
phases: phase 1 minimises the sum of artificial columns added for rows whose
logical cannot absorb the initial residual, phase 2 the true objective.

The basis inverse is kept as a sparse LU factorization (SuperLU) followed by
a product-form eta file, refactorized every ``refactor_every`` pivots.
Pricing is devex (reference weights reset when they grow large); the ratio test is Harris' two-pass test. After
``stall_limit`` consecutive degenerate pivots both switch to Bland's rule
until the objective moves again.
"""
from __future__ import annotations

import math
import pickle
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from ..errors import NumericalBreakdown
from .kernels import DEFAULT_BACKEND, get_kernels

BASIC, AT_LB, AT_UB, FREE, FIXED = 0, 1, 2, 3, 4


class Status(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    ITERATION_LIMIT = "IterationLimit"

    def __str__(self):
        return self.value


@dataclass
class SolveOptions:
    max_iter: int = 1_000_000
    primal_tol: float = 1e-9       # Harris relaxation, scaled units
    dual_tol: float = 1e-9         # relative to the largest cost coefficient
    pivot_tol: float = 1e-7
    infeasibility_tol: float = 1e-7
    refactor_every: int = 100
    stall_limit: int = 100
    scale: bool = True
    backend: Optional[str] = None  # "compiled", "python" or None for the default
    callback: Optional[Callable] = None


@dataclass(frozen=True, eq=False)
class Solution:
    status: Status
    objective: float
    x: np.ndarray
    duals: np.ndarray
    reduced_costs: np.ndarray
    iterations: int = 0
    phase1_iterations: int = 0
    basis: tuple = ()              # basic columns; logical of row i is n + i
    infeasible_rows: tuple = ()
    alternative_optima: bool = False
    backend: str = ""

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL

    def to_bytes(self) -> bytes:
        return pickle.dumps((self.status.value, self.objective, self.x.tobytes(), self.duals.tobytes(),
                             self.reduced_costs.tobytes(), self.iterations, self.basis,
                             self.infeasible_rows, self.alternative_optima))


def _pow2(v):
    return np.exp2(np.round(np.log2(v)))


def geometric_scaling(A: sp.csc_matrix, passes: int = 4):
    """Row and column factors (powers of two) equilibrating |a_ij| around 1.

    The factors depend on the matrix only, so scaling the objective by a
    positive constant does not change them.
    """
    m, n = A.shape
    R, S = np.ones(m), np.ones(n)
    if A.nnz == 0:
        return R, S
    coo = A.tocoo()
    absval = np.abs(coo.data)
    for _ in range(passes):
        v = absval * R[coo.row] * S[coo.col]
        rmax = np.zeros(m)
        rmin = np.full(m, np.inf)
        np.maximum.at(rmax, coo.row, v)
        np.minimum.at(rmin, coo.row, v)
        ok = rmax > 0
        R[ok] /= _pow2(np.sqrt(rmax[ok] * rmin[ok]))
        v = absval * R[coo.row] * S[coo.col]
        cmax = np.zeros(n)
        cmin = np.full(n, np.inf)
        np.maximum.at(cmax, coo.col, v)
        np.minimum.at(cmin, coo.col, v)
        ok = cmax > 0
        S[ok] /= _pow2(np.sqrt(cmax[ok] * cmin[ok]))
    return R, S


def solve(problem, options: Optional[SolveOptions] = None) -> Solution:
    """Solve an :class:`~flexinvest.formulation.problem.LpProblem` to optimality."""
    options = options or SolveOptions()
    for name in ("c", "vals", "rhs", "lb", "ub"):
        if np.any(np.isnan(getattr(problem, name))):
            raise NumericalBreakdown(f"problem data {name!r} contains nan", {"field": name})
    if problem.n_cons == 0:
        return _solve_unconstrained(problem)
    return _RevisedSimplex(problem, options).run()


def _solve_unconstrained(problem) -> Solution:
    c, lb, ub = problem.c, problem.lb, problem.ub
    n = len(c)
    if np.any(lb > ub):
        return Solution(Status.INFEASIBLE, math.nan, np.full(n, np.nan), np.zeros(0), np.full(n, np.nan))
    x = np.where(c > 0, lb, np.where(c < 0, ub, np.where(np.isfinite(lb), lb, np.where(np.isfinite(ub), ub, 0.0))))
    if not np.all(np.isfinite(x)):
        return Solution(Status.UNBOUNDED, -math.inf, x, np.zeros(0), c.copy())
    alt = bool(np.any((c == 0) & (lb < ub)))
    return Solution(Status.OPTIMAL, problem.objective_value(x), x, np.zeros(0), c.copy(),
                    alternative_optima=alt)


class _RevisedSimplex:
    def __init__(self, problem, options: SolveOptions):
        self.problem = problem
        self.opt = options
        self.backend = options.backend or DEFAULT_BACKEND
        self.kern = get_kernels(self.backend)
        m, n = problem.n_cons, problem.n_vars
        self.m, self.n = m, n
        A = problem.A
        if options.scale:
            R, S = geometric_scaling(A)
        else:
            R, S = np.ones(m), np.ones(n)
        self.R, self.S = R, S
        As = (sp.diags(R) @ A @ sp.diags(S)).tocsc()
        c = problem.c * S
        cmax = float(np.max(np.abs(c))) if n else 0.0
        self.cnorm = float(_pow2(cmax)) if cmax > 0 else 1.0
        c = c / self.cnorm
        b = problem.rhs * R
        lb = problem.lb / S
        ub = problem.ub / S
        self.b = b

        lo = np.where(problem.sense == "G", -np.inf, 0.0)
        hi = np.where(problem.sense == "L", np.inf, 0.0)

        xs = np.where(np.isfinite(lb), lb, np.where(np.isfinite(ub), ub, 0.0))
        st = np.where(lb == ub, FIXED, np.where(np.isfinite(lb), AT_LB, np.where(np.isfinite(ub), AT_UB, FREE)))
        resid = b - As @ xs
        inside = (resid >= lo) & (resid <= hi)
        need = np.flatnonzero(~inside)
        bnd = np.where(resid < lo, lo, hi)
        k = len(need)
        sign = np.sign(resid[need] - bnd[need])
        art = sp.csc_matrix((sign, (need, np.arange(k))), shape=(m, k))
        self.M = sp.hstack([As, sp.identity(m, format="csc"), art], format="csc")
        self.M.sort_indices()
        self.MT = self.M.T.tocsr()
        N = n + m + k
        self.N = N
        self.n_art = k
        self.lbF = np.concatenate([lb, lo, np.zeros(k)])
        self.ubF = np.concatenate([ub, hi, np.full(k, np.inf)])
        self.c2 = np.concatenate([c, np.zeros(m + k)])
        self.c1 = np.concatenate([np.zeros(n + m), np.ones(k)])

        x = np.zeros(N)
        x[:n] = xs
        status = np.zeros(N, dtype=np.int8)
        status[:n] = st
        slack_val = np.where(inside, resid, bnd)
        x[n:n + m] = slack_val
        lst = np.where(inside, BASIC, np.where(lo == hi, FIXED, np.where(bnd == lo, AT_LB, AT_UB)))
        status[n:n + m] = lst
        x[n + m:] = np.abs(resid[need] - bnd[need])
        status[n + m:] = BASIC
        head = np.arange(n, n + m, dtype=np.int64)
        head[need] = n + m + np.arange(k)
        self.x, self.status, self.head = x, status, head
        self.infeasible_bounds = bool(np.any(lb > ub))

        cap = options.refactor_every + 1
        self.eta_r = np.zeros(cap, dtype=np.int64)
        self.eta_piv = np.zeros(cap)
        self.eta_start = np.zeros(cap + 1, dtype=np.int64)
        self.eta_idx = np.zeros(max(16, 8 * m), dtype=np.int64)
        self.eta_val = np.zeros(max(16, 8 * m))
        self.k_eta = 0
        self.iterations = 0
        self.lu = None

    # basis factorization
    def refactor(self):
        B = self.M[:, self.head]
        try:
            self.lu = splu(B.tocsc(), permc_spec="COLAMD")
        except RuntimeError as exc:
            raise NumericalBreakdown(f"basis factorization failed: {exc}",
                                     {"iteration": self.iterations, "basis_size": len(self.head)}) from exc
        self.k_eta = 0
        xn = self.x.copy()
        xn[self.head] = 0.0
        xb = self.lu.solve(self.b - self.M @ xn)
        if not np.all(np.isfinite(xb)):
            raise NumericalBreakdown("non-finite basic solution after refactorization",
                                     {"iteration": self.iterations})
        self.x[self.head] = xb

    def add_eta(self, r, alpha):
        k = self.k_eta
        nz = np.flatnonzero(alpha)
        nz = nz[(nz != r) & (np.abs(alpha[nz]) > 1e-14)]
        s = self.eta_start[k]
        need = s + len(nz)
        if need > len(self.eta_idx):
            grow = max(need, 2 * len(self.eta_idx))
            self.eta_idx = np.resize(self.eta_idx, grow)
            self.eta_val = np.resize(self.eta_val, grow)
        self.eta_idx[s:need] = nz
        self.eta_val[s:need] = alpha[nz]
        self.eta_r[k] = r
        self.eta_piv[k] = alpha[r]
        self.eta_start[k + 1] = need
        self.k_eta = k + 1

    def ftran_col(self, q):
        M = self.M
        a = np.zeros(self.m)
        s, e = M.indptr[q], M.indptr[q + 1]
        a[M.indices[s:e]] = M.data[s:e]
        z = self.lu.solve(a)
        self.kern.ftran_etas(z, self.k_eta, self.eta_r, self.eta_piv, self.eta_start, self.eta_idx, self.eta_val)
        return z

    def btran(self, cb):
        w = np.array(cb, dtype=float)
        self.kern.btran_etas(w, self.k_eta, self.eta_r, self.eta_piv, self.eta_start, self.eta_idx, self.eta_val)
        return self.lu.solve(w, trans="T")

    def reduced_costs(self, cost):
        y = self.btran(cost[self.head])
        d = cost - self.MT @ y
        d[self.head] = 0.0
        return y, d

    def dual_bound(self, cost, y, d):
        lb, ub = self.lbF, self.ubF
        tol = self.opt.dual_tol
        pos = d > tol
        neg = d < -tol
        if np.any(pos & ~np.isfinite(lb)) or np.any(neg & ~np.isfinite(ub)):
            return -math.inf
        return float(self.b @ y + d[pos] @ lb[pos] + d[neg] @ ub[neg])

    def pivot_row(self, r):
        e = np.zeros(self.m)
        e[r] = 1.0
        return self.MT @ self.btran(e)

    # main loop
    def iterate(self, cost, phase):
        opt = self.opt
        kern = self.kern
        dtol = opt.dual_tol
        ptol = opt.pivot_tol
        ftol = opt.primal_tol
        bland = False
        degenerate = 0
        confirmed = False
        lbF, ubF, x, status = self.lbF, self.ubF, self.x, self.status
        # devex reference weights
        w = np.ones(self.N)
        y, d = self.reduced_costs(cost)
        fresh = True
        while True:
            if self.iterations >= opt.max_iter:
                return Status.ITERATION_LIMIT
            head = self.head
            if opt.callback is not None and phase == 2:
                if not fresh:
                    y, d = self.reduced_costs(cost)
                opt.callback({"iteration": self.iterations, "phase": phase,
                              "primal": float(cost @ x) * self.cnorm,
                              "dual": self.dual_bound(cost, y, d) * self.cnorm})
            q = kern.price(d, w, status, dtol, bland)
            if q < 0:
                if not confirmed:
                    if self.k_eta > 0:
                        self.refactor()
                    y, d = self.reduced_costs(cost)
                    fresh = True
                    confirmed = True
                    continue
                return Status.OPTIMAL
            confirmed = False
            direction = 1.0 if d[q] < 0 else -1.0
            alpha = self.ftran_col(q)
            r, theta = kern.ratio_test(x[head], lbF[head], ubF[head], alpha, direction, ptol, ftol, bland, head)
            span = ubF[q] - lbF[q]
            if r < 0 and not math.isfinite(span):
                return Status.UNBOUNDED
            if math.isfinite(span) and (r < 0 or span <= theta):
                step = span
                x[head] -= (direction * step) * alpha
                if direction > 0:
                    x[q] = ubF[q]
                    status[q] = AT_UB
                else:
                    x[q] = lbF[q]
                    status[q] = AT_LB
            else:
                step = theta
                piv = alpha[r]
                if abs(piv) < ptol:
                    raise NumericalBreakdown("pivot element below tolerance",
                                             {"iteration": self.iterations, "pivot": float(piv),
                                              "entering": int(q), "row": int(r)})
                row = self.pivot_row(r)
                if abs(row[q] - piv) > 1e-8 * (1.0 + abs(piv)) and self.k_eta > 0:
                    # column and row views of the pivot disagree: refresh the factors and retry
                    self.refactor()
                    y, d = self.reduced_costs(cost)
                    fresh = True
                    continue
                x[q] += direction * step
                x[head] -= (direction * step) * alpha
                leave = head[r]
                if direction * piv > 0:
                    x[leave] = lbF[leave]
                    status[leave] = FIXED if lbF[leave] == ubF[leave] else AT_LB
                else:
                    x[leave] = ubF[leave]
                    status[leave] = FIXED if lbF[leave] == ubF[leave] else AT_UB
                # incremental reduced costs and devex weights
                ratio = d[q] / piv
                d -= ratio * row
                wq = w[q]
                row /= piv
                np.maximum(w, row * row * wq, out=w)
                w[leave] = max(wq / (piv * piv), 1.0)
                head[r] = q
                status[q] = BASIC
                d[head] = 0.0
                d[leave] = -ratio
                fresh = False
                self.add_eta(r, alpha)
                if self.k_eta >= opt.refactor_every:
                    self.refactor()
                    y, d = self.reduced_costs(cost)
                    fresh = True
                if w.max() > 1e8:
                    w[:] = 1.0
            self.iterations += 1
            if step <= 1e-12:
                degenerate += 1
                if degenerate > opt.stall_limit:
                    bland = True
            else:
                degenerate = 0
                bland = False

    def run(self) -> Solution:
        m, n = self.m, self.n
        nanx = np.full(n, np.nan)
        if self.infeasible_bounds:
            return Solution(Status.INFEASIBLE, math.nan, nanx, np.full(m, np.nan), nanx.copy(),
                            backend=self.backend)
        self.refactor()
        phase1_iters = 0
        if self.n_art:
            st = self.iterate(self.c1, 1)
            phase1_iters = self.iterations
            if st is Status.ITERATION_LIMIT:
                return Solution(st, math.nan, nanx, np.full(m, np.nan), nanx.copy(),
                                iterations=self.iterations, phase1_iterations=phase1_iters, backend=self.backend)
            art = self.x[n + m:]
            infeas = float(art.sum())
            if infeas > self.opt.infeasibility_tol * max(1.0, float(np.max(np.abs(self.b)))):
                rows = []
                col_rows = self.M[:, n + m:].tocoo()
                for i, j in zip(col_rows.row, col_rows.col):
                    if art[j] > self.opt.infeasibility_tol:
                        rows.append(self.problem.row_names[i])
                return Solution(Status.INFEASIBLE, math.nan, nanx, np.full(m, np.nan), nanx.copy(),
                                iterations=self.iterations, phase1_iterations=phase1_iters,
                                infeasible_rows=tuple(rows), backend=self.backend)
            sl = slice(n + m, None)
            self.ubF[sl] = 0.0
            self.x[sl] = np.where(self.status[sl] == BASIC, self.x[sl], 0.0)
            self.status[sl] = np.where(self.status[sl] == BASIC, BASIC, FIXED)
        st = self.iterate(self.c2, 2)
        if st is not Status.OPTIMAL:
            return Solution(st, -math.inf if st is Status.UNBOUNDED else math.nan, self.x[:n] * self.S,
                            np.full(m, np.nan), nanx.copy(), iterations=self.iterations,
                            phase1_iterations=phase1_iters, backend=self.backend)
        y, d = self.reduced_costs(self.c2)
        # unscale and snap round-off outside the column bounds back onto them
        x = np.clip(self.x[:n] * self.S, self.problem.lb, self.problem.ub)
        duals = y * self.R * self.cnorm
        red = d[:n] * self.cnorm / self.S
        nb = self.status[:n]
        alt = bool(np.any(((nb == AT_LB) | (nb == AT_UB) | (nb == FREE)) & (np.abs(d[:n]) <= self.opt.dual_tol)))
        return Solution(Status.OPTIMAL, self.problem.objective_value(x), x, duals, red,
                        iterations=self.iterations, phase1_iterations=phase1_iters,
                        basis=tuple(sorted(int(j) for j in self.head)), alternative_optima=alt,
                        backend=self.backend)
