"""Sparse LP container and the incremental builder that assembles it."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Optional

import numpy as np
import scipy.sparse as sp

from ..errors import EmptyModel, InconsistentSpec

SENSES = ("L", "E", "G")
DROP_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class LpProblem:
    """min c'x + const  s.t.  A x (sense) rhs,  lb <= x <= ub.

    ``rows/cols/vals`` are coordinate triplets with no duplicate (row, col)
    pairs, sorted by row then column. ``cost_terms`` optionally splits ``c``
    into named objective components that sum to it exactly.
    """

    c: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    sense: np.ndarray
    rhs: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    row_names: tuple
    col_names: tuple
    obj_const: float = 0.0
    name: str = "problem"
    cost_terms: dict = field(default_factory=dict)

    @property
    def n_vars(self) -> int:
        return len(self.c)

    @property
    def n_cons(self) -> int:
        return len(self.rhs)

    @cached_property
    def A(self) -> sp.csc_matrix:
        return sp.csc_matrix((self.vals, (self.rows, self.cols)), shape=(self.n_cons, self.n_vars))

    @cached_property
    def col_index(self) -> dict:
        return {n: j for j, n in enumerate(self.col_names)}

    @cached_property
    def row_index(self) -> dict:
        return {n: i for i, n in enumerate(self.row_names)}

    def objective_value(self, x) -> float:
        return float(self.c @ np.asarray(x, dtype=float)) + self.obj_const

    def with_objective(self, c) -> "LpProblem":
        return replace(self, c=np.asarray(c, dtype=float).copy(), cost_terms={})

    def with_bounds(self, lb=None, ub=None) -> "LpProblem":
        return replace(self,
                       lb=self.lb.copy() if lb is None else np.asarray(lb, dtype=float).copy(),
                       ub=self.ub.copy() if ub is None else np.asarray(ub, dtype=float).copy())

    def fix(self, col, value) -> "LpProblem":
        lb, ub = self.lb.copy(), self.ub.copy()
        j = self.col_index[col] if isinstance(col, str) else int(col)
        lb[j] = ub[j] = float(value)
        return replace(self, lb=lb, ub=ub)

    def stats(self) -> dict:
        return {"n_vars": self.n_vars, "n_cons": self.n_cons, "nnz": int(len(self.vals)),
                "n_eq": int(np.sum(self.sense == "E")), "n_le": int(np.sum(self.sense == "L")),
                "n_ge": int(np.sum(self.sense == "G"))}

    def structurally_equal(self, other: "LpProblem", names=True) -> bool:
        same = (self.n_vars == other.n_vars and self.n_cons == other.n_cons
                and np.array_equal(self.c, other.c) and np.array_equal(self.rows, other.rows)
                and np.array_equal(self.cols, other.cols) and np.array_equal(self.vals, other.vals)
                and np.array_equal(self.sense, other.sense) and np.array_equal(self.rhs, other.rhs)
                and np.array_equal(self.lb, other.lb) and np.array_equal(self.ub, other.ub)
                and self.obj_const == other.obj_const)
        if names:
            same = same and self.row_names == other.row_names and self.col_names == other.col_names
        return bool(same)


def make_problem(c, A, sense, rhs, lb=None, ub=None, row_names=None, col_names=None,
                 name="problem", obj_const=0.0) -> LpProblem:
    """Build an LpProblem from dense or sparse arrays (handy for tests)."""
    A = sp.coo_matrix(A)
    A.sum_duplicates()
    m, n = A.shape
    order = np.lexsort((A.col, A.row))
    keep = A.data[order] != 0
    c = np.asarray(c, dtype=float)
    sense = np.asarray(list(sense) if isinstance(sense, str) else sense, dtype="<U1")
    return LpProblem(
        c=c.copy(),
        rows=A.row[order][keep].astype(np.int64), cols=A.col[order][keep].astype(np.int64),
        vals=A.data[order][keep].astype(float),
        sense=sense, rhs=np.asarray(rhs, dtype=float).copy(),
        lb=np.zeros(n) if lb is None else np.asarray(lb, dtype=float).copy(),
        ub=np.full(n, np.inf) if ub is None else np.asarray(ub, dtype=float).copy(),
        row_names=tuple(row_names or (f"r{i}" for i in range(m))),
        col_names=tuple(col_names or (f"x{j}" for j in range(n))),
        obj_const=float(obj_const), name=name,
    )


def format_name(kind: str, **index) -> str:
    parts = ",".join(f"{k}={v}" for k, v in index.items() if v is not None)
    return f"{kind}[{parts}]"


@dataclass(frozen=True)
class VariableHandle:
    col: int
    kind: str
    key: tuple     # ((field, value), ...) in naming order
    lb: float
    ub: float

    def get(self, name, default=None):
        return dict(self.key).get(name, default)


class LpBuilder:
    """Accumulates columns, rows, and objective terms in insertion order."""

    def __init__(self, name="problem"):
        self.name = name
        self.handles: list = []
        self._lookup: dict = {}
        self._names: dict = {}
        self._cost: dict = {}            # term -> {col: coef}
        self._row_cols: list = []
        self._row_vals: list = []
        self._row_sense: list = []
        self._row_rhs: list = []
        self._row_names: list = []
        self._row_name_set: set = set()
        self.obj_const = 0.0

    # columns
    def add_var(self, kind, lb=0.0, ub=math.inf, **index) -> int:
        key = tuple(index.items())
        lk = (kind, key)
        if lk in self._lookup:
            raise InconsistentSpec(f"duplicate variable {format_name(kind, **index)}")
        name = format_name(kind, **index)
        col = len(self.handles)
        self.handles.append(VariableHandle(col, kind, key, float(lb), float(ub)))
        self._lookup[lk] = col
        self._names[name] = col
        return col

    def var(self, kind, **index) -> int:
        return self._lookup[(kind, tuple(index.items()))]

    def has_var(self, kind, **index) -> bool:
        return (kind, tuple(index.items())) in self._lookup

    def set_bounds(self, col, lb=None, ub=None):
        h = self.handles[col]
        self.handles[col] = replace(h, lb=h.lb if lb is None else float(lb),
                                    ub=h.ub if ub is None else float(ub))

    @property
    def n_vars(self):
        return len(self.handles)

    # rows
    def add_row(self, name, terms, sense, rhs) -> Optional[int]:
        """Add ``sum(coef * x[col]) sense rhs``; ``terms`` is an iterable of (col, coef).

        Rows whose coefficients all vanish are dropped when trivially satisfied
        and rejected otherwise.
        """
        if sense not in SENSES:
            raise ValueError(f"bad sense {sense!r}")
        cols, vals = [], []
        for col, coef in terms:
            if coef != 0.0:
                cols.append(int(col))
                vals.append(float(coef))
        rhs = float(rhs)
        if not cols:
            ok = {"L": 0.0 <= rhs, "E": rhs == 0.0, "G": 0.0 >= rhs}[sense]
            if ok:
                return None
            raise InconsistentSpec(f"row {name} has no variables but requires 0 {sense} {rhs}")
        if name in self._row_name_set:
            raise InconsistentSpec(f"duplicate row name {name}")
        self._row_name_set.add(name)
        self._row_cols.append(cols)
        self._row_vals.append(vals)
        self._row_sense.append(sense)
        self._row_rhs.append(rhs)
        self._row_names.append(name)
        return len(self._row_names) - 1

    @property
    def n_cons(self):
        return len(self._row_names)

    # objective
    def add_cost(self, term, col, coef):
        if coef == 0.0:
            return
        bucket = self._cost.setdefault(term, {})
        bucket[col] = bucket.get(col, 0.0) + float(coef)

    def build(self) -> LpProblem:
        n = len(self.handles)
        m = len(self._row_names)
        if n == 0:
            raise EmptyModel("model has no variables")
        terms = {}
        c = np.zeros(n)
        for term, bucket in self._cost.items():
            v = np.zeros(n)
            for col, coef in bucket.items():
                v[col] += coef
            terms[term] = v
            c += v
        lens = [len(cs) for cs in self._row_cols]
        rows = np.repeat(np.arange(m, dtype=np.int64), lens)
        cols = np.fromiter((j for cs in self._row_cols for j in cs), dtype=np.int64, count=sum(lens))
        vals = np.fromiter((v for vs in self._row_vals for v in vs), dtype=float, count=sum(lens))
        A = sp.coo_matrix((vals, (rows, cols)), shape=(m, n))
        A.sum_duplicates()   # sorts by row, then column
        # round-off sized coefficients (e.g. 1e-17 availabilities) only hurt conditioning
        keep = np.abs(A.data) > DROP_TOL
        r, cc, vv = A.row[keep].astype(np.int64), A.col[keep].astype(np.int64), A.data[keep]
        if m and np.any(np.bincount(r, minlength=m) == 0):
            empty = int(np.flatnonzero(np.bincount(r, minlength=m) == 0)[0])
            raise InconsistentSpec(f"row {self._row_names[empty]} cancels to zero coefficients")
        return LpProblem(
            c=c, rows=r, cols=cc, vals=vv.astype(float),
            sense=np.array(self._row_sense, dtype="<U1"), rhs=np.array(self._row_rhs, dtype=float),
            lb=np.array([h.lb for h in self.handles]), ub=np.array([h.ub for h in self.handles]),
            row_names=tuple(self._row_names),
            col_names=tuple(format_name(h.kind, **dict(h.key)) for h in self.handles),
            obj_const=self.obj_const, name=self.name, cost_terms=terms,
        )
