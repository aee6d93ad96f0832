"""Fixed-format MPS export and a matching reader.

Names longer than eight characters are replaced by positional codes
(``R0000001``, ``C0000001``); the original names are kept in a comment
block (``* NAMEMAP``) that :func:`parse_mps` reads back. Numbers are written
with ``repr`` so a round trip is exact; a value longer than the twelve
character field simply widens it, which whitespace-tokenizing readers accept.
"""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from ..errors import MpsFormatError
from ..formulation.problem import LpProblem

OBJ_ROW = "OBJ"
_SENSE_CODE = {"L": "L", "E": "E", "G": "G"}


def _num(v: float) -> str:
    v = float(v)
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _line(code, name1, name2=None, value1=None, name3=None, value2=None) -> str:
    s = f" {code:<2} {name1:<8}"
    if name2 is not None and value1 is None:
        s += f"  {name2}"
    elif name2 is not None:
        s += f"  {name2:<8}  {_num(value1):>12}"
        if name3 is not None:
            s += f"   {name3:<8}  {_num(value2):>12}"
    return s.rstrip()


def _needs_map(names, prefix) -> bool:
    if any(len(n) > 8 or not n or any(ch.isspace() for ch in n) for n in names):
        return True
    # avoid clashing with the objective row or generated codes
    return any(n == OBJ_ROW or (len(n) == 8 and n.startswith(prefix) and n[1:].isdigit()) for n in names)


def shortened_names(problem: LpProblem):
    rows, cols = list(problem.row_names), list(problem.col_names)
    rmap = _needs_map(rows, "R")
    cmap = _needs_map(cols, "C")
    if rmap:
        rows = [f"R{i + 1:07d}" for i in range(problem.n_cons)]
    if cmap:
        cols = [f"C{j + 1:07d}" for j in range(problem.n_vars)]
    return rows, cols, rmap, cmap


def write_mps(problem: LpProblem) -> str:
    rows, cols, rmap, cmap = shortened_names(problem)
    out = []
    if rmap or cmap:
        out.append("* NAMEMAP  code -> original name")
        if rmap:
            out += [f"* {code} {name}" for code, name in zip(rows, problem.row_names)]
        if cmap:
            out += [f"* {code} {name}" for code, name in zip(cols, problem.col_names)]
        out.append("* ENDMAP")
    name = "_".join(problem.name.split()) or "problem"
    out.append(f"NAME          {name}")
    out.append("ROWS")
    out.append(_line("N", OBJ_ROW))
    for i, s in enumerate(problem.sense):
        out.append(_line(_SENSE_CODE[str(s)], rows[i]))
    out.append("COLUMNS")
    A = problem.A
    for j in range(problem.n_vars):
        entries = []
        if problem.c[j] != 0:
            entries.append((OBJ_ROW, problem.c[j]))
        s, e = A.indptr[j], A.indptr[j + 1]
        entries += [(rows[i], v) for i, v in zip(A.indices[s:e], A.data[s:e])]
        if not entries:
            entries.append((OBJ_ROW, 0.0))
        for k in range(0, len(entries), 2):
            pair = entries[k:k + 2]
            if len(pair) == 2:
                out.append(_line("", cols[j], pair[0][0], pair[0][1], pair[1][0], pair[1][1]))
            else:
                out.append(_line("", cols[j], pair[0][0], pair[0][1]))
    out.append("RHS")
    if problem.obj_const != 0:
        # objective RHS carries the negated constant
        out.append(_line("", "RHS", OBJ_ROW, -problem.obj_const))
    for i in np.flatnonzero(problem.rhs):
        out.append(_line("", "RHS", rows[i], problem.rhs[i]))
    out.append("BOUNDS")
    for j in range(problem.n_vars):
        lb, ub = float(problem.lb[j]), float(problem.ub[j])
        c = cols[j]
        if lb == ub:
            out.append(_line("FX", "BND", c, lb))
            continue
        if lb == -math.inf and ub == math.inf:
            out.append(_line("FR", "BND", c))
            continue
        if lb == -math.inf:
            out.append(_line("MI", "BND", c))
        elif lb != 0 or ub < 0:
            out.append(_line("LO", "BND", c, lb))
        if ub != math.inf:
            out.append(_line("UP", "BND", c, ub))
    out.append("ENDATA")
    return "\n".join(out) + "\n"


def save_mps(problem: LpProblem, path) -> Path:
    path = Path(path)
    path.write_text(write_mps(problem))
    return path


def parse_mps(text: str) -> LpProblem:
    """Read MPS text written by :func:`write_mps` (or any free-form MPS without RANGES)."""
    row_map, col_map = {}, {}
    name = "problem"
    section = None
    obj = None
    row_names, senses = [], []
    row_idx = {}
    col_names, col_idx = [], {}
    cost, triplets = {}, {}
    rhs = {}
    bounds = {}
    obj_const = 0.0
    in_map = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if raw.startswith("*"):
            body = raw[1:].strip()
            if body.startswith("NAMEMAP"):
                in_map = True
            elif body.startswith("ENDMAP"):
                in_map = False
            elif in_map:
                code, _, orig = body.partition(" ")
                (row_map if code.startswith("R") else col_map)[code] = orig
            continue
        if not raw.strip():
            continue
        tok = raw.split()
        if not raw[0].isspace():
            section = tok[0].upper()
            if section == "NAME":
                name = tok[1] if len(tok) > 1 else name
            elif section not in ("ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"):
                raise MpsFormatError(f"line {lineno}: unsupported section {section!r}")
            continue
        try:
            if section == "ROWS":
                code, rname = tok[0].upper(), tok[1]
                if code == "N":
                    if obj is None:
                        obj = rname
                    continue
                if code not in ("L", "E", "G"):
                    raise MpsFormatError(f"line {lineno}: unknown row type {code!r}")
                row_idx[rname] = len(row_names)
                row_names.append(rname)
                senses.append(code)
            elif section == "COLUMNS":
                if "'MARKER'" in tok:
                    raise MpsFormatError(f"line {lineno}: integer markers are not supported")
                cname = tok[0]
                if cname not in col_idx:
                    col_idx[cname] = len(col_names)
                    col_names.append(cname)
                j = col_idx[cname]
                for rname, val in zip(tok[1::2], tok[2::2]):
                    v = float(val)
                    if rname == obj:
                        cost[j] = cost.get(j, 0.0) + v
                    elif rname in row_idx:
                        key = (row_idx[rname], j)
                        triplets[key] = triplets.get(key, 0.0) + v
                    else:
                        raise MpsFormatError(f"line {lineno}: unknown row {rname!r}")
            elif section == "RHS":
                pairs = tok[1:] if len(tok) % 2 == 1 else tok
                for rname, val in zip(pairs[0::2], pairs[1::2]):
                    if rname == obj:
                        obj_const = -float(val)
                    elif rname in row_idx:
                        rhs[row_idx[rname]] = float(val)
                    else:
                        raise MpsFormatError(f"line {lineno}: unknown row {rname!r}")
            elif section == "BOUNDS":
                code = tok[0].upper()
                cname = tok[2] if len(tok) >= 3 else tok[1]
                if cname not in col_idx:
                    raise MpsFormatError(f"line {lineno}: unknown column {cname!r}")
                j = col_idx[cname]
                lb, ub = bounds.get(j, (0.0, math.inf))
                val = float(tok[3]) if len(tok) >= 4 else None
                if code == "FX":
                    lb = ub = val
                elif code == "FR":
                    lb, ub = -math.inf, math.inf
                elif code == "MI":
                    lb = -math.inf
                elif code == "PL":
                    ub = math.inf
                elif code == "LO":
                    lb = val
                elif code == "UP":
                    ub = val
                else:
                    raise MpsFormatError(f"line {lineno}: unsupported bound type {code!r}")
                bounds[j] = (lb, ub)
            elif section is None:
                raise MpsFormatError(f"line {lineno}: data before any section")
        except (IndexError, ValueError, TypeError) as exc:
            if isinstance(exc, MpsFormatError):
                raise
            raise MpsFormatError(f"line {lineno}: malformed record {raw.strip()!r}") from None
    m, n = len(row_names), len(col_names)
    keys = sorted(k for k, v in triplets.items() if v != 0)
    c = np.zeros(n)
    for j, v in cost.items():
        c[j] = v
    lb = np.zeros(n)
    ub = np.full(n, np.inf)
    for j, (lo, hi) in bounds.items():
        lb[j], ub[j] = lo, hi
    b = np.zeros(m)
    for i, v in rhs.items():
        b[i] = v
    return LpProblem(
        c=c,
        rows=np.array([k[0] for k in keys], dtype=np.int64),
        cols=np.array([k[1] for k in keys], dtype=np.int64),
        vals=np.array([triplets[k] for k in keys], dtype=float),
        sense=np.array(senses, dtype="<U1"), rhs=b, lb=lb, ub=ub,
        row_names=tuple(row_map.get(r, r) for r in row_names),
        col_names=tuple(col_map.get(cn, cn) for cn in col_names),
        obj_const=obj_const, name=name,
    )


def load_mps(path) -> LpProblem:
    return parse_mps(Path(path).read_text())
