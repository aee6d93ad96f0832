"""Delimited time-series tables keyed by (data_key, step)."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import GapError, ParseError, RangeError

KEY_COLUMNS = ("data_key", "step")
BINARY_COLUMNS = ("sigma_up", "sigma_dwn")
UNIT_COLUMNS = ("sigma_id_buy", "sigma_id_sell")
NONNEGATIVE_PREFIXES = ("demand_", "dflex_", "avail_")


@dataclass
class SeriesTable:
    columns: tuple                                 # value columns, header order
    data: dict = field(default_factory=dict)       # data_key -> {column: ndarray}
    steps: int = 0

    def keys(self):
        return list(self.data)

    def __contains__(self, key):
        return key in self.data

    def get(self, key) -> dict:
        return self.data[key]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(KEY_COLUMNS + tuple(self.columns))
        for key, cols in self.data.items():
            for t in range(self.steps):
                w.writerow([key, t] + [repr(float(cols[c][t])) for c in self.columns])
        return buf.getvalue()

    @classmethod
    def from_rows(cls, rows: dict, columns=None) -> "SeriesTable":
        """``rows`` maps data_key -> {column: sequence of per-step values}."""
        keys = list(rows)
        columns = tuple(columns or sorted({c for k in keys for c in rows[k]}))
        data = {k: {c: np.asarray(rows[k][c], dtype=float) for c in columns} for k in keys}
        steps = len(next(iter(data[keys[0]].values()))) if keys else 0
        return cls(columns, data, steps)


def _check_range(col, value, lineno):
    if col in BINARY_COLUMNS and value not in (0.0, 1.0):
        raise RangeError(f"{col} (line {lineno})", value, "{0, 1}")
    if col in UNIT_COLUMNS and not 0.0 <= value <= 1.0:
        raise RangeError(f"{col} (line {lineno})", value, "[0, 1]")
    if col.startswith(NONNEGATIVE_PREFIXES) and value < 0:
        raise RangeError(f"{col} (line {lineno})", value, ">= 0")


def parse_series(text: str, source="<series>") -> SeriesTable:
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ParseError(f"{source}: empty series file") from None
    if tuple(header[:2]) != KEY_COLUMNS:
        raise ParseError(f"{source}: header must start with 'data_key,step', got {header[:2]}")
    columns = tuple(header[2:])
    if len(set(columns)) != len(columns):
        raise ParseError(f"{source}: duplicate column names")
    raw: dict = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"{source} line {lineno}: expected {len(header)} fields, got {len(row)}")
        key = row[0].strip()
        try:
            step = int(row[1])
        except ValueError:
            raise ParseError(f"{source} line {lineno}: step {row[1]!r} is not an integer") from None
        vals = []
        for col, cell in zip(columns, row[2:]):
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"{source} line {lineno}: column {col} value {cell!r} is not numeric") from None
            if not math.isfinite(v):
                raise ParseError(f"{source} line {lineno}: column {col} value {cell!r} is not finite")
            _check_range(col, v, lineno)
            vals.append(v)
        per = raw.setdefault(key, {})
        if step in per:
            raise ParseError(f"{source} line {lineno}: duplicate step {step} for key {key!r}")
        per[step] = vals
    data = {}
    steps = None
    for key, per in raw.items():
        n = max(per) + 1
        for t in range(n):
            if t not in per:
                raise GapError(t, key)
        if min(per) < 0:
            raise ParseError(f"{source}: negative step for key {key!r}")
        if steps is None:
            steps = n
        elif n != steps:
            raise GapError(min(n, steps), key)
        arr = np.array([per[t] for t in range(n)], dtype=float).reshape(n, len(columns))
        data[key] = {c: arr[:, j].copy() for j, c in enumerate(columns)}
    return SeriesTable(columns, data, steps or 0)


def load_series(path) -> SeriesTable:
    path = Path(path)
    return parse_series(path.read_text(), str(path))
