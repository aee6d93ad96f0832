"""Write solved studies as delimited tables.

Four CSV files are produced in the output directory:

``investments.csv``
    asset, kind, existing, new_capacity, capex, annualized_cost, horizon_cost
``costs.csv``
    term, value (objective components, their total, and the solver objective)
``schedules.csv``
    node, data_key, stage, probability, t, variable, asset, carrier, mode, value
``metadata.csv``
    key, value (config hash, scenario, solver status and statistics, timestamp)

Everything except the ``timestamp`` row is a deterministic function of the
study and the solution.
"""
from __future__ import annotations

import csv
import datetime as _dt
import io
from pathlib import Path

from .. import __version__
from ..errors import IoError, NotOptimal
from ..system import annualized_cost, horizon_cost

RESULT_FILES = ("investments.csv", "costs.csv", "schedules.csv", "metadata.csv")


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v + 0.0)  # drops negative zero
    return str(v)


def _table(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def investment_rows(model, x, study):
    inv = model.investments(x)
    rate = study.policy.discount_rate
    days = model.ctx.horizon_days
    rows = []
    for t in study.system.technologies:
        new = float(inv.get(t.name, 0.0)) + 0.0
        ann = annualized_cost(t.capex * new, rate, t.lifetime)
        rows.append((t.name, "technology", float(t.capacity), new, float(t.capex), ann,
                     horizon_cost(t.capex * new, rate, t.lifetime, days)))
    for s in study.system.storage:
        new = float(inv.get(s.name, 0.0)) + 0.0
        ann = annualized_cost(s.capex * new, rate, s.lifetime)
        rows.append((s.name, "storage", float(s.energy), new, float(s.capex), ann,
                     horizon_cost(s.capex * new, rate, s.lifetime, days)))
    return rows


def schedule_rows(model, x):
    tree = model.ctx.tree
    rows = []
    for h in model.builder.handles:
        key = dict(h.key)
        node = key.get("node")
        if node is None:
            continue
        rec = tree.node(node)
        rows.append((node, rec.data_key, rec.stage, float(rec.probability), key.get("t", ""), h.kind,
                     key.get("obj", ""), key.get("e", ""), key.get("o", ""), float(x[h.col])))
    return rows


def result_tables(solution, decomposition, study, model, timestamp=None) -> dict:
    if not solution.optimal:
        raise NotOptimal(f"solution status is {solution.status}")
    from ..solver.verify import duality_gap

    x = solution.x
    costs = [(term, float(v)) for term, v in decomposition.as_dict().items()]
    costs.append(("total", float(decomposition.total)))
    costs.append(("objective", float(solution.objective)))
    stats = model.problem.stats()
    meta = [
        ("study", study.config.name),
        ("config_hash", study.hash),
        ("scenario", study.scenario),
        ("reserve", str(study.market.reserve).lower()),
        ("status", str(solution.status)),
        ("objective", float(solution.objective)),
        ("iterations", solution.iterations),
        ("phase1_iterations", solution.phase1_iterations),
        ("duality_gap", float(duality_gap(model.problem, solution))),
        ("n_vars", stats["n_vars"]),
        ("n_cons", stats["n_cons"]),
        ("nnz", stats["nnz"]),
        ("backend", solution.backend),
        ("version", __version__),
        ("timestamp", timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")),
    ]
    return {
        "investments.csv": _table(("asset", "kind", "existing", "new_capacity", "capex", "annualized_cost",
                                   "horizon_cost"), investment_rows(model, x, study)),
        "costs.csv": _table(("term", "value"), costs),
        "schedules.csv": _table(("node", "data_key", "stage", "probability", "t", "variable", "asset",
                                 "carrier", "mode", "value"), schedule_rows(model, x)),
        "metadata.csv": _table(("key", "value"), meta),
    }


def write_results(solution, decomposition, study, out_dir, model=None, timestamp=None) -> list:
    """Write the four result tables; ``model`` is rebuilt from ``study`` when omitted."""
    if model is None:
        from ..formulation.model import formulate

        model = formulate(study.model_input())
    tables = result_tables(solution, decomposition, study, model, timestamp)
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths = []
        for name, text in tables.items():
            p = out / name
            p.write_text(text)
            paths.append(p)
    except OSError as exc:
        raise IoError(f"cannot write results to {out}: {exc}") from exc
    return paths
