"""Command-line entry point: ``flexinvest {solve,compare,validate,export-lp}``.

Exit codes: 0 ok, 2 invalid input, 3 infeasible, 4 numerical failure,
1 anything else (for example an unwritable output directory). On success a
single ``key=value`` summary line is printed last.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

from .errors import FlexInvestError, NumericalBreakdown, ShapeMismatch, ValidationError
from .formulation.model import formulate
from .io.results import write_results
from .io.study import load_study
from .solver.mps import write_mps
from .solver.simplex import SolveOptions, Status, solve
from .solver.verify import check_feasibility, duality_gap

EXIT_OK, EXIT_ERROR, EXIT_VALIDATION, EXIT_INFEASIBLE, EXIT_NUMERICAL = 0, 1, 2, 3, 4


@dataclass(frozen=True)
class RunManifest:
    study: Path
    reserve: Optional[bool] = None     # None keeps the config's setting
    scenario: Optional[str] = None
    out: Optional[Path] = None
    seed: Optional[int] = None
    tol: float = 1e-6                  # post-solve feasibility and duality-gap tolerance
    backend: Optional[str] = None

    @property
    def label(self) -> str:
        parts = [str(self.study)]
        if self.reserve is not None:
            parts.append(f"reserve={'on' if self.reserve else 'off'}")
        if self.scenario is not None:
            parts.append(f"scenario={self.scenario}")
        if self.seed is not None:
            parts.append(f"seed={self.seed}")
        return ",".join(parts)


def parse_manifest(text: str, defaults: RunManifest) -> RunManifest:
    """``path[,reserve=on|off][,scenario=LABEL][,seed=N]`` on top of ``defaults``."""
    path, *opts = text.split(",")
    m = replace(defaults, study=Path(path))
    for opt in opts:
        key, sep, val = opt.partition("=")
        key = key.strip()
        if not sep:
            raise ValueError(f"manifest option {opt!r} is not key=value")
        if key == "reserve":
            if val not in ("on", "off"):
                raise ValueError(f"reserve must be on or off, got {val!r}")
            m = replace(m, reserve=val == "on")
        elif key == "scenario":
            m = replace(m, scenario=val)
        elif key == "seed":
            m = replace(m, seed=int(val))
        else:
            raise ValueError(f"unknown manifest option {key!r}")
    return m


def _summary(**fields) -> str:
    def fmt(v):
        if isinstance(v, float):
            return repr(v)
        return str(v).replace(" ", "_")
    return " ".join(f"{k}={fmt(v)}" for k, v in fields.items())


def _err(msg):
    print(f"error: {msg}", file=sys.stderr)


def _load(manifest: RunManifest):
    return load_study(manifest.study, scenario=manifest.scenario, reserve=manifest.reserve, seed=manifest.seed)


def run_study(manifest: RunManifest):
    """Load, validate, formulate, and solve; returns (study, model, solution)."""
    study = _load(manifest)
    report = study.validation_report()
    if report:
        raise ValidationError(report.format())
    model = formulate(study.model_input())
    solution = solve(model.problem, SolveOptions(backend=manifest.backend))
    return study, model, solution


def cmd_solve(manifest: RunManifest) -> int:
    try:
        study, model, sol = run_study(manifest)
    except ValidationError as exc:
        _err(exc)
        return EXIT_VALIDATION
    except NumericalBreakdown as exc:
        _err(f"{exc} {exc.diagnostics}")
        return EXIT_NUMERICAL
    except FlexInvestError as exc:
        _err(exc)
        return EXIT_ERROR
    if sol.status is Status.INFEASIBLE:
        _err("problem is infeasible")
        for name in sol.infeasible_rows:
            print(f"infeasible_row {name}", file=sys.stderr)
        return EXIT_INFEASIBLE
    if not sol.optimal:
        _err(f"solver stopped with status {sol.status}")
        return EXIT_NUMERICAL
    res = check_feasibility(model.problem, sol.x, manifest.tol)
    gap = duality_gap(model.problem, sol)
    if not res.feasible or gap > manifest.tol:
        _err(f"verification failed: max residual {res.max_residual:.3e}, duality gap {gap:.3e}")
        return EXIT_NUMERICAL
    costs = model.costs(sol)
    out = manifest.out or Path("results") / study.config.name
    try:
        write_results(sol, costs, study, out, model=model)
    except FlexInvestError as exc:
        _err(exc)
        return EXIT_ERROR
    for asset, cap in sorted(model.investments(sol.x).items()):
        # display only: round-off below the verification tolerance reads as zero
        shown = 0.0 if abs(cap) < manifest.tol * 1e-3 else cap
        print(f"invest {asset} {shown:.6g}")
    print(_summary(status=str(sol.status), objective=float(sol.objective), config_hash=study.hash,
                   scenario=study.scenario, reserve=str(study.market.reserve).lower(),
                   iterations=sol.iterations, gap=float(gap), residual=float(res.max_residual), out=out))
    return EXIT_OK


@dataclass
class ComparisonTable:
    labels: list        # one per run
    hashes: list
    rows: list          # (item, values per run, deltas vs run 0)

    def to_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, delimiter="\t", lineterminator="\n")
        for i, (label, h) in enumerate(zip(self.labels, self.hashes)):
            w.writerow([f"# run{i}", label, h])
        header = ["item"] + [f"run{i}" for i in range(len(self.labels))]
        header += [f"delta_pct_run{i}_vs_run0" for i in range(1, len(self.labels))]
        w.writerow(header)
        for item, vals, deltas in self.rows:
            w.writerow([item] + [f"{v + 0.0:.6g}" for v in vals] + [_pct(d) for d in deltas])
        return buf.getvalue()


def _pct(d):
    if d is None:
        return "n/a"
    return f"{100.0 * d:+.3f}"


def relative_delta(a: float, b: float):
    """(b - a) / a, with 0 for equal values and None when a is zero and b is not."""
    if a == b:
        return 0.0
    if a == 0:
        return None
    return (b - a) / a


def cmd_compare(manifests) -> ComparisonTable:
    if len(manifests) < 2:
        raise ValueError("compare needs at least two runs")
    results = []
    for m in manifests:
        study, model, sol = run_study(m)
        if not sol.optimal:
            raise FlexInvestError(f"{m.label}: solver status {sol.status}")
        results.append((m, study, model, sol))
    assets = [list(r[2].investments(r[3].x)) for r in results]
    if any(a != assets[0] for a in assets[1:]):
        raise ShapeMismatch("runs do not share the same candidate assets")
    rows = []
    for item in assets[0]:
        vals = [r[2].investments(r[3].x)[item] for r in results]
        rows.append((f"capacity:{item}", vals, [relative_delta(vals[0], v) for v in vals[1:]]))
    terms = list(results[0][2].costs(results[0][3]).as_dict())
    for term in terms:
        vals = [r[2].costs(r[3]).as_dict()[term] for r in results]
        rows.append((f"cost:{term}", vals, [relative_delta(vals[0], v) for v in vals[1:]]))
    objs = [float(r[3].objective) for r in results]
    rows.append(("objective", objs, [relative_delta(objs[0], v) for v in objs[1:]]))
    return ComparisonTable([r[0].label for r in results], [r[1].hash for r in results], rows)


def cmd_validate(path) -> int:
    try:
        study = load_study(path)
        study.model_input().check_market_data()
    except FlexInvestError as exc:
        print(f"invalid: {exc}")
        return EXIT_VALIDATION
    report = study.validation_report()
    if report:
        print(report.format())
        return EXIT_VALIDATION
    print(_summary(status="valid", config_hash=study.hash, nodes=len(study.tree), stages=study.tree.stage_count))
    return EXIT_OK


def cmd_export_lp(manifest: RunManifest, out_path) -> int:
    try:
        study = _load(manifest)
        report = study.validation_report()
        if report:
            raise ValidationError(report.format())
        model = formulate(study.model_input())
    except ValidationError as exc:
        _err(exc)
        return EXIT_VALIDATION
    except FlexInvestError as exc:
        _err(exc)
        return EXIT_ERROR
    out_path = Path(out_path)
    try:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text(write_mps(model.problem))
    except OSError as exc:
        _err(f"cannot write {out_path}: {exc}")
        return EXIT_ERROR
    st = model.problem.stats()
    print(_summary(status="written", path=out_path, n_vars=st["n_vars"], n_cons=st["n_cons"], nnz=st["nnz"],
                   config_hash=study.hash))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--no-reserve", action="store_true",
                        help="disable reserve (capacity/activation) market participation")
    common.add_argument("--scenario", help="cost scenario label from the config's cost_scenarios")
    common.add_argument("--seed", type=int, help="seed for representative-day clustering")
    common.add_argument("--tol", type=float, default=1e-6,
                        help="tolerance for post-solve residual and duality-gap checks (default 1e-6)")
    common.add_argument("--backend", choices=["compiled", "python"], help="simplex kernel backend")

    p = argparse.ArgumentParser(prog="flexinvest",
                                description="Investment and market-bidding LP for industrial flexibility.",
                                epilog="exit codes: 0 ok, 1 other error, 2 invalid input, 3 infeasible, "
                                       "4 numerical failure")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", parents=[common], help="solve a study and write result tables")
    s.add_argument("study", help="path to study.yaml")
    s.add_argument("--out", help="results directory (default results/<study name>)")
    c = sub.add_parser("compare", parents=[common],
                       help="solve several runs and tabulate capacity and cost deltas against the first")
    c.add_argument("runs", nargs="+",
                   help="run manifests: path[,reserve=on|off][,scenario=LABEL][,seed=N]")
    c.add_argument("--out", help="also write the table to this file")
    v = sub.add_parser("validate", help="check a study without solving")
    v.add_argument("study")
    e = sub.add_parser("export-lp", parents=[common], help="write the study's LP in MPS format")
    e.add_argument("study")
    e.add_argument("--out", required=True, help="MPS output path")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "validate":
        return cmd_validate(args.study)
    base = RunManifest(Path(args.study) if hasattr(args, "study") else Path("."),
                       reserve=False if args.no_reserve else None, scenario=args.scenario,
                       seed=args.seed, tol=args.tol, backend=args.backend)
    if args.command == "solve":
        return cmd_solve(replace(base, out=Path(args.out) if args.out else None))
    if args.command == "export-lp":
        return cmd_export_lp(base, args.out)
    try:
        manifests = [parse_manifest(r, base) for r in args.runs]
    except ValueError as exc:
        _err(exc)
        return EXIT_VALIDATION
    try:
        table = cmd_compare(manifests)
    except ValidationError as exc:
        _err(exc)
        return EXIT_VALIDATION
    except NumericalBreakdown as exc:
        _err(exc)
        return EXIT_NUMERICAL
    except (FlexInvestError, ValueError) as exc:
        _err(exc)
        return EXIT_ERROR
    text = table.to_text()
    print(text, end="")
    if args.out:
        Path(args.out).write_text(text)
    obj = next(r for r in table.rows if r[0] == "objective")
    print(_summary(status="compared", runs=len(table.labels), baseline_hash=table.hashes[0],
                   objective_delta_pct=float("nan") if obj[2][-1] is None else 100.0 * obj[2][-1]))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
