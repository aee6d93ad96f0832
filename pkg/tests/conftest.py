import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from flexinvest.formulation.context import ModelInput  # noqa: E402
from flexinvest.system import (MARKET_COLUMNS, DemandProfile, EnergyCarrier, InvestmentPolicy,  # noqa: E402
                               LoadShiftPolicy, MarketData, OperatingMode, SystemSpec, Technology)
from flexinvest.tree import BranchSpec, build_tree  # noqa: E402

DATA = Path(__file__).resolve().parents[1] / "src" / "flexinvest" / "data"
TOY = DATA / "toy" / "study.yaml"
CASE = DATA / "case_study" / "study.yaml"

ZERO_MARKET = {name: 0.0 for name in MARKET_COLUMNS}


def grid_tech(capacity=100.0, export=True):
    modes = [OperatingMode("import", eta_out={"EL": 1.0})]
    if export:
        modes.append(OperatingMode("export", eta_in={"EL": 1.0}))
    return Technology("grid", tuple(modes), capacity=capacity, is_grid=True)


def boiler(capacity=50.0, eta=1.0, emission=0.0, opex=0.0, carrier="HEAT", **kw):
    return Technology("boiler", (OperatingMode("heat", eta_out={carrier: eta}, emission=emission),),
                      capacity=capacity, opex=opex, **kw)


def tiny_input(techs, carriers=("EL",), storage=(), demand=None, T=2, branches=(1,), bidding_stage=0,
               market=None, per_key=None, reserve=True, policy=None, load_shift=None, dflex=None,
               mu=0.0, **market_kw):
    """Small ModelInput with constant market data on every operational node.

    ``demand`` maps carrier -> per-step list (same on all nodes); ``market``
    overrides the all-zero series; ``per_key`` maps data_key -> overrides.
    """
    tree = build_tree(BranchSpec.uniform(branches), T)
    first_op = bidding_stage + 1
    keys = [n.data_key for n in tree.nodes if n.stage >= first_op]
    base = dict(ZERO_MARKET)
    base.update(market or {})
    series = {}
    for k in keys:
        cols = dict(base)
        cols.update((per_key or {}).get(k, {}))
        series[k] = {c: np.broadcast_to(np.asarray(v, float), (T,)).copy() for c, v in cols.items()}
    dp = DemandProfile(mu_surplus=mu)
    for k in keys:
        dp.demand[k] = {e: np.asarray(v, float) for e, v in (demand or {}).items()}
        dp.dflex[k] = {e: np.asarray(v, float) for e, v in (dflex or {}).items()}
    cars = tuple(EnergyCarrier(c, c == "EL", c.startswith("HEAT")) for c in carriers)
    spec = SystemSpec(cars, tuple(techs), tuple(storage),
                      load_shift or LoadShiftPolicy(up_frac=0.0, down_frac=0.0), dp)
    mkt = MarketData(series=series, reserve=reserve, **market_kw)
    return ModelInput(tree, spec, mkt, policy or InvestmentPolicy(), bidding_stage)


def rel(a, b):
    return abs(a - b) / max(1.0, abs(b))


@pytest.fixture(scope="session")
def toy_study():
    from flexinvest.io.study import load_study
    return load_study(TOY)


@pytest.fixture(scope="session")
def toy_solved(toy_study):
    from flexinvest.formulation.model import formulate
    from flexinvest.solver.simplex import solve
    model = formulate(toy_study.model_input())
    return model, solve(model.problem)


@pytest.fixture(scope="session")
def case_solved():
    from flexinvest.formulation.model import formulate
    from flexinvest.io.study import load_study
    from flexinvest.solver.simplex import solve
    study = load_study(CASE)
    model = formulate(study.model_input())
    return study, model, solve(model.problem)


INF = math.inf


# acceptance lines, printed once at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
