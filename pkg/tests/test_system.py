import math

import numpy as np
import pytest

from flexinvest.errors import NonPositiveLifetime
from flexinvest.system import (DemandProfile, EnergyCarrier, LoadShiftPolicy, OperatingMode, SystemSpec,
                               Technology, annualized_cost, capital_recovery_factor, horizon_cost, shift_bounds,
                               validate_system)
from oracles import crf_mpmath

EL = EnergyCarrier("EL", is_electricity=True)
HEAT = EnergyCarrier("HEAT", is_heat=True)
GRID = Technology("grid", (OperatingMode("import", eta_out={"EL": 1.0}),), capacity=10, is_grid=True)


def spec(techs, carriers=(EL, HEAT), demand=None):
    dp = DemandProfile(demand={"1": {k: np.ones(2) for k in (demand or [])}})
    return SystemSpec(carriers, tuple(techs), (), LoadShiftPolicy(), dp)


def test_crf_limits_and_reference():
    assert annualized_cost(100, 1e-12, 10) == pytest.approx(10.0, rel=1e-9)
    assert annualized_cost(100, 0.0, 10) == 10.0
    assert annualized_cost(1000, 0.09, 10) == pytest.approx(155.82, abs=1e-2)
    assert annualized_cost(100, 0.09, 1) == pytest.approx(109.0, rel=1e-12)
    for r, L in [(0.09, 10), (0.03, 25), (0.2, 3), (1e-6, 40)]:
        assert capital_recovery_factor(r, L) == pytest.approx(crf_mpmath(r, L), rel=1e-12)


def test_crf_monotone():
    rates = np.linspace(0.001, 0.3, 30)
    vals = [capital_recovery_factor(r, 10) for r in rates]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    lives = range(1, 40)
    vals = [capital_recovery_factor(0.09, L) for L in lives]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_crf_errors():
    with pytest.raises(NonPositiveLifetime):
        capital_recovery_factor(0.09, 0)


def test_horizon_cost_is_daily_share():
    assert horizon_cost(365.0, 0.0, 1, 1) == pytest.approx(1.0)


def test_shift_bounds():
    pol = LoadShiftPolicy(up_frac=0.1, down_frac=0.3, window=(8, 17))
    assert shift_bounds(pol, 100, 10) == pytest.approx((10, 30))
    assert shift_bounds(pol, 100, 3) == (0.0, 0.0)
    assert shift_bounds(pol, 0, 10) == (0.0, 0.0)
    assert shift_bounds(pol, 100, 8) != (0.0, 0.0) and shift_bounds(pol, 100, 17) != (0.0, 0.0)
    assert shift_bounds(pol, 100, 18) == (0.0, 0.0)


def test_heat_demand_without_producer():
    report = validate_system(spec([GRID], demand=["HEAT"]))
    assert any("HEAT" in v.message and v.code == "unreachable" for v in report)


def test_heat_pump_without_electricity_input():
    hp = Technology("hp", (OperatingMode("m", eta_out={"HEAT": 3.0}),), is_heat_pump=True)
    report = validate_system(spec([GRID, hp], demand=["HEAT"]))
    assert any(v.code == "heat_pump" for v in report)


def test_case_study_system_is_valid(case_solved):
    study, _, _ = case_solved
    assert not validate_system(study.system)
    assert not study.validation_report()


def test_single_electricity_carrier_required():
    report = validate_system(spec([GRID], carriers=(HEAT,)))
    assert any(v.code == "carrier" for v in report)
