"""Assemble the full deterministic-equivalent LP."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constraints import (add_budget, add_conversion_and_capacity, add_emission_cap, add_energy_balance,
                          add_export_limit, add_heat_pump_limit, add_load_shifting, add_market_balances,
                          add_peak_power_tracking, add_ramping, add_reserve_bid_limits, add_storage_constraints)
from .context import ModelInput
from .objective import add_objective, decompose_costs, expected_emissions
from .problem import LpBuilder, LpProblem
from .variables import index_variables


def build_problem(builder: LpBuilder) -> LpProblem:
    return builder.build()


@dataclass
class FormulatedModel:
    ctx: ModelInput
    builder: LpBuilder
    problem: LpProblem

    def col(self, kind, **index) -> int:
        return self.builder.var(kind, **index)

    def value(self, x, kind, **index) -> float:
        return float(x[self.builder.var(kind, **index)])

    def columns(self, kind):
        return [h for h in self.builder.handles if h.kind == kind]

    def investments(self, x) -> dict:
        out = {}
        for h in self.builder.handles:
            if h.kind in ("v_new_tech", "v_new_storage"):
                out[h.get("obj")] = float(x[h.col])
        return out

    def costs(self, solution):
        return decompose_costs(self.problem, solution)

    def emissions(self, x) -> float:
        return expected_emissions(self, np.asarray(x))


def formulate(ctx: ModelInput, name="flexinvest") -> FormulatedModel:
    ctx.check_market_data()
    b = index_variables(ctx, name)
    add_objective(b, ctx)
    add_energy_balance(b, ctx)
    add_market_balances(b, ctx)
    add_conversion_and_capacity(b, ctx)
    add_ramping(b, ctx)
    add_heat_pump_limit(b, ctx)
    add_load_shifting(b, ctx)
    add_reserve_bid_limits(b, ctx)
    add_storage_constraints(b, ctx)
    add_export_limit(b, ctx)
    add_peak_power_tracking(b, ctx)
    add_emission_cap(b, ctx)
    add_budget(b, ctx)
    return FormulatedModel(ctx, b, build_problem(b))
