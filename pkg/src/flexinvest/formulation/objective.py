"""Objective terms and cost decomposition.

Every objective coefficient is booked under one of the terms of
:data:`COST_TERMS`; expected operational terms are weighted by the absolute
probability of the operational node they arise in.

Sign conventions: capacity payments are revenue (negative cost); downward
activation is energy bought at ``p_act_dwn``, upward activation is energy
sold back at ``p_act_up``; the grid tariff charges the expected peak import
of the leaf nodes.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..errors import NotOptimal
from ..system import horizon_cost
from .constraints import emission_terms
from .context import ModelInput
from .problem import LpBuilder

COST_TERMS = ("inv", "gt", "cm", "act", "da", "id", "opex")


@dataclass(frozen=True)
class CostDecomposition:
    inv: float = 0.0
    gt: float = 0.0
    cm: float = 0.0
    act: float = 0.0
    da: float = 0.0
    id: float = 0.0
    opex: float = 0.0

    @property
    def total(self) -> float:
        return self.inv + self.gt + self.cm + self.act + self.da + self.id + self.opex

    def as_dict(self) -> dict:
        return asdict(self)


def add_objective(b: LpBuilder, ctx: ModelInput):
    sysm, market, policy = ctx.system, ctx.market, ctx.policy
    rate = policy.discount_rate
    days = ctx.horizon_days

    for tech in sysm.technologies:
        if tech.candidate:
            b.add_cost("inv", b.var("v_new_tech", obj=tech.name), horizon_cost(tech.capex, rate, tech.lifetime, days))
    for st in sysm.storage:
        if st.candidate:
            b.add_cost("inv", b.var("v_new_storage", obj=st.name), horizon_cost(st.capex, rate, st.lifetime, days))

    grid = ctx.grid
    imp, exp = ctx.grid_modes
    if grid is not None and market.grid_tariff:
        for leaf in ctx.leaves:
            b.add_cost("gt", b.var("y_max", node=leaf), market.grid_tariff * ctx.tree.probability(leaf))

    shift = ctx.shift_carriers
    ls = sysm.load_shift
    for node in ctx.op_nodes:
        pi = ctx.tree.probability(node)
        if grid is not None:
            p = ctx.bid_node(node)
            price = {k: ctx.price(node, k) for k in (
                "p_da", "p_id_buy", "p_id_sell", "p_cm_up", "p_cm_dwn", "p_act_up", "p_act_dwn",
                "sigma_id_buy", "sigma_id_sell", "sigma_up", "sigma_dwn")}
            reserve_cols = b.has_var("x_up", node=p, t=0)
            for t in range(ctx.T):
                tau = ctx.tau(node, t)
                b.add_cost("da", b.var("x_da_buy", node=p, t=tau), pi * price["p_da"][t])
                b.add_cost("id", b.var("x_id_buy", node=p, t=tau),
                           pi * price["sigma_id_buy"][t] * price["p_id_buy"][t])
                if exp is not None:
                    b.add_cost("da", b.var("x_da_sell", node=p, t=tau), -pi * price["p_da"][t])
                    b.add_cost("id", b.var("x_id_sell", node=p, t=tau),
                               -pi * price["sigma_id_sell"][t] * price["p_id_sell"][t])
                if reserve_cols:
                    x_up = b.var("x_up", node=p, t=tau)
                    x_dwn = b.var("x_dwn", node=p, t=tau)
                    b.add_cost("cm", x_up, -pi * price["p_cm_up"][t])
                    b.add_cost("cm", x_dwn, -pi * price["p_cm_dwn"][t])
                    b.add_cost("act", x_dwn, pi * price["sigma_dwn"][t] * price["p_act_dwn"][t])
                    b.add_cost("act", x_up, -pi * price["sigma_up"][t] * price["p_act_up"][t])

        co2 = ctx.co2_price(node)
        for t in range(ctx.T):
            for tech in sysm.technologies:
                for mode in tech.modes:
                    coef = tech.opex + co2[t] * mode.emission
                    if coef:
                        b.add_cost("opex", b.var("y_activity", node=node, t=t, obj=tech.name, o=mode.name),
                                   pi * coef)
            for st in sysm.storage:
                if st.degradation_cost:
                    half = 0.5 * pi * st.degradation_cost
                    b.add_cost("opex", b.var("q_charge", node=node, t=t, obj=st.name), half)
                    b.add_cost("opex", b.var("q_discharge", node=node, t=t, obj=st.name), half)
            if ls.inconvenience_cost and ls.in_window(t):
                half = 0.5 * pi * ls.inconvenience_cost
                for e in shift:
                    b.add_cost("opex", b.var("ls_up", node=node, t=t, e=e), half)
                    b.add_cost("opex", b.var("ls_dwn", node=node, t=t, e=e), half)


def decompose_costs(problem, solution) -> CostDecomposition:
    if not solution.optimal:
        raise NotOptimal(f"solution status is {solution.status}")
    x = solution.x
    vals = {term: float(problem.cost_terms[term] @ x) if term in problem.cost_terms else 0.0
            for term in COST_TERMS}
    return CostDecomposition(**vals)


def expected_emissions(model, x) -> float:
    """Probability-weighted tCO2 over all operational nodes."""
    total = 0.0
    for node in model.ctx.op_nodes:
        pi = model.ctx.tree.probability(node)
        for col, gamma in emission_terms(model.builder, model.ctx, node):
            total += pi * gamma * x[col]
    return total
