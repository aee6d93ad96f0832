"""Constraint families of the deterministic equivalent.

Each ``add_*`` function appends rows to an :class:`LpBuilder` whose columns
were created by :func:`index_variables`. Row names follow the column naming
scheme, e.g. ``balance[node=4,t=7,e=EL]``.
"""
from __future__ import annotations

import math

import numpy as np

from .context import ModelInput
from .problem import LpBuilder, format_name


def _grid_cols(b: LpBuilder, ctx: ModelInput, node, t):
    grid = ctx.grid
    el = ctx.system.electricity
    imp, exp = ctx.grid_modes
    y_imp = b.var("y_out", node=node, t=t, obj=grid.name, e=el, o=imp)
    y_exp = b.var("y_in", node=node, t=t, obj=grid.name, e=el, o=exp) if exp else None
    return y_imp, y_exp


def add_energy_balance(b: LpBuilder, ctx: ModelInput):
    """D_ref + LS_up - LS_dwn = outputs - inputs - sum_b(loss * charge - discharge)."""
    sysm = ctx.system
    shift = set(ctx.shift_carriers)
    policy = sysm.load_shift
    for node in ctx.op_nodes:
        dref = {c.name: ctx.d_ref(node, c.name) for c in sysm.carriers}
        for t in range(ctx.T):
            for carrier in sysm.carriers:
                e = carrier.name
                terms = []
                for tech in sysm.technologies:
                    for mode in tech.modes:
                        if mode.eta_out.get(e, 0) > 0:
                            terms.append((b.var("y_out", node=node, t=t, obj=tech.name, e=e, o=mode.name), 1.0))
                        if mode.eta_in.get(e, 0) > 0:
                            terms.append((b.var("y_in", node=node, t=t, obj=tech.name, e=e, o=mode.name), -1.0))
                for st in sysm.storage:
                    if st.carrier == e:
                        terms.append((b.var("q_charge", node=node, t=t, obj=st.name), -st.charge_loss))
                        terms.append((b.var("q_discharge", node=node, t=t, obj=st.name), 1.0))
                if e in shift and policy.in_window(t):
                    terms.append((b.var("ls_up", node=node, t=t, e=e), -1.0))
                    terms.append((b.var("ls_dwn", node=node, t=t, e=e), 1.0))
                b.add_row(format_name("balance", node=node, t=t, e=e), terms, "E", float(dref[e][t]))


def add_market_balances(b: LpBuilder, ctx: ModelInput):
    """Grid import/export equal the accepted bid volumes of the bidding ancestor.

    Import = DA buy + sigma_ID_buy * ID buy + sigma_dwn * x_dwn - sigma_up * x_up;
    export = DA sell + sigma_ID_sell * ID sell. Reserve activation enters the
    import row only, so the net position counts each activation once.
    """
    if ctx.grid is None:
        return
    imp, exp = ctx.grid_modes
    reserve_cols = b.has_var("x_up", node=ctx.bid_nodes[0], t=0) if ctx.bid_nodes else False
    for node in ctx.op_nodes:
        p = ctx.bid_node(node)
        s_idb = ctx.price(node, "sigma_id_buy")
        s_ids = ctx.price(node, "sigma_id_sell")
        s_up = ctx.price(node, "sigma_up")
        s_dwn = ctx.price(node, "sigma_dwn")
        for t in range(ctx.T):
            tau = ctx.tau(node, t)
            y_imp, y_exp = _grid_cols(b, ctx, node, t)
            terms = [(y_imp, 1.0), (b.var("x_da_buy", node=p, t=tau), -1.0),
                     (b.var("x_id_buy", node=p, t=tau), -float(s_idb[t]))]
            if reserve_cols:
                terms += [(b.var("x_dwn", node=p, t=tau), -float(s_dwn[t])),
                          (b.var("x_up", node=p, t=tau), float(s_up[t]))]
            b.add_row(format_name("import", node=node, t=t), terms, "E", 0.0)
            if y_exp is not None:
                terms = [(y_exp, 1.0), (b.var("x_da_sell", node=p, t=tau), -1.0),
                         (b.var("x_id_sell", node=p, t=tau), -float(s_ids[t]))]
                b.add_row(format_name("export", node=node, t=t), terms, "E", 0.0)


def _vnew_tech(b, tech):
    return b.var("v_new_tech", obj=tech.name) if tech.candidate else None


def _vnew_storage(b, st):
    return b.var("v_new_storage", obj=st.name) if st.candidate else None


def add_conversion_and_capacity(b: LpBuilder, ctx: ModelInput):
    """y_out = eta_out * activity, y_in = eta_in * activity, sum y_out <= phi (V_init + v_new)."""
    for node in ctx.op_nodes:
        for tech in ctx.system.technologies:
            phi = ctx.availability(node, tech)
            v = _vnew_tech(b, tech)
            for t in range(ctx.T):
                outs = []
                for mode in tech.modes:
                    act = b.var("y_activity", node=node, t=t, obj=tech.name, o=mode.name)
                    for e, eta in mode.eta_out.items():
                        if eta > 0:
                            y = b.var("y_out", node=node, t=t, obj=tech.name, e=e, o=mode.name)
                            outs.append((y, 1.0))
                            b.add_row(format_name("conv_out", node=node, t=t, obj=tech.name, e=e, o=mode.name),
                                      [(y, 1.0), (act, -eta)], "E", 0.0)
                    for e, eta in mode.eta_in.items():
                        if eta > 0:
                            y = b.var("y_in", node=node, t=t, obj=tech.name, e=e, o=mode.name)
                            b.add_row(format_name("conv_in", node=node, t=t, obj=tech.name, e=e, o=mode.name),
                                      [(y, 1.0), (act, -eta)], "E", 0.0)
                if outs:
                    terms = outs + ([(v, -float(phi[t]))] if v is not None else [])
                    b.add_row(format_name("capacity", node=node, t=t, obj=tech.name), terms, "L",
                              float(phi[t]) * tech.capacity)


def add_ramping(b: LpBuilder, ctx: ModelInput):
    """|y_out(t) - y_out(t-1)| <= beta (V_init + v_new), chained across stages.

    Rows are skipped for ramp factors of 1 (never binding given the capacity
    rows) and for the grid. Before the first operational hour the reference
    output is ``policy.initial_output``.
    """
    y0 = ctx.policy.initial_output
    for tech in ctx.system.technologies:
        if tech.is_grid or tech.ramp >= 1.0:
            continue
        v = _vnew_tech(b, tech)
        beta = tech.ramp
        rhs = beta * tech.capacity
        for node in ctx.op_nodes:
            parent = ctx.op_parent(node)
            for mode in tech.modes:
                for e, eta in mode.eta_out.items():
                    if eta <= 0:
                        continue
                    for t in range(ctx.T):
                        y = b.var("y_out", node=node, t=t, obj=tech.name, e=e, o=mode.name)
                        if t > 0:
                            prev = b.var("y_out", node=node, t=t - 1, obj=tech.name, e=e, o=mode.name)
                        elif parent is not None:
                            prev = b.var("y_out", node=parent, t=ctx.T - 1, obj=tech.name, e=e, o=mode.name)
                        else:
                            prev = None
                        vt = [(v, -beta)] if v is not None else []
                        up = format_name("ramp_up", node=node, t=t, obj=tech.name, e=e, o=mode.name)
                        dn = format_name("ramp_dn", node=node, t=t, obj=tech.name, e=e, o=mode.name)
                        if prev is None:
                            b.add_row(up, [(y, 1.0)] + vt, "L", rhs + y0)
                            b.add_row(dn, [(y, -1.0)] + vt, "L", rhs - y0)
                        else:
                            b.add_row(up, [(y, 1.0), (prev, -1.0)] + vt, "L", rhs)
                            b.add_row(dn, [(y, -1.0), (prev, 1.0)] + vt, "L", rhs)


def add_heat_pump_limit(b: LpBuilder, ctx: ModelInput):
    """Heat extracted by heat pumps (heat out minus power in) <= mu * flexible heat demand."""
    sysm = ctx.system
    hps = [t for t in sysm.technologies if t.is_heat_pump]
    if not hps:
        return
    heat = sysm.heat_carriers
    el = sysm.electricity
    mu = sysm.demand.mu_surplus
    for node in ctx.op_nodes:
        flex = np.zeros(ctx.T)
        for e in heat:
            flex += ctx.d_flex(node, e)
        for t in range(ctx.T):
            terms = []
            for tech in hps:
                for mode in tech.modes:
                    for e in heat:
                        if mode.eta_out.get(e, 0) > 0:
                            terms.append((b.var("y_out", node=node, t=t, obj=tech.name, e=e, o=mode.name), 1.0))
                    if mode.eta_in.get(el, 0) > 0:
                        terms.append((b.var("y_in", node=node, t=t, obj=tech.name, e=el, o=mode.name), -1.0))
            b.add_row(format_name("hp_surplus", node=node, t=t), terms, "L", mu * float(flex[t]))


def add_load_shifting(b: LpBuilder, ctx: ModelInput):
    """Path-cumulative shift aggregates, balanced at nodes of the balance stages.

    Per-hour bounds (share of reference demand, zero outside the window) are
    the column bounds set by :func:`index_variables`.
    """
    shift = ctx.shift_carriers
    if not shift:
        return
    policy = ctx.system.load_shift
    window = [t for t in range(ctx.T) if policy.in_window(t)]
    balance = set(ctx.shift_balance_stages)
    for node in ctx.op_nodes:
        parent = ctx.op_parent(node)
        for e in shift:
            for direction, kind in (("up", "ls_up"), ("dwn", "ls_dwn")):
                agg = b.var(f"ls_agg_{direction}", node=node, e=e)
                terms = [(agg, 1.0)] + [(b.var(kind, node=node, t=t, e=e), -1.0) for t in window]
                if parent is not None:
                    terms.append((b.var(f"ls_agg_{direction}", node=parent, e=e), -1.0))
                b.add_row(format_name(f"ls_agg_{direction}", node=node, e=e), terms, "E", 0.0)
            if ctx.tree.stage(node) in balance:
                b.add_row(format_name("ls_balance", node=node, e=e),
                          [(b.var("ls_agg_up", node=node, e=e), 1.0), (b.var("ls_agg_dwn", node=node, e=e), -1.0)],
                          "E", 0.0)


def add_reserve_bid_limits(b: LpBuilder, ctx: ModelInput):
    """Reserve bids <= min(X_max, share of historical volume); zero when disabled.

    Implemented as column bounds (see :func:`reserve_bid_bound`); this pass
    re-applies them so the builder reflects the current market settings.
    """
    from .variables import reserve_bid_bound

    if ctx.grid is None:
        return
    for p in ctx.bid_nodes:
        for tau in range(ctx.horizon_steps):
            if not b.has_var("x_up", node=p, t=tau):
                return
            bound = reserve_bid_bound(ctx.market, tau % ctx.T, ctx.reserve_enabled)
            for kind in ("x_up", "x_dwn"):
                b.set_bounds(b.var(kind, node=p, t=tau), 0.0, bound)


def add_storage_constraints(b: LpBuilder, ctx: ModelInput):
    """Power limit, SoC recursion with cross-stage continuity, capacity, end-of-horizon."""
    leaves = set(ctx.leaves)
    T = ctx.T
    for st in ctx.system.storage:
        v = _vnew_storage(b, st)
        keep = 1.0 - st.self_discharge
        inv_d = 1.0 / st.discharge_eff
        f = st.soc_init
        for node in ctx.op_nodes:
            parent = ctx.op_parent(node)
            for t in range(T):
                qc = b.var("q_charge", node=node, t=t, obj=st.name)
                qd = b.var("q_discharge", node=node, t=t, obj=st.name)
                soc = b.var("q_soc", node=node, t=t, obj=st.name)
                terms = [(qc, 1.0), (qd, inv_d)] + ([(v, -st.power_ratio)] if v is not None else [])
                b.add_row(format_name("st_power", node=node, t=t, obj=st.name), terms, "L", st.power)
                terms = [(soc, 1.0), (qc, -1.0), (qd, inv_d)]
                rhs = 0.0
                if t > 0:
                    terms.append((b.var("q_soc", node=node, t=t - 1, obj=st.name), -keep))
                elif parent is not None:
                    terms.append((b.var("q_soc", node=parent, t=T - 1, obj=st.name), -keep))
                else:
                    rhs = keep * f * st.energy
                    if v is not None:
                        terms.append((v, -keep * f))
                b.add_row(format_name("soc", node=node, t=t, obj=st.name), terms, "E", rhs)
                if v is not None:
                    b.add_row(format_name("soc_cap", node=node, t=t, obj=st.name),
                              [(soc, 1.0), (v, -1.0)], "L", st.energy)
            if node in leaves:
                terms = [(b.var("q_soc", node=node, t=T - 1, obj=st.name), 1.0)]
                if v is not None:
                    terms.append((v, -f))
                b.add_row(format_name("soc_end", node=node, obj=st.name), terms, "G", f * st.energy)


def add_export_limit(b: LpBuilder, ctx: ModelInput):
    """Export <= G_export, enforced as the upper bound of the grid export column."""
    imp, exp = ctx.grid_modes
    if exp is None:
        return
    grid = ctx.grid
    el = ctx.system.electricity
    cap = ctx.policy.export_cap
    for node in ctx.op_nodes:
        for t in range(ctx.T):
            b.set_bounds(b.var("y_in", node=node, t=t, obj=grid.name, e=el, o=exp), 0.0, cap)


def add_peak_power_tracking(b: LpBuilder, ctx: ModelInput):
    """Grid import <= y_max(node); y_max(child) >= y_max(parent)."""
    if ctx.grid is None:
        return
    for node in ctx.op_nodes:
        peak = b.var("y_max", node=node)
        for t in range(ctx.T):
            y_imp, _ = _grid_cols(b, ctx, node, t)
            b.add_row(format_name("peak", node=node, t=t), [(y_imp, 1.0), (peak, -1.0)], "L", 0.0)
        parent = ctx.op_parent(node)
        if parent is not None:
            b.add_row(format_name("peak_prop", node=node), [(peak, 1.0), (b.var("y_max", node=parent), -1.0)],
                      "G", 0.0)


def emission_terms(b: LpBuilder, ctx: ModelInput, node):
    """(column, tCO2 per unit) pairs for all activity at ``node``."""
    terms = []
    for tech in ctx.system.technologies:
        for mode in tech.modes:
            if mode.emission:
                for t in range(ctx.T):
                    terms.append((b.var("y_activity", node=node, t=t, obj=tech.name, o=mode.name), mode.emission))
    return terms


def add_emission_cap(b: LpBuilder, ctx: ModelInput):
    """Emissions per operational node (or along its path) <= gamma_max."""
    cap = ctx.policy.emission_cap
    if not math.isfinite(cap):
        return
    path_mode = ctx.policy.emission_accounting == "path"
    for node in ctx.op_nodes:
        nodes = [n for n in ctx.tree.path(node) if n in set(ctx.op_nodes)] if path_mode else [node]
        terms = [tc for n in nodes for tc in emission_terms(b, ctx, n)]
        b.add_row(format_name("emission", node=node), terms, "L", cap)


def add_budget(b: LpBuilder, ctx: ModelInput):
    budget = ctx.policy.budget
    if not math.isfinite(budget):
        return
    terms = [(b.var("v_new_tech", obj=t.name), t.capex) for t in ctx.system.technologies if t.candidate]
    terms += [(b.var("v_new_storage", obj=s.name), s.capex) for s in ctx.system.storage if s.candidate]
    b.add_row("budget[]", terms, "L", budget)
