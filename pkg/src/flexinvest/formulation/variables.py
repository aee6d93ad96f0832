"""Column layout of the deterministic-equivalent LP.

Columns are created in a fixed order:

1. ``v_new_tech`` / ``v_new_storage`` for every investment candidate;
2. per bidding node (id order) and global operational hour: ``x_da_buy``,
   ``x_da_sell``, ``x_id_buy``, ``x_id_sell``, ``x_up``, ``x_dwn``;
3. per operational node (id order) and hour: technology activity, outputs
   and inputs per mode, storage charge/discharge/SoC, then load-shift
   columns inside the window;
4. per operational node: ``ls_agg_up``/``ls_agg_dwn`` per shiftable carrier and
   the peak-import column ``y_max``.

Sell columns exist only when the grid has an export mode; reserve columns are
bounded to zero when participation is off, or omitted entirely when
``MarketData.omit_disabled_reserve`` is set.
"""
from __future__ import annotations

import math

from ..system import shift_bounds
from .context import ModelInput
from .problem import LpBuilder


def _share(frac, volume):
    # a zero share of an unbounded volume is zero, not nan
    return 0.0 if frac == 0 else frac * volume


def reserve_bid_bound(market, step: int, enabled: bool = True) -> float:
    """Upper bound on a reserve bid: the stricter of X_max and the volume share."""
    if not enabled:
        return 0.0
    return min(market.x_max, _share(market.rm_volume_frac, market.hist_volume("rm", step)))


def intraday_bid_bound(market, step: int) -> float:
    return _share(market.id_liquidity_frac, market.hist_volume("id", step))


def index_variables(ctx: ModelInput, name="flexinvest") -> LpBuilder:
    b = LpBuilder(name)
    sysm, market, T = ctx.system, ctx.market, ctx.T

    for tech in sysm.technologies:
        if tech.candidate:
            b.add_var("v_new_tech", 0.0, tech.max_new, obj=tech.name)
    for st in sysm.storage:
        if st.candidate:
            b.add_var("v_new_storage", 0.0, st.max_new, obj=st.name)

    imp, exp = ctx.grid_modes
    if ctx.grid is not None:
        reserve = ctx.reserve_enabled
        make_reserve = reserve or not market.omit_disabled_reserve
        for p in ctx.bid_nodes:
            for tau in range(ctx.horizon_steps):
                step = tau % T
                idb = intraday_bid_bound(market, step)
                b.add_var("x_da_buy", node=p, t=tau)
                if exp is not None:
                    b.add_var("x_da_sell", node=p, t=tau)
                b.add_var("x_id_buy", 0.0, idb, node=p, t=tau)
                if exp is not None:
                    b.add_var("x_id_sell", 0.0, idb, node=p, t=tau)
                if make_reserve:
                    rb = reserve_bid_bound(market, step, reserve)
                    b.add_var("x_up", 0.0, rb, node=p, t=tau)
                    b.add_var("x_dwn", 0.0, rb, node=p, t=tau)

    export_cap = ctx.policy.export_cap
    shift = ctx.shift_carriers
    policy = sysm.load_shift
    for node in ctx.op_nodes:
        dref = {e: ctx.d_ref(node, e) for e in shift}
        for t in range(T):
            for tech in sysm.technologies:
                for mode in tech.modes:
                    b.add_var("y_activity", node=node, t=t, obj=tech.name, o=mode.name)
                    for e, eta in mode.eta_out.items():
                        if eta > 0:
                            b.add_var("y_out", node=node, t=t, obj=tech.name, e=e, o=mode.name)
                    for e, eta in mode.eta_in.items():
                        if eta > 0:
                            ub = export_cap if (tech.is_grid and mode.name == exp) else math.inf
                            b.add_var("y_in", 0.0, ub, node=node, t=t, obj=tech.name, e=e, o=mode.name)
            for st in sysm.storage:
                b.add_var("q_charge", node=node, t=t, obj=st.name)
                b.add_var("q_discharge", node=node, t=t, obj=st.name)
                b.add_var("q_soc", 0.0, math.inf if st.candidate else st.energy, node=node, t=t, obj=st.name)
            if policy.in_window(t):
                for e in shift:
                    up, dn = shift_bounds(policy, float(dref[e][t]), t)
                    b.add_var("ls_up", 0.0, up, node=node, t=t, e=e)
                    b.add_var("ls_dwn", 0.0, dn, node=node, t=t, e=e)
        for e in shift:
            b.add_var("ls_agg_up", node=node, e=e)
            b.add_var("ls_agg_dwn", node=node, e=e)
        if ctx.grid is not None:
            b.add_var("y_max", node=node)
    return b


def variable_counts(ctx: ModelInput) -> dict:
    """Closed-form column counts per kind, used to cross-check index_variables."""
    sysm, T = ctx.system, ctx.T
    n_op = len(ctx.op_nodes)
    n_bid = len(ctx.bid_nodes)
    H = ctx.horizon_steps
    imp, exp = ctx.grid_modes
    counts = {
        "v_new_tech": sum(t.candidate for t in sysm.technologies),
        "v_new_storage": sum(s.candidate for s in sysm.storage),
        "y_activity": n_op * T * sum(len(t.modes) for t in sysm.technologies),
        "y_out": n_op * T * sum(sum(v > 0 for v in m.eta_out.values()) for t in sysm.technologies for m in t.modes),
        "y_in": n_op * T * sum(sum(v > 0 for v in m.eta_in.values()) for t in sysm.technologies for m in t.modes),
        "q_charge": n_op * T * len(sysm.storage),
        "q_discharge": n_op * T * len(sysm.storage),
        "q_soc": n_op * T * len(sysm.storage),
    }
    if ctx.grid is not None:
        reserve_cols = ctx.reserve_enabled or not ctx.market.omit_disabled_reserve
        counts.update({
            "x_da_buy": n_bid * H, "x_id_buy": n_bid * H,
            "x_da_sell": n_bid * H if exp else 0, "x_id_sell": n_bid * H if exp else 0,
            "x_up": n_bid * H if reserve_cols else 0, "x_dwn": n_bid * H if reserve_cols else 0,
            "y_max": n_op,
        })
    window = sum(ctx.system.load_shift.in_window(t) for t in range(T))
    k = len(ctx.shift_carriers)
    counts.update({"ls_up": n_op * window * k, "ls_dwn": n_op * window * k,
                   "ls_agg_up": n_op * k, "ls_agg_dwn": n_op * k})
    return {kind: c for kind, c in counts.items() if c}
