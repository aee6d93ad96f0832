"""Derived index sets shared by the variable and constraint builders."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from ..errors import InconsistentSpec, MissingAncestor, MissingPriceSeries
from ..system import MARKET_COLUMNS, DemandProfile, InvestmentPolicy, MarketData, SystemSpec
from ..tree import ScenarioTree, ancestor_at_stage


@dataclass
class ModelInput:
    """Everything the formulation needs.

    Stage 0 is the investment stage, ``bidding_stage`` holds the consolidated
    day-ahead / intraday / capacity bids, and every later stage is operational
    with ``tree.steps_per_stage`` hourly steps. Bids are indexed by the global
    operational hour, so a bid made at stage ``bidding_stage`` covers all
    operational stages below it.
    """

    tree: ScenarioTree
    system: SystemSpec
    market: MarketData
    policy: InvestmentPolicy = field(default_factory=InvestmentPolicy)
    bidding_stage: int = 1

    def __post_init__(self):
        if not 0 <= self.bidding_stage < self.tree.stage_count - 1:
            raise InconsistentSpec(
                f"bidding stage {self.bidding_stage} must leave at least one operational stage "
                f"(tree has {self.tree.stage_count} stages)")
        if self.system.demand is None:
            self.system.demand = DemandProfile()

    @property
    def T(self) -> int:
        return self.tree.steps_per_stage

    @property
    def first_op_stage(self) -> int:
        return self.bidding_stage + 1

    @cached_property
    def op_nodes(self) -> tuple:
        return tuple(n.id for n in self.tree.nodes if n.stage >= self.first_op_stage)

    @cached_property
    def bid_nodes(self) -> tuple:
        return self.tree.stage_nodes(self.bidding_stage)

    @cached_property
    def horizon_steps(self) -> int:
        return (self.tree.stage_count - self.first_op_stage) * self.T

    @property
    def horizon_days(self) -> float:
        return self.horizon_steps / 24.0

    def tau(self, node, t) -> int:
        return (self.tree.stage(node) - self.first_op_stage) * self.T + t

    def bid_node(self, node) -> int:
        try:
            return ancestor_at_stage(self.tree, node, self.bidding_stage)
        except Exception as exc:
            raise MissingAncestor(f"node {node} has no bidding-stage ancestor") from exc

    def op_parent(self, node) -> Optional[int]:
        p = self.tree.parent(node)
        if p is not None and self.tree.stage(p) >= self.first_op_stage:
            return p
        return None

    @cached_property
    def leaves(self) -> tuple:
        return self.tree.leaves

    def key(self, node) -> str:
        return self.tree.node(node).data_key

    @property
    def grid(self):
        return self.system.grid

    @cached_property
    def grid_modes(self):
        """(import mode name, export mode name or None) of the grid technology."""
        g = self.grid
        if g is None:
            return None, None
        el = self.system.electricity
        imp = next((m.name for m in g.modes if m.eta_out.get(el, 0) > 0), None)
        exp = next((m.name for m in g.modes if m.eta_in.get(el, 0) > 0), None)
        return imp, exp

    @property
    def reserve_enabled(self) -> bool:
        return self.grid is not None and bool(self.market.reserve)

    @cached_property
    def shift_carriers(self) -> tuple:
        ls = self.system.load_shift
        if ls.up_frac == 0 and ls.down_frac == 0:
            return ()
        if not any(ls.in_window(t) for t in range(self.T)):
            return ()
        if ls.carriers is not None:
            return tuple(ls.carriers)
        return tuple(c.name for c in self.system.carriers
                     if c.name in self.system.demand.carriers_with_demand())

    @cached_property
    def shift_balance_stages(self) -> tuple:
        s = self.system.load_shift.balance_stages
        return tuple(s) if s is not None else (self.tree.stage_count - 1,)

    # node data
    def price(self, node, name) -> np.ndarray:
        col = self.market.column(self.key(node), name, self.T)
        if col is None:
            raise MissingPriceSeries(f"node {node} (key {self.key(node)!r}) lacks series column {name!r}")
        return col

    def co2_price(self, node) -> np.ndarray:
        return self.market.column(self.key(node), "p_co2", self.T, default=self.market.co2_price)

    def availability(self, node, tech) -> np.ndarray:
        if tech.availability is None:
            return np.ones(self.T)
        return self.market.column(self.key(node), tech.availability, self.T, default=1.0)

    def d_ref(self, node, carrier) -> np.ndarray:
        return np.asarray(self.system.demand.d_ref(self.key(node), carrier, self.T), dtype=float)

    def d_flex(self, node, carrier) -> np.ndarray:
        return np.asarray(self.system.demand.d_flex(self.key(node), carrier, self.T), dtype=float)

    def check_market_data(self):
        if self.grid is None:
            return
        for node in self.op_nodes:
            for name in MARKET_COLUMNS:
                self.price(node, name)
