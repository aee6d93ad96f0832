"""Physical and market data model of an industrial site."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import NonPositiveLifetime, ValidationError
from .tree import ValidationReport

DAYS_PER_YEAR = 365.0


@dataclass(frozen=True)
class EnergyCarrier:
    name: str
    is_electricity: bool = False
    is_heat: bool = False


@dataclass(frozen=True)
class OperatingMode:
    name: str
    eta_out: dict = field(default_factory=dict)   # carrier -> output per unit activity
    eta_in: dict = field(default_factory=dict)    # carrier -> input per unit activity
    emission: float = 0.0                         # tCO2 per unit activity


@dataclass(frozen=True)
class Technology:
    name: str
    modes: tuple
    capacity: float = 0.0          # installed capacity V_init, MW
    capex: float = 0.0             # currency per MW
    lifetime: float = 20.0
    candidate: bool = False
    max_new: float = math.inf
    ramp: float = 1.0              # share of capacity per step
    opex: float = 0.0              # currency per MWh activity
    availability: Optional[str] = None   # series column with the availability factor
    is_grid: bool = False
    is_heat_pump: bool = False

    def mode(self, name):
        return next(m for m in self.modes if m.name == name)

    @property
    def output_carriers(self):
        return sorted({e for m in self.modes for e, v in m.eta_out.items() if v > 0})

    @property
    def input_carriers(self):
        return sorted({e for m in self.modes for e, v in m.eta_in.items() if v > 0})


@dataclass(frozen=True)
class StorageAsset:
    name: str
    carrier: str
    charge_loss: float = 1.0        # grid-side draw per MWh stored, >= 1
    discharge_eff: float = 1.0      # stored MWh -> delivered MWh
    self_discharge: float = 0.0     # share of SoC lost per step
    power: float = 0.0              # initial power limit P_max, MW
    power_ratio: float = 1.0        # MW per MWh of added energy capacity
    energy: float = 0.0             # initial energy capacity, MWh
    capex: float = 0.0              # currency per MWh
    lifetime: float = 15.0
    candidate: bool = False
    max_new: float = math.inf
    soc_init: float = 0.5
    degradation_cost: float = 0.0   # currency per MWh throughput

    @classmethod
    def from_charge_efficiency(cls, name, carrier, charge_efficiency, **kw):
        if not 0.0 < charge_efficiency <= 1.0:
            raise ValidationError(f"{name}: charge efficiency must be in (0, 1]")
        return cls(name, carrier, charge_loss=1.0 / charge_efficiency, **kw)


@dataclass(frozen=True)
class LoadShiftPolicy:
    up_frac: float = 0.10
    down_frac: float = 0.30
    window: tuple = (8, 17)         # inclusive local step range
    balance_stages: Optional[tuple] = None   # None: last stage only
    inconvenience_cost: float = 0.0
    carriers: Optional[tuple] = None         # None: every carrier with demand

    def in_window(self, step: int) -> bool:
        return self.window[0] <= step <= self.window[1]


@dataclass
class DemandProfile:
    demand: dict = field(default_factory=dict)   # data_key -> {carrier: array}
    dflex: dict = field(default_factory=dict)    # data_key -> {heat carrier: array}
    mu_surplus: float = 0.0

    def d_ref(self, key, carrier, steps):
        return self.demand.get(key, {}).get(carrier, np.zeros(steps))

    def d_flex(self, key, carrier, steps):
        return self.dflex.get(key, {}).get(carrier, np.zeros(steps))

    def carriers_with_demand(self):
        out = set()
        for per in self.demand.values():
            for e, arr in per.items():
                if np.any(np.asarray(arr) > 0):
                    out.add(e)
        return out


MARKET_COLUMNS = (
    "p_da", "p_id_buy", "p_id_sell", "p_cm_up", "p_cm_dwn", "p_act_up", "p_act_dwn",
    "sigma_id_buy", "sigma_id_sell", "sigma_up", "sigma_dwn",
)


@dataclass
class MarketData:
    series: dict = field(default_factory=dict)   # data_key -> {column: array}
    reserve: bool = True
    x_max: float = math.inf
    id_liquidity_frac: float = 1.0
    rm_volume_frac: float = 1.0
    hist_id_volume: object = math.inf            # scalar or per-step array
    hist_rm_volume: object = math.inf
    grid_tariff: float = 0.0                     # currency per MW of peak import
    co2_price: float = 0.0                       # used when no p_co2 series column
    omit_disabled_reserve: bool = False

    def column(self, key, name, steps, default=None):
        per = self.series.get(key)
        if per is None or name not in per:
            if default is None:
                return None
            return np.full(steps, float(default))
        return np.asarray(per[name], dtype=float)

    def hist_volume(self, which, step):
        v = self.hist_id_volume if which == "id" else self.hist_rm_volume
        if np.ndim(v) == 0:
            return float(v)
        return float(np.asarray(v)[step])


@dataclass(frozen=True)
class InvestmentPolicy:
    budget: float = math.inf
    discount_rate: float = 0.09
    export_cap: float = math.inf
    emission_cap: float = math.inf
    emission_accounting: str = "node"    # "node" or "path"
    initial_output: float = 0.0          # ramping reference before the first step

    def __post_init__(self):
        if self.budget < 0:
            raise ValidationError("budget must be >= 0")
        if not self.discount_rate > 0:
            raise ValidationError("discount_rate must be > 0")
        if self.emission_accounting not in ("node", "path"):
            raise ValidationError("emission_accounting must be 'node' or 'path'")


@dataclass
class SystemSpec:
    carriers: tuple
    technologies: tuple
    storage: tuple = ()
    load_shift: LoadShiftPolicy = field(default_factory=LoadShiftPolicy)
    demand: Optional[DemandProfile] = None
    market_trading: bool = True

    @property
    def electricity(self) -> str:
        return next(c.name for c in self.carriers if c.is_electricity)

    @property
    def heat_carriers(self):
        return [c.name for c in self.carriers if c.is_heat]

    @property
    def grid(self) -> Optional[Technology]:
        return next((t for t in self.technologies if t.is_grid), None)

    def tech(self, name) -> Technology:
        return next(t for t in self.technologies if t.name == name)

    def asset(self, name) -> StorageAsset:
        return next(b for b in self.storage if b.name == name)


def capital_recovery_factor(rate: float, lifetime: float) -> float:
    if lifetime < 1:
        raise NonPositiveLifetime(f"lifetime must be >= 1 year, got {lifetime}")
    if rate < 0:
        raise ValidationError(f"discount rate must be >= 0, got {rate}")
    if rate == 0.0:
        return 1.0 / lifetime
    return rate / -math.expm1(-lifetime * math.log1p(rate))


def annualized_cost(capex: float, rate: float, lifetime: float) -> float:
    """Equivalent annual cost of ``capex`` repaid over ``lifetime`` years."""
    return capex * capital_recovery_factor(rate, lifetime)


def horizon_cost(capex, rate, lifetime, horizon_days) -> float:
    """Share of the annualized cost falling on a planning horizon of ``horizon_days``."""
    return annualized_cost(capex, rate, lifetime) * horizon_days / DAYS_PER_YEAR


def shift_bounds(policy: LoadShiftPolicy, d_ref: float, step: int):
    if d_ref < 0:
        raise ValidationError("reference demand must be >= 0")
    if not policy.in_window(step):
        return 0.0, 0.0
    return policy.up_frac * d_ref, policy.down_frac * d_ref


def _reachable_carriers(spec: SystemSpec) -> set:
    reach = set()
    changed = True
    while changed:
        changed = False
        for t in spec.technologies:
            for m in t.modes:
                ins = [e for e, v in m.eta_in.items() if v > 0]
                if all(e in reach for e in ins):
                    for e, v in m.eta_out.items():
                        if v > 0 and e not in reach:
                            reach.add(e)
                            changed = True
    return reach


def validate_system(spec: SystemSpec) -> ValidationReport:
    report = ValidationReport()
    names = [c.name for c in spec.carriers]
    if len(set(names)) != len(names):
        report.add("carrier", f"duplicate carrier names in {names}")
    n_el = sum(c.is_electricity for c in spec.carriers)
    if n_el != 1:
        report.add("carrier", f"expected exactly one electricity carrier, found {n_el}")
    known = set(names)
    el = next((c.name for c in spec.carriers if c.is_electricity), None)

    used = set()
    tnames = [t.name for t in spec.technologies] + [b.name for b in spec.storage]
    if len(set(tnames)) != len(tnames):
        report.add("asset", f"duplicate technology/storage names in {tnames}")
    for t in spec.technologies:
        if not t.modes:
            report.add("technology", f"{t.name} has no operating modes")
        if not any(v > 0 for m in t.modes for v in m.eta_out.values()) and not t.is_grid:
            report.add("technology", f"{t.name} has no nonzero output efficiency")
        if not 0.0 < t.ramp <= 1.0:
            report.add("range", f"{t.name}: ramp factor {t.ramp} outside (0, 1]")
        if t.capacity < 0 or t.capex < 0 or t.opex < 0:
            report.add("range", f"{t.name}: negative capacity or cost")
        for m in t.modes:
            for e, v in list(m.eta_out.items()) + list(m.eta_in.items()):
                if v < 0:
                    report.add("range", f"{t.name}/{m.name}: negative efficiency for {e}")
                if e not in known:
                    report.add("carrier", f"{t.name}/{m.name} references unknown carrier {e}")
                used.add(e)
        if t.is_heat_pump:
            if el is None or not any(m.eta_in.get(el, 0) > 0 for m in t.modes):
                report.add("heat_pump", f"heat pump {t.name} lacks an electricity input")
            if not any(v > 0 and e in spec.heat_carriers for m in t.modes for e, v in m.eta_out.items()):
                report.add("heat_pump", f"heat pump {t.name} produces no heat carrier")
    for b in spec.storage:
        if b.carrier not in known:
            report.add("carrier", f"storage {b.name} on unknown carrier {b.carrier}")
        used.add(b.carrier)
        if b.charge_loss < 1.0:
            report.add("range", f"{b.name}: charge loss factor {b.charge_loss} < 1")
        if not 0.0 < b.discharge_eff <= 1.0:
            report.add("range", f"{b.name}: discharge efficiency {b.discharge_eff} outside (0, 1]")
        if not 0.0 <= b.self_discharge < 1.0:
            report.add("range", f"{b.name}: self-discharge {b.self_discharge} outside [0, 1)")
        if not b.power_ratio > 0:
            report.add("range", f"{b.name}: power-to-energy ratio must be > 0")
        if not 0.0 <= b.soc_init <= 1.0:
            report.add("range", f"{b.name}: initial SoC fraction {b.soc_init} outside [0, 1]")

    demand_carriers = spec.demand.carriers_with_demand() if spec.demand is not None else set()
    used |= demand_carriers
    reach = _reachable_carriers(spec)
    for e in sorted(demand_carriers):
        if e not in known:
            report.add("carrier", f"demand for unknown carrier {e}")
        elif e not in reach:
            report.add("unreachable", f"demand carrier {e} cannot be served by any technology or market")
    for e in names:
        if e not in used:
            report.add("dangling", f"carrier {e} is not connected to any technology, storage or demand")

    if spec.market_trading and spec.grid is None:
        report.add("grid", "market trading enabled but no grid technology defined")
    grid = spec.grid
    if grid is not None and el is not None:
        if not any(m.eta_out.get(el, 0) > 0 for m in grid.modes):
            report.add("grid", f"grid technology {grid.name} has no electricity import mode")
    ls = spec.load_shift
    if not (0 <= ls.up_frac <= 1 and 0 <= ls.down_frac <= 1):
        report.add("range", "load-shift fractions must lie in [0, 1]")
    return report
