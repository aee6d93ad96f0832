"""Turn a study config plus its series table into model inputs."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from ..clustering import cluster_representatives, standardize_blocks
from ..errors import GapError, MissingSeries, SchemaError
from ..formulation.context import ModelInput
from ..system import (MARKET_COLUMNS, DemandProfile, EnergyCarrier, InvestmentPolicy, LoadShiftPolicy, MarketData,
                      OperatingMode, StorageAsset, SystemSpec, Technology, validate_system)
from ..tree import BranchSpec, ScenarioTree, StageBranching, ValidationReport, build_tree, validate_tree
from .config import StudyConfig, config_hash, load_config, parse_config
from .series import SeriesTable, load_series

_INF = math.inf


def _opt(v):
    return _INF if v is None else float(v)


@dataclass
class Study:
    config: StudyConfig
    path: Optional[Path]
    series: SeriesTable
    tree: ScenarioTree
    system: SystemSpec
    market: MarketData
    demand: DemandProfile
    policy: InvestmentPolicy
    hash: str

    @property
    def bidding_stage(self) -> int:
        return self.config.tree.bidding_stage

    @property
    def scenario(self) -> str:
        return self.config.scenario

    def model_input(self) -> ModelInput:
        return ModelInput(self.tree, self.system, self.market, self.policy, self.bidding_stage)

    def validation_report(self) -> ValidationReport:
        report = validate_tree(self.tree)
        report.extend(validate_system(self.system))
        return report


def apply_overrides(cfg: StudyConfig, scenario=None, reserve=None, seed=None) -> StudyConfig:
    if scenario is not None:
        cfg = cfg.model_copy(update={"scenario": str(scenario)})
    if reserve is not None:
        cfg = cfg.model_copy(update={"market": cfg.market.model_copy(update={"reserve": bool(reserve)})})
    if seed is not None and cfg.tree.cluster is not None:
        cluster = cfg.tree.cluster.model_copy(update={"seed": int(seed)})
        cfg = cfg.model_copy(update={"tree": cfg.tree.model_copy(update={"cluster": cluster})})
    # re-run cross-field validation after the updates
    return StudyConfig.model_validate(cfg.model_dump(by_alias=True))


def build_study_tree(cfg: StudyConfig, series: SeriesTable) -> ScenarioTree:
    stages = []
    tc = cfg.tree
    if tc.cluster is not None:
        cl = tc.cluster
        for key in cl.candidates:
            if key not in series:
                raise MissingSeries(key)
        blocks = []
        for feat in cl.features:
            if feat not in series.columns:
                raise MissingSeries(f"column {feat}")
            blocks.append(np.vstack([series.get(k)[feat] for k in cl.candidates]))
        res = cluster_representatives(standardize_blocks(blocks), cl.k, cl.seed)
        stages.append(StageBranching(cl.k, tuple(float(w) for w in res.weights),
                                     tuple(cl.candidates[i] for i in res.medoids)))
    for st in tc.stages:
        stages.append(StageBranching(st.branches, None if st.probabilities is None else tuple(st.probabilities),
                                     None if st.labels is None else tuple(st.labels)))
    return build_tree(BranchSpec(tuple(stages)), tc.steps_per_stage)


def build_system(cfg: StudyConfig, demand: DemandProfile) -> SystemSpec:
    costs = cfg.cost_scenarios[cfg.scenario]
    carriers = tuple(EnergyCarrier(c.name, c.electricity, c.heat) for c in cfg.carriers)
    techs = []
    for t in cfg.technologies:
        modes = tuple(OperatingMode(m.name, dict(m.out), dict(m.in_), m.emission) for m in t.modes)
        techs.append(Technology(
            t.name, modes, capacity=t.capacity, capex=costs.capex.get(t.name, 0.0), lifetime=t.lifetime,
            candidate=t.candidate, max_new=_opt(t.max_new), ramp=t.ramp, opex=t.opex,
            availability=t.availability, is_grid=t.grid, is_heat_pump=t.heat_pump))
    storage = []
    for s in cfg.storage:
        storage.append(StorageAsset.from_charge_efficiency(
            s.name, s.carrier, s.charge_efficiency, discharge_eff=s.discharge_efficiency,
            self_discharge=s.self_discharge, power=s.power, power_ratio=s.power_ratio, energy=s.energy,
            capex=costs.capex.get(s.name, 0.0), lifetime=s.lifetime, candidate=s.candidate,
            max_new=_opt(s.max_new), soc_init=s.soc_init, degradation_cost=s.degradation_cost))
    ls = cfg.load_shift
    policy = LoadShiftPolicy(
        up_frac=ls.up, down_frac=ls.down, window=tuple(ls.window),
        balance_stages=None if ls.balance_stages is None else tuple(ls.balance_stages),
        inconvenience_cost=ls.inconvenience_cost, carriers=None if ls.carriers is None else tuple(ls.carriers))
    return SystemSpec(carriers, tuple(techs), tuple(storage), policy, demand,
                      market_trading=any(t.grid for t in cfg.technologies))


def study_from_config(cfg: StudyConfig, series: SeriesTable, path=None) -> Study:
    T = cfg.tree.steps_per_stage
    if series.steps != T:
        raise GapError(min(series.steps, T))
    tree = build_study_tree(cfg, series)
    first_op = cfg.tree.bidding_stage + 1
    if first_op >= tree.stage_count:
        raise SchemaError(f"bidding_stage {cfg.tree.bidding_stage} leaves no operational stage",
                          path, None)
    op_keys = [n.data_key for n in tree.nodes if n.stage >= first_op]
    for key in op_keys:
        if key not in series:
            raise MissingSeries(key)
    carriers = [c.name for c in cfg.carriers]
    demand = DemandProfile(mu_surplus=cfg.demand.mu_surplus)
    for key in op_keys:
        cols = series.get(key)
        demand.demand[key] = {e: cols[f"demand_{e}"] for e in carriers if f"demand_{e}" in cols}
        demand.dflex[key] = {e: cols[f"dflex_{e}"] for e in carriers if f"dflex_{e}" in cols}
    has_grid = any(t.grid for t in cfg.technologies)
    if has_grid:
        for name in MARKET_COLUMNS:
            if name not in series.columns:
                raise MissingSeries(f"column {name}")
    for t in cfg.technologies:
        if t.availability is not None and t.availability not in series.columns:
            raise MissingSeries(f"column {t.availability}")
    m = cfg.market
    market = MarketData(
        series={k: series.get(k) for k in op_keys}, reserve=m.reserve, x_max=m.x_max,
        id_liquidity_frac=m.id_liquidity, rm_volume_frac=m.rm_volume,
        hist_id_volume=np.asarray(m.hist_id_volume, dtype=float) if isinstance(m.hist_id_volume, list)
        else float(m.hist_id_volume),
        hist_rm_volume=np.asarray(m.hist_rm_volume, dtype=float) if isinstance(m.hist_rm_volume, list)
        else float(m.hist_rm_volume),
        grid_tariff=m.grid_tariff, co2_price=cfg.cost_scenarios[cfg.scenario].co2_price,
        omit_disabled_reserve=m.omit_disabled_reserve)
    for name, v in (("market.hist_id_volume", m.hist_id_volume), ("market.hist_rm_volume", m.hist_rm_volume)):
        if isinstance(v, list) and len(v) != T:
            raise SchemaError(f"{name} needs {T} values, got {len(v)}", path)
    p = cfg.policy
    policy = InvestmentPolicy(budget=_opt(p.budget), discount_rate=p.discount_rate, export_cap=_opt(p.export_cap),
                              emission_cap=_opt(p.emission_cap), emission_accounting=p.emission_accounting,
                              initial_output=p.initial_output)
    system = build_system(cfg, demand)
    return Study(cfg, Path(path) if path else None, series, tree, system, market, demand, policy, config_hash(cfg))


def load_study(path, scenario=None, reserve=None, seed=None) -> Study:
    """Load, override, and cross-reference a study; raises on any invalid input."""
    path = Path(path)
    cfg = apply_overrides(load_config(path), scenario, reserve, seed)
    series_path = (path.parent / cfg.series).resolve()
    if not series_path.exists():
        raise SchemaError(f"series file {cfg.series!r} not found", str(path))
    return study_from_config(cfg, load_series(series_path), path)


def load_study_text(text: str, series: SeriesTable, **overrides) -> Study:
    return study_from_config(apply_overrides(parse_config(text), **overrides), series)
