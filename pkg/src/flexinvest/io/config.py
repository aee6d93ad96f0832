"""Study configuration schema (YAML) and its validation."""
from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError as PydanticValidationError, model_validator

from ..errors import RangeError, SchemaError

_RANGE_ERRORS = {"greater_than", "greater_than_equal", "less_than", "less_than_equal"}


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class CarrierConfig(_Strict):
    name: str
    electricity: bool = False
    heat: bool = False


class ModeConfig(_Strict):
    name: str
    out: dict[str, float] = Field(default_factory=dict)
    in_: dict[str, float] = Field(default_factory=dict, alias="in")
    emission: float = Field(0.0, ge=0)

    @model_validator(mode="after")
    def _nonnegative(self):
        for side, effs in (("out", self.out), ("in", self.in_)):
            for e, v in effs.items():
                if v < 0:
                    raise ValueError(f"{side} efficiency for {e} must be >= 0")
        return self


class TechnologyConfig(_Strict):
    name: str
    modes: list[ModeConfig] = Field(min_length=1)
    capacity: float = Field(0.0, ge=0)
    lifetime: float = Field(20.0, ge=1)
    candidate: bool = False
    max_new: Optional[float] = Field(None, ge=0)
    ramp: float = Field(1.0, gt=0, le=1)
    opex: float = Field(0.0, ge=0)
    availability: Optional[str] = None
    grid: bool = False
    heat_pump: bool = False


class StorageConfig(_Strict):
    name: str
    carrier: str
    charge_efficiency: float = Field(1.0, gt=0, le=1)
    discharge_efficiency: float = Field(1.0, gt=0, le=1)
    self_discharge: float = Field(0.0, ge=0, lt=1)
    power: float = Field(0.0, ge=0)
    power_ratio: float = Field(1.0, gt=0)
    energy: float = Field(0.0, ge=0)
    lifetime: float = Field(15.0, ge=1)
    candidate: bool = False
    max_new: Optional[float] = Field(None, ge=0)
    soc_init: float = Field(0.5, ge=0, le=1)
    degradation_cost: float = Field(0.0, ge=0)


class DemandConfig(_Strict):
    mu_surplus: float = Field(0.0, ge=0, le=1)


class LoadShiftConfig(_Strict):
    up: float = Field(0.10, ge=0, le=1)
    down: float = Field(0.30, ge=0, le=1)
    window: tuple[int, int] = (8, 17)
    carriers: Optional[list[str]] = None
    balance_stages: Optional[list[int]] = None
    inconvenience_cost: float = Field(0.0, ge=0)


class MarketConfig(_Strict):
    reserve: bool = True
    x_max: float = Field(10.0, gt=0)
    id_liquidity: float = Field(1.0, ge=0, le=1)
    rm_volume: float = Field(1.0, ge=0, le=1)
    hist_id_volume: Union[float, list[float]] = 100.0
    hist_rm_volume: Union[float, list[float]] = 100.0
    grid_tariff: float = Field(0.0, ge=0)
    omit_disabled_reserve: bool = False


class PolicyConfig(_Strict):
    budget: Optional[float] = Field(None, ge=0)
    discount_rate: float = Field(0.09, gt=0)
    export_cap: Optional[float] = Field(None, ge=0)
    emission_cap: Optional[float] = Field(None, ge=0)
    emission_accounting: Literal["node", "path"] = "node"
    initial_output: float = Field(0.0, ge=0)


class StageConfig(_Strict):
    branches: int = Field(ge=1)
    probabilities: Optional[list[float]] = None
    labels: Optional[list[str]] = None


class ClusterConfig(_Strict):
    candidates: list[str] = Field(min_length=1)
    k: int = Field(ge=1)
    features: list[str] = Field(default_factory=lambda: ["p_da", "demand_EL"])
    seed: int = 0


class TreeConfig(_Strict):
    steps_per_stage: int = Field(24, ge=1)
    bidding_stage: int = Field(1, ge=0)
    cluster: Optional[ClusterConfig] = None
    stages: list[StageConfig] = Field(default_factory=list)


class CostScenarioConfig(_Strict):
    capex: dict[str, float] = Field(default_factory=dict)
    co2_price: float = Field(0.0, ge=0)


class StudyConfig(_Strict):
    name: str
    series: str
    scenario: str
    tree: TreeConfig
    carriers: list[CarrierConfig] = Field(min_length=1)
    technologies: list[TechnologyConfig] = Field(min_length=1)
    storage: list[StorageConfig] = Field(default_factory=list)
    demand: DemandConfig = Field(default_factory=DemandConfig)
    load_shift: LoadShiftConfig = Field(default_factory=LoadShiftConfig)
    market: MarketConfig = Field(default_factory=MarketConfig)
    policy: PolicyConfig = Field(default_factory=PolicyConfig)
    cost_scenarios: dict[str, CostScenarioConfig] = Field(min_length=1)

    @model_validator(mode="after")
    def _cross_refs(self):
        if self.scenario not in self.cost_scenarios:
            raise ValueError(f"scenario {self.scenario!r} not in cost_scenarios {sorted(self.cost_scenarios)}")
        if not self.tree.stages and self.tree.cluster is None:
            raise ValueError("tree needs at least one stage or a cluster section")
        assets = {t.name for t in self.technologies} | {s.name for s in self.storage}
        candidates = {t.name for t in self.technologies if t.candidate} | {s.name for s in self.storage if s.candidate}
        for label, sc in self.cost_scenarios.items():
            unknown = set(sc.capex) - assets
            if unknown:
                raise ValueError(f"cost scenario {label!r} prices unknown assets {sorted(unknown)}")
            missing = candidates - set(sc.capex)
            if missing:
                raise ValueError(f"cost scenario {label!r} lacks capex for candidates {sorted(missing)}")
        return self


def _node_line(root, loc):
    """Best-effort 1-based line of the YAML node addressed by ``loc``."""
    node = root
    line = None
    for part in loc:
        if node is None:
            break
        line = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            nxt = None
            for k, v in node.value:
                if k.value == str(part):
                    nxt = v
                    line = k.start_mark.line + 1
                    break
            node = nxt
        elif isinstance(node, yaml.SequenceNode) and isinstance(part, int) and part < len(node.value):
            node = node.value[part]
            line = node.start_mark.line + 1
        else:
            node = None
    return line


def parse_config(text: str, source="<config>") -> StudyConfig:
    try:
        raw = yaml.safe_load(text)
        root = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise SchemaError(f"invalid YAML: {exc}", source, mark.line + 1 if mark else None) from None
    if not isinstance(raw, dict):
        raise SchemaError("config must be a mapping", source, 1)
    try:
        return StudyConfig.model_validate(raw)
    except PydanticValidationError as exc:
        err = exc.errors()[0]
        loc = tuple(err["loc"])
        dotted = ".".join(str(p) for p in loc)
        if err["type"] in _RANGE_ERRORS:
            raise RangeError(dotted, err.get("input"), err["msg"]) from None
        raise SchemaError(f"{dotted}: {err['msg']}", source, _node_line(root, loc)) from None


def load_config(path) -> StudyConfig:
    path = Path(path)
    return parse_config(path.read_text(), str(path))


def dump_config(cfg: StudyConfig) -> str:
    data = cfg.model_dump(mode="json", by_alias=True)
    return yaml.safe_dump(data, sort_keys=False)


def config_hash(cfg: StudyConfig) -> str:
    canon = json.dumps(cfg.model_dump(mode="json", by_alias=True), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]
