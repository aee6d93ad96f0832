"""Synthetic studies standing in for proprietary site and market data.

None of the numbers here are measured values; they only give the model
realistic magnitudes (EUR, MW, MWh, tCO2) and daily/seasonal shapes.
"""
from __future__ import annotations

import copy

import numpy as np

from .io.series import SeriesTable

HOURS = 24

SEASONS = {
    #          price  EL   heat HT  heat LT  PV peak
    "winter": (85.0, 14.0, 10.0, 8.0, 0.20),
    "spring": (55.0, 12.0, 7.0, 5.0, 0.60),
    "summer": (35.0, 11.0, 4.0, 3.0, 0.85),
    "autumn": (65.0, 12.5, 8.0, 6.0, 0.40),
}

CASE_COSTS = {
    "2025": {"co2_price": 90.0,
             "capex": {"pv": 650e3, "gas_boiler": 60e3, "e_boiler": 70e3, "heat_pump": 900e3,
                       "li_ion": 350e3, "flywheel": 1.2e6, "tes": 25e3}},
    "2050": {"co2_price": 300.0,
             "capex": {"pv": 350e3, "gas_boiler": 60e3, "e_boiler": 55e3, "heat_pump": 550e3,
                       "li_ion": 130e3, "flywheel": 0.9e6, "tes": 18e3}},
}


def _shape(T, peak_hours=(8, 18), valley=3):
    h = np.arange(T) * (24.0 / T)
    s = 1.0 + sum(0.25 * np.exp(-((h - p) ** 2) / 8.0) for p in peak_hours)
    return s - 0.2 * np.exp(-((h - valley) ** 2) / 6.0)


def _solar(T, peak):
    h = np.arange(T) * (24.0 / T)
    return np.clip(peak * np.sin(np.pi * (h - 6.0) / 12.0), 0.0, None)


def day_profile(rng, season, T=HOURS, level=1.0):
    """Demand/price profile of one synthetic day (before operational realizations)."""
    price, el, ht, lt, pv = SEASONS[season]
    shape = _shape(T)
    p_da = price * level * shape * (1 + 0.05 * rng.standard_normal(T))
    work = 1.0 + 0.15 * ((np.arange(T) >= 7) & (np.arange(T) <= 19))
    return {
        "p_da": np.maximum(p_da, 1.0),
        "demand_EL": el * level * work * (1 + 0.03 * rng.standard_normal(T)),
        "demand_HEAT_HT": ht * level * work,
        "demand_HEAT_LT": lt * level * (1 + 0.05 * np.cos(np.arange(T) * 2 * np.pi / T)),
        "avail_pv": np.clip(_solar(T, pv) * (1 + 0.1 * rng.standard_normal(T)), 0.0, 1.0),
    }


def realization(rng, day, branch, T=HOURS, activation_prob=0.2):
    """Operational realization of a day: price noise, ID acceptance, reserve activation."""
    p_da = np.maximum(day["p_da"] * (1 + 0.08 * rng.standard_normal(T)), 1.0)
    act = rng.random(T) < activation_prob
    up = act if branch % 2 == 1 else np.zeros(T, bool)
    dwn = act if branch % 2 == 0 else np.zeros(T, bool)
    out = dict(day)
    out.update({
        "p_da": p_da,
        "p_id_buy": p_da * 1.1 + 2.0,
        "p_id_sell": p_da * 0.9,
        "p_cm_up": 12.0 + 3.0 * rng.random(T),
        "p_cm_dwn": 8.0 + 3.0 * rng.random(T),
        "p_act_up": p_da + 25.0,
        "p_act_dwn": np.maximum(p_da - 25.0, 5.0),
        "sigma_id_buy": rng.uniform(0.5, 1.0, T),
        "sigma_id_sell": rng.uniform(0.5, 1.0, T),
        "sigma_up": up.astype(float),
        "sigma_dwn": dwn.astype(float),
        "dflex_HEAT_LT": 0.6 * day["demand_HEAT_LT"],
    })
    return out


def _rounded(rows, decimals=6):
    return {k: {c: np.round(np.asarray(v, dtype=float), decimals) + 0.0 for c, v in cols.items()}
            for k, cols in rows.items()}


def case_study_technologies():
    return [
        {"name": "grid", "grid": True, "capacity": 40.0,
         "modes": [{"name": "import", "out": {"EL": 1.0}}, {"name": "export", "in": {"EL": 1.0}}]},
        {"name": "pv", "candidate": True, "max_new": 20.0, "lifetime": 30, "availability": "avail_pv",
         "modes": [{"name": "gen", "out": {"EL": 1.0}}]},
        {"name": "gas_supply", "capacity": 100.0, "opex": 35.0,
         "modes": [{"name": "supply", "out": {"GAS": 1.0}, "emission": 0.2}]},
        {"name": "gas_boiler", "candidate": True, "lifetime": 25, "ramp": 0.5, "opex": 2.0,
         "modes": [{"name": "heat", "in": {"GAS": 1.0}, "out": {"HEAT_HT": 0.92}}]},
        {"name": "e_boiler", "candidate": True, "lifetime": 20, "opex": 1.0,
         "modes": [{"name": "heat", "in": {"EL": 1.0}, "out": {"HEAT_HT": 0.99}}]},
        {"name": "heat_pump", "candidate": True, "heat_pump": True, "lifetime": 20, "ramp": 0.5, "opex": 2.0,
         "modes": [{"name": "lt", "in": {"EL": 1.0}, "out": {"HEAT_LT": 3.0}},
                   {"name": "ht", "in": {"EL": 1.0}, "out": {"HEAT_HT": 2.0}}]},
        {"name": "hx", "capacity": 50.0,
         "modes": [{"name": "cascade", "in": {"HEAT_HT": 1.0}, "out": {"HEAT_LT": 1.0}}]},
    ]


def case_study_storage():
    return [
        {"name": "li_ion", "carrier": "EL", "charge_efficiency": 0.95, "discharge_efficiency": 0.95,
         "self_discharge": 0.0005, "power_ratio": 0.5, "candidate": True, "lifetime": 15,
         "soc_init": 0.5, "degradation_cost": 4.0},
        {"name": "flywheel", "carrier": "EL", "charge_efficiency": 0.92, "discharge_efficiency": 0.92,
         "self_discharge": 0.02, "power_ratio": 4.0, "candidate": True, "lifetime": 20,
         "soc_init": 0.5, "degradation_cost": 0.5},
        {"name": "tes", "carrier": "HEAT_HT", "charge_efficiency": 0.98, "discharge_efficiency": 0.95,
         "self_discharge": 0.005, "power_ratio": 0.25, "candidate": True, "lifetime": 25,
         "soc_init": 0.5, "degradation_cost": 0.2},
    ]


def case_study(scenario="2025", reserve=True, days_per_season=7, op_branches=2, k=4, seed=7):
    """Four representative days (k-medoids) x ``op_branches`` realizations of a multi-carrier site."""
    rng = np.random.default_rng(seed)
    rows = {}
    candidates = []
    for season in SEASONS:
        for d in range(days_per_season):
            key = f"{season}{d + 1:02d}"
            day = day_profile(rng, season, level=1.0 + 0.1 * rng.standard_normal())
            candidates.append(key)
            base = realization(rng, day, 1, activation_prob=0.0)
            base["sigma_up"][:] = 0.0
            rows[key] = base
            for b in range(1, op_branches + 1):
                rows[f"{key}/{b}"] = realization(rng, day, b)
    cfg = {
        "name": f"case_study_{scenario}",
        "series": "series.csv",
        "scenario": scenario,
        "tree": {"steps_per_stage": HOURS, "bidding_stage": 1,
                 "cluster": {"candidates": candidates, "k": k, "features": ["p_da", "demand_EL"], "seed": seed},
                 "stages": [{"branches": op_branches}]},
        "carriers": [{"name": "EL", "electricity": True}, {"name": "HEAT_HT", "heat": True},
                     {"name": "HEAT_LT", "heat": True}, {"name": "GAS"}],
        "technologies": case_study_technologies(),
        "storage": case_study_storage(),
        "demand": {"mu_surplus": 0.5},
        "load_shift": {"up": 0.10, "down": 0.30, "window": [8, 17], "carriers": ["EL", "HEAT_LT"],
                       "inconvenience_cost": 8.0},
        "market": {"reserve": reserve, "x_max": 5.0, "id_liquidity": 0.1, "rm_volume": 0.05,
                   "hist_id_volume": 60.0, "hist_rm_volume": 200.0, "grid_tariff": 120.0},
        "policy": {"budget": 5.0e7, "discount_rate": 0.09, "export_cap": 5.0},
        "cost_scenarios": copy.deepcopy(CASE_COSTS),
    }
    return cfg, SeriesTable.from_rows(_rounded(rows))


def toy_study(reserve=True, seed=3):
    """Root (investment + bids) with two operational realizations of one winter day."""
    rng = np.random.default_rng(seed)
    day = day_profile(rng, "winter")
    rows = {"1": realization(rng, day, 1), "2": realization(rng, day, 2)}
    for r in rows.values():
        r["demand_HEAT"] = r["demand_HEAT_HT"] + r["demand_HEAT_LT"]
    cols = ["p_da", "p_id_buy", "p_id_sell", "p_cm_up", "p_cm_dwn", "p_act_up", "p_act_dwn",
            "sigma_id_buy", "sigma_id_sell", "sigma_up", "sigma_dwn", "demand_EL", "demand_HEAT"]
    cfg = {
        "name": "toy",
        "series": "series.csv",
        "scenario": "2025",
        "tree": {"steps_per_stage": HOURS, "bidding_stage": 0, "stages": [{"branches": 2}]},
        "carriers": [{"name": "EL", "electricity": True}, {"name": "HEAT", "heat": True}],
        "technologies": [
            {"name": "grid", "grid": True, "capacity": 40.0,
             "modes": [{"name": "import", "out": {"EL": 1.0}}, {"name": "export", "in": {"EL": 1.0}}]},
            {"name": "gas_boiler", "capacity": 25.0, "opex": 40.0, "ramp": 0.5,
             "modes": [{"name": "heat", "out": {"HEAT": 0.92}, "emission": 0.2}]},
            {"name": "e_boiler", "candidate": True, "lifetime": 20, "opex": 1.0,
             "modes": [{"name": "heat", "in": {"EL": 1.0}, "out": {"HEAT": 0.99}}]},
        ],
        "storage": [{"name": "battery", "carrier": "EL", "charge_efficiency": 0.95, "discharge_efficiency": 0.95,
                     "self_discharge": 0.001, "power_ratio": 0.5, "candidate": True, "lifetime": 15,
                     "soc_init": 0.5, "degradation_cost": 3.0}],
        "load_shift": {"up": 0.10, "down": 0.30, "window": [8, 17], "carriers": ["EL"], "inconvenience_cost": 5.0},
        "market": {"reserve": reserve, "x_max": 5.0, "id_liquidity": 0.1, "rm_volume": 0.05,
                   "hist_id_volume": 60.0, "hist_rm_volume": 200.0, "grid_tariff": 120.0},
        "policy": {"budget": 2.0e7, "discount_rate": 0.09, "export_cap": 5.0},
        "cost_scenarios": {"2025": {"co2_price": 90.0, "capex": {"e_boiler": 70e3, "battery": 350e3}},
                           "2050": {"co2_price": 300.0, "capex": {"e_boiler": 55e3, "battery": 130e3}}},
    }
    return cfg, SeriesTable.from_rows(_rounded(rows), cols)


def desk_study(seed, reserve=True):
    """Randomized small study: 2-3 stages, 24 hourly steps, at most 8 leaves."""
    rng = np.random.default_rng(seed)
    shape = int(rng.integers(3))
    if shape == 0:
        tree = {"bidding_stage": 0, "stages": [{"branches": int(rng.integers(2, 9))}]}
    elif shape == 1:
        b1 = int(rng.integers(2, 5))
        tree = {"bidding_stage": 1, "stages": [{"branches": b1}, {"branches": int(rng.integers(1, 8 // b1 + 1))}]}
    else:
        # two chained operational days; keep at most 8 operational nodes
        b1 = int(rng.integers(1, 3))
        tree = {"bidding_stage": 0, "stages": [{"branches": b1}, {"branches": int(rng.integers(2, 8 // b1))}]}
    tree["steps_per_stage"] = HOURS
    for st in tree["stages"]:
        w = rng.uniform(0.5, 1.5, st["branches"])
        st["probabilities"] = [float(v) for v in w / w.sum()]
        # renormalize exactly in floating point
        st["probabilities"][-1] = 1.0 - sum(st["probabilities"][:-1])
    cfg = {
        "name": f"desk_{seed}",
        "series": "series.csv",
        "scenario": "base",
        "tree": tree,
        "carriers": [{"name": "EL", "electricity": True}, {"name": "HEAT", "heat": True}],
        "technologies": [
            {"name": "grid", "grid": True, "capacity": 40.0,
             "modes": [{"name": "import", "out": {"EL": 1.0}}, {"name": "export", "in": {"EL": 1.0}}]},
            {"name": "gas_boiler", "capacity": 25.0, "opex": float(rng.uniform(30, 50)),
             "modes": [{"name": "heat", "out": {"HEAT": 0.92}, "emission": 0.2}]},
            {"name": "e_boiler", "candidate": True, "lifetime": 20, "opex": 1.0,
             "modes": [{"name": "heat", "in": {"EL": 1.0}, "out": {"HEAT": 0.99}}]},
        ],
        "storage": [{"name": "battery", "carrier": "EL", "charge_efficiency": 0.95, "discharge_efficiency": 0.95,
                     "power_ratio": 0.5, "candidate": True, "lifetime": 15, "soc_init": 0.5,
                     "degradation_cost": 3.0}],
        "load_shift": {"carriers": ["EL"], "inconvenience_cost": float(rng.uniform(2, 10))},
        "market": {"reserve": reserve, "x_max": float(rng.uniform(2, 8)), "id_liquidity": 0.1, "rm_volume": 0.05,
                   "hist_id_volume": 60.0, "hist_rm_volume": 200.0, "grid_tariff": float(rng.uniform(0, 200))},
        "policy": {"export_cap": 5.0},
        "cost_scenarios": {"base": {"co2_price": float(rng.uniform(50, 200)),
                                    "capex": {"e_boiler": float(rng.uniform(40e3, 100e3)),
                                              "battery": float(rng.uniform(100e3, 400e3))}}},
    }
    season = str(rng.choice(list(SEASONS)))
    day = day_profile(rng, season)
    rows = {}
    # data keys follow the tree's default labels: "1", "1/2", ...
    keys = _tree_keys([s["branches"] for s in tree["stages"]])
    for i, key in enumerate(keys):
        r = realization(rng, day, i + 1)
        r["demand_HEAT"] = r["demand_HEAT_HT"] + r["demand_HEAT_LT"]
        rows[key] = r
    cols = ["p_da", "p_id_buy", "p_id_sell", "p_cm_up", "p_cm_dwn", "p_act_up", "p_act_dwn",
            "sigma_id_buy", "sigma_id_sell", "sigma_up", "sigma_dwn", "demand_EL", "demand_HEAT"]
    return cfg, SeriesTable.from_rows(_rounded(rows), cols)


def _tree_keys(branches):
    keys, frontier = [], [None]
    for b in branches:
        nxt = []
        for parent in frontier:
            for j in range(1, b + 1):
                nxt.append(str(j) if parent is None else f"{parent}/{j}")
        keys += nxt
        frontier = nxt
    return keys


FIXTURES = {"toy": toy_study, "case_study": case_study}


def write_study(cfg, series, directory):
    """Write ``study.yaml`` and ``series.csv`` into ``directory``."""
    import yaml
    from pathlib import Path

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "study.yaml").write_text(yaml.safe_dump(cfg, sort_keys=False))
    (directory / cfg["series"]).write_text(series.to_csv())
    return directory / "study.yaml"


if __name__ == "__main__":
    import sys
    from pathlib import Path

    root = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent / "data"
    for name, make in FIXTURES.items():
        print(write_study(*make(), root / name))
