import os
import sys

import numpy as np
import pandas as pd
import pytest

# Add repo root to sys.path so imports work
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from src.cache_analysis.components.experiments import ExperimentRunner
from src.cache_analysis.config.configuration import ConfigurationManager
from src.cache_analysis.constant import SCENARIO_DIR, SWEEP_COLUMNS
from src.cache_analysis.entity.config_entity import Scenario, SimulatorConfig, SolverConfig
from src.cache_analysis.exception import ScenarioValidationError, SimulationBoundError

ZIPF = {"law": {"kind": "zipf", "alpha": 0.8, "population": 1000}}


def make_scenario(**changes) -> Scenario:
    values = dict(
        name="unit",
        popularity=ZIPF,
        capacities=(10.0, 100.0),
        capacity_unit="items",
        bytes_per_chunk=1024.0,
        policies=("LFU_STATIC", "LRU_CHE", "RANDOM_FP"),
        ranks=(1, 10),
        requests=600_000,
        warmup=100_000,
        trials=2000,
        seed=42,
        tolerance=0.03,
    )
    values.update(changes)
    return Scenario(**values)


@pytest.fixture
def runner():
    return ExperimentRunner(SolverConfig(), SimulatorConfig(), n_jobs=1)


def overall(table: pd.DataFrame, policy: str) -> pd.Series:
    rows = table[(table["policy"] == policy) & table["rank"].isna()]
    return rows.set_index("capacity")["hit_rate"]


def test_analytic_sweep_layout_and_ordering(runner):
    table = runner.sweep(make_scenario(capacities=(10.0, 100.0, 2000.0)))
    assert list(table.columns[:len(SWEEP_COLUMNS)]) == SWEEP_COLUMNS
    # three policies, overall plus two ranks, three capacities
    assert len(table) == 27
    lfu, lru, rnd = (overall(table, p) for p in ("LFU_STATIC", "LRU_CHE", "RANDOM_FP"))
    assert (lfu >= lru).all() and (lru >= rnd).all()
    assert lru.loc[10.0] < lru.loc[100.0]
    saturated = table[table["capacity"] == 2000.0]
    assert saturated["saturated"].all()
    assert (saturated["hit_rate"] == 1.0).all()


def test_sweep_with_simulation_and_overlays(runner):
    scenario = make_scenario(
        policies=("LRU_CHE", "SIM_LRU", "SIM_FIFO"),
        erfc_refinement=True,
        asymptotic_overlay=True,
    )
    table = runner.sweep(scenario)
    policies = set(table["policy"])
    assert {"LRU_CHE", "SIM_LRU", "SIM_FIFO", "LRU_ERFC", "LRU_ASYMPTOTIC"} <= policies
    simulated = table[table["policy"] == "SIM_LRU"]
    assert simulated["ci_halfwidth"].notna().all()
    analytic = overall(table, "LRU_CHE")
    assert overall(table, "SIM_LRU").values == pytest.approx(analytic.values, abs=0.02)
    at_100 = table[(table["capacity"] == 100.0) & table["rank"].notna()]
    erfc = at_100[at_100["policy"] == "LRU_ERFC"]["hit_rate"].values
    che = at_100[at_100["policy"] == "LRU_CHE"]["hit_rate"].values
    assert erfc == pytest.approx(che, abs=0.02)


def test_sweep_is_reproducible_across_worker_counts():
    scenario = make_scenario(policies=("SIM_LRU", "SIM_RANDOM"), requests=200_000, warmup=20_000)
    serial = ExperimentRunner(SolverConfig(), SimulatorConfig(), n_jobs=1).sweep(scenario)
    parallel = ExperimentRunner(SolverConfig(), SimulatorConfig(), n_jobs=2).sweep(scenario)
    pd.testing.assert_frame_equal(serial, parallel)


def test_capacities_in_bytes_are_converted_to_chunks(runner):
    in_items = runner.sweep(make_scenario(policies=("LRU_CHE",), capacities=(100.0,)))
    in_bytes = runner.sweep(make_scenario(policies=("LRU_CHE",), capacities=(102_400.0,),
                                          capacity_unit="bytes"))
    assert in_bytes["hit_rate"].values == pytest.approx(in_items["hit_rate"].values)
    assert (in_bytes["unit"] == "bytes").all()


def test_simulation_refuses_huge_catalogues(runner):
    scenario = make_scenario(popularity={"law": {"kind": "zipf", "alpha": 0.8, "population": 10 ** 8}},
                             policies=("SIM_LRU",))
    with pytest.raises(SimulationBoundError):
        runner.sweep(scenario)


def test_solve_table(runner):
    table = runner.solve(make_scenario(capacities=(10.0, 100.0, 1000.0)))
    assert list(table["saturated"]) == [False, False, True]
    solved = table[~table["saturated"]]
    assert (solved["t_C"].diff().dropna() > 0).all()
    assert (solved["tau_C"] > 0).all()


def test_validation_report(runner):
    scenario = make_scenario(capacities=(100.0,), requests=1_500_000, warmup=150_000)
    report = runner.validate(scenario)
    assert report.passed
    assert set(report.table["simulated_policy"]) == {"SIM_LRU", "SIM_RANDOM", "SIM_FIFO", "SIM_LFU_STATIC"}
    assert set(report.per_policy) == set(report.table["simulated_policy"])
    assert report.max_deviation == pytest.approx(report.table["deviation"].max())

    strict = runner.validate(make_scenario(capacities=(100.0,), policies=("LRU_CHE",), tolerance=1e-9))
    assert not strict.passed


def test_validation_needs_an_analytic_policy(runner):
    with pytest.raises(ScenarioValidationError):
        runner.validate(make_scenario(policies=("SIM_LRU",)))


def test_simulate_and_tandem(runner):
    scenario = make_scenario(policies=("SIM_LRU",), capacities=(50.0,), tandem_capacity=50.0)
    frame = runner.simulate(scenario)
    assert set(frame["policy"]) == {"SIM_LRU"}
    assert (frame["requests"] >= 100).all()
    tandem = runner.tandem(scenario)
    assert len(tandem) == 1000
    assert tandem["analytic_miss_frequency"].sum() == pytest.approx(
        1.0 - runner.che.capacity_profile(runner.build_law(scenario), 50).overall)
    assert runner.tandem(make_scenario()) is None


def test_sample_summary(runner):
    histogram, samples, summary = runner.sample(make_scenario(capacities=(100.0,)))
    values = summary.set_index("quantity")["value"]
    assert len(samples) == 2000
    assert values["ks_distance"] <= values["kolmogorov_limit"]
    assert values["x_mean_theory"] == pytest.approx(100.0, rel=1e-8)
    assert "tc_asymptotic" in values
    assert histogram["frequency"].sum() == pytest.approx(1.0)
    assert histogram["gaussian"].between(0, 1).all()


def test_analysis_quantities(runner):
    frame = runner.analyze(make_scenario(capacities=(100.0, 5000.0)))
    quantities = set(frame["quantity"])
    assert {"t_C", "berry_esseen_bound", "erfc_hit_rate", "step_function_gap", "tc_asymptotic"} <= quantities
    # the saturated capacity is skipped
    assert set(frame["capacity"]) == {100.0}

    geometric = make_scenario(popularity={"law": {"kind": "geometric", "rho": 0.9, "population": 100}},
                              capacities=(16.0,), ranks=(1, 16))
    frame = runner.analyze(geometric)
    assert {"mean_estimate", "variance_plateau"} <= set(frame["quantity"])


def test_filter_series(runner):
    frame = runner.filter(make_scenario(capacities=(100.0,), tandem_capacity=100.0))
    assert list(frame["series"].unique()) == ["requests", "misses of level 1", "misses of level 2"]
    requests = frame[frame["series"] == "requests"].set_index("rank")["weight"]
    level1 = frame[frame["series"] == "misses of level 1"].set_index("rank")["weight"]
    assert (level1 <= requests + 1e-15).all()
    # the filtered law is no longer decreasing
    assert np.argmax(level1.values) > 0


def test_internet_mix_sweep(runner, tmp_path):
    scenario = ConfigurationManager(out_root=tmp_path).load_scenario(SCENARIO_DIR / "internet-mix.yaml")
    table = runner.sweep(scenario)
    lfu, lru, rnd = (overall(table, p).sort_index() for p in ("LFU_STATIC", "LRU_CHE", "RANDOM_FP"))
    assert len(lfu) == len(lru) == len(rnd) == 25
    for rates in (lfu, lru, rnd):
        assert np.all(np.diff(rates.to_numpy()) >= 0)
        assert rates.between(0.0, 1.0).all()
    assert (lfu >= lru - 1e-9).all() and (lru >= rnd - 1e-9).all()
    assert not table["saturated"].any()


def test_mixture_laws_use_the_configured_tolerance():
    runner = ExperimentRunner(SolverConfig(epsilon=1e-3), SimulatorConfig(), n_jobs=1)
    mix = runner.build_law(make_scenario(popularity={"traffic_mix": [
        {"name": "web", "share": 0.5, "population": 10 ** 6, "chunk_count": 10, "zipf_alpha": 0.8},
        {"name": "vod", "share": 0.5, "population": 100, "chunk_count": 100, "zipf_alpha": 1.2},
    ]}))
    assert mix.epsilon == 1e-3
