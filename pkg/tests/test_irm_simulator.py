import math
import os
import sys

import numpy as np
import pytest
from scipy import stats

# Add repo root to sys.path so imports work
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from src.cache_analysis.components.gaussian_asymptotics import GaussianAnalysis, dkw_margin
from src.cache_analysis.components.lru_che import CheApproximation
from src.cache_analysis.components.irm_simulator import AliasTable, IRMSimulator
from src.cache_analysis.components.popularity import (
    GeometricLaw,
    UniformLaw,
    ZipfLaw,
    sorted_top_mass,
    total_mass,
    weight,
)
from src.cache_analysis.components.random_replacement import RandomReplacementApproximation
from src.cache_analysis.entity.config_entity import SimConfig, SimulatorConfig, SolverConfig
from src.cache_analysis.exception import DomainError, SimulationBoundError

REQUESTS = 2_000_000
WARMUP = 200_000


@pytest.fixture
def simulator():
    return IRMSimulator(SimulatorConfig())


@pytest.fixture
def zipf():
    return ZipfLaw(0.8, 1000)


def test_alias_table_frequencies():
    table = AliasTable.from_weights(np.array([1.0, 2.0, 3.0, 4.0]))
    draws = table.draw(np.random.default_rng(1), 1_000_000)
    frequencies = np.bincount(draws, minlength=4) / draws.size
    assert frequencies == pytest.approx([0.1, 0.2, 0.3, 0.4], abs=3e-3)
    with pytest.raises(DomainError):
        AliasTable.from_weights(np.zeros(3))


@pytest.mark.parametrize("policy", ["LRU", "RANDOM", "FIFO", "LFU_STATIC"])
def test_uniform_law_hits_capacity_fraction(simulator, policy):
    estimate = simulator.run_cache_sim(SimConfig(UniformLaw(100), policy, 50, REQUESTS, WARMUP, seed=3))
    assert estimate.overall == pytest.approx(0.5, abs=5e-3)
    assert estimate.measured_requests == REQUESTS - WARMUP


def test_lru_matches_che_approximation(simulator, zipf):
    che = CheApproximation(SolverConfig())
    analytic = che.capacity_profile(zipf, 100, at=[1, 10])
    estimate = simulator.run_cache_sim(SimConfig(zipf, "LRU", 100, REQUESTS, WARMUP, seed=11))
    assert estimate.overall == pytest.approx(analytic.overall, abs=1e-2)
    assert estimate.at([1, 10]) == pytest.approx(analytic.hit_rates, abs=2e-2)


@pytest.mark.parametrize("policy", ["RANDOM", "FIFO"])
def test_random_and_fifo_match_random_approximation(simulator, zipf, policy):
    analytic = RandomReplacementApproximation(SolverConfig()).capacity_profile(zipf, 100)
    estimate = simulator.run_cache_sim(SimConfig(zipf, policy, 100, REQUESTS, WARMUP, seed=12))
    assert estimate.overall == pytest.approx(analytic.overall, abs=1e-2)


def test_static_lfu_pins_top_items(simulator, zipf):
    estimate = simulator.run_cache_sim(SimConfig(zipf, "LFU_STATIC", 100, REQUESTS, WARMUP, seed=13))
    expected = sorted_top_mass(zipf, 100) / total_mass(zipf)
    assert estimate.overall == pytest.approx(expected, abs=5e-3)
    assert estimate.at([1, 100]) == pytest.approx([1.0, 1.0])
    assert estimate.at([101]) == pytest.approx([0.0])


def test_same_seed_same_estimate(simulator, zipf):
    first = simulator.run_cache_sim(SimConfig(zipf, "RANDOM", 50, 300_000, 50_000, seed=5))
    second = simulator.run_cache_sim(SimConfig(zipf, "RANDOM", 50, 300_000, 50_000, seed=5))
    other = simulator.run_cache_sim(SimConfig(zipf, "RANDOM", 50, 300_000, 50_000, seed=6))
    np.testing.assert_array_equal(first.hits, second.hits)
    np.testing.assert_array_equal(first.requests, second.requests)
    assert not np.array_equal(first.requests, other.requests)


def test_confidence_intervals_and_reporting(simulator, zipf):
    estimate = simulator.run_cache_sim(SimConfig(zipf, "LRU", 100, 500_000, 100_000, seed=2))
    frame = estimate.to_frame()
    assert list(frame.columns) == ["rank", "requests", "hits", "hit_rate", "ci_halfwidth"]
    assert (frame["requests"] >= 100).all()
    assert (frame["ci_halfwidth"] > 0).all() and (frame["ci_halfwidth"] < 0.5).all()
    # more requests, narrower interval
    assert frame["ci_halfwidth"].iloc[0] < frame["ci_halfwidth"].iloc[-1]


def test_invalid_runs(simulator, zipf):
    with pytest.raises(DomainError):
        simulator.run_cache_sim(SimConfig(zipf, "LFU", 10, 1000, 0))
    with pytest.raises(DomainError):
        simulator.run_cache_sim(SimConfig(zipf, "LRU", 1000, 1000, 0))
    with pytest.raises(DomainError):
        simulator.run_cache_sim(SimConfig(zipf, "LRU", 10.5, 1000, 0))
    with pytest.raises(DomainError):
        simulator.run_cache_sim(SimConfig(zipf, "LRU", 10, 1000, 1000))
    small = IRMSimulator(SimulatorConfig(max_population=100))
    with pytest.raises(SimulationBoundError):
        small.run_cache_sim(SimConfig(zipf, "LRU", 10, 1000, 0))


def test_default_warmup(simulator):
    assert simulator.default_warmup(10) == 1_000_000
    assert simulator.default_warmup(500_000) == 5_000_000


def test_lru_tandem_matches_filtered_che(simulator, zipf):
    che = CheApproximation(SolverConfig())
    first, second = che.hierarchy_profiles(zipf, [100, 100])
    result = simulator.run_tandem_sim(zipf, 100, 100, "LRU", REQUESTS, seed=21, warmup=WARMUP)
    assert result.level1.overall == pytest.approx(first.overall, abs=1e-2)
    assert result.level2.overall == pytest.approx(second.overall, abs=3e-2)
    assert result.level2.measured_requests < result.level1.measured_requests
    # top item rarely overflows the first cache
    assert weight(result.miss_law, 1) < weight(result.miss_law, 200)
    assert result.miss_frequency.sum() == pytest.approx(1.0 - result.level1.overall)


def test_static_lfu_tandem_pins_next_items(simulator, zipf):
    result = simulator.run_tandem_sim(zipf, 10, 10, "LFU_STATIC", 200_000, seed=4, warmup=0)
    assert result.level1.at([1, 10, 11]) == pytest.approx([1.0, 1.0, 0.0])
    level2 = result.level2
    assert level2.hits[10:20].sum() == level2.requests[10:20].sum()
    assert level2.hits[20:].sum() == 0


def test_sampled_occupancy_is_nearly_gaussian(simulator, zipf):
    analysis = GaussianAnalysis(SolverConfig())
    t_C = analysis.che.solve_t_C(zipf, 100).t_C
    trials = 5000
    samples = simulator.sample_X(zipf, t_C, trials, seed=8)
    assert samples.samples.size == trials
    assert samples.mean_theory == pytest.approx(100, rel=1e-8)
    assert samples.variance_theory == pytest.approx(analysis.che.variance_occupancy(zipf, t_C))
    assert samples.mean == pytest.approx(100, abs=1.0)
    bound = analysis.berry_esseen_bound(zipf, t_C) + dkw_margin(trials)
    assert samples.ks_distance() <= bound
    histogram = samples.histogram()
    assert histogram["frequency"].sum() == pytest.approx(1.0)


def test_uniform_order_statistic_mean(simulator):
    n, capacity = 100, 50
    distribution = simulator.sample_T_C(UniformLaw(n), capacity, 20_000, seed=9)
    expected = sum(1.0 / (n - k) for k in range(capacity))
    assert distribution.mean == pytest.approx(expected, abs=5e-3)


def test_characteristic_time_samples(simulator, zipf):
    analysis = GaussianAnalysis(SolverConfig())
    t_C = analysis.che.solve_t_C(zipf, 100).t_C
    distribution = simulator.sample_T_C(zipf, 100, 5000, seed=10)
    assert distribution.mean == pytest.approx(t_C, rel=3e-2)
    q = weight(zipf, 100)
    assert distribution.hit_rate(q) == pytest.approx(analysis.erfc_hit_rate(zipf, 100, q), abs=1e-2)
    standardized = distribution.standardized()
    assert standardized.mean() == pytest.approx(0.0, abs=1e-9)
    excluded = simulator.sample_T_C(zipf, 100, 5000, seed=10, excluded_rank=1)
    assert excluded.excluded_rank == 1
    assert excluded.mean > distribution.mean
    with pytest.raises(DomainError):
        simulator.sample_T_C(zipf, 1001, 10)


def test_characteristic_time_fluctuations_match_asymptotic_scale(simulator):
    analysis = GaussianAnalysis(SolverConfig())
    n, capacity = 10_000, 1000
    law = ZipfLaw(0.8, n)
    distribution = simulator.sample_T_C(law, capacity, 2000, seed=31)
    scale = analysis.tc_fluctuation(0.8, n, capacity / n)
    assert distribution.std / scale == pytest.approx(1.0, abs=0.1)
    assert stats.kstest(distribution.standardized(), "norm").pvalue > 0.01


def test_lru_on_geometric_law_matches_che_approximation(simulator):
    law = GeometricLaw(0.9, 100)
    ranks = [1, 5, 10, 20, 40]
    analytic = CheApproximation(SolverConfig()).capacity_profile(law, 10, at=ranks)
    estimate = simulator.run_cache_sim(SimConfig(law, "LRU", 10, REQUESTS, WARMUP, seed=32))
    assert estimate.overall == pytest.approx(analytic.overall, abs=3e-2)
    assert estimate.at(ranks) == pytest.approx(analytic.hit_rates, abs=6e-2)


def test_fifo_and_random_agree(simulator, zipf):
    fifo = simulator.run_cache_sim(SimConfig(zipf, "FIFO", 100, REQUESTS, WARMUP, seed=33))
    rnd = simulator.run_cache_sim(SimConfig(zipf, "RANDOM", 100, REQUESTS, WARMUP, seed=34))
    joint = math.hypot(fifo.overall_halfwidth, rnd.overall_halfwidth)
    assert abs(fifo.overall - rnd.overall) <= 4 * joint
    ranks = [1, 10, 100]
    per_rank = np.hypot(fifo.ci_halfwidth[np.array(ranks) - 1], rnd.ci_halfwidth[np.array(ranks) - 1])
    assert np.all(np.abs(fifo.at(ranks) - rnd.at(ranks)) <= 4 * per_rank)


def test_tandem_miss_frequency_follows_first_level_hit_rates(simulator):
    law = ZipfLaw(0.8, 2000)
    che = CheApproximation(SolverConfig())
    ranks = [1, 10, 100, 1000]
    first = che.capacity_profile(law, 100, at=ranks)
    result = simulator.run_tandem_sim(law, 100, 100, "LRU", REQUESTS, seed=35, warmup=WARMUP)
    q = law.weights(np.array(ranks)) / total_mass(law)
    expected = q * (1.0 - first.hit_rates)
    observed = result.miss_frequency[np.array(ranks) - 1]
    # binomial noise on the miss counts plus the approximation error of h
    measured = result.level1.measured_requests
    slack = 4 * np.sqrt(expected / measured) + 0.1 * expected + 2.0 / measured
    assert np.all(np.abs(observed - expected) <= slack)
