import os
import sys

import numpy as np
import pytest

# Add repo root to sys.path so imports work
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from src.cache_analysis.components.lru_che import CheApproximation
from src.cache_analysis.components.popularity import (
    ChunkedLaw,
    ExplicitLaw,
    GeometricLaw,
    MixtureLaw,
    TrafficMix,
    UniformLaw,
    ZipfLaw,
    build_mix_law,
    filter_law,
    weight,
)
from src.cache_analysis.entity.config_entity import SolverConfig
from src.cache_analysis.exception import CapacitySaturatedError, DomainError


@pytest.fixture
def che():
    return CheApproximation(SolverConfig())


def test_uniform_characteristic_time(che):
    law = ExplicitLaw(np.full(100, 0.01))
    solution = che.solve_t_C(law, 50)
    assert solution.t_C == pytest.approx(100 * np.log(2), rel=1e-8)
    profile = che.lru_hit_profile(law, solution, at=[1, 100])
    assert list(profile.hit_rates) == pytest.approx([0.5, 0.5])
    assert profile.overall == pytest.approx(0.5)


def test_unit_weight_uniform_law(che):
    solution = che.solve_t_C(UniformLaw(100), 50)
    assert solution.t_C == pytest.approx(np.log(2), rel=1e-8)


@pytest.mark.parametrize("alpha", [0.8, 1.2])
def test_occupancy_matches_capacity(che, alpha):
    law = ZipfLaw(alpha, 10_000)
    for capacity in (10, 100, 1000, 5000):
        solution = che.solve_t_C(law, capacity)
        assert abs(solution.residual) <= 1e-9 * capacity
        assert che.mean_occupancy(law, solution.t_C) == pytest.approx(capacity, rel=1e-9)
        lo, hi = solution.bracket
        assert lo <= solution.t_C <= hi


def test_hit_rates_add_up_to_capacity(che):
    law = ZipfLaw(0.8, 1000)
    profile = che.capacity_profile(law, 100, at=range(1, 1001))
    assert profile.hit_rates.sum() == pytest.approx(100, rel=1e-8)
    assert np.all(np.diff(profile.hit_rates) <= 0)
    assert 0 < profile.overall < 1


def test_characteristic_time_grows_with_capacity(che):
    law = ZipfLaw(0.8, 10_000)
    times = [che.solve_t_C(law, c).t_C for c in (10, 100, 1000, 9000)]
    assert np.all(np.diff(times) > 0)


def test_occupancy_moments(che):
    law = GeometricLaw(0.9, 100)
    t = 25.0
    assert che.variance_occupancy(law, t) == pytest.approx(
        che.mean_occupancy(law, 2 * t) - che.mean_occupancy(law, t), rel=1e-10)
    h = 1e-4
    slope = (che.mean_occupancy(law, t + h) - che.mean_occupancy(law, t - h)) / (2 * h)
    assert che.derivative(law, t) == pytest.approx(slope, rel=1e-6)
    assert che.mean_occupancy(law, 0.0) == 0.0
    with pytest.raises(DomainError):
        che.mean_occupancy(law, -1.0)


def test_saturated_capacity(che):
    law = ZipfLaw(0.8, 100)
    with pytest.raises(CapacitySaturatedError):
        che.solve_t_C(law, 100)
    profile = che.capacity_profile(law, 150, at=[1, 100])
    assert profile.overall == 1.0
    assert list(profile.hit_rates) == [1.0, 1.0]


def test_invalid_capacity_and_units(che):
    law = ZipfLaw(0.8, 100)
    with pytest.raises(DomainError):
        che.solve_t_C(law, 0)
    with pytest.raises(DomainError):
        che.solve_t_C(law, 10, units="bytes")


def test_object_sizes_scale_capacity(che):
    law = ZipfLaw(0.8, 1000)
    plain = che.solve_t_C(law, 100)
    doubled = che.solve_t_C(law, 200, sizes=lambda ranks: np.full(np.shape(ranks), 2.0))
    assert doubled.t_C == pytest.approx(plain.t_C, rel=1e-8)
    as_array = che.solve_t_C(law, 200, sizes=np.full(1000, 2.0))
    assert as_array.t_C == pytest.approx(plain.t_C, rel=1e-8)


def test_excluding_an_item_lengthens_characteristic_time(che):
    law = ZipfLaw(0.8, 1000)
    full = che.solve_t_C(law, 100)
    without_top = che.solve_t_C_excluding(law, 100, 1)
    assert without_top.excluded_rank == 1
    assert without_top.t_C > full.t_C
    # removing item 1 from the sum is the same as dropping it from the law
    rest = ExplicitLaw(np.arange(2, 1001, dtype=float) ** -0.8)
    assert without_top.t_C == pytest.approx(che.solve_t_C(rest, 100).t_C, rel=1e-8)
    assert che.per_object_hit_rate(law, 100, 1) == pytest.approx(-np.expm1(-without_top.t_C))


def test_chunk_level_traffic_mix(che):
    law = build_mix_law(TrafficMix.internet_mix())
    capacities = [1e6, 1e8, 1e10]
    solutions = [che.solve_t_C(law, c, units="chunks") for c in capacities]
    for capacity, solution in zip(capacities, solutions):
        assert abs(solution.residual) <= 1e-9 * capacity
        assert solution.capacity_units == "chunks"
    assert solutions[0].t_C < solutions[1].t_C < solutions[2].t_C


def test_hierarchy_filters_requests(che):
    law = ZipfLaw(0.8, 1000)
    first, second = che.hierarchy_profiles(law, [100, 100], at=[1, 500])
    assert first.law is law
    filtered = second.law
    # level 2 sees q(n)(1 - h1(n))
    expected = weight(law, 1) * (1 - first.hit_rates[0])
    assert weight(filtered, 1) == pytest.approx(expected)
    # popular items are flattened by the first cache
    assert second.hit_rates[0] < first.hit_rates[0]
    assert 0 < second.overall < first.overall


def test_hierarchy_level_holding_everything_left(che):
    law = UniformLaw(10)
    first, second = che.hierarchy_profiles(law, [20, 5])
    assert first.overall == 1.0
    assert second.law.population == 0
    assert second.overall == 0.0


def make_law(kind: str, che: CheApproximation):
    if kind == "zipf":
        return ZipfLaw(0.8, 10 ** 8)
    if kind == "geometric":
        return GeometricLaw(0.9, 100)
    if kind == "uniform":
        return UniformLaw(1000)
    if kind == "explicit":
        return ExplicitLaw(np.random.default_rng(7).uniform(0.01, 1.0, 500))
    if kind == "chunked":
        return ChunkedLaw(ZipfLaw(0.8, 1000), 5)
    if kind == "mixture":
        return MixtureLaw(((0.3, ZipfLaw(0.8, 500)), (0.7, GeometricLaw(0.9, 200))))
    base = ZipfLaw(0.8, 1000)
    return filter_law(base, che.capacity_profile(base, 100))


@pytest.mark.parametrize("kind", ["zipf", "geometric", "uniform", "explicit", "chunked", "mixture", "filtered"])
def test_variance_is_mean_increment_over_doubled_time(che, kind):
    law = make_law(kind, che)
    # times at which the mean occupancy fills 1% to 90% of the catalogue
    times = [che.solve_t_C(law, f * law.population).t_C for f in (0.01, 0.1, 0.5, 0.9)]
    for t in times:
        assert che.variance_occupancy(law, t) == pytest.approx(
            che.mean_occupancy(law, 2 * t) - che.mean_occupancy(law, t), rel=1e-8)


@pytest.mark.parametrize("population", [1000, 10 ** 8])
def test_chunked_law_equals_objects_of_chunk_size(che, population):
    objects = ZipfLaw(0.8, population)
    chunks = ChunkedLaw(objects, 5)
    for capacity in (50.0, 0.1 * chunks.population, 0.8 * chunks.population):
        per_chunk = che.solve_t_C(chunks, capacity, units="chunks")
        sized = che.solve_t_C(objects, capacity, sizes=lambda ranks: np.full(np.shape(ranks), 5.0))
        assert per_chunk.t_C == pytest.approx(sized.t_C, rel=1e-9)
    assert che.solve_t_C(ChunkedLaw(ZipfLaw(0.8, 1000), 5), 500, units="chunks").t_C == pytest.approx(
        che.solve_t_C(ZipfLaw(0.8, 1000), 500, sizes=np.full(1000, 5.0)).t_C, rel=1e-9)


def test_hit_profile_rejects_ranks_outside_the_law(che):
    law = ZipfLaw(0.8, 100)
    solution = che.solve_t_C(law, 10)
    with pytest.raises(DomainError):
        che.lru_hit_profile(law, solution, at=[101])
