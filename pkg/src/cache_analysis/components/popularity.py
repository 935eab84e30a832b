"""Popularity laws over ranked catalogues.

Laws are immutable and unnormalised. Parametric laws never materialise their
items: sums over them go through a ``RankSegmentation`` that groups successive
ranks whose weights differ by at most a factor ``1 + epsilon``.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Dict, Iterable, Sequence, Tuple

import numpy as np

from src.cache_analysis.constant import NORMALIZATION_EPSILON, SHARE_TOLERANCE
from src.cache_analysis.entity.result_entity import HitProfile
from src.cache_analysis.exception import DomainError, ScenarioValidationError

DEFAULT_EXACT_LIMIT = 1_000_000


@dataclass(frozen=True, eq=False)
class RankSegmentation:
    """
    A partition of ranks [1, N] into segments of nearly equal weight.

    Attributes:
        breakpoints (np.ndarray): int64 ranks 1 = n_0 < n_1 < ... < n_J = N + 1.
        q_lo (np.ndarray): smallest weight inside each segment.
        q_hi (np.ndarray): largest weight inside each segment.
        q_rep (np.ndarray): mean weight of each segment, used for bucketed sums.
    """
    breakpoints: np.ndarray
    q_lo: np.ndarray
    q_hi: np.ndarray
    q_rep: np.ndarray

    @property
    def counts(self) -> np.ndarray:
        return np.diff(self.breakpoints).astype(float)

    @property
    def size(self) -> int:
        return int(self.q_rep.size)

    @property
    def population(self) -> int:
        return int(self.breakpoints[-1] - 1)

    @property
    def first_ranks(self) -> np.ndarray:
        return self.breakpoints[:-1]

    @property
    def last_ranks(self) -> np.ndarray:
        return self.breakpoints[1:] - 1

    @property
    def representative_ranks(self) -> np.ndarray:
        return (self.breakpoints[:-1] + self.breakpoints[1:] - 1) // 2

    @property
    def max_ratio(self) -> float:
        positive = self.q_lo > 0
        if not np.any(positive):
            return 1.0
        return float(np.max(self.q_hi[positive] / self.q_lo[positive]))

    def bucketed_sum(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        """Sum of f(q(n)) over all ranks, each segment evaluated at its mean weight."""
        return float(np.dot(self.counts, f(self.q_rep)))

    def sum_bounds(self, f: Callable[[np.ndarray], np.ndarray]) -> Tuple[float, float]:
        """Lower and upper Riemann sums of a monotone f over the segment endpoints."""
        at_lo, at_hi = f(self.q_lo), f(self.q_hi)
        counts = self.counts
        return (float(np.dot(counts, np.minimum(at_lo, at_hi))),
                float(np.dot(counts, np.maximum(at_lo, at_hi))))

    def segment_of(self, ranks) -> np.ndarray:
        return np.searchsorted(self.breakpoints, np.asarray(ranks, dtype=np.int64), side="right") - 1

    def scaled(self, factor: float) -> "RankSegmentation":
        return RankSegmentation(self.breakpoints, self.q_lo * factor,
                                self.q_hi * factor, self.q_rep * factor)

    def expanded(self, multiplicity: int) -> "RankSegmentation":
        """Each rank becomes ``multiplicity`` consecutive ranks of the same weight."""
        return RankSegmentation((self.breakpoints - 1) * multiplicity + 1,
                                self.q_lo, self.q_hi, self.q_rep)

    @staticmethod
    def concatenate(parts: Sequence["RankSegmentation"]) -> "RankSegmentation":
        """Disjoint union; the ranks of each part follow those of the previous parts."""
        breakpoints = [np.array([1], dtype=np.int64)]
        offset = 0
        for part in parts:
            breakpoints.append(part.breakpoints[1:] + offset)
            offset += part.population
        return RankSegmentation(
            np.concatenate(breakpoints),
            np.concatenate([p.q_lo for p in parts]),
            np.concatenate([p.q_hi for p in parts]),
            np.concatenate([p.q_rep for p in parts]),
        )

    @classmethod
    def per_item(cls, weights: np.ndarray) -> "RankSegmentation":
        weights = np.asarray(weights, dtype=float)
        return cls(np.arange(1, weights.size + 2, dtype=np.int64), weights, weights, weights)


class PopularityLaw:
    """Base class of every law. ``weights`` is vectorised and unchecked; ``weight`` checks its rank."""

    kind: str = "abstract"
    monotone: bool = True

    @property
    def universe_size(self) -> int:
        """Number of ranks addressable by ``weight``; equals ``population`` except for filtered laws."""
        return self.population

    @property
    def object_count(self) -> int:
        """Number of distinct weights a term-by-term sum would need."""
        return self.population

    def weights(self, ranks: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def weight(self, n: int) -> float:
        if not 1 <= n <= self.universe_size:
            raise DomainError(f"Rank {n} outside [1, {self.universe_size}] for {self.kind} law")
        return float(self.weights(np.array([n], dtype=np.int64))[0])

    def is_enumerable(self, exact_limit: int) -> bool:
        return self.object_count <= exact_limit

    def exact_segmentation(self) -> RankSegmentation:
        ranks = np.arange(1, self.population + 1, dtype=np.int64)
        return RankSegmentation.per_item(self.weights(ranks))

    def _segmentation(self, epsilon: float) -> RankSegmentation:
        return self.exact_segmentation()

    def summation_table(self, epsilon: float, exact_limit: int) -> RankSegmentation:
        if self.is_enumerable(exact_limit):
            return self.exact_segmentation()
        return segment(self, epsilon)


def _check_population(population: int, kind: str) -> int:
    population = int(population)
    if population < 1:
        raise DomainError(f"{kind} law needs a positive population, got {population}")
    return population


@dataclass(frozen=True)
class ZipfLaw(PopularityLaw):
    """q(n) = 1 / n^alpha."""
    alpha: float
    population: int
    kind: str = field(default="zipf", init=False, repr=False)

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError(f"Zipf exponent must be positive, got {self.alpha}")
        object.__setattr__(self, "population", _check_population(self.population, "zipf"))

    def weights(self, ranks: np.ndarray) -> np.ndarray:
        return np.asarray(ranks, dtype=float) ** (-self.alpha)

    def _segment_mean(self, first: np.ndarray, last: np.ndarray) -> np.ndarray:
        # midpoint rule: sum over [first, last] ~ integral over [first - 1/2, last + 1/2]
        count = last - first + 1.0
        lo = first - 0.5
        log_growth = np.log1p(count / lo)
        if self.alpha == 1.0:
            return log_growth / count
        power = 1.0 - self.alpha
        return lo ** power * np.expm1(power * log_growth) / (power * count)

    def _segmentation(self, epsilon: float) -> RankSegmentation:
        n = self.population
        growth = (1.0 + epsilon) ** (1.0 / self.alpha)
        n_star = int(math.ceil(1.0 / (growth - 1.0)))
        if n_star >= n:
            return self.exact_segmentation()
        # ranks below n_star are their own segments; above it breakpoints grow geometrically
        steps = int(math.ceil(math.log((n + 1) / n_star) / math.log(growth))) + 1
        geometric = np.ceil(n_star * np.exp(np.arange(steps) * math.log(growth))).astype(np.int64)
        geometric = geometric[geometric <= n]
        breakpoints = np.unique(np.concatenate([
            np.arange(1, n_star, dtype=np.int64), geometric, np.array([n + 1], dtype=np.int64),
        ]))
        first = breakpoints[:-1].astype(float)
        last = breakpoints[1:].astype(float) - 1.0
        q_hi = first ** (-self.alpha)
        q_lo = last ** (-self.alpha)
        q_rep = np.where(last > first, self._segment_mean(first, last), q_hi)
        q_rep = np.clip(q_rep, q_lo, q_hi)
        return RankSegmentation(breakpoints, q_lo, q_hi, q_rep)


@dataclass(frozen=True)
class GeometricLaw(PopularityLaw):
    """q(n) = rho^n."""
    rho: float
    population: int
    kind: str = field(default="geometric", init=False, repr=False)

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise DomainError(f"Geometric parameter must lie in (0, 1), got {self.rho}")
        object.__setattr__(self, "population", _check_population(self.population, "geometric"))

    def weights(self, ranks: np.ndarray) -> np.ndarray:
        return self.rho ** np.asarray(ranks, dtype=float)

    def _segmentation(self, epsilon: float) -> RankSegmentation:
        log_inv_rho = -math.log(self.rho)
        length = 1 + int(math.floor(math.log1p(epsilon) / log_inv_rho))
        if length <= 1:
            return self.exact_segmentation()
        n = self.population
        breakpoints = np.append(np.arange(1, n + 1, length, dtype=np.int64), np.int64(n + 1))
        first = breakpoints[:-1].astype(float)
        count = np.diff(breakpoints).astype(float)
        q_hi = self.rho ** first
        q_lo = self.rho ** (first + count - 1.0)
        # exact segment mean of a geometric run
        q_rep = q_hi * np.expm1(-count * log_inv_rho) / (np.expm1(-log_inv_rho) * count)
        return RankSegmentation(breakpoints, q_lo, q_hi, np.clip(q_rep, q_lo, q_hi))


@dataclass(frozen=True)
class UniformLaw(PopularityLaw):
    population: int
    kind: str = field(default="uniform", init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "population", _check_population(self.population, "uniform"))

    @property
    def object_count(self) -> int:
        return 1

    def weights(self, ranks: np.ndarray) -> np.ndarray:
        return np.ones(np.shape(ranks))

    def exact_segmentation(self) -> RankSegmentation:
        one = np.ones(1)
        return RankSegmentation(np.array([1, self.population + 1], dtype=np.int64), one, one, one)


@dataclass(frozen=True, eq=False)
class ExplicitLaw(PopularityLaw):
    """A law given item by item; weights need not be sorted."""
    values: np.ndarray
    kind: str = field(default="explicit", init=False, repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise DomainError("Explicit law needs a non-empty list of weights")
        if not np.all(values > 0):
            raise DomainError("Explicit law weights must be positive")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "monotone", bool(np.all(np.diff(values) <= 0)))

    @property
    def population(self) -> int:
        return int(self.values.size)

    def weights(self, ranks: np.ndarray) -> np.ndarray:
        return self.values[np.asarray(ranks, dtype=np.int64) - 1]

    def exact_segmentation(self) -> RankSegmentation:
        return RankSegmentation.per_item(self.values)

    def _segmentation(self, epsilon: float) -> RankSegmentation:
        if not self.monotone:
            return self.exact_segmentation()
        values = self.values
        bins = np.floor(np.log(values[0] / values) / math.log1p(epsilon))
        starts = np.concatenate([[0], np.flatnonzero(np.diff(bins)) + 1])
        breakpoints = np.append(starts, values.size).astype(np.int64) + 1
        counts = np.diff(breakpoints)
        q_rep = np.add.reduceat(values, starts) / counts
        return RankSegmentation(breakpoints, values[breakpoints[1:] - 2], values[starts], q_rep)


@dataclass(frozen=True)
class ChunkedLaw(PopularityLaw):
    """Every object of ``base`` split into ``chunk_count`` chunks inheriting its weight."""
    base: PopularityLaw
    chunk_count: int
    kind: str = field(default="chunked", init=False, repr=False)

    def __post_init__(self):
        if int(self.chunk_count) < 1:
            raise DomainError(f"Chunk count must be positive, got {self.chunk_count}")
        object.__setattr__(self, "chunk_count", int(self.chunk_count))
        object.__setattr__(self, "monotone", self.base.monotone)

    @property
    def population(self) -> int:
        return self.base.population * self.chunk_count

    @property
    def object_count(self) -> int:
        return self.base.object_count

    def weights(self, ranks: np.ndarray) -> np.ndarray:
        objects = (np.asarray(ranks, dtype=np.int64) - 1) // self.chunk_count + 1
        return self.base.weights(objects)

    def exact_segmentation(self) -> RankSegmentation:
        return self.base.exact_segmentation().expanded(self.chunk_count)

    def _segmentation(self, epsilon: float) -> RankSegmentation:
        return segment(self.base, epsilon).expanded(self.chunk_count)

    def summation_table(self, epsilon: float, exact_limit: int) -> RankSegmentation:
        return self.base.summation_table(epsilon, exact_limit).expanded(self.chunk_count)


@dataclass(frozen=True)
class MixtureLaw(PopularityLaw):
    """
    Disjoint union of component laws.

    Component i is rescaled so that its total mass equals its share; ranks of
    component i follow all ranks of components 0..i-1. Component masses are
    summed with weight-ratio bound ``epsilon``.
    """
    components: Tuple[Tuple[float, PopularityLaw], ...]
    epsilon: float = NORMALIZATION_EPSILON
    kind: str = field(default="mixture", init=False, repr=False)

    def __post_init__(self):
        components = tuple((float(share), law) for share, law in self.components)
        if not components:
            raise DomainError("Mixture needs at least one component")
        if any(share <= 0 for share, _ in components):
            raise DomainError("Mixture shares must be positive")
        object.__setattr__(self, "components", components)
        if not self.epsilon > 0:
            raise DomainError(f"Grouping tolerance must be positive, got {self.epsilon}")
        masses = tuple(total_mass(law, self.epsilon) for _, law in components)
        object.__setattr__(self, "_scales", tuple(s / m for (s, _), m in zip(components, masses)))
        object.__setattr__(self, "_offsets",
                           np.cumsum([0] + [law.population for _, law in components]).astype(np.int64))
        object.__setattr__(self, "monotone", all(law.monotone for _, law in components))

    @property
    def population(self) -> int:
        return int(self._offsets[-1])

    @property
    def object_count(self) -> int:
        return sum(law.object_count for _, law in self.components)

    def is_enumerable(self, exact_limit: int) -> bool:
        return all(law.is_enumerable(exact_limit) for _, law in self.components)

    def component_of(self, ranks: np.ndarray) -> np.ndarray:
        return np.searchsorted(self._offsets, np.asarray(ranks, dtype=np.int64), side="left") - 1

    def weights(self, ranks: np.ndarray) -> np.ndarray:
        ranks = np.asarray(ranks, dtype=np.int64)
        index = self.component_of(ranks)
        out = np.empty(ranks.shape, dtype=float)
        for i, (_, law) in enumerate(self.components):
            mask = index == i
            if np.any(mask):
                out[mask] = self._scales[i] * law.weights(ranks[mask] - self._offsets[i])
        return out

    def exact_segmentation(self) -> RankSegmentation:
        return RankSegmentation.concatenate([
            law.exact_segmentation().scaled(scale)
            for (_, law), scale in zip(self.components, self._scales)
        ])

    def _segmentation(self, epsilon: float) -> RankSegmentation:
        return RankSegmentation.concatenate([
            segment(law, epsilon).scaled(scale)
            for (_, law), scale in zip(self.components, self._scales)
        ])

    def summation_table(self, epsilon: float, exact_limit: int) -> RankSegmentation:
        return RankSegmentation.concatenate([
            law.summation_table(epsilon, exact_limit).scaled(scale)
            for (_, law), scale in zip(self.components, self._scales)
        ])


@dataclass(frozen=True, eq=False)
class FilteredLaw(PopularityLaw):
    """
    q'(n) = q(n) * survival(n), the request stream overflowing a cache.

    ``survival`` maps (ranks, base weights) to values in [0, 1]. Ranks keep
    their base numbering; items with survival 0 are dropped from ``population``.
    """
    base: PopularityLaw
    survival: Callable[[np.ndarray, np.ndarray], np.ndarray]
    kind: str = field(default="filtered", init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "monotone", False)
        table = self.summation_table(NORMALIZATION_EPSILON, DEFAULT_EXACT_LIMIT)
        object.__setattr__(self, "_support", int(round(np.sum(table.counts[table.q_rep > 0]))))

    @property
    def population(self) -> int:
        return self._support

    @property
    def universe_size(self) -> int:
        return self.base.universe_size

    @property
    def object_count(self) -> int:
        return self.base.object_count

    def _survival(self, ranks: np.ndarray, base_weights: np.ndarray) -> np.ndarray:
        return np.clip(np.asarray(self.survival(ranks, base_weights), dtype=float), 0.0, 1.0)

    def weights(self, ranks: np.ndarray) -> np.ndarray:
        ranks = np.asarray(ranks, dtype=np.int64)
        base_weights = self.base.weights(ranks)
        return base_weights * self._survival(ranks, base_weights)

    def _filtered(self, table: RankSegmentation) -> RankSegmentation:
        q_rep = table.q_rep * self._survival(table.representative_ranks, table.q_rep)
        at_first = table.q_hi * self._survival(table.first_ranks, table.q_hi)
        at_last = table.q_lo * self._survival(table.last_ranks, table.q_lo)
        q_lo = np.minimum(np.minimum(at_first, at_last), q_rep)
        q_hi = np.maximum(np.maximum(at_first, at_last), q_rep)
        return RankSegmentation(table.breakpoints, q_lo, q_hi, q_rep)

    def exact_segmentation(self) -> RankSegmentation:
        # survival may vary inside a segment of equal base weights, so filter item by item
        ranks = np.arange(1, self.universe_size + 1, dtype=np.int64)
        return RankSegmentation.per_item(self.weights(ranks))

    def _segmentation(self, epsilon: float) -> RankSegmentation:
        return self._filtered(segment(self.base, epsilon))

    def summation_table(self, epsilon: float, exact_limit: int) -> RankSegmentation:
        if self.universe_size <= exact_limit:
            return self.exact_segmentation()
        return self._filtered(self.base.summation_table(epsilon, exact_limit))


@dataclass(frozen=True)
class ContentType:
    name: str
    share: float
    population: int
    chunk_count: int
    zipf_alpha: float


@dataclass(frozen=True)
class TrafficMix:
    types: Tuple[ContentType, ...]

    @classmethod
    def internet_mix(cls) -> "TrafficMix":
        """Web, file sharing, UGC and VoD traffic with 1 KB chunks."""
        return cls((
            ContentType("web", 0.18, 10 ** 11, 10, 0.8),
            ContentType("file_sharing", 0.36, 10 ** 5, 10 ** 6, 0.8),
            ContentType("ugc", 0.23, 10 ** 8, 10 ** 3, 0.8),
            ContentType("vod", 0.23, 10 ** 4, 10 ** 4, 1.2),
        ))

    @property
    def total_chunks(self) -> int:
        return sum(t.population * t.chunk_count for t in self.types)

    def validate(self) -> None:
        if not self.types:
            raise ScenarioValidationError("traffic_mix", "at least one content type is required")
        for i, t in enumerate(self.types):
            if not 0.0 < t.share <= 1.0:
                raise ScenarioValidationError(f"traffic_mix.{i}.share", "must lie in (0, 1]")
            if t.population < 1 or t.chunk_count < 1:
                raise ScenarioValidationError(f"traffic_mix.{i}", "population and chunk_count must be positive")
            if not t.zipf_alpha > 0:
                raise ScenarioValidationError(f"traffic_mix.{i}.zipf_alpha", "must be positive")
        total = sum(t.share for t in self.types)
        if abs(total - 1.0) > SHARE_TOLERANCE:
            raise ScenarioValidationError("traffic_mix.share", f"shares must sum to 1, got {total:.12g}")


# ----------------------------------------------------------------------------
# Operations
# ----------------------------------------------------------------------------

def weight(law: PopularityLaw, n: int) -> float:
    return law.weight(n)


def evaluation_ranks(law: PopularityLaw, at: Iterable[int]) -> np.ndarray:
    """``at`` as an array of ranks, each checked against the law's rank range."""
    ranks = np.asarray(list(at), dtype=np.int64)
    outside = ranks[(ranks < 1) | (ranks > law.universe_size)]
    if outside.size:
        raise DomainError(f"Rank {outside[0]} outside [1, {law.universe_size}]")
    return ranks


def build_mix_law(mix: TrafficMix, epsilon: float = NORMALIZATION_EPSILON) -> MixtureLaw:
    """Chunk-level law of a traffic mix: q_i(n, k) = (p_i / n^a_i) / sum_j theta_i / j^a_i."""
    mix.validate()
    law = MixtureLaw(tuple(
        (t.share, ChunkedLaw(ZipfLaw(t.zipf_alpha, t.population), t.chunk_count))
        for t in mix.types
    ), epsilon)
    logging.info(f"Built traffic-mix law over {law.population:.4g} chunks in {len(mix.types)} types")
    return law


def filter_law(law: PopularityLaw, hits: HitProfile) -> FilteredLaw:
    """Miss stream of a cache with hit profile ``hits``: q'(n) = q(n)(1 - h(n))."""
    if hits.law is not law and hits.law.universe_size != law.universe_size:
        raise DomainError(
            f"Hit profile covers {hits.law.universe_size} ranks, law has {law.universe_size}"
        )
    return FilteredLaw(law, lambda ranks, base_weights: 1.0 - hits.hit_at(ranks, base_weights))


@lru_cache(maxsize=64)
def _cached_segmentation(law: PopularityLaw, epsilon: float) -> RankSegmentation:
    return law._segmentation(epsilon)


def segment(law: PopularityLaw, epsilon: float) -> RankSegmentation:
    """Group successive ranks so that q_hi / q_lo <= 1 + epsilon inside every segment."""
    if not epsilon > 0:
        raise DomainError(f"Grouping tolerance must be positive, got {epsilon}")
    return _cached_segmentation(law, float(epsilon))


def summation_table(law: PopularityLaw, epsilon: float,
                    exact_limit: int = DEFAULT_EXACT_LIMIT) -> RankSegmentation:
    """Term-by-term table for enumerable laws, segmentation otherwise."""
    return law.summation_table(float(epsilon), int(exact_limit))


def total_mass(law: PopularityLaw, epsilon: float = NORMALIZATION_EPSILON,
               exact_limit: int = DEFAULT_EXACT_LIMIT) -> float:
    return summation_table(law, epsilon, exact_limit).bucketed_sum(lambda q: q)


def _top_fill(table: RankSegmentation, budget: float) -> np.ndarray:
    """Number of items of each segment held by a static LFU cache of size ``budget``."""
    order = np.argsort(-table.q_rep, kind="stable")
    counts = table.counts[order]
    before = np.concatenate([[0.0], np.cumsum(counts)[:-1]])
    fill = np.empty_like(counts)
    fill[order] = np.clip(budget - before, 0.0, counts)
    return fill


def sorted_top_mass(law: PopularityLaw, budget: float, epsilon: float = NORMALIZATION_EPSILON,
                    exact_limit: int = DEFAULT_EXACT_LIMIT) -> float:
    """Sum of the ``budget`` largest weights; a fractional budget takes part of the next item."""
    if budget < 0 or budget > law.population:
        raise DomainError(f"Budget {budget:g} outside [0, {law.population}]")
    table = summation_table(law, epsilon, exact_limit)
    return float(np.dot(_top_fill(table, budget), table.q_rep))


def _lfu_hit_of_weight(table: RankSegmentation, fill: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """h(q) of a static LFU cache: 1 above the weight cutoff set by ``fill``, 0 below."""
    held = fill > 0
    if not np.any(held):
        return lambda w: np.zeros(np.shape(w))
    q_cut = float(np.min(table.q_rep[held]))
    at_cut = table.q_rep == q_cut
    share = float(fill[at_cut].sum() / table.counts[at_cut].sum())
    lo, hi = float(np.min(table.q_lo[at_cut])), float(np.max(table.q_hi[at_cut]))
    if share < 1.0 and hi > lo:
        # the heaviest part of the boundary segment is held
        cut = hi - share * (hi - lo)
        return lambda w: np.where(np.asarray(w, dtype=float) >= cut, 1.0, 0.0)
    if share < 1.0:
        def tied(w: np.ndarray) -> np.ndarray:
            w = np.asarray(w, dtype=float)
            on_cut = np.isclose(w, q_cut, rtol=1e-12, atol=0.0)
            return np.where(on_cut, share, np.where(w > q_cut, 1.0, 0.0))
        return tied
    lighter = table.q_hi[~held & (table.q_rep > 0)]
    below = min(float(np.max(lighter)), lo) if lighter.size else 0.0
    cut = 0.5 * (lo + below)
    return lambda w: np.where(np.asarray(w, dtype=float) > cut, 1.0, 0.0)


def static_lfu_hit_profile(law: PopularityLaw, budget: float, at: Iterable[int] = (),
                           epsilon: float = NORMALIZATION_EPSILON,
                           exact_limit: int = DEFAULT_EXACT_LIMIT) -> HitProfile:
    """Hit profile of a cache pinned to the ``budget`` most popular items, ties broken by rank."""
    if budget < 0 or budget > law.population:
        raise DomainError(f"Budget {budget:g} outside [0, {law.population}]")
    table = summation_table(law, epsilon, exact_limit)
    fill = _top_fill(table, budget)
    mass = float(np.dot(table.counts, table.q_rep))
    ranks = evaluation_ranks(law, at)
    seg = table.segment_of(ranks)
    position = ranks - table.breakpoints[seg]
    rates = np.clip(fill[seg] - position, 0.0, 1.0) if ranks.size else np.empty(0)
    per_rank = None
    if law.universe_size <= exact_limit:
        all_ranks = np.arange(1, law.universe_size + 1, dtype=np.int64)
        all_seg = table.segment_of(all_ranks)
        per_rank = np.clip(fill[all_seg] - (all_ranks - table.breakpoints[all_seg]), 0.0, 1.0)
    return HitProfile(
        law=law,
        ranks=ranks,
        hit_rates=rates,
        overall=float(np.dot(fill, table.q_rep)) / mass,
        hit_of_weight=_lfu_hit_of_weight(table, fill),
        per_rank=per_rank,
    )


def law_from_spec(spec: Dict[str, Any], epsilon: float = NORMALIZATION_EPSILON) -> PopularityLaw:
    """
    Build a law from its scenario description (kind + parameters, or a traffic mix).

    ``epsilon`` bounds the segment weight ratio used to normalise mixture components.
    """
    if "traffic_mix" in spec:
        return build_mix_law(traffic_mix_from_spec(spec["traffic_mix"]), epsilon)
    law = spec["law"] if "law" in spec else spec
    kind = law["kind"]
    if kind == "zipf":
        return ZipfLaw(float(law["alpha"]), int(law["population"]))
    if kind == "geometric":
        return GeometricLaw(float(law["rho"]), int(law["population"]))
    if kind == "uniform":
        return UniformLaw(int(law["population"]))
    if kind == "explicit":
        return ExplicitLaw(np.asarray(law["weights"], dtype=float))
    if kind == "mixture":
        return MixtureLaw(tuple(
            (float(c["share"]), law_from_spec(c["law"], epsilon)) for c in law["components"]
        ), epsilon)
    raise DomainError(f"Unknown popularity law kind '{kind}'")


def traffic_mix_from_spec(types: Sequence[Dict[str, Any]]) -> TrafficMix:
    return TrafficMix(tuple(
        ContentType(
            name=str(t["name"]),
            share=float(t["share"]),
            population=int(t["population"]),
            chunk_count=int(t["chunk_count"]),
            zipf_alpha=float(t["zipf_alpha"]),
        )
        for t in types
    ))
