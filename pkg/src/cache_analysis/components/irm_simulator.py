"""Independent-reference-model cache simulator.

Requests are i.i.d. draws from the normalised popularity law (Vose alias
method). Each replacement policy is a numba kernel that serves one block of
requests at a time and records which of them hit; cache state persists
between blocks.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from src.cache_analysis.components.popularity import FilteredLaw, PopularityLaw
from src.cache_analysis.entity.config_entity import SimConfig, SimulatorConfig
from src.cache_analysis.entity.result_entity import (
    SimEstimate,
    TandemResult,
    TCDistribution,
    XDistribution,
)
from src.cache_analysis.exception import DomainError, SimulationBoundError

SIM_POLICIES = ("LRU", "RANDOM", "FIFO", "LFU_STATIC")

_NO_UNIFORMS = np.empty(0)


@njit(cache=True)
def _build_alias(probabilities):
    n = probabilities.size
    scaled = probabilities * n
    prob = np.ones(n)
    alias = np.arange(n)
    small = np.empty(n, dtype=np.int64)
    large = np.empty(n, dtype=np.int64)
    n_small = 0
    n_large = 0
    for i in range(n):
        if scaled[i] < 1.0:
            small[n_small] = i
            n_small += 1
        else:
            large[n_large] = i
            n_large += 1
    while n_small > 0 and n_large > 0:
        n_small -= 1
        s = small[n_small]
        n_large -= 1
        g = large[n_large]
        prob[s] = scaled[s]
        alias[s] = g
        scaled[g] = scaled[g] + scaled[s] - 1.0
        if scaled[g] < 1.0:
            small[n_small] = g
            n_small += 1
        else:
            large[n_large] = g
            n_large += 1
    # leftovers are 1 up to rounding
    return prob, alias


@njit(cache=True)
def _serve_lru(requests, capacity, prev, nxt, cached, meta, hit):
    sentinel = prev.size - 1
    size = meta[0]
    for k in range(requests.size):
        i = requests[k]
        if cached[i]:
            hit[k] = True
            p = prev[i]
            n = nxt[i]
            nxt[p] = n
            prev[n] = p
        else:
            hit[k] = False
            if capacity == 0:
                continue
            if size == capacity:
                victim = prev[sentinel]
                p = prev[victim]
                nxt[p] = sentinel
                prev[sentinel] = p
                cached[victim] = False
            else:
                size += 1
            cached[i] = True
        first = nxt[sentinel]
        nxt[i] = first
        prev[i] = sentinel
        prev[first] = i
        nxt[sentinel] = i
    meta[0] = size


@njit(cache=True)
def _serve_fifo(requests, capacity, queue, cached, meta, hit):
    size = meta[0]
    head = meta[1]
    for k in range(requests.size):
        i = requests[k]
        if cached[i]:
            hit[k] = True
            continue
        hit[k] = False
        if capacity == 0:
            continue
        if size < capacity:
            queue[(head + size) % capacity] = i
            size += 1
        else:
            cached[queue[head]] = False
            queue[head] = i
            head = (head + 1) % capacity
        cached[i] = True
    meta[0] = size
    meta[1] = head


@njit(cache=True)
def _serve_random(requests, uniforms, capacity, slots, cached, meta, hit):
    size = meta[0]
    for k in range(requests.size):
        i = requests[k]
        if cached[i]:
            hit[k] = True
            continue
        hit[k] = False
        if capacity == 0:
            continue
        if size < capacity:
            slots[size] = i
            size += 1
        else:
            j = int(uniforms[k] * capacity)
            if j >= capacity:
                j = capacity - 1
            cached[slots[j]] = False
            slots[j] = i
        cached[i] = True
    meta[0] = size


@dataclass(frozen=True, eq=False)
class AliasTable:
    """O(1) sampling from a discrete distribution."""
    prob: np.ndarray
    alias: np.ndarray

    @classmethod
    def from_weights(cls, weights: np.ndarray) -> "AliasTable":
        weights = np.asarray(weights, dtype=float)
        total = weights.sum()
        if weights.size == 0 or not total > 0:
            raise DomainError("Cannot sample from a law with no mass")
        prob, alias = _build_alias(weights / total)
        return cls(prob, alias)

    @property
    def size(self) -> int:
        return int(self.prob.size)

    def draw(self, rng: np.random.Generator, count: int) -> np.ndarray:
        idx = rng.integers(0, self.size, size=count)
        u = rng.random(count)
        return np.where(u < self.prob[idx], idx, self.alias[idx])


class _Cache:
    """Mutable state of one simulated cache over items 0..N-1."""

    def __init__(self, policy: str, population: int, capacity: int, weights: np.ndarray):
        self.policy = policy
        self.capacity = capacity
        self.cached = np.zeros(population, dtype=np.bool_)
        self.meta = np.zeros(2, dtype=np.int64)
        if policy == "LRU":
            self.prev = np.full(population + 1, population, dtype=np.int64)
            self.nxt = np.full(population + 1, population, dtype=np.int64)
        elif policy == "FIFO":
            self.queue = np.zeros(max(capacity, 1), dtype=np.int64)
        elif policy == "RANDOM":
            self.slots = np.zeros(max(capacity, 1), dtype=np.int64)
        elif policy == "LFU_STATIC":
            # the C heaviest items, ties broken by rank
            top = np.argsort(-weights, kind="stable")[:capacity]
            self.cached[top] = True

    def serve(self, requests: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
        if self.policy == "LFU_STATIC":
            return self.cached[requests]
        hit = np.empty(requests.size, dtype=np.bool_)
        if self.policy == "LRU":
            _serve_lru(requests, self.capacity, self.prev, self.nxt, self.cached, self.meta, hit)
        elif self.policy == "FIFO":
            _serve_fifo(requests, self.capacity, self.queue, self.cached, self.meta, hit)
        else:
            _serve_random(requests, uniforms, self.capacity, self.slots, self.cached, self.meta, hit)
        return hit


class _Tally:
    def __init__(self, population: int):
        self.requests = np.zeros(population, dtype=np.int64)
        self.hits = np.zeros(population, dtype=np.int64)

    def add(self, requests: np.ndarray, hit: np.ndarray) -> None:
        n = self.requests.size
        self.requests += np.bincount(requests, minlength=n)
        self.hits += np.bincount(requests[hit], minlength=n)


class IRMSimulator:
    """Monte-Carlo ground truth for the analytic hit-rate models."""

    def __init__(self, config: SimulatorConfig):
        self.config = config

    def _weights(self, law: PopularityLaw) -> np.ndarray:
        n = law.universe_size
        if n > self.config.max_population:
            raise SimulationBoundError(
                f"Catalogue of {n:g} items exceeds the simulator bound {self.config.max_population:g}"
            )
        return law.weights(np.arange(1, n + 1, dtype=np.int64))

    def default_warmup(self, capacity: int) -> int:
        return max(self.config.warmup_multiple * int(capacity), self.config.min_warmup)

    def _check(self, policy: str, capacity: int, population: int, requests: int,
               warmup: Optional[int]) -> int:
        if policy not in SIM_POLICIES:
            raise DomainError(f"Unknown policy '{policy}', expected one of {SIM_POLICIES}")
        if capacity < 0 or capacity != int(capacity):
            raise DomainError(f"Simulated capacity must be a non-negative integer, got {capacity}")
        if capacity >= population:
            raise DomainError(f"Capacity {capacity} must be below the catalogue size {population}")
        warmup = self.default_warmup(capacity) if warmup is None else int(warmup)
        if not 0 <= warmup < requests:
            raise DomainError(f"Warmup {warmup} must be below the request count {requests}")
        return warmup

    def _estimate(self, policy: str, capacity: int, tally: _Tally) -> SimEstimate:
        measured = int(tally.requests.sum())
        total_hits = int(tally.hits.sum())
        n = measured + 4.0
        p = (total_hits + 2.0) / n
        return SimEstimate(
            policy=policy,
            capacity=int(capacity),
            requests=tally.requests,
            hits=tally.hits,
            overall=total_hits / measured if measured else 0.0,
            overall_halfwidth=float(self.config.z_value * np.sqrt(p * (1.0 - p) / n)),
            measured_requests=measured,
            z_value=self.config.z_value,
            min_requests=self.config.min_requests_per_rank,
        )

    def run_cache_sim(self, config: SimConfig) -> SimEstimate:
        """
        Stationary hit rates of one cache; the first ``warmup`` requests are discarded.

        Raises:
            SimulationBoundError: the catalogue is too large to simulate
            DomainError: invalid policy, capacity or request counts
        """
        weights = self._weights(config.law)
        population = weights.size
        capacity = int(config.capacity)
        warmup = self._check(config.policy, config.capacity, int(np.count_nonzero(weights)),
                             config.requests, config.warmup)
        rng = np.random.default_rng(config.seed)
        table = AliasTable.from_weights(weights)
        cache = _Cache(config.policy, population, capacity, weights)
        tally = _Tally(population)

        served = 0
        while served < config.requests:
            block = min(self.config.chunk_size, config.requests - served)
            requests = table.draw(rng, block)
            uniforms = rng.random(block) if config.policy == "RANDOM" else _NO_UNIFORMS
            hit = cache.serve(requests, uniforms)
            start = max(warmup - served, 0)
            if start < block:
                tally.add(requests[start:], hit[start:])
            served += block

        estimate = self._estimate(config.policy, capacity, tally)
        logging.info(
            f"{config.policy} C={capacity}: hit rate {estimate.overall:.5f} "
            f"+/- {estimate.overall_halfwidth:.5f} over {estimate.measured_requests} requests"
        )
        return estimate

    def run_tandem_sim(self, law: PopularityLaw, capacity1: int, capacity2: int, policy: str,
                       requests: int, seed=0, warmup: Optional[int] = None) -> TandemResult:
        """Two caches in series; the second one serves the misses of the first."""
        weights = self._weights(law)
        population = weights.size
        support = int(np.count_nonzero(weights))
        warmup = self._check(policy, capacity1, support, requests,
                             self.default_warmup(max(capacity1, capacity2)) if warmup is None else warmup)
        self._check(policy, capacity2, support, requests, warmup)
        rng = np.random.default_rng(seed)
        table = AliasTable.from_weights(weights)
        level1 = _Cache(policy, population, int(capacity1), weights)
        # LFU_STATIC at level 2 pins the items heaviest in the level-1 miss stream
        level2 = _Cache(policy, population, int(capacity2), self._level2_weights(weights, level1))
        tally1, tally2 = _Tally(population), _Tally(population)

        served = 0
        while served < requests:
            block = min(self.config.chunk_size, requests - served)
            stream = table.draw(rng, block)
            uniforms = rng.random(block) if policy == "RANDOM" else _NO_UNIFORMS
            hit1 = level1.serve(stream, uniforms)
            misses = stream[~hit1]
            uniforms2 = rng.random(misses.size) if policy == "RANDOM" else _NO_UNIFORMS
            hit2 = level2.serve(misses, uniforms2)
            start = max(warmup - served, 0)
            if start < block:
                tally1.add(stream[start:], hit1[start:])
                # misses that happened at or after the warmup boundary
                offset = int(np.count_nonzero(~hit1[:start]))
                tally2.add(misses[offset:], hit2[offset:])
            served += block

        estimate1 = self._estimate(policy, capacity1, tally1)
        estimate2 = self._estimate(policy, capacity2, tally2)
        measured = max(estimate1.measured_requests, 1)
        miss_frequency = (tally1.requests - tally1.hits) / measured
        with np.errstate(invalid="ignore", divide="ignore"):
            hit_ratio = np.where(tally1.requests > 0, tally1.hits / np.maximum(tally1.requests, 1), 0.0)
        miss_law = FilteredLaw(law, lambda ranks, w: 1.0 - hit_ratio[np.asarray(ranks) - 1])
        logging.info(
            f"Tandem {policy} C1={capacity1} C2={capacity2}: "
            f"hit rates {estimate1.overall:.5f} / {estimate2.overall:.5f}"
        )
        return TandemResult(estimate1, estimate2, miss_frequency, miss_law)

    @staticmethod
    def _level2_weights(weights: np.ndarray, level1: _Cache) -> np.ndarray:
        if level1.policy == "LFU_STATIC":
            return np.where(level1.cached, 0.0, weights)
        return weights

    def _batches(self, population: int, trials: int):
        rows = max(1, self.config.sample_batch // max(population, 1))
        done = 0
        while done < trials:
            size = min(rows, trials - done)
            yield size
            done += size

    def sample_X(self, law: PopularityLaw, t: float, trials: int, seed=0) -> XDistribution:
        """X(t) = #{n : tau_n < t} with independent tau_n ~ Exp(q(n))."""
        if not t >= 0:
            raise DomainError(f"Time must be non-negative, got {t}")
        weights = self._weights(law)
        p = -np.expm1(-weights * t)
        rng = np.random.default_rng(seed)
        samples = np.concatenate([
            np.count_nonzero(rng.random((rows, p.size)) < p, axis=1)
            for rows in self._batches(p.size, trials)
        ])
        return XDistribution(
            t=float(t),
            samples=samples,
            mean_theory=float(p.sum()),
            variance_theory=float(np.sum(p * (1.0 - p))),
        )

    def sample_T_C(self, law: PopularityLaw, capacity: int, trials: int, seed=0,
                   excluded_rank: Optional[int] = None) -> TCDistribution:
        """T_C, the C-th smallest clock; with ``excluded_rank`` that item's clock is dropped."""
        weights = self._weights(law).copy()
        if excluded_rank is not None:
            if not 1 <= excluded_rank <= weights.size:
                raise DomainError(f"Rank {excluded_rank} outside [1, {weights.size}]")
            weights[excluded_rank - 1] = 0.0
        finite = int(np.count_nonzero(weights))
        capacity = int(capacity)
        if not 1 <= capacity <= finite:
            raise DomainError(f"Capacity {capacity} must lie in [1, {finite}]")
        positive = weights > 0
        rates = np.where(positive, weights, 1.0)
        rng = np.random.default_rng(seed)
        parts = []
        for rows in self._batches(weights.size, trials):
            clocks = np.where(positive, rng.standard_exponential((rows, weights.size)) / rates, np.inf)
            parts.append(np.partition(clocks, capacity - 1, axis=1)[:, capacity - 1])
        return TCDistribution(capacity=capacity, samples=np.concatenate(parts),
                              excluded_rank=excluded_rank)

