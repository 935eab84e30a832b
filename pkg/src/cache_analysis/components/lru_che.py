import logging
from typing import Callable, List, Optional, Sequence, Union

import numpy as np

from src.cache_analysis.components.popularity import (
    PopularityLaw,
    RankSegmentation,
    evaluation_ranks,
    filter_law,
    summation_table,
)
from src.cache_analysis.entity.config_entity import SolverConfig
from src.cache_analysis.entity.result_entity import CheSolution, HitProfile
from src.cache_analysis.exception import CapacitySaturatedError, DomainError
from src.cache_analysis.utils.roots import expand_bracket, safeguarded_newton

Sizes = Union[Callable[[np.ndarray], np.ndarray], Sequence[float], np.ndarray]

CAPACITY_UNITS = ("items", "chunks")


class CheApproximation:
    """
    LRU hit rates from the characteristic time t_C.

    X(t), the number of distinct items requested within t, has mean
    m(t) = sum(1 - exp(-q t)) and variance m(2t) - m(t). t_C solves m(t) = C and
    item n hits with probability 1 - exp(-q(n) t_C).
    """

    def __init__(self, config: SolverConfig):
        self.config = config

    def table(self, law: PopularityLaw) -> RankSegmentation:
        return summation_table(law, self.config.epsilon, self.config.exact_limit)

    @staticmethod
    def _check_time(t: float) -> float:
        if not t >= 0:
            raise DomainError(f"Time must be non-negative, got {t}")
        return float(t)

    def mean_occupancy(self, law: PopularityLaw, t: float) -> float:
        t = self._check_time(t)
        return self.table(law).bucketed_sum(lambda q: -np.expm1(-q * t))

    def variance_occupancy(self, law: PopularityLaw, t: float) -> float:
        t = self._check_time(t)
        return self.table(law).bucketed_sum(lambda q: -np.expm1(-q * t) * np.exp(-q * t))

    def derivative(self, law: PopularityLaw, t: float) -> float:
        """m'(t) = sum q exp(-q t)."""
        t = self._check_time(t)
        return self.table(law).bucketed_sum(lambda q: q * np.exp(-q * t))

    def _solve(self, counts: np.ndarray, q: np.ndarray, capacity: float, units: str,
               excluded_rank: Optional[int] = None) -> CheSolution:
        if units not in CAPACITY_UNITS:
            raise DomainError(f"Unknown capacity unit '{units}', expected one of {CAPACITY_UNITS}")
        if not capacity > 0:
            raise DomainError(f"Capacity must be positive, got {capacity}")
        bound = float(np.sum(counts[q > 0]))
        if capacity >= bound:
            raise CapacitySaturatedError(capacity, bound)

        def residual(t: float) -> float:
            return float(np.dot(counts, -np.expm1(-q * t))) - capacity

        def slope(t: float) -> float:
            return float(np.dot(counts, q * np.exp(-q * t)))

        # 1 - exp(-x) <= x, so m(C / sum q) <= C
        t_lo = capacity / float(np.dot(counts, q))
        lo, hi = expand_bracket(residual, t_lo, 2.0 * t_lo)
        ftol = max(self.config.tolerance * capacity, self.config.absolute_tolerance)
        result = safeguarded_newton(residual, slope, lo, hi, ftol, self.config.max_iterations)
        logging.info(
            f"t_C={result.root:.10g} for C={capacity:g} {units} "
            f"({result.iterations} iterations, residual {result.residual:.3g})"
        )
        return CheSolution(
            t_C=result.root,
            residual=result.residual,
            bracket=result.bracket,
            iterations=result.iterations,
            capacity=float(capacity),
            capacity_units=units,
            excluded_rank=excluded_rank,
        )

    def solve_t_C(self, law: PopularityLaw, capacity: float, units: str = "items",
                  sizes: Optional[Sizes] = None) -> CheSolution:
        """
        Root of sum(1 - exp(-q(n) t)) theta(n) = C.

        Args:
            law: popularity law
            capacity: cache size C, real-valued
            units: unit of C, "items" or "chunks"
            sizes: optional object sizes theta(n), as a vectorised function of
                rank or as an array indexed by rank - 1; C is then in size units

        Raises:
            CapacitySaturatedError: C is at least the catalogue size
        """
        table = self.table(law)
        counts = table.counts
        if sizes is not None:
            ranks = table.representative_ranks
            if callable(sizes):
                theta = np.asarray(sizes(ranks), dtype=float)
            else:
                theta = np.asarray(sizes, dtype=float)[ranks - 1]
            counts = counts * theta
        return self._solve(counts, table.q_rep, capacity, units)

    def solve_t_C_excluding(self, law: PopularityLaw, capacity: float, n: int) -> CheSolution:
        """t_C(n), the root of sum over i != n of (1 - exp(-q(i) t)) = C."""
        q_n = law.weight(n)
        table = self.table(law)
        # rank n enters the table with multiplicity -1
        counts = np.append(table.counts, -1.0)
        q = np.append(table.q_rep, q_n)
        return self._solve(counts, q, capacity, "items", excluded_rank=n)

    def lru_hit_profile(self, law: PopularityLaw, solution: CheSolution,
                        at: Sequence[int] = ()) -> HitProfile:
        t_C = solution.t_C

        def hit_of_weight(w: np.ndarray) -> np.ndarray:
            return -np.expm1(-np.asarray(w, dtype=float) * t_C)

        ranks = evaluation_ranks(law, at)
        table = self.table(law)
        mass = table.bucketed_sum(lambda q: q)
        overall = table.bucketed_sum(lambda q: q * hit_of_weight(q)) / mass if mass > 0 else 0.0
        return HitProfile(
            law=law,
            ranks=ranks,
            hit_rates=hit_of_weight(law.weights(ranks)) if ranks.size else np.empty(0),
            overall=overall,
            hit_of_weight=hit_of_weight,
        )

    def capacity_profile(self, law: PopularityLaw, capacity: float,
                         at: Sequence[int] = ()) -> HitProfile:
        """LRU profile at capacity C; a cache holding the whole catalogue hits every request."""
        if law.population == 0:
            logging.warning("Cache sees no requests; reporting a zero hit rate")
            return HitProfile.constant(law, 0.0)
        try:
            solution = self.solve_t_C(law, capacity)
        except CapacitySaturatedError as e:
            logging.warning(str(e))
            profile = HitProfile.constant(law, 1.0)
            ranks = evaluation_ranks(law, at)
            return HitProfile(law, ranks, np.ones(ranks.size), 1.0, profile.hit_of_weight)
        return self.lru_hit_profile(law, solution, at)

    def per_object_hit_rate(self, law: PopularityLaw, capacity: float, n: int) -> float:
        """1 - exp(-q(n) t_C(n)), with t_C(n) solved without item n."""
        solution = self.solve_t_C_excluding(law, capacity, n)
        return float(-np.expm1(-law.weight(n) * solution.t_C))

    def hierarchy_profiles(self, law: PopularityLaw, capacities: Sequence[float],
                           at: Sequence[int] = ()) -> List[HitProfile]:
        """
        Profiles of a chain of LRU caches; level k sees the misses of level k - 1.

        Each returned profile's ``law`` is the request law reaching that level.
        """
        profiles = []
        current = law
        for level, capacity in enumerate(capacities, start=1):
            profile = self.capacity_profile(current, capacity, at)
            logging.info(f"Level {level}: C={capacity:g}, overall hit rate {profile.overall:.6f}")
            profiles.append(profile)
            current = filter_law(current, profile)
        return profiles
