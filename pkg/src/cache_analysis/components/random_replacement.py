import logging
from typing import Sequence

import numpy as np

from src.cache_analysis.components.popularity import PopularityLaw, evaluation_ranks, summation_table
from src.cache_analysis.entity.config_entity import SolverConfig
from src.cache_analysis.entity.result_entity import HitProfile, RandomSolution
from src.cache_analysis.exception import CapacitySaturatedError, DomainError
from src.cache_analysis.utils.roots import expand_bracket, safeguarded_newton


class RandomReplacementApproximation:
    """
    Hit rates of random replacement, which FIFO shares.

    h(n) = q(n) tau / (S - q(n) + q(n) tau) with S the total mass, and tau_C
    chosen so that the hit rates add up to the capacity.
    """

    def __init__(self, config: SolverConfig):
        self.config = config

    def solve_tau_C(self, law: PopularityLaw, capacity: float) -> RandomSolution:
        if not capacity > 0:
            raise DomainError(f"Capacity must be positive, got {capacity}")
        table = summation_table(law, self.config.epsilon, self.config.exact_limit)
        counts, q = table.counts, table.q_rep
        support = float(np.sum(counts[q > 0]))
        if capacity >= support:
            raise CapacitySaturatedError(capacity, support)
        if support < 2:
            raise DomainError("Random replacement needs at least two requested items")
        rest = float(np.dot(counts, q)) - q

        def residual(tau: float) -> float:
            return float(np.dot(counts, q * tau / (rest + q * tau))) - capacity

        def slope(tau: float) -> float:
            return float(np.dot(counts, q * rest / (rest + q * tau) ** 2))

        lo, hi = expand_bracket(residual, 0.0, 1.0)
        ftol = max(self.config.tolerance * capacity, self.config.absolute_tolerance)
        result = safeguarded_newton(residual, slope, lo, hi, ftol, self.config.max_iterations)
        logging.info(
            f"tau_C={result.root:.10g} for C={capacity:g} "
            f"({result.iterations} iterations, residual {result.residual:.3g})"
        )
        return RandomSolution(
            tau_C=result.root,
            residual=result.residual,
            iterations=result.iterations,
            capacity=float(capacity),
            bracket=result.bracket,
        )

    def random_hit_profile(self, law: PopularityLaw, solution: RandomSolution,
                           at: Sequence[int] = ()) -> HitProfile:
        table = summation_table(law, self.config.epsilon, self.config.exact_limit)
        mass = table.bucketed_sum(lambda q: q)
        ranks = evaluation_ranks(law, at)
        tau = solution.tau_C

        def hit_of_weight(w: np.ndarray) -> np.ndarray:
            w = np.asarray(w, dtype=float)
            return w * tau / (mass - w + w * tau)

        return HitProfile(
            law=law,
            ranks=ranks,
            hit_rates=hit_of_weight(law.weights(ranks)) if ranks.size else np.empty(0),
            overall=table.bucketed_sum(lambda q: q * hit_of_weight(q)) / mass,
            hit_of_weight=hit_of_weight,
        )

    def capacity_profile(self, law: PopularityLaw, capacity: float,
                         at: Sequence[int] = ()) -> HitProfile:
        try:
            solution = self.solve_tau_C(law, capacity)
        except CapacitySaturatedError as e:
            logging.warning(str(e))
            ranks = evaluation_ranks(law, at)
            return HitProfile(law, ranks, np.ones(ranks.size), 1.0,
                              HitProfile.constant(law, 1.0).hit_of_weight)
        return self.random_hit_profile(law, solution, at)
