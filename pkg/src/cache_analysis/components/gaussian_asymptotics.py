"""Gaussian approximation of X(t) and large-catalogue asymptotics of t_C.

For Zipf(alpha) popularity with N items and cache fraction delta = C / N,
t_C ~ psi^-1(delta) N^alpha where psi(beta) = 1 - int_0^1 exp(-beta / x^alpha) dx,
and T_C fluctuates around it on the scale N^(alpha - 1/2).
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Tuple

import numpy as np
from scipy import integrate, special, stats

from src.cache_analysis.components.lru_che import CheApproximation
from src.cache_analysis.components.popularity import PopularityLaw
from src.cache_analysis.constant import BERRY_ESSEEN_K, ERFC_TRUNCATION
from src.cache_analysis.entity.config_entity import SolverConfig
from src.cache_analysis.entity.result_entity import ZipfAsymptotics
from src.cache_analysis.exception import (
    CapacitySaturatedError,
    DomainError,
    QuadratureAccuracyError,
    UndefinedBoundError,
)
from src.cache_analysis.utils.roots import safeguarded_newton

SQRT2 = math.sqrt(2.0)


def _integrate(func: Callable[[float], float], a: float, b: float, points: Sequence[float],
               tolerance: float, limit: int, what: str) -> float:
    points = [p for p in points if a < p < b]
    result = integrate.quad(
        func, a, b,
        points=points or None,
        epsabs=tolerance,
        epsrel=tolerance,
        limit=limit,
        full_output=1,
    )
    estimate, error = result[0], result[1]
    # a fourth element is quad's warning message
    if len(result) > 3 and error > tolerance:
        raise QuadratureAccuracyError(f"{what}: {result[3]}", estimate, error)
    return float(estimate)


@dataclass(frozen=True, eq=False)
class GaussianXModel:
    """X(t) ~ Normal(m(t), sigma^2(t))."""
    law: PopularityLaw
    che: CheApproximation

    def mean(self, t: float) -> float:
        return self.che.mean_occupancy(self.law, t)

    def variance(self, t: float) -> float:
        return self.che.variance_occupancy(self.law, t)

    def std(self, t: float) -> float:
        return math.sqrt(max(self.variance(t), 0.0))

    def cdf(self, x, t: float):
        sd = self.std(t)
        mean = self.mean(t)
        if sd == 0.0:
            return np.where(np.asarray(x) >= mean, 1.0, 0.0)
        return stats.norm.cdf(x, loc=mean, scale=sd)

    def prob_below(self, capacity: float, t: float) -> float:
        """P(X(t) < C), which is also P(T_C > t)."""
        mean, sd = self.mean(t), self.std(t)
        gap = capacity - mean
        if sd == 0.0:
            return 1.0 if gap > 0 else (0.0 if gap < 0 else 0.5)
        return float(0.5 * special.erfc(-gap / (SQRT2 * sd)))


class GaussianAnalysis:
    def __init__(self, config: SolverConfig):
        self.config = config
        self.che = CheApproximation(config)

    def model(self, law: PopularityLaw) -> GaussianXModel:
        return GaussianXModel(law, self.che)

    def berry_esseen_bound(self, law: PopularityLaw, t: float) -> float:
        """Bound 0.56 / sigma(t) on the Kolmogorov distance of standardised X(t) to N(0, 1)."""
        sd = self.model(law).std(t)
        if sd == 0.0:
            raise UndefinedBoundError(f"sigma({t:g}) = 0, the Berry-Esseen bound is undefined")
        return BERRY_ESSEEN_K / sd

    def erfc_hit_rate(self, law: PopularityLaw, capacity: float, q: float) -> float:
        """
        Hit rate of an item of weight q without collapsing T_C to t_C.

        h = 1 - 1/2 int_0^inf erfc((C - m(u)) / (sqrt(2) sigma(u))) q exp(-q u) du,
        integrated in v = q u and truncated at v = 40.

        Raises:
            CapacitySaturatedError: C is at least the catalogue size
            QuadratureAccuracyError: the quadrature misses its error target
        """
        if not q > 0:
            raise DomainError(f"Weight must be positive, got {q}")
        if capacity >= law.population:
            raise CapacitySaturatedError(capacity, law.population)
        solution = self.che.solve_t_C(law, capacity)
        model = self.model(law)

        def integrand(v: float) -> float:
            u = v / q
            gap = capacity - model.mean(u)
            sd = model.std(u)
            if sd == 0.0:
                value = 0.0 if gap > 0 else (2.0 if gap < 0 else 1.0)
            else:
                value = special.erfc(gap / (SQRT2 * sd))
            return value * math.exp(-v)

        integral = _integrate(
            integrand, 0.0, ERFC_TRUNCATION, [q * solution.t_C],
            self.config.erfc_tolerance, self.config.quadrature_limit, "erfc hit rate",
        )
        return min(max(1.0 - 0.5 * integral, 0.0), 1.0)

    def step_function_gap(self, law: PopularityLaw, capacity: float, q: float) -> float:
        """|erfc hit rate - (1 - exp(-q t_C))|."""
        t_C = self.che.solve_t_C(law, capacity).t_C
        return abs(self.erfc_hit_rate(law, capacity, q) + math.expm1(-q * t_C))

    def psi(self, alpha: float, beta: float) -> float:
        """psi(beta) = 1 - int_0^1 exp(-beta / x^alpha) dx."""
        _check_alpha(alpha)
        if beta < 0:
            raise DomainError(f"beta must be non-negative, got {beta}")
        if beta == 0:
            return 0.0
        integral = _integrate(
            lambda x: math.exp(-beta / x ** alpha), 0.0, 1.0, [beta ** (1.0 / alpha)],
            self.config.psi_tolerance, self.config.quadrature_limit, "psi",
        )
        return 1.0 - integral

    def psi_prime(self, alpha: float, beta: float) -> float:
        """psi'(beta) = int_0^1 x^-alpha exp(-beta / x^alpha) dx."""
        _check_alpha(alpha)
        if not beta > 0:
            raise DomainError(f"psi' needs beta > 0, got {beta}")
        return _integrate(
            lambda x: math.exp(-beta / x ** alpha) / x ** alpha, 0.0, 1.0, [beta ** (1.0 / alpha)],
            self.config.psi_tolerance, self.config.quadrature_limit, "psi'",
        )

    def psi_inverse(self, alpha: float, delta: float) -> float:
        _check_delta(delta)
        # psi(beta) >= 1 - exp(-beta)
        hi = -math.log1p(-delta)
        result = safeguarded_newton(
            lambda b: self.psi(alpha, b) - delta,
            lambda b: self.psi_prime(alpha, b),
            0.0, hi, 10.0 * self.config.psi_tolerance, self.config.max_iterations,
        )
        return result.root

    def tc_asymptotic(self, alpha: float, population: int, delta: float) -> float:
        """t_C ~ psi^-1(delta) N^alpha."""
        return self.psi_inverse(alpha, delta) * float(population) ** alpha

    def tc_fluctuation(self, alpha: float, population: int, delta: float) -> float:
        """Standard deviation scale N^(alpha - 1/2) sqrt(psi(2 beta) - delta) / psi'(beta) of T_C."""
        return self.zipf_asymptotics(alpha, population, delta).tc_fluctuation_scale

    def zipf_asymptotics(self, alpha: float, population: int, delta: float) -> ZipfAsymptotics:
        beta = self.psi_inverse(alpha, delta)
        spread = max(self.psi(alpha, 2.0 * beta) - delta, 0.0)
        fluctuation = float(population) ** (alpha - 0.5) * math.sqrt(spread) / self.psi_prime(alpha, beta)
        logging.info(f"Zipf({alpha}) N={population} delta={delta}: psi^-1={beta:.10g}")
        return ZipfAsymptotics(
            alpha=alpha,
            delta=delta,
            population=int(population),
            psi_inv_delta=beta,
            tc_scale=beta * float(population) ** alpha,
            tc_fluctuation_scale=fluctuation,
        )


def geometric_asymptotics(rho: float, t: float) -> Tuple[float, float]:
    """(ln t / ln(1/rho), ln 2 / ln(1/rho)): growth of m(t) and the plateau of sigma^2(t)."""
    if not 0.0 < rho < 1.0:
        raise DomainError(f"rho must lie in (0, 1), got {rho}")
    if not t > 1.0:
        raise DomainError(f"t must exceed 1, got {t}")
    log_inv_rho = -math.log(rho)
    return math.log(t) / log_inv_rho, math.log(2.0) / log_inv_rho


def _check_alpha(alpha: float) -> None:
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")


def _check_delta(delta: float) -> None:
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")


def dkw_margin(sample_size: int, level: float = 0.01) -> float:
    """Radius of the Dvoretzky-Kiefer-Wolfowitz band of an empirical CDF at confidence 1 - level."""
    return math.sqrt(math.log(2.0 / level) / (2.0 * sample_size))
