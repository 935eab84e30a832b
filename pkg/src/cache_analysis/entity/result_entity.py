from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Tuple

import numpy as np
import pandas as pd
from scipy import stats


@dataclass(frozen=True)
class CheSolution:
    """Characteristic time of an LRU cache and the diagnostics of its root search."""
    t_C: float
    residual: float
    bracket: Tuple[float, float]
    iterations: int
    capacity: float
    capacity_units: str = "items"
    excluded_rank: Optional[int] = None


@dataclass(frozen=True)
class RandomSolution:
    tau_C: float
    residual: float
    iterations: int
    capacity: float
    bracket: Tuple[float, float] = (0.0, 0.0)


@dataclass(frozen=True, eq=False)
class HitProfile:
    """
    Hit rates of one cache over a popularity law.

    Attributes:
        law: the law the rates were computed on.
        ranks (np.ndarray): evaluation ranks (1-based).
        hit_rates (np.ndarray): h(n) at ``ranks``.
        overall (float): request-weighted hit rate over the whole law.
        hit_of_weight: maps base weights to hit rates when h depends on q(n) only.
        per_rank (np.ndarray): h(n) for every rank when known item by item; takes precedence
            over ``hit_of_weight``.
    """
    law: Any
    ranks: np.ndarray
    hit_rates: np.ndarray
    overall: float
    hit_of_weight: Optional[Callable[[np.ndarray], np.ndarray]] = None
    per_rank: Optional[np.ndarray] = None

    def hit_at(self, ranks: np.ndarray, weights: Optional[np.ndarray] = None) -> np.ndarray:
        ranks = np.asarray(ranks, dtype=np.int64)
        if self.per_rank is not None:
            return self.per_rank[ranks - 1]
        if self.hit_of_weight is not None:
            if weights is None:
                weights = self.law.weights(ranks)
            return self.hit_of_weight(np.asarray(weights, dtype=float))
        raise ValueError("Hit profile has no way to evaluate arbitrary ranks")

    @classmethod
    def constant(cls, law: Any, value: float) -> "HitProfile":
        """A profile with h(n) = value for every rank."""
        rate = float(value)
        return cls(
            law=law,
            ranks=np.empty(0, dtype=np.int64),
            hit_rates=np.empty(0),
            overall=rate,
            hit_of_weight=lambda w: np.full(np.shape(w), rate),
        )


@dataclass(frozen=True, eq=False)
class SimEstimate:
    """
    Result of one simulated cache.

    Per-rank arrays are indexed by rank - 1. ``ci_halfwidth`` is the 95%
    Agresti-Coull half-width of each per-rank Bernoulli hit ratio.
    """
    policy: str
    capacity: int
    requests: np.ndarray
    hits: np.ndarray
    overall: float
    overall_halfwidth: float
    measured_requests: int
    z_value: float = 1.96
    min_requests: int = 100

    @property
    def hit_rate(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.requests > 0, self.hits / np.maximum(self.requests, 1), np.nan)

    @property
    def ci_halfwidth(self) -> np.ndarray:
        n = self.requests + 4.0
        p = (self.hits + 2.0) / n
        return self.z_value * np.sqrt(p * (1.0 - p) / n)

    @property
    def reported(self) -> np.ndarray:
        return self.requests >= self.min_requests

    def at(self, ranks) -> np.ndarray:
        idx = np.asarray(ranks, dtype=np.int64) - 1
        return self.hit_rate[idx]

    def to_frame(self) -> pd.DataFrame:
        """Per-rank rows (rank, requests, hits, hit_rate, ci_halfwidth) for ranks with enough requests."""
        mask = self.reported
        ranks = np.flatnonzero(mask) + 1
        return pd.DataFrame({
            "rank": ranks,
            "requests": self.requests[mask],
            "hits": self.hits[mask],
            "hit_rate": self.hit_rate[mask],
            "ci_halfwidth": self.ci_halfwidth[mask],
        })


@dataclass(frozen=True, eq=False)
class TandemResult:
    level1: SimEstimate
    level2: SimEstimate
    miss_frequency: np.ndarray
    miss_law: Any


@dataclass(frozen=True, eq=False)
class XDistribution:
    """Samples of X(t), the number of distinct objects requested within time t."""
    t: float
    samples: np.ndarray
    mean_theory: float
    variance_theory: float

    @property
    def mean(self) -> float:
        return float(np.mean(self.samples))

    @property
    def variance(self) -> float:
        return float(np.var(self.samples, ddof=1))

    def ks_distance(self) -> float:
        """Kolmogorov distance between the samples and Normal(m(t), sigma^2(t))."""
        scale = np.sqrt(self.variance_theory)
        return float(stats.kstest(self.samples, "norm", args=(self.mean_theory, scale)).statistic)

    def histogram(self) -> pd.DataFrame:
        values, counts = np.unique(self.samples, return_counts=True)
        return pd.DataFrame({"x": values, "frequency": counts / self.samples.size})


@dataclass(frozen=True, eq=False)
class TCDistribution:
    """Samples of T_C, the C-th smallest of the independent exponential clocks."""
    capacity: int
    samples: np.ndarray
    excluded_rank: Optional[int] = None

    @property
    def mean(self) -> float:
        return float(np.mean(self.samples))

    @property
    def std(self) -> float:
        return float(np.std(self.samples, ddof=1))

    def hit_rate(self, q: float) -> float:
        """E(1 - exp(-q T_C)), the hit rate of an object with weight q."""
        return float(np.mean(-np.expm1(-q * self.samples)))

    def standardized(self, center: Optional[float] = None, scale: Optional[float] = None) -> np.ndarray:
        center = self.mean if center is None else center
        scale = self.std if scale is None else scale
        return (self.samples - center) / scale


@dataclass(frozen=True)
class ZipfAsymptotics:
    alpha: float
    delta: float
    population: int
    psi_inv_delta: float
    tc_scale: float
    tc_fluctuation_scale: float


@dataclass(frozen=True, eq=False)
class ValidationReport:
    table: pd.DataFrame
    max_deviation: float
    tolerance: float
    per_policy: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.max_deviation <= self.tolerance)
