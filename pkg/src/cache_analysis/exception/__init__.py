"""Error hierarchy shared by the analysis components and the CLI."""

from typing import Any, Optional


class CacheAnalysisError(ValueError):
    """Base class for every error raised deliberately by the package."""


class DomainError(CacheAnalysisError):
    """An argument lies outside the domain of the operation."""


class CapacitySaturatedError(CacheAnalysisError):
    """The cache holds the whole catalogue: every hit rate is 1, no finite root exists."""

    def __init__(self, capacity: float, population: float):
        self.capacity = capacity
        self.population = population
        super().__init__(
            f"Capacity {capacity:g} saturates a catalogue of {population:g} items"
        )


class ScenarioValidationError(CacheAnalysisError):
    """A scenario document violates the schema or a semantic constraint."""

    def __init__(self, field: str, constraint: str):
        self.field = field
        self.constraint = constraint
        super().__init__(f"Invalid scenario field '{field}': {constraint}")


class SimulationBoundError(CacheAnalysisError):
    """The catalogue is too large for the Monte-Carlo simulator."""


class UndefinedBoundError(CacheAnalysisError):
    """The Berry-Esseen bound is undefined because sigma(t) = 0."""


class RootFindingError(CacheAnalysisError):
    """A monotone root could not be bracketed or did not converge."""


class QuadratureAccuracyError(ArithmeticError):
    """Adaptive quadrature stopped before reaching its error target."""

    def __init__(self, message: str, estimate: float, error: float):
        self.estimate = estimate
        self.error = error
        super().__init__(f"{message} (estimate={estimate:.12g}, error={error:.3g})")


class ToleranceBreachError(CacheAnalysisError):
    """Analytic and simulated hit rates deviate by more than the tolerance."""

    def __init__(self, max_deviation: float, tolerance: float, report: Optional[Any] = None):
        self.max_deviation = max_deviation
        self.tolerance = tolerance
        self.report = report
        super().__init__(
            f"Maximum deviation {max_deviation:.4f} exceeds tolerance {tolerance:.4f}"
        )
