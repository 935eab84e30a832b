from pathlib import Path
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple


@dataclass(frozen=True)
class SolverConfig:
    """
    Numerical settings shared by the analytic components.

    Attributes:
        tolerance (float): relative residual target for t_C and tau_C roots.
        absolute_tolerance (float): residual floor for tiny capacities.
        epsilon (float): weight-ratio bound of a rank segment.
        exact_limit (int): laws with at most this many objects are summed term by term.
        max_iterations (int): root-finder iteration budget.
        psi_tolerance (float): absolute quadrature target for psi and psi'.
        erfc_tolerance (float): absolute quadrature target for the erfc hit rate.
        quadrature_limit (int): maximum number of adaptive subintervals.
    """
    tolerance: float = 1e-9
    absolute_tolerance: float = 1e-12
    epsilon: float = 1e-4
    exact_limit: int = 1_000_000
    max_iterations: int = 200
    psi_tolerance: float = 1e-12
    erfc_tolerance: float = 1e-8
    quadrature_limit: int = 500


@dataclass(frozen=True)
class SimulatorConfig:
    max_population: int = 1_000_000
    chunk_size: int = 1 << 20
    min_requests_per_rank: int = 100
    z_value: float = 1.96
    warmup_multiple: int = 10
    min_warmup: int = 1_000_000
    sample_batch: int = 4_000_000


@dataclass(frozen=True)
class SimConfig:
    """One Monte-Carlo cache run. ``requests`` includes the ``warmup`` prefix."""
    law: Any
    policy: str
    capacity: int
    requests: int
    warmup: Optional[int] = None
    seed: int = 0


@dataclass(frozen=True)
class StageConfig:
    root_dir: Path
    file_stem: str


@dataclass(frozen=True)
class ValidationConfig:
    """
    Configuration of the validation stage.

    Attributes:
        root_dir (Path): directory for validation artifacts.
        STATUS_FILE (str): file recording whether the last validation passed.
        file_stem (str): stem of the comparison report files.
    """
    root_dir: Path
    STATUS_FILE: str
    file_stem: str


@dataclass(frozen=True)
class Scenario:
    """A fully validated scenario document.

    ``popularity`` keeps the canonical law or traffic-mix description; laws are
    built from it on demand so that scenarios compare and round-trip as data.
    """
    name: str
    popularity: Dict[str, Any]
    capacities: Tuple[float, ...]
    capacity_unit: str
    bytes_per_chunk: float
    policies: Tuple[str, ...]
    ranks: Tuple[int, ...] = ()
    erfc_refinement: bool = False
    asymptotic_overlay: bool = False
    requests: int = 2_000_000
    warmup: Optional[int] = None
    trials: int = 10_000
    output_dir: str = "artifacts"
    output_format: str = "csv"
    seed: int = 0
    tolerance: float = 0.02
    sample_time: Optional[float] = None
    tandem_capacity: Optional[float] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def is_traffic_mix(self) -> bool:
        return "traffic_mix" in self.popularity

    def capacity_in_law_units(self, capacity: float) -> float:
        """Capacities in bytes are converted to chunks; items and chunks pass through."""
        if self.capacity_unit == "bytes":
            return capacity / self.bytes_per_chunk
        return capacity


@dataclass(frozen=True)
class StageOptions:
    """Command-line options shared by every stage; ``None`` keeps the scenario or params value."""
    scenario_path: Path
    out_dir: Optional[Path] = None
    seed: Optional[int] = None
    output_format: Optional[str] = None
    tolerance: Optional[float] = None
    epsilon: Optional[float] = None
    n_jobs: Optional[int] = None
    trials: Optional[int] = None
