from dataclasses import replace
from pathlib import Path
from typing import Optional

from src.cache_analysis.components.scenario_validation import ScenarioValidation
from src.cache_analysis.constant import CONFIG_FILE_PATH, PARAMS_FILE_PATH, SCHEMA_FILE_PATH
from src.cache_analysis.entity.config_entity import (
    Scenario,
    SimulatorConfig,
    SolverConfig,
    StageConfig,
    StageOptions,
    ValidationConfig,
)
from src.cache_analysis.exception import ScenarioValidationError
from src.cache_analysis.utils.common import create_directories, load_yaml


class ConfigurationManager:
    """
    A class responsible for managing configurations across the CLI stages.
    It loads the configuration files (YAML) and returns stage-specific
    configuration objects with all necessary parameters.

    Attributes:
        config (ConfigBox): artifact locations per stage (config/config.yaml).
        params (ConfigBox): numerical parameters (params.yaml).
        schema (dict): JSON schema of scenario files (schema.yaml).
        out_root (Path): replaces the artifacts root when set.
    """
    def __init__(self, config_filepath=CONFIG_FILE_PATH,
                 params_filepath=PARAMS_FILE_PATH,
                 schema_filepath=SCHEMA_FILE_PATH,
                 out_root: Optional[Path] = None):
        self.config = load_yaml(Path(config_filepath))
        self.params = load_yaml(Path(params_filepath))
        self.schema = load_yaml(Path(schema_filepath)).to_dict()["scenario"]
        self.out_root = Path(out_root) if out_root is not None else None

        create_directories([self.out_root or self.config.artifacts_root])

    def _relocate(self, path: str) -> Path:
        """Map a configured artifact path under ``out_root``."""
        path = Path(path)
        if self.out_root is None:
            return path
        return self.out_root / path.relative_to(self.config.artifacts_root)

    def get_solver_config(self, epsilon: Optional[float] = None) -> SolverConfig:
        solver = self.params.solver
        quadrature = self.params.quadrature
        return SolverConfig(
            tolerance=float(solver.tolerance),
            absolute_tolerance=float(solver.absolute_tolerance),
            epsilon=float(epsilon if epsilon is not None else solver.epsilon),
            exact_limit=int(solver.exact_limit),
            max_iterations=int(solver.max_iterations),
            psi_tolerance=float(quadrature.psi_tolerance),
            erfc_tolerance=float(quadrature.erfc_tolerance),
            quadrature_limit=int(quadrature.limit),
        )

    def get_simulator_config(self) -> SimulatorConfig:
        simulator = self.params.simulator
        return SimulatorConfig(
            max_population=int(simulator.max_population),
            chunk_size=int(simulator.chunk_size),
            min_requests_per_rank=int(simulator.min_requests_per_rank),
            z_value=float(simulator.confidence),
            warmup_multiple=int(simulator.warmup_multiple),
            min_warmup=int(simulator.min_warmup),
            sample_batch=int(simulator.sample_batch),
        )

    def get_n_jobs(self, n_jobs: Optional[int] = None) -> int:
        return int(n_jobs if n_jobs is not None else self.params.sweep.n_jobs)

    def get_stage_config(self, stage: str) -> StageConfig:
        if stage not in self.config:
            raise ValueError(f"Stage '{stage}' not found in config")
        config = self.config[stage]
        root_dir = self._relocate(config.root_dir)
        create_directories([root_dir])
        return StageConfig(root_dir=root_dir, file_stem=config.file_stem)

    def get_validation_config(self) -> ValidationConfig:
        config = self.config.validation
        root_dir = self._relocate(config.root_dir)
        create_directories([root_dir])
        return ValidationConfig(
            root_dir=root_dir,
            STATUS_FILE=str(self._relocate(config.STATUS_FILE)),
            file_stem=config.file_stem,
        )

    def load_scenario(self, path) -> Scenario:
        path = Path(path)
        if not path.is_file():
            raise ScenarioValidationError("scenario", f"file {path} does not exist")
        document = load_yaml(path).to_dict()
        return ScenarioValidation(self.schema).build(document)

    @staticmethod
    def apply_options(scenario: Scenario, options: StageOptions) -> Scenario:
        """Command-line values take precedence over the scenario file."""
        changes = {}
        if options.seed is not None:
            changes["seed"] = int(options.seed)
        if options.output_format is not None:
            changes["output_format"] = options.output_format
        if options.tolerance is not None:
            changes["tolerance"] = float(options.tolerance)
        if options.trials is not None:
            changes["trials"] = int(options.trials)
        return replace(scenario, **changes) if changes else scenario

    def set_out_root(self, out_root) -> None:
        self.out_root = Path(out_root)
        create_directories([self.out_root])
