from typing import Tuple

from src.cache_analysis.components.experiments import ExperimentRunner
from src.cache_analysis.config.configuration import ConfigurationManager
from src.cache_analysis.entity.config_entity import Scenario, StageOptions


class ScenarioPipeline:
    """
    Shared set-up of the scenario-driven stages.

    Loads the configuration, reads and validates the scenario, applies the
    command-line overrides and builds the experiment runner.
    """
    def __init__(self, options: StageOptions):
        self.options = options

    def prepare(self) -> Tuple[ConfigurationManager, Scenario, ExperimentRunner]:
        config = ConfigurationManager(out_root=self.options.out_dir)
        scenario = config.apply_options(config.load_scenario(self.options.scenario_path), self.options)
        if self.options.out_dir is None:
            config.set_out_root(scenario.output_dir)
        runner = ExperimentRunner(
            config.get_solver_config(epsilon=self.options.epsilon),
            config.get_simulator_config(),
            n_jobs=config.get_n_jobs(self.options.n_jobs),
        )
        return config, scenario, runner
