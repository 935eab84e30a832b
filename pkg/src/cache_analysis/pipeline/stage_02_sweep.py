from src.cache_analysis.components.emitter import emit
from src.cache_analysis.pipeline.base import ScenarioPipeline


class SweepPipeline(ScenarioPipeline):
    """
    A pipeline class producing the hit-rate table of a scenario.

    Every requested policy is evaluated at every capacity of the grid and the
    table is written as CSV (and plotted for the ``svg`` format).
    """

    def main(self):
        """
        Executes the sweep.

        Steps:
            1. Loads configuration and scenario, applying command-line overrides.
            2. Runs the analytic and simulated policies over the capacity grid.
            3. Emits the result table.

        Raises:
            Exception: If any error occurs during the sweep, it is raised for handling upstream.
        """
        try:
            config, scenario, runner = self.prepare()
            stage = config.get_stage_config("sweep")
            table = runner.sweep(scenario)
            return emit(table, stage.root_dir, f"{scenario.name}_{stage.file_stem}", scenario.output_format)
        except Exception as e:
            raise e
