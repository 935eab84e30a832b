import logging

from src.cache_analysis.components.emitter import write_frame
from src.cache_analysis.pipeline.base import ScenarioPipeline


class SolvePipeline(ScenarioPipeline):
    """Characteristic time t_C and random-replacement constant tau_C at every capacity."""

    def main(self):
        try:
            config, scenario, runner = self.prepare()
            stage = config.get_stage_config("solve")
            table = runner.solve(scenario)
            logging.info(f"Solved {len(table)} capacities for '{scenario.name}'")
            return [write_frame(table, stage.root_dir / f"{scenario.name}_{stage.file_stem}.csv")]
        except Exception as e:
            raise e
