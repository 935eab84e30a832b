from src.cache_analysis.components.emitter import write_frame
from src.cache_analysis.pipeline.base import ScenarioPipeline


class SimulationPipeline(ScenarioPipeline):
    """Per-rank simulation estimates, plus the two-level miss stream when the scenario asks for it."""

    def main(self):
        try:
            config, scenario, runner = self.prepare()
            stage = config.get_stage_config("simulation")
            stem = f"{scenario.name}_{stage.file_stem}"
            written = [write_frame(runner.simulate(scenario), stage.root_dir / f"{stem}.csv")]
            tandem = runner.tandem(scenario)
            if tandem is not None:
                written.append(write_frame(tandem, stage.root_dir / f"{stem}_tandem.csv"))
            return written
        except Exception as e:
            raise e
