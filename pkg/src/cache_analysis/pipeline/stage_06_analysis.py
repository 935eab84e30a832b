from src.cache_analysis.components.emitter import write_frame
from src.cache_analysis.pipeline.base import ScenarioPipeline


class AnalysisPipeline(ScenarioPipeline):
    """erfc refinement gap, Berry-Esseen bound and large-catalogue asymptotics."""

    def main(self):
        try:
            config, scenario, runner = self.prepare()
            stage = config.get_stage_config("analysis")
            return [write_frame(runner.analyze(scenario),
                                stage.root_dir / f"{scenario.name}_{stage.file_stem}.csv")]
        except Exception as e:
            raise e
