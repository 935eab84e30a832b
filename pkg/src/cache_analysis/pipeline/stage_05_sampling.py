from src.cache_analysis.components.emitter import write_frame
from src.cache_analysis.pipeline.base import ScenarioPipeline


class SamplingPipeline(ScenarioPipeline):
    """Samples of X(t) and T_C against their Gaussian approximations."""

    def main(self):
        try:
            config, scenario, runner = self.prepare()
            stage = config.get_stage_config("sampling")
            histogram, samples, summary = runner.sample(scenario)
            stem = stage.root_dir / f"{scenario.name}_{stage.file_stem}"
            return [
                write_frame(histogram, stem.with_name(stem.name + "_x.csv")),
                write_frame(samples, stem.with_name(stem.name + "_tc.csv")),
                write_frame(summary, stem.with_name(stem.name + "_summary.csv")),
            ]
        except Exception as e:
            raise e
