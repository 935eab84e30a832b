from src.cache_analysis.components.emitter import emit_filtered
from src.cache_analysis.pipeline.base import ScenarioPipeline


class FilterPipeline(ScenarioPipeline):
    """Request law and the miss stream each LRU level passes on."""

    def main(self):
        try:
            config, scenario, runner = self.prepare()
            stage = config.get_stage_config("filter")
            return emit_filtered(runner.filter(scenario), stage.root_dir,
                                 f"{scenario.name}_{stage.file_stem}", scenario.output_format)
        except Exception as e:
            raise e
