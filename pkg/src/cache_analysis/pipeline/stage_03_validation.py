import logging

from src.cache_analysis.components.emitter import write_frame, write_status
from src.cache_analysis.exception import ToleranceBreachError
from src.cache_analysis.pipeline.base import ScenarioPipeline


class ValidationPipeline(ScenarioPipeline):
    """
    A pipeline class comparing analytic hit rates with simulation.

    Writes the side-by-side comparison and a status file; a deviation above
    the tolerance raises ``ToleranceBreachError`` after both are written.
    """

    def main(self):
        try:
            config, scenario, runner = self.prepare()
            validation_config = config.get_validation_config()
            report = runner.validate(scenario)
            path = write_frame(report.table,
                               validation_config.root_dir / f"{scenario.name}_{validation_config.file_stem}.csv")
            write_status(validation_config.STATUS_FILE, report.passed)
            for policy, deviation in report.per_policy.items():
                logging.info(f"{policy}: maximum deviation {deviation:.4f}")
            if not report.passed:
                raise ToleranceBreachError(report.max_deviation, report.tolerance, report)
            return [path]
        except Exception as e:
            raise e
