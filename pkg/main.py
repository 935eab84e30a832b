import logging
import sys

import click

from src.cache_analysis.entity.config_entity import StageOptions
from src.cache_analysis.exception import QuadratureAccuracyError, ToleranceBreachError
from src.cache_analysis.pipeline.stage_01_solve import SolvePipeline
from src.cache_analysis.pipeline.stage_02_sweep import SweepPipeline
from src.cache_analysis.pipeline.stage_03_validation import ValidationPipeline
from src.cache_analysis.pipeline.stage_04_simulation import SimulationPipeline
from src.cache_analysis.pipeline.stage_05_sampling import SamplingPipeline
from src.cache_analysis.pipeline.stage_06_analysis import AnalysisPipeline
from src.cache_analysis.pipeline.stage_07_filter import FilterPipeline
from src.cache_analysis.utils.logging_utils import setup_logging

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_TOLERANCE = 2


def run_stage(stage_name: str, log_file: str, pipeline_class, options: StageOptions):
    setup_logging(log_file)  # GLOBAL logging for this stage
    try:
        logging.info(f">>>>> {stage_name} started <<<<<<")
        written = pipeline_class(options).main()
        for path in written:
            click.echo(str(path))
        logging.info(f">>>>> {stage_name} completed <<<<<<\n\nx==========x")
    except Exception as e:
        logging.error(f"Error in {stage_name}: {e}")
        raise e


def scenario_options(command):
    """Options shared by every stage."""
    options = [
        click.option("--scenario", "scenario_path", required=True,
                     type=click.Path(exists=True, dir_okay=False), help="Scenario YAML file."),
        click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
                     help="Artifacts root; defaults to the scenario's output.dir."),
        click.option("--seed", type=click.IntRange(min=0, max=2 ** 64 - 1), default=None,
                     help="Seed of every random stream."),
        click.option("--format", "output_format", type=click.Choice(["csv", "svg"]), default=None,
                     help="csv, or svg for a plot next to the CSV."),
        click.option("--tolerance", type=click.FloatRange(min=0, min_open=True), default=None,
                     help="Largest accepted analytic-simulation deviation."),
        click.option("--epsilon", type=click.FloatRange(min=0, min_open=True), default=None,
                     help="Weight-ratio bound of rank segments."),
        click.option("--jobs", "n_jobs", type=int, default=None,
                     help="Parallel workers over capacity points (-1: all cores)."),
    ]
    for option in reversed(options):
        command = option(command)
    return command


@click.group()
def cli():
    """Hit rates of LRU, random, FIFO and static-LFU caches under the independent reference model."""


@cli.command()
@scenario_options
def solve(**kwargs):
    """Characteristic time t_C and constant tau_C per capacity."""
    run_stage("Solve Stage", "solve.log", SolvePipeline, StageOptions(**kwargs))


@cli.command()
@scenario_options
def sweep(**kwargs):
    """Hit rate of every policy over the capacity grid."""
    run_stage("Sweep Stage", "sweep.log", SweepPipeline, StageOptions(**kwargs))


@cli.command()
@scenario_options
def validate(**kwargs):
    """Analytic hit rates against simulation; exit status 2 on a tolerance breach."""
    run_stage("Validation Stage", "validation.log", ValidationPipeline, StageOptions(**kwargs))


@cli.command()
@scenario_options
def simulate(**kwargs):
    """Per-rank simulated hit rates."""
    run_stage("Simulation Stage", "simulation.log", SimulationPipeline, StageOptions(**kwargs))


@cli.command()
@scenario_options
@click.option("--trials", type=click.IntRange(min=1), default=None, help="Number of samples.")
def xdist(**kwargs):
    """Samples of X(t) and T_C."""
    run_stage("Sampling Stage", "sampling.log", SamplingPipeline, StageOptions(**kwargs))


@cli.command()
@scenario_options
def analyze(**kwargs):
    """erfc gap, Berry-Esseen bound and asymptotic t_C."""
    run_stage("Analysis Stage", "analysis.log", AnalysisPipeline, StageOptions(**kwargs))


@cli.command(name="filter")
@scenario_options
def filter_stage(**kwargs):
    """Miss streams of an LRU hierarchy."""
    run_stage("Filter Stage", "filter.log", FilterPipeline, StageOptions(**kwargs))


def main(argv=None) -> int:
    """Run the CLI and map failures to exit codes: 1 invalid input, 2 tolerance breach."""
    try:
        result = cli.main(args=argv, prog_name="cache-analysis", standalone_mode=False)
    except ToleranceBreachError as e:
        click.echo(f"Tolerance breach: {e}", err=True)
        return EXIT_TOLERANCE
    except click.ClickException as e:
        e.show()
        return EXIT_INVALID
    except (click.Abort, ValueError, QuadratureAccuracyError, OSError) as e:
        click.echo(f"Error: {e}", err=True)
        return EXIT_INVALID
    return result if isinstance(result, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
