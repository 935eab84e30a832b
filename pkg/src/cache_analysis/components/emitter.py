import logging
from pathlib import Path
from typing import List

import pandas as pd

from src.cache_analysis.components.scenario_validation import scenario_to_dict
from src.cache_analysis.constant import SWEEP_COLUMNS
from src.cache_analysis.entity.config_entity import Scenario
from src.cache_analysis.utils.chart import save_chart
from src.cache_analysis.utils.common import create_directories, save_yaml

OUTPUT_FORMATS = ("csv", "svg")


def _series_labels(table: pd.DataFrame) -> list:
    return [f"{policy} overall" if pd.isna(rank) else f"{policy} rank {int(rank)}"
            for policy, rank in zip(table["policy"], table["rank"])]


def write_frame(frame: pd.DataFrame, path: Path) -> Path:
    path = Path(path)
    create_directories([path.parent], verbose=False)
    frame.to_csv(path, index=False)
    logging.info(f"Table with {len(frame)} rows written to: {path}")
    return path


def emit(table: pd.DataFrame, out_dir: Path, stem: str, output_format: str = "csv") -> List[Path]:
    """
    Write a sweep table as CSV; ``svg`` additionally plots hit rate against capacity.

    The CSV holds exactly the columns capacity, unit, policy, rank, hit_rate,
    ci_halfwidth; rank is empty on overall rows.
    """
    if output_format not in OUTPUT_FORMATS:
        raise ValueError(f"Unknown output format '{output_format}', expected one of {OUTPUT_FORMATS}")
    out_dir = Path(out_dir)
    written = [write_frame(table[SWEEP_COLUMNS], out_dir / f"{stem}.csv")]
    if output_format == "svg":
        data = table.assign(series=_series_labels(table))
        unit = table["unit"].iloc[0] if len(table) else "items"
        written.append(save_chart(out_dir / f"{stem}.svg", data, "capacity", "hit_rate", "series",
                                  xlabel=f"cache size ({unit})", ylabel="hit rate"))
    return written


def emit_filtered(frame: pd.DataFrame, out_dir: Path, stem: str, output_format: str = "csv") -> List[Path]:
    """Request law and miss-stream weights over rank, plotted log-log for ``svg``."""
    out_dir = Path(out_dir)
    written = [write_frame(frame, out_dir / f"{stem}.csv")]
    if output_format == "svg":
        positive = frame[frame["weight"] > 0]
        written.append(save_chart(out_dir / f"{stem}.svg", positive, "rank", "weight", "series",
                                  log_x=True, log_y=True, ylabel="request weight"))
    return written


def emit_config(scenario: Scenario, path: Path) -> Path:
    """Write a scenario back as a scenario file."""
    path = Path(path)
    save_yaml(path, scenario_to_dict(scenario))
    return path


def write_status(status_file: Path, passed: bool) -> None:
    status_file = Path(status_file)
    create_directories([status_file.parent], verbose=False)
    with open(status_file, "w") as f:
        f.write(f"Validation status: {passed}")
