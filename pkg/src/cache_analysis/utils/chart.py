import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import pandas as pd
import seaborn as sns


def save_chart(path: Path, data: pd.DataFrame, x: str, y: str, hue: str,
               log_x: bool = True, log_y: bool = False,
               xlabel: str = None, ylabel: str = None) -> Path:
    """
    Saves a seaborn line chart as SVG.

    Parameters:
        path (Path): destination file (``.svg``).
        data (pd.DataFrame): long-format data, one line per ``hue`` value.
        x, y, hue (str): column names.
        log_x, log_y (bool): logarithmic axes.
    """
    sns.set_theme(style="whitegrid", palette="deep")
    sns.set_context("notebook", font_scale=1.0)
    # stable element ids, so identical data gives identical bytes
    plt.rcParams["svg.hashsalt"] = "cache-analysis"

    fig, ax = plt.subplots(figsize=(8, 5))
    sns.lineplot(data=data, x=x, y=y, hue=hue, marker="o", markersize=3, ax=ax)
    if log_x:
        ax.set_xscale("log")
    if log_y:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel or x)
    ax.set_ylabel(ylabel or y)
    ax.legend(title=None, fontsize="small")

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", bbox_inches="tight", metadata={"Date": None})
    plt.close(fig)
    logging.info(f"Chart saved to: {path}")
    return path
