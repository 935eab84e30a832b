import os
import sys

import pandas as pd
import pytest
import yaml

# Add repo root to sys.path so imports work
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from main import main

SCENARIO = {
    "name": "tiny",
    "popularity": {"law": {"kind": "zipf", "alpha": 0.8, "population": 200}},
    "capacity": {"unit": "items", "values": [20, 50]},
    "policies": ["LFU_STATIC", "LRU_CHE", "RANDOM_FP", "SIM_LRU"],
    "ranks": [1, 10],
    "analysis": {"tandem_capacity": 20},
    "simulation": {"requests": 400_000, "warmup": 50_000, "trials": 500},
    "output": {"dir": "unused", "format": "csv"},
    "seed": 1,
    "validation": {"tolerance": 0.05},
}


@pytest.fixture
def scenario_file(tmp_path):
    path = tmp_path / "tiny.yaml"
    with open(path, "w") as f:
        yaml.safe_dump(SCENARIO, f)
    return path


def run(command, scenario_file, out, *extra):
    return main([command, "--scenario", str(scenario_file), "--out", str(out), "--jobs", "1", *extra])


def test_sweep_writes_table(tmp_path, scenario_file):
    out = tmp_path / "out"
    assert run("sweep", scenario_file, out) == 0
    table = pd.read_csv(out / "sweep" / "tiny_sweep.csv")
    assert list(table.columns) == ["capacity", "unit", "policy", "rank", "hit_rate", "ci_halfwidth"]
    assert set(table["policy"]) == {"LFU_STATIC", "LRU_CHE", "RANDOM_FP", "SIM_LRU"}


def test_sweep_svg_and_reproducible_seed(tmp_path, scenario_file):
    first, second = tmp_path / "a", tmp_path / "b"
    assert run("sweep", scenario_file, first, "--format", "svg", "--seed", "7") == 0
    assert run("sweep", scenario_file, second, "--format", "svg", "--seed", "7") == 0
    assert (first / "sweep" / "tiny_sweep.svg").exists()
    csv = "sweep/tiny_sweep.csv"
    assert (first / csv).read_bytes() == (second / csv).read_bytes()


def test_validate_passes_then_breaches(tmp_path, scenario_file):
    out = tmp_path / "out"
    assert run("validate", scenario_file, out) == 0
    status = out / "validation" / "status.txt"
    assert status.read_text() == "Validation status: True"
    assert (out / "validation" / "tiny_comparison.csv").exists()

    assert run("validate", scenario_file, out, "--tolerance", "1e-9") == 2
    assert status.read_text() == "Validation status: False"


def test_other_stages(tmp_path, scenario_file):
    out = tmp_path / "out"
    assert run("solve", scenario_file, out) == 0
    assert run("simulate", scenario_file, out) == 0
    assert run("xdist", scenario_file, out, "--trials", "300") == 0
    assert run("analyze", scenario_file, out) == 0
    assert run("filter", scenario_file, out) == 0

    solution = pd.read_csv(out / "solve" / "tiny_solution.csv")
    assert {"t_C", "tau_C"} <= set(solution.columns)
    assert (out / "simulation" / "tiny_simulation_tandem.csv").exists()
    samples = pd.read_csv(out / "sampling" / "tiny_samples_tc.csv")
    assert len(samples) == 300
    assert (out / "analysis" / "tiny_analysis.csv").exists()
    assert (out / "filter" / "tiny_filtered_law.csv").exists()


def test_invalid_input_exit_code(tmp_path, scenario_file):
    broken = tmp_path / "broken.yaml"
    with open(broken, "w") as f:
        yaml.safe_dump(dict(SCENARIO, policies=["LRU"]), f)
    assert run("sweep", broken, tmp_path / "out") == 1
    assert main(["sweep", "--scenario", str(tmp_path / "missing.yaml")]) == 1
    assert main(["sweep", "--scenario", str(scenario_file), "--format", "png"]) == 1
