import logging
from typing import Any, Dict

import numpy as np
from jsonschema import Draft7Validator
from jsonschema.exceptions import best_match

from src.cache_analysis.components.popularity import law_from_spec, traffic_mix_from_spec
from src.cache_analysis.constant import DEFAULT_BYTES_PER_CHUNK
from src.cache_analysis.entity.config_entity import Scenario
from src.cache_analysis.exception import CacheAnalysisError, ScenarioValidationError


class ScenarioValidation:
    """
    Validates scenario documents in two passes: the JSON schema first, then
    the constraints a schema cannot express (share totals, grid ordering,
    parameter domains).
    """

    def __init__(self, schema: Dict[str, Any]):
        self.schema = schema
        self.validator = Draft7Validator(schema)

    def validate_schema(self, document: Dict[str, Any]) -> None:
        error = best_match(self.validator.iter_errors(document))
        if error is not None:
            field = ".".join(str(p) for p in error.absolute_path) or "<root>"
            logging.error(f"Scenario schema violation at {field}: {error.message}")
            raise ScenarioValidationError(field, error.message)

    @staticmethod
    def capacity_grid(capacity: Dict[str, Any]) -> tuple:
        if "values" in capacity:
            grid = tuple(float(c) for c in capacity["values"])
        else:
            span = capacity["range"]
            if span["points"] > 1 and not span["start"] < span["stop"]:
                raise ScenarioValidationError("capacity.range", "start must be below stop")
            grid = tuple(float(c) for c in np.geomspace(span["start"], span["stop"], int(span["points"])))
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ScenarioValidationError("capacity.values", "capacity grid must be strictly increasing")
        return grid

    def build(self, document: Dict[str, Any]) -> Scenario:
        """Validate a scenario document and turn it into a ``Scenario``."""
        self.validate_schema(document)
        popularity = document["popularity"]
        if "traffic_mix" in popularity:
            traffic_mix_from_spec(popularity["traffic_mix"]).validate()
        try:
            law = law_from_spec(popularity)
        except CacheAnalysisError as e:
            if isinstance(e, ScenarioValidationError):
                raise
            raise ScenarioValidationError("popularity", str(e))

        ranks = tuple(int(r) for r in document.get("ranks", ()))
        if ranks and max(ranks) > law.universe_size:
            raise ScenarioValidationError("ranks", f"ranks must not exceed the catalogue size {law.universe_size}")

        capacity = document["capacity"]
        analysis = document.get("analysis", {})
        simulation = document.get("simulation", {})
        output = document.get("output", {})
        metadata = {"description": document["description"]} if "description" in document else {}
        scenario = Scenario(
            name=document["name"],
            popularity=popularity,
            capacities=self.capacity_grid(capacity),
            capacity_unit=capacity["unit"],
            bytes_per_chunk=float(capacity.get("bytes_per_chunk", DEFAULT_BYTES_PER_CHUNK)),
            policies=tuple(document["policies"]),
            ranks=ranks,
            erfc_refinement=bool(analysis.get("erfc_refinement", False)),
            asymptotic_overlay=bool(analysis.get("asymptotic_overlay", False)),
            requests=int(simulation.get("requests", 2_000_000)),
            warmup=simulation.get("warmup"),
            trials=int(simulation.get("trials", 10_000)),
            output_dir=output.get("dir", "artifacts"),
            output_format=output.get("format", "csv"),
            seed=int(document.get("seed", 0)),
            tolerance=float(document.get("validation", {}).get("tolerance", 0.02)),
            sample_time=analysis.get("sample_time"),
            tandem_capacity=analysis.get("tandem_capacity"),
            metadata=metadata,
        )
        logging.info(
            f"Scenario '{scenario.name}': {len(scenario.capacities)} capacities, "
            f"policies {', '.join(scenario.policies)}"
        )
        return scenario


def scenario_to_dict(scenario: Scenario) -> Dict[str, Any]:
    """Scenario document with an explicit capacity list; loading it back gives the same scenario."""
    document: Dict[str, Any] = {"name": scenario.name}
    if "description" in scenario.metadata:
        document["description"] = scenario.metadata["description"]
    document.update({
        "popularity": scenario.popularity,
        "capacity": {
            "unit": scenario.capacity_unit,
            "bytes_per_chunk": scenario.bytes_per_chunk,
            "values": list(scenario.capacities),
        },
        "policies": list(scenario.policies),
        "ranks": list(scenario.ranks),
        "analysis": {
            "erfc_refinement": scenario.erfc_refinement,
            "asymptotic_overlay": scenario.asymptotic_overlay,
            "sample_time": scenario.sample_time,
            "tandem_capacity": scenario.tandem_capacity,
        },
        "simulation": {
            "requests": scenario.requests,
            "warmup": scenario.warmup,
            "trials": scenario.trials,
        },
        "output": {"dir": scenario.output_dir, "format": scenario.output_format},
        "seed": scenario.seed,
        "validation": {"tolerance": scenario.tolerance},
    })
    return document
