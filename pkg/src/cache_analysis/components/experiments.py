"""Sweeps, validations and sampling runs over a scenario.

Every method returns pandas frames; writing them out is the emitter's job.
"""

import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from src.cache_analysis.components.gaussian_asymptotics import (
    GaussianAnalysis,
    dkw_margin,
    geometric_asymptotics,
)
from src.cache_analysis.components.irm_simulator import IRMSimulator
from src.cache_analysis.components.lru_che import CheApproximation
from src.cache_analysis.components.popularity import (
    GeometricLaw,
    PopularityLaw,
    ZipfLaw,
    filter_law,
    law_from_spec,
    static_lfu_hit_profile,
)
from src.cache_analysis.components.random_replacement import RandomReplacementApproximation
from src.cache_analysis.constant import ANALYTIC_POLICIES, SIMULATED_POLICIES, SWEEP_COLUMNS
from src.cache_analysis.entity.config_entity import Scenario, SimConfig, SimulatorConfig, SolverConfig
from src.cache_analysis.entity.result_entity import CheSolution, HitProfile, ValidationReport
from src.cache_analysis.exception import (
    CapacitySaturatedError,
    ScenarioValidationError,
    SimulationBoundError,
)

# analytic policy -> simulated policies it is checked against
VALIDATION_PAIRS = (
    ("LRU_CHE", "SIM_LRU"),
    ("RANDOM_FP", "SIM_RANDOM"),
    ("RANDOM_FP", "SIM_FIFO"),
    ("LFU_STATIC", "SIM_LFU_STATIC"),
)
SIM_KERNELS = dict(SIMULATED_POLICIES, SIM_LFU_STATIC="LFU_STATIC")
SIM_ORDER = tuple(SIM_KERNELS)


def _row(capacity: float, unit: str, policy: str, rank: Optional[int], hit_rate: float,
         ci_halfwidth: float = math.nan, saturated: bool = False) -> dict:
    return {
        "capacity": capacity,
        "unit": unit,
        "policy": policy,
        "rank": rank,
        "hit_rate": float(hit_rate),
        "ci_halfwidth": float(ci_halfwidth),
        "saturated": saturated,
    }


def _seed(scenario: Scenario, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=scenario.seed, spawn_key=key)


def _sweep_frame(rows: List[dict]) -> pd.DataFrame:
    table = pd.DataFrame(rows, columns=SWEEP_COLUMNS + ["saturated"])
    table["rank"] = pd.array(table["rank"].tolist(), dtype="Int64")
    table["saturated"] = table["saturated"].astype(bool)
    return table


class ExperimentRunner:
    def __init__(self, solver: SolverConfig, simulator: SimulatorConfig, n_jobs: int = 1):
        self.solver = solver
        self.n_jobs = n_jobs
        self.che = CheApproximation(solver)
        self.random = RandomReplacementApproximation(solver)
        self.gaussian = GaussianAnalysis(solver)
        self.simulator = IRMSimulator(simulator)

    def build_law(self, scenario: Scenario) -> PopularityLaw:
        return law_from_spec(scenario.popularity, self.solver.epsilon)

    def analytic_profile(self, law: PopularityLaw, policy: str, capacity: float,
                         ranks: Sequence[int] = ()) -> HitProfile:
        if policy == "LRU_CHE":
            return self.che.capacity_profile(law, capacity, ranks)
        if policy == "RANDOM_FP":
            return self.random.capacity_profile(law, capacity, ranks)
        if policy == "LFU_STATIC":
            return static_lfu_hit_profile(law, min(capacity, law.population), ranks,
                                          self.solver.epsilon, self.solver.exact_limit)
        raise ScenarioValidationError("policies", f"'{policy}' is not an analytic policy")

    @staticmethod
    def _simulated_capacity(capacity: float) -> int:
        rounded = int(round(capacity))
        if abs(capacity - rounded) > 1e-9:
            logging.warning(f"Simulated capacity {capacity:g} rounded to {rounded}")
        return rounded

    # ------------------------------------------------------------------ sweep

    def _analytic_rows(self, law: PopularityLaw, scenario: Scenario, capacity: float) -> List[dict]:
        c = scenario.capacity_in_law_units(capacity)
        unit = scenario.capacity_unit
        saturated = c >= law.population
        rows = []
        for policy in scenario.policies:
            if policy not in ANALYTIC_POLICIES:
                continue
            if saturated:
                rows.append(_row(capacity, unit, policy, None, 1.0, saturated=True))
                rows.extend(_row(capacity, unit, policy, r, 1.0, saturated=True) for r in scenario.ranks)
                continue
            profile = self.analytic_profile(law, policy, c, scenario.ranks)
            rows.append(_row(capacity, unit, policy, None, profile.overall))
            rows.extend(_row(capacity, unit, policy, int(r), h) for r, h in zip(profile.ranks, profile.hit_rates))
        if saturated:
            return rows
        if scenario.erfc_refinement and scenario.ranks:
            for r in scenario.ranks:
                rows.append(_row(capacity, unit, "LRU_ERFC", r,
                                 self.gaussian.erfc_hit_rate(law, c, law.weight(r))))
        if scenario.asymptotic_overlay:
            rows.extend(self._asymptotic_rows(law, scenario, capacity, c))
        return rows

    def _asymptotic_rows(self, law: PopularityLaw, scenario: Scenario, capacity: float,
                         c: float) -> List[dict]:
        if not isinstance(law, ZipfLaw):
            logging.warning(f"Asymptotic overlay needs a Zipf law, got {law.kind}")
            return []
        t = self.gaussian.tc_asymptotic(law.alpha, law.population, c / law.population)
        solution = CheSolution(t_C=t, residual=math.nan, bracket=(t, t), iterations=0, capacity=c)
        profile = self.che.lru_hit_profile(law, solution, scenario.ranks)
        unit = scenario.capacity_unit
        rows = [_row(capacity, unit, "LRU_ASYMPTOTIC", None, profile.overall)]
        rows.extend(_row(capacity, unit, "LRU_ASYMPTOTIC", int(r), h)
                    for r, h in zip(profile.ranks, profile.hit_rates))
        return rows

    def _simulation_rows(self, law: PopularityLaw, scenario: Scenario, index: int,
                         capacity: float) -> List[dict]:
        c = scenario.capacity_in_law_units(capacity)
        unit = scenario.capacity_unit
        rows = []
        for policy in scenario.policies:
            if policy not in SIMULATED_POLICIES:
                continue
            if c >= law.population:
                rows.append(_row(capacity, unit, policy, None, 1.0, saturated=True))
                rows.extend(_row(capacity, unit, policy, r, 1.0, saturated=True) for r in scenario.ranks)
                continue
            estimate = self.simulator.run_cache_sim(SimConfig(
                law=law,
                policy=SIM_KERNELS[policy],
                capacity=self._simulated_capacity(c),
                requests=scenario.requests,
                warmup=scenario.warmup,
                seed=_seed(scenario, index, SIM_ORDER.index(policy)),
            ))
            rows.append(_row(capacity, unit, policy, None, estimate.overall, estimate.overall_halfwidth))
            halfwidths = estimate.ci_halfwidth
            for r in scenario.ranks:
                if estimate.reported[r - 1]:
                    rows.append(_row(capacity, unit, policy, r, estimate.at([r])[0], halfwidths[r - 1]))
        return rows

    def sweep_point(self, law: PopularityLaw, scenario: Scenario, index: int,
                    capacity: float) -> List[dict]:
        return self._analytic_rows(law, scenario, capacity) + \
            self._simulation_rows(law, scenario, index, capacity)

    def sweep(self, scenario: Scenario) -> pd.DataFrame:
        """Hit rates of every requested policy at every capacity of the grid."""
        law = self.build_law(scenario)
        if any(p in SIMULATED_POLICIES for p in scenario.policies) \
                and law.universe_size > self.simulator.config.max_population:
            raise SimulationBoundError(
                f"Scenario '{scenario.name}' asks for simulation of {law.universe_size:g} items; "
                f"the simulator handles at most {self.simulator.config.max_population:g}"
            )
        parts = Parallel(n_jobs=self.n_jobs)(
            delayed(self.sweep_point)(law, scenario, i, capacity)
            for i, capacity in enumerate(scenario.capacities)
        )
        table = _sweep_frame([row for part in parts for row in part])
        self._check_ordering(table)
        return table

    @staticmethod
    def _check_ordering(table: pd.DataFrame) -> None:
        overall = table[table["rank"].isna()].pivot_table(
            index="capacity", columns="policy", values="hit_rate", aggfunc="first")
        for upper, lower in (("LFU_STATIC", "LRU_CHE"), ("LRU_CHE", "RANDOM_FP")):
            if upper in overall and lower in overall:
                breaches = overall.index[overall[upper] < overall[lower] - 1e-9]
                for capacity in breaches:
                    logging.warning(
                        f"{upper} below {lower} at capacity {capacity:g}: "
                        f"{overall.at[capacity, upper]:.6f} < {overall.at[capacity, lower]:.6f}"
                    )

    # ------------------------------------------------------------------ solve

    def solve(self, scenario: Scenario) -> pd.DataFrame:
        """t_C and tau_C at every capacity of the grid."""
        law = self.build_law(scenario)
        rows = []
        for capacity in scenario.capacities:
            c = scenario.capacity_in_law_units(capacity)
            row = {"capacity": capacity, "unit": scenario.capacity_unit, "law_capacity": c,
                   "saturated": c >= law.population}
            if not row["saturated"]:
                che = self.che.solve_t_C(law, c, "chunks" if scenario.is_traffic_mix else "items")
                rnd = self.random.solve_tau_C(law, c)
                row.update({
                    "t_C": che.t_C, "t_C_residual": che.residual, "t_C_iterations": che.iterations,
                    "tau_C": rnd.tau_C, "tau_C_residual": rnd.residual, "tau_C_iterations": rnd.iterations,
                })
            rows.append(row)
        return pd.DataFrame(rows)

    # --------------------------------------------------------------- validate

    def _validation_point(self, law: PopularityLaw, scenario: Scenario, index: int,
                          capacity: float) -> List[dict]:
        c = self._simulated_capacity(scenario.capacity_in_law_units(capacity))
        if c >= law.population or c < 1:
            logging.warning(f"Capacity {capacity:g} skipped: nothing to validate")
            return []
        rows = []
        for analytic, simulated in VALIDATION_PAIRS:
            if analytic not in scenario.policies:
                continue
            profile = self.analytic_profile(law, analytic, c, scenario.ranks)
            estimate = self.simulator.run_cache_sim(SimConfig(
                law=law,
                policy=SIM_KERNELS[simulated],
                capacity=c,
                requests=scenario.requests,
                warmup=scenario.warmup,
                seed=_seed(scenario, index, SIM_ORDER.index(simulated)),
            ))
            base = {"capacity": capacity, "unit": scenario.capacity_unit,
                    "policy": analytic, "simulated_policy": simulated}
            rows.append(dict(base, rank=None, analytic=profile.overall, simulated=estimate.overall,
                             ci_halfwidth=estimate.overall_halfwidth))
            halfwidths = estimate.ci_halfwidth
            for r, h in zip(profile.ranks, profile.hit_rates):
                if estimate.reported[r - 1]:
                    rows.append(dict(base, rank=int(r), analytic=float(h),
                                     simulated=float(estimate.at([r])[0]),
                                     ci_halfwidth=float(halfwidths[r - 1])))
        return rows

    def validate(self, scenario: Scenario) -> ValidationReport:
        """Analytic against simulated hit rates, side by side."""
        law = self.build_law(scenario)
        if law.universe_size > self.simulator.config.max_population:
            raise SimulationBoundError(
                f"Cannot validate '{scenario.name}': {law.universe_size:g} items exceed "
                f"the simulator bound {self.simulator.config.max_population:g}"
            )
        if not any(a in scenario.policies for a, _ in VALIDATION_PAIRS):
            raise ScenarioValidationError("policies", "validation needs at least one analytic policy")
        parts = Parallel(n_jobs=self.n_jobs)(
            delayed(self._validation_point)(law, scenario, i, capacity)
            for i, capacity in enumerate(scenario.capacities)
        )
        table = pd.DataFrame([row for part in parts for row in part],
                             columns=["capacity", "unit", "policy", "simulated_policy", "rank",
                                      "analytic", "simulated", "ci_halfwidth"])
        table["rank"] = pd.array(table["rank"].tolist(), dtype="Int64")
        table["deviation"] = (table["analytic"] - table["simulated"]).abs()
        max_deviation = float(table["deviation"].max()) if len(table) else 0.0
        per_policy = table.groupby("simulated_policy")["deviation"].max().to_dict()
        report = ValidationReport(table, max_deviation, scenario.tolerance, per_policy)
        logging.info(f"Maximum deviation {max_deviation:.4f} (tolerance {scenario.tolerance})")
        return report

    # --------------------------------------------------------------- simulate

    def simulate(self, scenario: Scenario) -> pd.DataFrame:
        """Per-rank simulation estimates; scenarios without SIM_* policies simulate LRU."""
        law = self.build_law(scenario)
        policies = [p for p in scenario.policies if p in SIMULATED_POLICIES] or ["SIM_LRU"]
        frames = []
        for index, capacity in enumerate(scenario.capacities):
            c = scenario.capacity_in_law_units(capacity)
            if c >= law.population:
                logging.warning(f"Capacity {capacity:g} holds the whole catalogue; not simulated")
                continue
            for policy in policies:
                estimate = self.simulator.run_cache_sim(SimConfig(
                    law=law,
                    policy=SIM_KERNELS[policy],
                    capacity=self._simulated_capacity(c),
                    requests=scenario.requests,
                    warmup=scenario.warmup,
                    seed=_seed(scenario, index, SIM_ORDER.index(policy)),
                ))
                frame = estimate.to_frame()
                frame.insert(0, "policy", policy)
                frame.insert(0, "unit", scenario.capacity_unit)
                frame.insert(0, "capacity", capacity)
                frames.append(frame)
        return pd.concat(frames, ignore_index=True) if frames else pd.DataFrame()

    def tandem(self, scenario: Scenario) -> Optional[pd.DataFrame]:
        """Miss stream of the first-level cache against q(n)(1 - h(n)), normalised."""
        if scenario.tandem_capacity is None:
            return None
        law = self.build_law(scenario)
        c1 = self._simulated_capacity(scenario.capacity_in_law_units(scenario.capacities[0]))
        c2 = self._simulated_capacity(scenario.capacity_in_law_units(scenario.tandem_capacity))
        result = self.simulator.run_tandem_sim(law, c1, c2, "LRU", scenario.requests,
                                               seed=_seed(scenario, len(scenario.capacities), 0),
                                               warmup=scenario.warmup)
        ranks = np.arange(1, law.universe_size + 1, dtype=np.int64)
        weights = law.weights(ranks)
        profile = self.che.capacity_profile(law, c1)
        analytic = weights * (1.0 - profile.hit_at(ranks, weights)) / weights.sum()
        return pd.DataFrame({
            "rank": ranks,
            "requests": result.level1.requests,
            "level1_hit_rate": result.level1.hit_rate,
            "miss_frequency": result.miss_frequency,
            "analytic_miss_frequency": analytic,
            "level2_requests": result.level2.requests,
            "level2_hit_rate": result.level2.hit_rate,
        })

    # ---------------------------------------------------------------- sampling

    def sample(self, scenario: Scenario, trials: Optional[int] = None
               ) -> Tuple[pd.DataFrame, pd.DataFrame, pd.DataFrame]:
        """X(t) histogram, T_C samples and a summary of both against their Gaussian models."""
        law = self.build_law(scenario)
        trials = trials or scenario.trials
        c = self._simulated_capacity(scenario.capacity_in_law_units(scenario.capacities[0]))
        t_C = self.che.solve_t_C(law, c).t_C
        t = scenario.sample_time or t_C
        # keys past the capacity grid and the tandem run
        key = len(scenario.capacities) + 1
        x = self.simulator.sample_X(law, t, trials, seed=_seed(scenario, key, 0))
        tc = self.simulator.sample_T_C(law, c, trials, seed=_seed(scenario, key, 1))

        model = self.gaussian.model(law)
        histogram = x.histogram()
        histogram["gaussian"] = model.cdf(histogram["x"] + 0.5, t) - model.cdf(histogram["x"] - 0.5, t)
        bound = self.gaussian.berry_esseen_bound(law, t)
        margin = dkw_margin(x.samples.size)
        summary: Dict[str, float] = {
            "t": t,
            "capacity": c,
            "x_mean": x.mean,
            "x_mean_theory": x.mean_theory,
            "x_variance": x.variance,
            "x_variance_theory": x.variance_theory,
            "ks_distance": x.ks_distance(),
            "berry_esseen_bound": bound,
            "dkw_margin": margin,
            "kolmogorov_limit": bound + 3.0 * margin,
            "t_C": t_C,
            "tc_mean": tc.mean,
            "tc_std": tc.std,
        }
        if isinstance(law, ZipfLaw):
            asymptotics = self.gaussian.zipf_asymptotics(law.alpha, law.population, c / law.population)
            summary["tc_asymptotic"] = asymptotics.tc_scale
            summary["tc_fluctuation"] = asymptotics.tc_fluctuation_scale
        samples = pd.DataFrame({"trial": np.arange(tc.samples.size), "t_C": tc.samples})
        return histogram, samples, pd.DataFrame({"quantity": list(summary), "value": list(summary.values())})

    # ---------------------------------------------------------------- analyze

    def analyze(self, scenario: Scenario) -> pd.DataFrame:
        """erfc gap, Berry-Esseen bound and asymptotic t_C at every capacity."""
        law = self.build_law(scenario)
        ranks = scenario.ranks or (1,)
        rows = []

        def add(capacity, quantity, value, rank=None):
            rows.append({"capacity": capacity, "unit": scenario.capacity_unit,
                         "quantity": quantity, "rank": rank, "value": float(value)})

        for capacity in scenario.capacities:
            c = scenario.capacity_in_law_units(capacity)
            try:
                solution = self.che.solve_t_C(law, c)
            except CapacitySaturatedError as e:
                logging.warning(str(e))
                continue
            add(capacity, "t_C", solution.t_C)
            add(capacity, "mean_occupancy", self.che.mean_occupancy(law, solution.t_C))
            add(capacity, "variance_occupancy", self.che.variance_occupancy(law, solution.t_C))
            add(capacity, "berry_esseen_bound", self.gaussian.berry_esseen_bound(law, solution.t_C))
            for r in ranks:
                q = law.weight(r)
                che_hit = -math.expm1(-q * solution.t_C)
                erfc_hit = self.gaussian.erfc_hit_rate(law, c, q)
                add(capacity, "che_hit_rate", che_hit, r)
                add(capacity, "erfc_hit_rate", erfc_hit, r)
                add(capacity, "step_function_gap", abs(erfc_hit - che_hit), r)
            if isinstance(law, ZipfLaw):
                asymptotics = self.gaussian.zipf_asymptotics(law.alpha, law.population, c / law.population)
                add(capacity, "psi_inverse", asymptotics.psi_inv_delta)
                add(capacity, "tc_asymptotic", asymptotics.tc_scale)
                add(capacity, "tc_ratio", asymptotics.tc_scale / solution.t_C)
                add(capacity, "tc_fluctuation", asymptotics.tc_fluctuation_scale)
            elif isinstance(law, GeometricLaw) and solution.t_C > 1.0:
                m_estimate, plateau = geometric_asymptotics(law.rho, solution.t_C)
                add(capacity, "mean_estimate", m_estimate)
                add(capacity, "variance_plateau", plateau)
        frame = pd.DataFrame(rows, columns=["capacity", "unit", "quantity", "rank", "value"])
        frame["rank"] = pd.array(frame["rank"].tolist(), dtype="Int64")
        return frame

    # ----------------------------------------------------------------- filter

    def filter(self, scenario: Scenario, max_points: int = 2000) -> pd.DataFrame:
        """Request law and the miss streams of an LRU hierarchy, in long format over rank."""
        law = self.build_law(scenario)
        capacities = [scenario.capacity_in_law_units(scenario.capacities[0])]
        if scenario.tandem_capacity is not None:
            capacities.append(scenario.capacity_in_law_units(scenario.tandem_capacity))
        profiles = self.che.hierarchy_profiles(law, capacities)

        n = law.universe_size
        if n <= 100_000:
            ranks = np.arange(1, n + 1, dtype=np.int64)
        else:
            ranks = np.unique(np.round(np.geomspace(1, n, max_points)).astype(np.int64))
        frames = [pd.DataFrame({"rank": ranks, "series": "requests", "weight": law.weights(ranks)})]
        current = law
        for level, profile in enumerate(profiles, start=1):
            current = filter_law(current, profile)
            frames.append(pd.DataFrame({
                "rank": ranks,
                "series": f"misses of level {level}",
                "weight": current.weights(ranks),
            }))
        return pd.concat(frames, ignore_index=True)
