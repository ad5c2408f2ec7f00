from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from typing import Any

from pydantic import BaseModel

from md_iqp.errors import ConfigError
from md_iqp.experiments import tasks
from md_iqp.experiments.config import ExperimentOutput, RunContext
from md_iqp.reservoir.bench import ReservoirBenchConfig


@dataclass(frozen=True)
class Experiment:
    name: str
    description: str
    params: type[BaseModel]
    run: Callable[[Any, RunContext], ExperimentOutput]

    def parse(self, params: dict[str, Any]) -> BaseModel:
        try:
            return self.params.model_validate(params)
        except ValueError as exc:
            raise ConfigError(f"invalid parameters for {self.name}: {exc}") from exc


_EXPERIMENTS = (
    Experiment(
        "equivalence-oracle",
        "Sampled staircase branches against the effective IQP phase state.",
        tasks.EquivalenceParams,
        tasks.equivalence_oracle,
    ),
    Experiment(
        "criteria-scan",
        "Smallest depth passing the randomness criterion per generator and size.",
        tasks.CriteriaScanParams,
        tasks.criteria_scan,
    ),
    Experiment(
        "anticoncentration",
        "Collision probability over its Haar value for staircase and depth-matched IQP.",
        tasks.AnticoncentrationParams,
        tasks.anticoncentration,
    ),
    Experiment(
        "xi-cost",
        "Entanglement circuit cost relative to linear-depth ancilla-free circuits.",
        tasks.XiCostParams,
        tasks.xi_cost_study,
    ),
    Experiment(
        "tv-sweep",
        "Noisy-vs-ideal total variation while one noise parameter is swept.",
        tasks.NoiseStudyParams,
        tasks.tv_sweep_study,
    ),
    Experiment(
        "dephasing-fit",
        "Dephasing distance versus duration with a saturating-exponential fit.",
        tasks.DephasingParams,
        tasks.dephasing_fit,
    ),
    Experiment(
        "cx-count",
        "CX counts of dynamic, effective and eliminated staircase forms.",
        tasks.CxCountParams,
        tasks.cx_count,
    ),
    Experiment(
        "theorem2-demo",
        "Readout gap of one multibody cycle against one local Floquet cycle.",
        tasks.TheoremParams,
        tasks.theorem_demo,
    ),
    Experiment(
        "reservoir-bench",
        "SSH phase classification accuracy per reservoir family and cycle.",
        ReservoirBenchConfig,
        tasks.reservoir_bench,
    ),
)

REGISTRY: dict[str, Experiment] = {e.name: e for e in _EXPERIMENTS}


def list_experiments() -> list[tuple[str, str]]:
    """Registered ``(name, description)`` pairs in registration order."""
    return [(e.name, e.description) for e in _EXPERIMENTS]


def get_experiment(name: str) -> Experiment:
    try:
        return REGISTRY[name]
    except KeyError:
        known = ", ".join(REGISTRY)
        raise ConfigError(f"unknown experiment {name!r}; known: {known}") from None
