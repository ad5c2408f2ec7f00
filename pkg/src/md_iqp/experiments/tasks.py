"""Experiment bodies. Each validates its own parameter model and returns an ExperimentOutput."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from md_iqp.circuits.baselines import random_cx_layers
from md_iqp.circuits.models import DynamicCircuit
from md_iqp.circuits.staircase import (
    FanoutStaircase,
    IqpSpec,
    build_measurement_driven_circuit,
    build_staircase,
    cx_count_comparison,
    depth_and_counts,
    effective_iqp,
)
from md_iqp.evaluation.criteria import CriterionThresholds, min_depth_scan
from md_iqp.evaluation.generators import Connectivity, Generator, layout_for
from md_iqp.experiments.config import ExperimentOutput, RunContext
from md_iqp.layout.grid import AllToAllLayout, GridLayout, QubitLayout, square_system_layout
from md_iqp.reservoir.bench import ReservoirBenchConfig, reservoir_benchmark
from md_iqp.reservoir.theorem import Graph, theorem2_demo
from md_iqp.simulation.noise import (
    NoiseModel,
    compile_unitary,
    dephasing_series,
    fit_saturation,
    ideal_distribution,
    tv_sweep,
)
from md_iqp.simulation.simcore import (
    DynamicResult,
    collision_probability,
    haar_collision,
    iqp_distribution,
    phase_state,
    random_iqp_baseline,
    run_dynamic,
    xi_cost,
    xi_lin_baseline,
)

logger = logging.getLogger(__name__)

Layout = GridLayout | AllToAllLayout
Row = dict[str, Any]


class _Params(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


def _angles(rng: np.random.Generator, n: int, layers: int) -> list[np.ndarray]:
    return [rng.uniform(0.0, 2 * math.pi, n) for _ in range(layers + 1)]


def _staircases(
    layout: QubitLayout, layers: int, D: int, rng: np.random.Generator  # noqa: N803
) -> list[FanoutStaircase]:
    return [build_staircase(layout, D, seed=int(rng.integers(2**63 - 1))) for _ in range(layers)]


# equivalence-oracle


class EquivalenceParams(_Params):
    connectivity: Connectivity = "grid"
    size: int = Field(4, ge=3, description="System qubits; a perfect square for grids.")
    layers: int = Field(2, ge=1)
    D: int = Field(1, ge=1)
    instances: int = Field(3, ge=1)
    outcome_samples: int = Field(8, ge=1, description="Sampled measurement branches per instance.")
    tolerance: float = Field(1e-9, gt=0.0)


def equivalence_oracle(params: EquivalenceParams, ctx: RunContext) -> ExperimentOutput:
    """Compare every sampled branch of the dynamic circuit with the effective phase state."""
    layout = layout_for(params.connectivity, params.size)

    def check(i: int) -> list[Row]:
        rng = np.random.default_rng(ctx.seed_for("equivalence-oracle", i))
        blocks = _staircases(layout, params.layers, params.D, rng)
        angles = _angles(rng, params.size, params.layers)
        target = phase_state(effective_iqp(blocks, angles))
        circuit = build_measurement_driven_circuit(blocks, angles)
        rows: list[Row] = []
        for b in range(params.outcome_samples):
            res = run_dynamic(circuit, "sample", seed=int(rng.integers(2**63 - 1)))
            assert isinstance(res, DynamicResult)
            fid = target.fidelity(res.state)
            rows.append(
                {
                    "instance": i,
                    "branch": b,
                    "outcomes": "".join(map(str, res.outcomes)),
                    "fidelity": fid,
                    "passed": abs(1.0 - fid) <= params.tolerance,
                }
            )
        return rows

    rows = [r for chunk in ctx.map(check, range(params.instances)) for r in chunk]
    passed = all(bool(r["passed"]) for r in rows)
    ctx.step(f"checked {len(rows)} branches over {params.instances} instances")
    summary = {
        "checks": len(rows),
        "failures": sum(not r["passed"] for r in rows),
        "min_fidelity": min(r["fidelity"] for r in rows),
        "passed": passed,
    }
    return ExperimentOutput(summary, {"branches": rows}, passed)


# criteria-scan


class CriteriaScanParams(_Params):
    generators: tuple[Generator, ...] = ("measurement-driven", "ancilla-free")
    connectivity: Connectivity = "grid"
    sizes: tuple[int, ...] = (16,)
    seeds_per_depth: int = Field(5, ge=1)
    max_depth: int = Field(16, ge=1)
    thresholds: CriterionThresholds = CriterionThresholds()


def criteria_scan(params: CriteriaScanParams, ctx: RunContext) -> ExperimentOutput:
    rows: list[Row] = []
    for g_idx, generator in enumerate(params.generators):
        scan = min_depth_scan(
            generator,
            params.connectivity,
            params.sizes,
            seed=ctx.seed_for("criteria", g_idx),
            seeds_per_depth=params.seeds_per_depth,
            max_depth=params.max_depth,
            thresholds=params.thresholds,
        )
        rows.extend(r.model_dump() for r in scan)
        ctx.step(f"scanned {generator} over sizes {list(params.sizes)}")
    summary = {f"{r['generator']}/{r['size']}": r["depth"] for r in rows}
    return ExperimentOutput(summary, {"min_depth": rows})


# anticoncentration


class AnticoncentrationParams(_Params):
    connectivity: Connectivity = "grid"
    sizes: tuple[int, ...] = (4, 9)
    layers: int = Field(2, ge=1)
    D: int = Field(2, ge=1)
    instances: int = Field(10, ge=1)


def _md_and_baseline_specs(
    layout: Layout, layers: int, D: int, seed: int  # noqa: N803
) -> tuple[IqpSpec, IqpSpec]:
    rng = np.random.default_rng(seed)
    blocks = _staircases(layout, layers, D, rng)
    angles = _angles(rng, layout.n_system, layers)
    depth = max(depth_and_counts(b.circuit)[0] for b in blocks)
    md = effective_iqp(blocks, angles)
    baseline = random_iqp_baseline(layout, depth, layers, int(rng.integers(2**63 - 1)))
    return md, baseline


def anticoncentration(params: AnticoncentrationParams, ctx: RunContext) -> ExperimentOutput:
    """Collision-probability ratio against Haar for staircase and depth-matched circuits."""
    rows: list[Row] = []
    for size in params.sizes:
        layout = layout_for(params.connectivity, size)

        def ratios(i: int, layout: Layout = layout, size: int = size) -> tuple[float, float]:
            md, base = _md_and_baseline_specs(
                layout, params.layers, params.D, ctx.seed_for(f"anticoncentration/{size}", i)
            )
            haar = haar_collision(size)
            return (
                collision_probability(iqp_distribution(md)) / haar,
                collision_probability(iqp_distribution(base)) / haar,
            )

        values = np.array(ctx.map(ratios, range(params.instances)))
        for col, generator in enumerate(("measurement-driven", "ancilla-free")):
            rows.append(
                {
                    "size": size,
                    "generator": generator,
                    "mean_ratio": float(values[:, col].mean()),
                    "std_ratio": float(values[:, col].std()),
                    "instances": params.instances,
                }
            )
        ctx.step(f"collision ratios at n={size}")
    return ExperimentOutput({"rows": len(rows)}, {"collision": rows})


# xi-cost


class XiCostParams(_Params):
    sides: tuple[int, ...] = (2, 3)
    layers: int = Field(2, ge=1)
    D: int = Field(2, ge=1)
    instances: int = Field(5, ge=1)
    eta: float = Field(1.0, gt=0.0)


def xi_cost_study(params: XiCostParams, ctx: RunContext) -> ExperimentOutput:
    """Entanglement cost of staircase IQP states relative to linear-depth circuits."""
    rows: list[Row] = []
    for side in params.sides:
        layout: GridLayout = square_system_layout(side)
        lin = xi_lin_baseline(layout, params.instances, ctx.seed_for(f"xi-lin/{side}"))

        def costs(i: int, layout: GridLayout = layout, side: int = side) -> tuple[float, float]:
            md, base = _md_and_baseline_specs(
                layout, params.layers, params.D, ctx.seed_for(f"xi/{side}", i)
            )
            return (
                xi_cost(phase_state(md), layout, params.eta),
                xi_cost(phase_state(base), layout, params.eta),
            )

        values = np.array(ctx.map(costs, range(params.instances)))
        for col, generator in enumerate(("measurement-driven", "ancilla-free")):
            rows.append(
                {
                    "size": side * side,
                    "generator": generator,
                    "xi": float(values[:, col].mean()),
                    "xi_lin": lin,
                    "ratio": float(values[:, col].mean() / lin) if lin > 0 else math.nan,
                }
            )
        ctx.step(f"xi cost on {side}x{side}")
    return ExperimentOutput({"rows": len(rows)}, {"xi_cost": rows})


# tv-sweep and dephasing-fit


class NoiseStudyParams(_Params):
    side: int = Field(2, ge=2)
    layers: int = Field(1, ge=1)
    D: int = Field(1, ge=1)
    instances: int = Field(2, ge=1)
    trajectories: int = Field(200, ge=1)
    param: Literal["p1", "p2", "t2_ns", "cx_layer_ns"] = "p2"
    values: tuple[float, ...] = (0.001, 0.005, 0.01)
    base: NoiseModel = NoiseModel()


def _noise_circuits(
    params: NoiseStudyParams, ctx: RunContext, module: str
) -> dict[str, list[DynamicCircuit]]:
    layout = square_system_layout(params.side)
    circuits: dict[str, list[DynamicCircuit]] = {"measurement-driven": [], "compiled": []}
    for i in range(params.instances):
        rng = np.random.default_rng(ctx.seed_for(module, i))
        blocks = _staircases(layout, params.layers, params.D, rng)
        angles = _angles(rng, layout.n_system, params.layers)
        circuits["measurement-driven"].append(
            build_measurement_driven_circuit(blocks, angles, final_hadamard=True)
        )
        circuits["compiled"].append(compile_unitary(blocks, angles, layout))
    return circuits


def tv_sweep_study(params: NoiseStudyParams, ctx: RunContext) -> ExperimentOutput:
    """Total-variation distance to the ideal output as one noise parameter grows."""
    rows: list[Row] = []
    for generator, circuits in _noise_circuits(params, ctx, "tv-sweep").items():
        sweep = tv_sweep(
            circuits,
            params.param,
            params.values,
            params.base,
            params.trajectories,
            seed=ctx.seed_for(f"tv-sweep/{generator}"),
        )
        rows.extend({"generator": generator, **r.model_dump()} for r in sweep)
        ctx.step(f"swept {params.param} for {generator}")
    return ExperimentOutput({"rows": len(rows)}, {"tv_sweep": rows})


class DephasingParams(_Params):
    side: int = Field(2, ge=2)
    layers: int = Field(1, ge=1)
    D: int = Field(1, ge=1)
    trajectories: int = Field(200, ge=1)
    t2_ns: float = Field(20_000.0, gt=0.0)
    scales: tuple[float, ...] = Field((0.5, 1.0, 2.0, 4.0, 8.0), min_length=3)


def dephasing_fit(params: DephasingParams, ctx: RunContext) -> ExperimentOutput:
    """Dephasing-only distance versus duration, fitted by a saturating exponential."""
    noise = NoiseStudyParams(
        side=params.side, layers=params.layers, D=params.D, instances=1
    )
    nm = NoiseModel(t2_ns=params.t2_ns)
    rows: list[Row] = []
    summary: Row = {}
    for generator, circuits in _noise_circuits(noise, ctx, "dephasing").items():
        points = dephasing_series(
            circuits[0],
            nm,
            params.scales,
            params.trajectories,
            seed=ctx.seed_for(f"dephasing/{generator}"),
        )
        rows.extend(
            {"generator": generator, "duration_ns": t, "tv": tv} for t, tv in points
        )
        summary[generator] = fit_saturation(points).model_dump()
        ctx.step(f"dephasing series for {generator}")
    return ExperimentOutput(summary, {"dephasing": rows})


# cx-count


class CxCountParams(_Params):
    connectivity: Connectivity = "all-to-all"
    sizes: tuple[int, ...] = (4, 9, 16)
    D: int = Field(2, ge=1)
    instances: int = Field(3, ge=1)


def cx_count(params: CxCountParams, ctx: RunContext) -> ExperimentOutput:
    """CX counts of dynamic, effective fan-out and eliminated forms of each staircase."""
    rows: list[Row] = []
    for size in params.sizes:
        layout = layout_for(params.connectivity, size)
        for i in range(params.instances):
            fs = build_staircase(layout, params.D, seed=ctx.seed_for(f"cx-count/{size}", i))
            counts = cx_count_comparison(fs)
            depth = depth_and_counts(fs.circuit)[0]
            baseline = random_cx_layers(layout, depth, ctx.seed_for(f"cx-baseline/{size}", i))
            rows.append(
                {
                    "size": size,
                    "instance": i,
                    "dynamic": counts.dynamic,
                    "effective": counts.effective,
                    "optimized": counts.optimized,
                    "ancilla_free_depth_matched": len(baseline.gates),
                }
            )
        ctx.step(f"counted CX gates at n={size}")
    return ExperimentOutput({"rows": len(rows)}, {"cx_count": rows})


# theorem2-demo


class TheoremParams(_Params):
    n: int = Field(9, ge=3)
    graph: Graph = "path"
    epsilons: tuple[float, ...] = (0.0, 0.01)
    seeds: int = Field(10, ge=1)


def theorem_demo(params: TheoremParams, ctx: RunContext) -> ExperimentOutput:
    """Readout gaps of one multibody cycle and one local cycle on the same graph."""

    def gaps(job: tuple[float, int]) -> Row:
        eps, s = job
        md, local = theorem2_demo(params.n, eps, params.graph, ctx.seed_for("theorem2", s))
        return {"epsilon": eps, "seed_index": s, "gap_md": md, "gap_local": local}

    jobs = [(e, s) for e in params.epsilons for s in range(params.seeds)]
    rows = ctx.map(gaps, jobs)
    summary = {
        "min_gap_md": min(r["gap_md"] for r in rows),
        "max_gap_local": max(r["gap_local"] for r in rows),
    }
    ctx.step(f"{len(rows)} gap evaluations")
    return ExperimentOutput(summary, {"gaps": rows})


# reservoir-bench


def reservoir_bench(params: ReservoirBenchConfig, ctx: RunContext) -> ExperimentOutput:
    config = params.model_copy(update={"seed": ctx.seed_for("reservoir")})
    result = reservoir_benchmark(config)
    rows = [asdict(r) for r in result.rows]
    summary_rows = result.summary()
    last = [r for r in summary_rows if r["cycle"] == config.cycles]
    ctx.step(f"benchmarked {len(config.families)} families")
    return ExperimentOutput(
        {"final_cycle": last}, {"accuracy": rows, "accuracy_summary": summary_rows}
    )

