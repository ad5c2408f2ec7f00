"""Desk-scale acceptance studies; deselected by default, run with ``pytest -m slow``."""

from __future__ import annotations

import itertools
import math
from pathlib import Path

import numpy as np
import pytest

from md_iqp.circuits.models import DynamicCircuit, MeasureX
from md_iqp.circuits.staircase import (
    architecture,
    build_measurement_driven_circuit,
    build_staircase,
    depth_and_counts,
    effective_iqp,
)
from md_iqp.evaluation.criteria import CriterionThresholds, criterion1
from md_iqp.evaluation.generators import ancilla_free_architecture, layout_for
from md_iqp.experiments.config import RunContext, load_config
from md_iqp.experiments.registry import list_experiments
from md_iqp.experiments.runner import EXIT_CONFIG, run_experiment, sample_config_path
from md_iqp.experiments.tasks import (
    AnticoncentrationParams,
    DephasingParams,
    XiCostParams,
    anticoncentration,
    dephasing_fit,
    xi_cost_study,
)
from md_iqp.layout.grid import AllToAllLayout, GridLayout
from md_iqp.linalg.gf2 import kolchin_limit, kolchin_probability
from md_iqp.reservoir.bench import ReservoirBenchConfig, reservoir_benchmark
from md_iqp.reservoir.theorem import theorem2_demo
from md_iqp.settings import Settings
from md_iqp.simulation import simcore
from md_iqp.simulation.noise import compile_unitary, tv_sweep
from md_iqp.simulation.simcore import DynamicResult, phase_state, run_dynamic

pytestmark = pytest.mark.slow

# (system qubits, layers, paths); every combination keeps 2^a within 2^16
BRANCH_SHAPES = [(3, 1, 1), (3, 1, 2), (3, 2, 1), (3, 2, 2), (4, 1, 1), (4, 1, 2), (4, 2, 1)]


@pytest.mark.parametrize("config_index", range(30))
def test_every_branch_matches_effective_iqp(
    config_index: int, monkeypatch: pytest.MonkeyPatch
) -> None:
    monkeypatch.setattr(simcore, "settings", Settings(max_branches=2**16))
    n, layers, d = BRANCH_SHAPES[config_index % len(BRANCH_SHAPES)]
    rng = np.random.default_rng([41, config_index])
    blocks = [
        build_staircase(AllToAllLayout(n), d, seed=int(rng.integers(2**31)))
        for _ in range(layers)
    ]
    angles = [rng.uniform(0.0, 2 * math.pi, n) for _ in range(layers + 1)]
    target = phase_state(effective_iqp(blocks, angles))
    circuit = build_measurement_driven_circuit(blocks, angles)
    measurements = sum(isinstance(ins, MeasureX) for ins in circuit.instructions)
    assert measurements <= 16
    results = run_dynamic(circuit, "enumerate")
    assert isinstance(results, list)
    assert sum(r.probability for r in results) == pytest.approx(1.0, abs=1e-9)
    for res in results:
        assert isinstance(res, DynamicResult)
        assert res.state.fidelity(target) == pytest.approx(1.0, abs=1e-9)


def _rank_of_rows(rows: tuple[int, ...]) -> int:
    pivots: dict[int, int] = {}
    for row in rows:
        while row:
            top = row.bit_length() - 1
            if top not in pivots:
                pivots[top] = row
                break
            row ^= pivots[top]
    return len(pivots)


def test_kolchin_matches_exhaustive_enumeration() -> None:
    counts = [0] * 5
    for rows in itertools.product(range(16), repeat=4):
        counts[4 - _rank_of_rows(rows)] += 1
    for k, count in enumerate(counts):
        assert kolchin_probability(4, k) == pytest.approx(count / 65536, abs=1e-12)


def test_kolchin_limits() -> None:
    assert kolchin_limit(0) == pytest.approx(0.28879, abs=1e-4)
    assert kolchin_limit(1) == pytest.approx(0.57758, abs=1e-4)
    assert kolchin_limit(2) == pytest.approx(0.12835, abs=1e-4)


CRITERION_THRESHOLDS = CriterionThresholds(mp_max_distance=0.1, rank_trials=50)


@pytest.mark.parametrize(
    "connectivity,paths", [("all-to-all", 2), ("grid", 4)], ids=["all-to-all", "grid"]
)
def test_criterion_one_at_constant_depth(connectivity: str, paths: int) -> None:
    size = 400
    layout = layout_for(connectivity, size)  # type: ignore[arg-type]
    nearest = layout_for("grid", size)
    md_passes = local_failures = 0
    for seed in range(10):
        fs = build_staircase(layout, paths, seed=seed)
        md_passes += criterion1(architecture(fs), CRITERION_THRESHOLDS, seed).overall
        depth = depth_and_counts(fs.circuit)[0]
        local = ancilla_free_architecture(nearest, depth, seed)
        local_failures += not criterion1(local, CRITERION_THRESHOLDS, seed).overall
    assert md_passes >= 8
    assert local_failures >= 8


def test_collision_ratio_trend() -> None:
    params = AnticoncentrationParams(sizes=(4, 9, 16), layers=2, D=2, instances=30)
    rows = anticoncentration(params, RunContext("anticoncentration", 6)).tables["collision"]
    ratio = {(r["generator"], r["size"]): r["mean_ratio"] for r in rows}
    md = [ratio[("measurement-driven", n)] for n in (4, 9, 16)]
    assert all(b <= a for a, b in zip(md, md[1:]))
    for n in (4, 9, 16):
        assert ratio[("measurement-driven", n)] < ratio[("ancilla-free", n)]


def test_xi_ratio_bands() -> None:
    params = XiCostParams(sides=(3, 4), layers=2, D=2, instances=20)
    rows = xi_cost_study(params, RunContext("xi-cost", 2)).tables["xi_cost"]
    for row in rows:
        if row["generator"] == "measurement-driven":
            assert 0.8 <= row["ratio"] <= 1.2
        else:
            assert row["ratio"] < 0.6


def _noise_pair(seed: int) -> tuple[DynamicCircuit, DynamicCircuit]:
    layout = GridLayout(4, 3)
    rng = np.random.default_rng([83, seed])
    fs = build_staircase(layout, 1, seed=int(rng.integers(2**31)), path_iterations=200)
    angles = [rng.uniform(0.0, 2 * math.pi, layout.n_system) for _ in range(2)]
    return (
        build_measurement_driven_circuit([fs], angles, final_hadamard=True),
        compile_unitary([fs], angles, layout),
    )


def test_measurement_driven_is_less_noise_sensitive() -> None:
    pairs = [_noise_pair(seed) for seed in range(20)]
    values = (3e-3, 1e-2)
    md = tv_sweep([p[0] for p in pairs], "p2", values, trajectories=200, seed=1)
    compiled = tv_sweep([p[1] for p in pairs], "p2", values, trajectories=200, seed=1)
    for row_md, row_compiled in zip(md, compiled):
        assert row_md.mean_tv < row_compiled.mean_tv


def test_dephasing_saturation_fit() -> None:
    summary = dephasing_fit(DephasingParams(), RunContext("dephasing-fit", 3)).summary
    for fit in summary.values():
        assert not fit["degenerate"]
        assert fit["residual"] < 0.1 * fit["delta_inf"]


def test_readout_gap_ordering() -> None:
    for seed in range(10):
        gap_md, gap_local = theorem2_demo(9, epsilon=0.01, graph="path", seed=seed)
        assert gap_md >= 1.9
        assert gap_local <= gap_md / 2


def test_reservoir_margin_and_feed_forward_ablation() -> None:
    config = ReservoirBenchConfig(
        families=("multibody-xy", "multibody-xy-noff", "tfi"), classifiers=("ridge",)
    )
    result = reservoir_benchmark(config)
    ff = result.mean_accuracy("multibody-xy", "ridge", 10)
    assert ff >= result.mean_accuracy("tfi", "ridge", 10) + 0.10
    assert result.mean_accuracy("multibody-xy-noff", "ridge", 10) < ff


@pytest.mark.parametrize("name", [name for name, _ in list_experiments()])
def test_bundled_sample_runs(name: str, tmp_path: Path) -> None:
    manifest = run_experiment(load_config(sample_config_path(name)), tmp_path)
    assert manifest.status != EXIT_CONFIG
    assert (manifest.run_dir / "manifest.json").is_file()
    assert "error.json" not in manifest.files
