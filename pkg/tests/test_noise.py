"""Tests for Monte Carlo noise, total-variation sweeps and saturation fits."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from md_iqp.circuits.models import DynamicCircuit
from md_iqp.circuits.staircase import (
    build_measurement_driven_circuit,
    build_staircase,
    effective_iqp,
    one_layer_ladder,
)
from md_iqp.layout.grid import AllToAllLayout, square_system_layout
from md_iqp.simulation.noise import (
    NoiseModel,
    circuit_duration,
    compile_unitary,
    dephasing_series,
    fit_saturation,
    ideal_distribution,
    noisy_distribution,
    schedule_moments,
    tv_sweep,
    write_sweep_csv,
)
from md_iqp.simulation.simcore import Distribution, iqp_distribution, total_variation


Driven = tuple[DynamicCircuit, Distribution]


@pytest.fixture
def driven() -> Driven:
    """Three-qubit measurement-driven circuit and its effective IQP distribution."""
    rng = np.random.default_rng(2)
    fs = build_staircase(AllToAllLayout(3), D=1, seed=6)
    layers = [rng.uniform(0, 2 * math.pi, 3) for _ in range(2)]
    circuit = build_measurement_driven_circuit([fs], layers, final_hadamard=True)
    return circuit, iqp_distribution(effective_iqp([fs], layers))


class TestNoiseModel:
    """Parameter validation and schedule timing."""

    def test_bounds(self) -> None:
        with pytest.raises(ValidationError):
            NoiseModel(p1=1.5)
        with pytest.raises(ValidationError):
            NoiseModel(t2_ns=0.0)
        assert NoiseModel().is_ideal
        assert not NoiseModel(p2=0.01).is_ideal

    def test_dephasing_probability(self) -> None:
        nm = NoiseModel(t2_ns=100.0)
        assert nm.dephasing_probability(100.0) == pytest.approx(0.5 * (1 - math.exp(-1)))
        assert NoiseModel().dephasing_probability(100.0) == 0.0

    def test_ladder_duration(self) -> None:
        c = one_layer_ladder(3)
        assert len(schedule_moments(c)) == 3
        assert circuit_duration(c, NoiseModel()) == pytest.approx(400.0)
        assert circuit_duration(c, NoiseModel(single_layer_ns=10.0)) == pytest.approx(410.0)


class TestTrajectories:
    """Trajectory averages against exact references."""

    def test_ideal_matches_effective_spec(self, driven: Driven) -> None:
        circuit, reference = driven
        assert total_variation(ideal_distribution(circuit), reference) < 1e-9

    def test_noise_moves_the_distribution(self, driven: Driven) -> None:
        circuit, reference = driven
        noisy = noisy_distribution(circuit, NoiseModel(p2=0.2), trajectories=40, seed=1)
        assert total_variation(noisy, reference) > 0.0
        again = noisy_distribution(circuit, NoiseModel(p2=0.2), trajectories=40, seed=1)
        assert np.array_equal(noisy.probs, again.probs)

    def test_marginal_depolarizing_runs(self, driven: Driven) -> None:
        circuit, _ = driven
        nm = NoiseModel(p2=0.05, depolarizing="marginal", p1=0.01)
        d = noisy_distribution(circuit, nm, trajectories=10, seed=0)
        assert d.probs.sum() == pytest.approx(1.0)

    def test_trajectories_must_be_positive(self, driven: Driven) -> None:
        with pytest.raises(ValueError):
            noisy_distribution(driven[0], NoiseModel(), trajectories=0)

    def test_sweep_rows_and_csv(self, driven: Driven, tmp_path: Path) -> None:
        circuit, reference = driven
        rows = tv_sweep(
            [circuit], "p2", [0.0, 0.1], trajectories=20, seed=3, ideal=[reference]
        )
        assert [r.value for r in rows] == [0.0, 0.1]
        assert rows[0].mean_tv < 1e-9 and rows[0].stddev == 0.0
        out = tmp_path / "sweep.csv"
        write_sweep_csv(rows, out)
        header = out.read_text(encoding="utf-8").splitlines()[0]
        assert header == "param,value,mean_tv,stddev,trajectories,seed"


class TestCompiledCircuits:
    """Ancilla-free compilation keeps the output distribution."""

    def test_all_to_all_compilation(self) -> None:
        rng = np.random.default_rng(8)
        fs = build_staircase(AllToAllLayout(4), D=1, seed=2)
        layers = [rng.uniform(0, 2 * math.pi, 4) for _ in range(2)]
        compiled = compile_unitary([fs], layers)
        assert compiled.n_aux == 0
        reference = iqp_distribution(effective_iqp([fs], layers))
        assert total_variation(ideal_distribution(compiled), reference) < 1e-9

    def test_routed_compilation(self) -> None:
        layout = square_system_layout(2)
        rng = np.random.default_rng(5)
        fs = build_staircase(layout, D=1, seed=3, path_iterations=20)
        layers = [rng.uniform(0, 2 * math.pi, 4) for _ in range(2)]
        routed = compile_unitary([fs], layers, layout=layout)
        reference = iqp_distribution(effective_iqp([fs], layers))
        assert total_variation(ideal_distribution(routed), reference) < 1e-9


class TestDephasing:
    """Dephasing series and the saturation model."""

    def test_series_needs_t2(self, driven: Driven) -> None:
        with pytest.raises(ValueError):
            dephasing_series(driven[0], NoiseModel(), [1.0])

    def test_series_durations_scale(self, driven: Driven) -> None:
        circuit, _ = driven
        nm = NoiseModel(t2_ns=2000.0)
        points = dephasing_series(circuit, nm, [0.5, 1.0, 2.0], trajectories=5, seed=0)
        durations = [t for t, _ in points]
        assert durations[1] == pytest.approx(2 * durations[0])
        assert durations[2] == pytest.approx(2 * durations[1])

    def test_fit_recovers_parameters(self) -> None:
        t = np.linspace(0.0, 500.0, 11)
        points = [(float(x), 0.4 * (1 - math.exp(-0.01 * x))) for x in t]
        fit = fit_saturation(points)
        assert fit.delta_inf == pytest.approx(0.4, rel=1e-4)
        assert fit.kappa == pytest.approx(0.01, rel=1e-4)
        assert not fit.degenerate

    def test_flat_series_is_degenerate(self) -> None:
        fit = fit_saturation([(0.0, 0.2), (1.0, 0.2), (2.0, 0.2)])
        assert fit.degenerate and fit.kappa == 0.0
        with pytest.raises(ValueError):
            fit_saturation([(0.0, 0.1), (1.0, 0.2)])
