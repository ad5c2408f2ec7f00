"""Tests for the dense state-vector engine and output statistics."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest

from md_iqp.circuits.models import CX, DynamicCircuit, H
from md_iqp.circuits.staircase import IqpSpec, one_layer_ladder
from md_iqp.errors import DimensionMismatchError, ResourceLimitError
from md_iqp.layout.grid import AllToAllLayout, square_system_layout
from md_iqp.linalg.gf2 import BitMatrix
from md_iqp.settings import Settings
from md_iqp.simulation import simcore
from md_iqp.simulation.simcore import (
    Distribution,
    StateVector,
    chi_square_fit,
    collision_probability,
    entanglement_entropy,
    expectation_z,
    haar_collision,
    iqp_distribution,
    output_distribution,
    phase_state,
    random_iqp_baseline,
    run_dynamic,
    sample,
    total_variation,
    uniform_distribution,
    xi_cost,
)


@pytest.fixture
def bell() -> StateVector:
    """Bell pair on qubits 0 and 1 of a 4-qubit register, others in ``|0>``."""
    amps = np.zeros(16, dtype=np.complex128)
    amps[0] = amps[12] = 1 / math.sqrt(2)
    return StateVector(4, amps)


class TestStates:
    """State and distribution containers."""

    def test_amplitude_count_checked(self) -> None:
        with pytest.raises(DimensionMismatchError):
            StateVector(2, np.ones(3))

    def test_plus_state(self) -> None:
        plus = StateVector.plus(3)
        assert plus.norm == pytest.approx(1.0)
        assert plus.apply_hadamards().fidelity(StateVector.zero(3)) == pytest.approx(1.0)

    def test_distribution_must_normalize(self) -> None:
        with pytest.raises(ValueError):
            Distribution(1, np.array([0.7, 0.7]))

    def test_distribution_bytes_and_csv(self, tmp_path: Path) -> None:
        d = Distribution(2, np.array([0.1, 0.2, 0.3, 0.4]))
        back = Distribution.from_bytes(d.to_bytes())
        assert np.array_equal(back.probs, d.probs)
        path = tmp_path / "dist.csv"
        d.to_csv(path)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "bitstring,probability"
        assert lines[2].startswith("01,")
        with pytest.raises(DimensionMismatchError):
            Distribution.from_bytes(np.zeros(3).tobytes())


class TestDynamicExecution:
    """Branch handling of the dynamic-circuit simulator."""

    def test_bell_pair(self) -> None:
        c = DynamicCircuit(n_system=2, instructions=(H(qubit=0), CX(control=0, target=1)))
        result = run_dynamic(c)
        assert result.probability == 1.0
        assert expectation_z(result.state, [0, 1]) == pytest.approx(1.0)
        assert expectation_z(result.state, [0]) == pytest.approx(0.0, abs=1e-12)

    def test_enumerate_covers_all_branches(self) -> None:
        results = run_dynamic(one_layer_ladder(3), "enumerate", initial=StateVector.plus(3))
        assert isinstance(results, list)
        assert [r.outcomes for r in results] == [(0, 0), (0, 1), (1, 0), (1, 1)]
        assert sum(r.probability for r in results) == pytest.approx(1.0)
        assert all(r.state.norm == pytest.approx(1.0) for r in results)

    def test_fixed_outcomes_validated(self) -> None:
        c = one_layer_ladder(3)
        with pytest.raises(DimensionMismatchError):
            run_dynamic(c, "fixed", outcomes=[0])
        with pytest.raises(ValueError):
            run_dynamic(c, "fixed", outcomes=[0, 2])
        with pytest.raises(ValueError):
            run_dynamic(c, "bogus")  # type: ignore[arg-type]

    def test_branch_cap(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setattr(simcore, "settings", Settings(max_branches=2))
        with pytest.raises(ResourceLimitError):
            run_dynamic(one_layer_ladder(3), "enumerate")

    def test_register_cap(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setattr(simcore, "settings", Settings(max_qubits=3))
        with pytest.raises(ResourceLimitError):
            run_dynamic(one_layer_ladder(3))


class TestPhaseStates:
    """Hamiltonian phase states and IQP distributions."""

    def test_single_row_amplitudes(self) -> None:
        spec = IqpSpec.from_rows(BitMatrix.from_rows(["1"]), [0.4])
        amps = phase_state(spec).amplitudes
        assert np.allclose(amps, np.array([np.exp(0.4j), np.exp(-0.4j)]) / math.sqrt(2))

    def test_zero_angles_give_all_zero_outcome(self) -> None:
        spec = IqpSpec.from_rows(BitMatrix.identity(3), [0.0, 0.0, 0.0])
        d = iqp_distribution(spec)
        assert d.probs[0] == pytest.approx(1.0)

    def test_global_phase_is_invisible(self) -> None:
        arch = BitMatrix.from_rows(["110", "011"])
        a = phase_state(IqpSpec.from_rows(arch, [0.3, 1.1]))
        b = phase_state(IqpSpec.from_rows(arch, [0.3, 1.1], global_phase=2.0))
        assert a.fidelity(b) == pytest.approx(1.0)

    def test_random_baseline_shape(self) -> None:
        spec = random_iqp_baseline(AllToAllLayout(4), depth=3, layers=2, seed=1)
        assert spec.n == 4 and spec.s <= 12


class TestStatistics:
    """Sampling, collision, entanglement and distance measures."""

    def test_sampling_is_seeded(self) -> None:
        d = uniform_distribution(3)
        a, b = sample(d, 500, seed=4), sample(d, 500, seed=4)
        assert a == b and sum(a.values()) == 500
        with pytest.raises(ValueError):
            sample(d, -1)

    def test_chi_square_accepts_matching_samples(self) -> None:
        d = Distribution(2, np.array([0.1, 0.2, 0.3, 0.4]))
        _, p_value = chi_square_fit(sample(d, 20_000, seed=0), d)
        assert p_value > 1e-3

    def test_collision_probabilities(self) -> None:
        assert collision_probability(uniform_distribution(4)) == pytest.approx(1 / 16)
        assert haar_collision(4) == pytest.approx(2 / 17)

    def test_entropy_of_bell_pair(self, bell: StateVector) -> None:
        assert entanglement_entropy(bell, [0]) == pytest.approx(math.log(2))
        assert entanglement_entropy(bell, [2, 3]) == pytest.approx(0.0, abs=1e-12)
        with pytest.raises(ValueError):
            entanglement_entropy(bell, [0, 1, 2, 3])

    def test_xi_cost_counts_cut_entropy(self, bell: StateVector) -> None:
        layout = square_system_layout(2)
        assert xi_cost(bell, layout) == pytest.approx(math.log(2))
        assert xi_cost(bell, layout, eta=2.0) == pytest.approx(math.log(2) / 2)
        assert xi_cost(StateVector.zero(4), layout) == pytest.approx(0.0, abs=1e-12)
        with pytest.raises(DimensionMismatchError):
            xi_cost(StateVector.zero(3), layout)

    def test_total_variation(self) -> None:
        point = Distribution(1, np.array([1.0, 0.0]))
        other = Distribution(1, np.array([0.0, 1.0]))
        assert total_variation(point, point) == 0.0
        assert total_variation(point, other) == pytest.approx(1.0)
        assert output_distribution(StateVector.plus(1)).probs.tolist() == pytest.approx([0.5, 0.5])
