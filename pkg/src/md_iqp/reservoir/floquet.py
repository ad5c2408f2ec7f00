"""Floquet reservoirs: local spin models and measurement-driven multibody sectors.

One cycle of a local reservoir is the ordered product of exact term
exponentials ``exp(i tau c P)`` in the order the Hamiltonian lists them
(couplings before fields). One cycle of a multibody reservoir is
``prod_mu exp(i tau sum_r c^mu_r sigma^mu_{A_r})`` over the sectors; all strings of
one sector commute, so each sector is applied exactly as a diagonal phase in
the basis where ``sigma^mu`` becomes ``Z``.
"""

from __future__ import annotations

import json
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Literal

import numpy as np

from md_iqp.circuits.staircase import IqpSpec, architecture, build_staircase
from md_iqp.errors import ConfigError, DimensionMismatchError
from md_iqp.layout.grid import AllToAllLayout, QubitLayout
from md_iqp.linalg.gf2 import BitMatrix, hstack, mat_vec_gf2
from md_iqp.simulation.simcore import apply_1q, phase_state

logger = logging.getLogger(__name__)

LocalFamily = Literal["heisenberg", "tfi", "xy"]
Sector = Literal["XY", "XZ", "YZ", "XYZ"]
Edge = tuple[int, int]

_SQRT_HALF = math.sqrt(0.5)
_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}
_HAD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2.0)
_S = np.diag([1.0, 1j]).astype(np.complex128)
# sigma^mu = V Z V^dagger
_TO_Z = {"x": _HAD, "y": _S @ _HAD, "z": np.eye(2, dtype=np.complex128)}


def path_edges(n: int) -> list[Edge]:
    return [(i, i + 1) for i in range(n - 1)]


def grid_edges(width: int, height: int) -> list[Edge]:
    """Nearest-neighbor edges of a ``width x height`` qubit grid in row-major order."""
    edges: list[Edge] = []
    for y in range(height):
        for x in range(width):
            q = y * width + x
            if x + 1 < width:
                edges.append((q, q + 1))
            if y + 1 < height:
                edges.append((q, q + width))
    return edges


def load_edge_list(path: str | Path) -> list[Edge]:
    """Edges from a JSON array of ``[i, j]`` pairs, for hardware-shaped layouts."""
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        edges = [(int(a), int(b)) for a, b in payload]
    except (OSError, ValueError, TypeError) as exc:
        raise ConfigError(f"cannot read edge list {path}: {exc}") from exc
    if any(a == b for a, b in edges):
        raise ConfigError("edge list contains a self-loop")
    return edges


def _qubit_count(state: np.ndarray) -> int:
    n = int(round(math.log2(state.size)))
    if 2**n != state.size:
        raise DimensionMismatchError(f"state of size {state.size} is not a qubit register")
    return n


def _check_register(state: np.ndarray, n: int) -> None:
    have = _qubit_count(state)
    if have != n:
        raise DimensionMismatchError(f"state on {have} qubits, reservoir on {n}")


@dataclass(frozen=True)
class PauliTerm:
    """``coeff * prod_(q, mu) sigma^mu_q``."""

    paulis: tuple[tuple[int, str], ...]
    coeff: float


def _apply_term(psi: np.ndarray, term: PauliTerm, tau: float) -> np.ndarray:
    angle = tau * term.coeff
    flipped = psi
    for q, mu in term.paulis:
        flipped = apply_1q(flipped, _PAULI[mu], q)
    return math.cos(angle) * psi + 1j * math.sin(angle) * flipped


@dataclass(frozen=True, eq=False)
class LocalReservoir:
    """Local spin reservoir on an explicit edge list."""

    family: LocalFamily
    n: int
    terms: tuple[PauliTerm, ...]
    tau: float

    def step(self, state: np.ndarray, rng: np.random.Generator | None = None) -> np.ndarray:
        _check_register(state, self.n)
        psi = np.asarray(state, dtype=np.complex128).reshape((2,) * self.n)
        for term in self.terms:
            psi = _apply_term(psi, term, self.tau)
        return np.ascontiguousarray(psi).reshape(-1)


def local_reservoir(
    family: LocalFamily,
    n: int,
    edges: Sequence[Edge] | None = None,
    seed: int | None = None,
    total_time: float = 1.0,
    cycles: int = 10,
) -> LocalReservoir:
    """Random Heisenberg, transverse-field Ising or transverse-field XY reservoir.

    Every coefficient is drawn from ``N(0, 1/2)``; one cycle evolves for
    ``total_time / cycles``. Edges default to the open path.
    """
    if cycles < 1:
        raise ValueError("cycles must be >= 1")
    edges = list(edges) if edges is not None else path_edges(n)
    if any(not (0 <= a < n and 0 <= b < n) for a, b in edges):
        raise DimensionMismatchError(f"edge outside {n} qubits")
    rng = np.random.default_rng(seed)

    def draw() -> float:
        return float(rng.normal(0.0, _SQRT_HALF))

    terms: list[PauliTerm] = []
    if family == "heisenberg":
        for a, b in edges:
            terms.extend(PauliTerm(((a, mu), (b, mu)), draw()) for mu in "xyz")
    elif family == "tfi":
        terms.extend(PauliTerm(((a, "z"), (b, "z")), draw()) for a, b in edges)
        terms.extend(PauliTerm(((q, "x"),), draw()) for q in range(n))
    elif family == "xy":
        for a, b in edges:
            terms.extend(PauliTerm(((a, mu), (b, mu)), draw()) for mu in "xy")
        terms.extend(PauliTerm(((q, "x"),), draw()) for q in range(n))
    else:
        raise ValueError(f"unknown local family {family!r}")
    return LocalReservoir(family, n, tuple(terms), total_time / cycles)


@dataclass(frozen=True, eq=False)
class MultibodyReservoir:
    """Measurement-driven multibody reservoir.

    Attributes:
        architecture: ``s x n`` supports of the multibody strings.
        sectors: Pauli sectors applied in order, e.g. ``("x", "y")``.
        coeffs: Per-sector coefficients ``c^mu`` of length ``s``.
        tau: Evolution time of each sector exponential.
        frame_map: Columns span the Pauli frames a staircase leaves behind.
        feed_forward: When ``False`` every sector exponential is followed by a
            random uncorrected frame ``sigma^mu_z`` with ``z = frame_map @ m``.
    """

    n: int
    architecture: BitMatrix
    sectors: tuple[str, ...]
    coeffs: dict[str, np.ndarray] = field(repr=False)
    tau: float
    frame_map: BitMatrix | None = None
    feed_forward: bool = True

    @cached_property
    def _phases(self) -> dict[str, np.ndarray]:
        scale = 2.0 ** (self.n / 2)
        return {
            mu: phase_state(IqpSpec.from_rows(self.architecture, self.tau * self.coeffs[mu]))
            .amplitudes
            * scale
            for mu in self.sectors
        }

    @cached_property
    def _bits(self) -> np.ndarray:
        idx = np.arange(2**self.n, dtype=np.int64)
        return ((idx[:, None] >> np.arange(self.n - 1, -1, -1)) & 1).astype(np.int64)

    def _frame_signs(self, rng: np.random.Generator) -> np.ndarray:
        assert self.frame_map is not None
        m = rng.integers(0, 2, size=self.frame_map.cols)
        z = mat_vec_gf2(self.frame_map, m).astype(np.int64)
        return 1.0 - 2.0 * ((self._bits @ z) & 1)

    def without_feed_forward(self) -> MultibodyReservoir:
        if self.frame_map is None:
            raise ValueError("reservoir has no frame map to leave uncorrected")
        return MultibodyReservoir(
            self.n, self.architecture, self.sectors, self.coeffs, self.tau, self.frame_map, False
        )

    def step(self, state: np.ndarray, rng: np.random.Generator | None = None) -> np.ndarray:
        _check_register(state, self.n)
        if not self.feed_forward and rng is None:
            raise ValueError("an uncorrected reservoir needs an rng for its frames")
        psi = np.asarray(state, dtype=np.complex128).reshape((2,) * self.n)
        for mu in self.sectors:
            to_z = _TO_Z[mu]
            for q in range(self.n):
                psi = apply_1q(psi, to_z.conj().T, q)
            flat = np.ascontiguousarray(psi).reshape(-1) * self._phases[mu]
            if not self.feed_forward:
                assert rng is not None
                flat = flat * self._frame_signs(rng)
            psi = flat.reshape((2,) * self.n)
            for q in range(self.n):
                psi = apply_1q(psi, to_z, q)
        return np.ascontiguousarray(psi).reshape(-1)


def sector_paulis(sector: Sector) -> tuple[str, ...]:
    if sector not in ("XY", "XZ", "YZ", "XYZ"):
        raise ValueError(f"unknown sector {sector!r}")
    return tuple(sector.lower())


def multibody_reservoir(
    n: int,
    sector: Sector = "XY",
    seed: int | None = None,
    layout: QubitLayout | None = None,
    D: int = 2,  # noqa: N803
    total_time: float = 1.0,
    cycles: int = 10,
    feed_forward: bool = True,
) -> MultibodyReservoir:
    """Multibody reservoir whose architecture comes from one fan-out staircase.

    The architecture has ``s = n`` rows. Coefficients are drawn from ``N(0, 1/2)``
    and each sector evolves for ``total_time / (len(sector) * cycles)`` per cycle.
    """
    if cycles < 1:
        raise ValueError("cycles must be >= 1")
    layout = layout if layout is not None else AllToAllLayout(n)
    if layout.n_system != n:
        raise DimensionMismatchError(f"layout has {layout.n_system} system qubits, need {n}")
    rng = np.random.default_rng(seed)
    fs = build_staircase(layout, D, seed=int(rng.integers(2**63 - 1)))
    paulis = sector_paulis(sector)
    arch = architecture(fs)
    coeffs = {mu: rng.normal(0.0, _SQRT_HALF, size=arch.rows) for mu in paulis}
    frames = hstack([t.matrix for t in fs.transfer]) if fs.transfer else None
    tau = total_time / (len(paulis) * cycles)
    return MultibodyReservoir(n, arch, paulis, coeffs, tau, frames, feed_forward)


Reservoir = LocalReservoir | MultibodyReservoir


def floquet_step(
    spec: Reservoir, state: np.ndarray, rng: np.random.Generator | None = None
) -> np.ndarray:
    return spec.step(state, rng)


def run_cycles(
    spec: Reservoir,
    state: np.ndarray,
    cycles: int,
    rng: np.random.Generator | None = None,
) -> list[np.ndarray]:
    """States after each of ``cycles`` Floquet cycles."""
    out: list[np.ndarray] = []
    psi = np.asarray(state, dtype=np.complex128)
    for _ in range(cycles):
        psi = spec.step(psi, rng)
        out.append(psi)
    return out
