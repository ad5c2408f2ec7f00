"""Randomized fan-out staircases, transfer matrices and effective IQP architectures.

A staircase is a sequence of measurement rounds. Each round runs a CX ladder
between system qubits and freshly prepared auxiliaries along a Hamiltonian
path and ends with X-basis measurements of the auxiliaries it used.

For one round, write ``E`` for the GF(2) map the ladder induces on system basis
states in the all-zero outcome branch, and ``B`` for the system-side support of
each measured auxiliary's Z operator propagated back to the start of the
round. An outcome vector ``m`` then leaves the Pauli frame ``Z^(E^-T B m)`` on the
system at the end of the round; later rounds push it forward through their own
``E^-T``. Pauli-Z strings are therefore conjugated by ``E^-T`` and basis states
by ``E``.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any, Protocol

import numpy as np

from md_iqp.circuits.models import (
    CX,
    RZ,
    TWO_PI,
    DynamicCircuit,
    H,
    Instruction,
    MeasureX,
    ResetAux,
    ZFrame,
    canonical_angle,
)
from md_iqp.errors import DimensionMismatchError, StaircaseError
from md_iqp.layout.grid import QubitLayout
from md_iqp.linalg.gf2 import (
    BitMatrix,
    inverse_gf2,
    mat_mul_gf2,
    mat_vec_gf2,
    synthesize_cx_circuit,
    vstack,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TransferMatrix:
    """Map from one round's outcome vector to the end-of-circuit Z frame.

    Attributes:
        round_index: Position of the round among measurement rounds.
        matrix: ``n_system x k`` matrix; column ``j`` belongs to ``aux[j]``.
        aux: Measured auxiliaries in column order.
        slots: Outcome slot written by each column's measurement.
    """

    round_index: int
    matrix: BitMatrix
    aux: tuple[int, ...]
    slots: tuple[int, ...]

    def correction(self, m: Sequence[int] | np.ndarray) -> np.ndarray:
        return mat_vec_gf2(self.matrix, m)


@dataclass(frozen=True)
class RoundMaps:
    """Branch-zero basis map ``E`` and back-propagated supports ``B`` of one round."""

    e_map: BitMatrix
    b_map: BitMatrix
    aux: tuple[int, ...]
    slots: tuple[int, ...]


@dataclass(frozen=True)
class CircuitMaps:
    """GF(2) summary of a dynamic circuit's CX network.

    Attributes:
        rounds: Per-round maps, including a trailing unmeasured block if present.
        transfer: One transfer matrix per measurement round.
        z_map: Conjugation of Z strings by the whole network (``W^-T``).
        basis_map: Action ``W`` on system basis states in the all-zero branch.
    """

    rounds: tuple[RoundMaps, ...]
    transfer: tuple[TransferMatrix, ...]
    z_map: BitMatrix
    basis_map: BitMatrix


def _split_rounds(circuit: DynamicCircuit) -> list[tuple[list[CX], list[MeasureX]]]:
    rounds: list[tuple[list[CX], list[MeasureX]]] = []
    gates: list[CX] = []
    measured: list[MeasureX] = []
    stale: set[int] = set()
    seen_cx = False
    for ins in circuit.instructions:
        if isinstance(ins, CX):
            if measured:
                rounds.append((gates, measured))
                gates, measured = [], []
            for q in (ins.control, ins.target):
                if q in stale:
                    raise StaircaseError(f"auxiliary {q} reused after measurement without reset")
            gates.append(ins)
            seen_cx = True
        elif isinstance(ins, MeasureX):
            measured.append(ins)
            stale.add(ins.qubit)
        elif isinstance(ins, ResetAux):
            stale.discard(ins.qubit)
        elif isinstance(ins, H) and (seen_cx or circuit.is_aux(ins.qubit)):
            raise StaircaseError(f"Hadamard on qubit {ins.qubit} inside the CX network")
    if gates or measured:
        rounds.append((gates, measured))
    return rounds


def _round_maps(circuit: DynamicCircuit, gates: list[CX], measured: list[MeasureX]) -> RoundMaps:
    n, total = circuit.n_system, circuit.n_qubits
    touched = {q for g in gates for q in (g.control, g.target) if circuit.is_aux(q)}
    missing = touched - {m.qubit for m in measured}
    if missing:
        raise StaircaseError(f"auxiliaries {sorted(missing)} used but not measured in their round")

    ident = BitMatrix.identity(n).words
    x = np.zeros((total, ident.shape[1]), dtype=np.uint64)
    x[:n] = ident
    for g in gates:
        x[g.target] ^= x[g.control]

    k = len(measured)
    z = BitMatrix.zeros(total, k).to_dense()
    for col, m in enumerate(measured):
        z[m.qubit, col] = 1
    for g in reversed(gates):
        z[g.control] ^= z[g.target]

    return RoundMaps(
        e_map=BitMatrix(n, n, x[:n]),
        b_map=BitMatrix.from_dense(z[:n]),
        aux=tuple(m.qubit for m in measured),
        slots=tuple(m.slot for m in measured),
    )


def analyze_circuit(circuit: DynamicCircuit) -> CircuitMaps:
    """Compute per-round maps, transfer matrices and the composed conjugation map."""
    n = circuit.n_system
    rounds = [_round_maps(circuit, g, m) for g, m in _split_rounds(circuit)]
    suffix = BitMatrix.identity(n)
    basis = BitMatrix.identity(n)
    transfer: list[TransferMatrix] = []
    for idx in reversed(range(len(rounds))):
        rm = rounds[idx]
        suffix = mat_mul_gf2(suffix, inverse_gf2(rm.e_map).transpose())
        if rm.aux:
            transfer.append(
                TransferMatrix(
                    round_index=-1,
                    matrix=mat_mul_gf2(suffix, rm.b_map),
                    aux=rm.aux,
                    slots=rm.slots,
                )
            )
    for rm in rounds:
        basis = mat_mul_gf2(rm.e_map, basis)
    ordered = tuple(
        TransferMatrix(i, t.matrix, t.aux, t.slots) for i, t in enumerate(reversed(transfer))
    )
    return CircuitMaps(rounds=tuple(rounds), transfer=ordered, z_map=suffix, basis_map=basis)


def transfer_matrix(circuit: DynamicCircuit, round_index: int) -> TransferMatrix:
    transfer = analyze_circuit(circuit).transfer
    if not 0 <= round_index < len(transfer):
        raise IndexError(f"round {round_index} outside {len(transfer)} measurement rounds")
    return transfer[round_index]


class ConjugatingBlock(Protocol):
    """A CX network between rotation layers, summarized by its Z-string map."""

    @property
    def z_map(self) -> BitMatrix: ...


@dataclass(frozen=True)
class FanoutStaircase:
    """Dynamic fan-out staircase with its transfer matrices and conjugation map."""

    circuit: DynamicCircuit
    transfer: tuple[TransferMatrix, ...]
    z_map: BitMatrix
    basis_map: BitMatrix
    metadata: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_circuit(cls, circuit: DynamicCircuit) -> FanoutStaircase:
        maps = analyze_circuit(circuit)
        return cls(circuit, maps.transfer, maps.z_map, maps.basis_map, dict(circuit.metadata))

    @property
    def n_system(self) -> int:
        return self.circuit.n_system

    def frame_slots(self, offset: int = 0) -> list[tuple[int, ...]]:
        """Outcome slots (shifted by ``offset``) whose parity sets each qubit's frame bit."""
        frames: list[list[int]] = [[] for _ in range(self.n_system)]
        for t in self.transfer:
            dense = t.matrix.to_dense()
            for q, col in zip(*np.nonzero(dense)):
                frames[int(q)].append(t.slots[int(col)] + offset)
        return [tuple(sorted(f)) for f in frames]


def architecture(block: ConjugatingBlock) -> BitMatrix:
    """Rows ``j``: support of the image of ``Z_j`` under the block's conjugation."""
    return block.z_map.transpose()


def _ladder_roles(seq: Sequence[int], n_system: int) -> tuple[list[int], list[int | None]]:
    system = [q for q in seq if q < n_system]
    between: list[int | None] = [None] * max(0, len(system) - 1)
    pos = 0
    for idx, q in enumerate(seq):
        if q >= n_system:
            continue
        if idx + 2 < len(seq) and seq[idx + 1] >= n_system and seq[idx + 2] < n_system:
            between[pos] = seq[idx + 1]
        pos += 1
    return system, between


def _window_limit(m: int, r2: int) -> float:
    return m / r2


def _ladder_gates(
    q: list[int],
    aux: list[int | None],
    r1: int,
    r2: int,
    rng: np.random.Generator,
    random_extras: bool,
    clamps: dict[str, int],
) -> list[tuple[int, int]]:
    m = len(q)
    gates: list[tuple[int, int]] = []
    links = [i for i, a in enumerate(aux) if a is not None]
    for _ in range(r1):
        gates.extend((q[i], aux[i]) for i in links)  # type: ignore[misc]
        gates.extend((aux[i], q[i + 1]) for i in links)  # type: ignore[misc]
    if not random_extras:
        return gates

    limit = _window_limit(m, r2)
    for _ in range(r2):
        free_aux = set(links)
        acted: list[int] = []
        for i in range(m):
            upper = i + math.ceil(limit)
            if upper > len(aux):
                clamps["step9"] += 1
            window = [j for j in range(i, min(upper, len(aux))) if j - i < limit and j in free_aux]
            if not window:
                continue
            j = window[int(rng.integers(len(window)))]
            free_aux.discard(j)
            acted.append(j)
            gates.append((q[i], aux[j]))  # type: ignore[arg-type]
        free_sys = set(range(m))
        for j in sorted(acted):
            upper = j + math.ceil(limit)
            if upper > m:
                clamps["step12"] += 1
            window = [
                k for k in range(j + r1 + 1, min(upper, m)) if k - j < limit and k in free_sys
            ]
            if not window:
                continue
            k = window[int(rng.integers(len(window)))]
            free_sys.discard(k)
            gates.append((aux[j], q[k]))  # type: ignore[arg-type]
    return gates


def build_staircase(
    layout: QubitLayout,
    D: int,  # noqa: N803
    r1: int = 1,
    r2: int = 1,
    seed: int | None = None,
    random_extras: bool = True,
    path_iterations: int | None = None,
    path_seed: int | None = None,
) -> FanoutStaircase:
    """Build a measurement-based randomized fan-out staircase.

    For each of ``D`` random Hamiltonian paths, a forward ladder runs along the
    path and a backward ladder along the reversed path. A ladder repeats the
    nearest-neighbor pair ``CX(Q_i, A_i)``, ``CX(A_i, Q_{i+1})`` ``r1`` times; with
    ``random_extras`` it then runs ``r2`` passes of long-range couplings where
    each system qubit ``Q_i`` feeds an auxiliary ``A_j`` with ``0 <= j - i < n/r2``
    and each such auxiliary feeds a system qubit ``Q_k`` with
    ``r1 < k - j < n/r2``, partners drawn without replacement. Every ladder ends
    with X-basis measurement of the auxiliaries it touched.

    Args:
        layout: Grid or all-to-all layout that supplies alternating paths.
        D: Number of paths; the staircase has ``2 * D`` measurement rounds.
        r1: Repetitions of the nearest-neighbor ladder.
        r2: Passes of random long-range couplings.
        seed: RNG seed for paths and partner choices.
        random_extras: Whether to run the long-range passes.
        path_iterations: Split-and-mend iterations per grid path.
        path_seed: Separate seed for the paths alone; partner draws keep ``seed``.

    Returns:
        The staircase with transfer matrices and conjugation map.

    Raises:
        StaircaseError: If the long-range window is empty for every auxiliary.
    """
    n, n_aux = layout.n_system, layout.n_aux
    if n < 2:
        raise StaircaseError("a staircase needs at least two system qubits")
    if min(D, r1, r2) < 1:
        raise ValueError(f"D, r1 and r2 must be >= 1, got D={D}, r1={r1}, r2={r2}")
    limit = _window_limit(n, r2)
    if random_extras and not (r1 + 1 < limit and r1 + 1 <= n - 1):
        raise StaircaseError(
            f"step 12 window r1 < k - j < n/r2 is empty for n={n}, r1={r1}, r2={r2}"
        )

    rng = np.random.default_rng(seed)
    path_rng = rng if path_seed is None else np.random.default_rng(path_seed)
    clamps = {"step9": 0, "step12": 0}
    instructions: list[Instruction] = []
    measured_before: set[int] = set()
    paths: list[list[int]] = []
    slot = 0
    for _ in range(D):
        path = layout.sample_path(path_rng, path_iterations)
        paths.append(path)
        for seq in (path, path[::-1]):
            q, aux = _ladder_roles(seq, n)
            gates = _ladder_gates(q, aux, r1, r2, rng, random_extras, clamps)
            used = list(dict.fromkeys(x for g in gates for x in g if x >= n))
            instructions.extend(ResetAux(qubit=a) for a in used if a in measured_before)
            instructions.extend(CX(control=c, target=t) for c, t in gates)
            for a in used:
                instructions.append(MeasureX(qubit=a, slot=slot))
                slot += 1
            measured_before.update(used)
    if clamps["step9"] or clamps["step12"]:
        logger.debug("staircase window clamps: %s", clamps)

    metadata = {
        "D": D,
        "r1": r1,
        "r2": r2,
        "seed": seed,
        "path_seed": path_seed,
        "random_extras": random_extras,
        "window_clamps": clamps,
        "paths": paths,
    }
    circuit = DynamicCircuit(
        n_system=n, n_aux=n_aux, instructions=tuple(instructions), metadata=metadata
    )
    return FanoutStaircase.from_circuit(circuit)


def _ladder_circuit(n: int, repetitions: int) -> DynamicCircuit:
    if n < 2:
        raise StaircaseError("a ladder needs at least two system qubits")
    aux = [n + i for i in range(n - 1)]
    instructions: list[Instruction] = []
    for _ in range(repetitions):
        instructions.extend(CX(control=i, target=aux[i]) for i in range(n - 1))
        instructions.extend(CX(control=aux[i], target=i + 1) for i in range(n - 1))
    instructions.extend(MeasureX(qubit=a, slot=j) for j, a in enumerate(aux))
    return DynamicCircuit(
        n_system=n,
        n_aux=n - 1,
        instructions=tuple(instructions),
        metadata={"ladder_repetitions": repetitions},
    )


def one_layer_ladder(n: int) -> DynamicCircuit:
    """Nearest-neighbor CX ladder ``CX(Q_i, A_i)`` then ``CX(A_i, Q_{i+1})``, then measure."""
    return _ladder_circuit(n, 1)


def two_layer_ladder(n: int) -> DynamicCircuit:
    """The nearest-neighbor ladder applied twice before measuring."""
    return _ladder_circuit(n, 2)


def corrected_circuit(staircase: FanoutStaircase) -> DynamicCircuit:
    """Staircase circuit followed by its deferred Z corrections."""
    frames = [
        ZFrame(qubit=q, frame=f) for q, f in enumerate(staircase.frame_slots()) if f
    ]
    return staircase.circuit.model_copy(
        update={"instructions": staircase.circuit.instructions + tuple(frames)}
    )


@dataclass(frozen=True)
class IqpSpec:
    """Hamiltonian phase state ``exp(i sum_r theta_r Z^{A_r}) |+>^n`` times a global phase.

    Attributes:
        architecture: ``s x n`` matrix without zero rows.
        theta: ``s`` angles in ``[0, 2*pi)``.
        global_phase: Phase collected from pruned zero rows.
    """

    architecture: BitMatrix
    theta: np.ndarray
    global_phase: float = 0.0

    def __post_init__(self) -> None:
        theta = np.mod(np.asarray(self.theta, dtype=np.float64).reshape(-1), TWO_PI)
        if theta.size != self.architecture.rows:
            raise DimensionMismatchError(
                f"{theta.size} angles for {self.architecture.rows} architecture rows"
            )
        arch = self.architecture
        if arch.rows and arch.nonzero_rows().size != arch.rows:
            raise ValueError("architecture rows must be nonzero; use IqpSpec.from_rows to prune")
        theta.flags.writeable = False
        object.__setattr__(self, "theta", theta)

    @classmethod
    def from_rows(
        cls, architecture: BitMatrix, theta: Sequence[float] | np.ndarray, global_phase: float = 0.0
    ) -> IqpSpec:
        """Prune zero rows, folding their angles into the global phase."""
        theta = np.asarray(theta, dtype=np.float64).reshape(-1)
        if theta.size != architecture.rows:
            raise DimensionMismatchError(
                f"{theta.size} angles for {architecture.rows} architecture rows"
            )
        keep = architecture.nonzero_rows()
        dropped = np.setdiff1d(np.arange(architecture.rows), keep)
        phase = canonical_angle(global_phase + float(theta[dropped].sum()))
        return cls(architecture.take_rows(keep), theta[keep], phase)

    @property
    def n(self) -> int:
        return self.architecture.cols

    @property
    def s(self) -> int:
        return self.architecture.rows

    def to_json(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "A": self.architecture.to_json()["data"],
            "theta": [float(t) for t in self.theta],
            "global_phase": self.global_phase,
        }

    @classmethod
    def from_json(cls, payload: dict[str, Any]) -> IqpSpec:
        rows = list(payload["A"])
        n = int(payload["n"])
        arch = BitMatrix.from_rows(rows, cols=n) if rows else BitMatrix.zeros(0, n)
        theta = np.asarray(payload["theta"], dtype=np.float64)
        return cls(arch, theta, float(payload.get("global_phase", 0.0)))


def effective_iqp(
    blocks: Sequence[ConjugatingBlock], rotation_layers: Sequence[Sequence[float]]
) -> IqpSpec:
    """Effective IQP spec of ``R_{L+1} FS_L R_L ... FS_1 R_1 |+>``.

    Args:
        blocks: The ``L`` conjugating blocks, in circuit order.
        rotation_layers: ``L + 1`` layers of ``n`` angles each.

    Returns:
        Spec whose row for angle ``(i, j)`` is the support of ``Z_j`` conjugated by
        blocks ``i..L``.
    """
    if len(rotation_layers) != len(blocks) + 1:
        raise DimensionMismatchError(
            f"{len(rotation_layers)} rotation layers for {len(blocks)} blocks (need L + 1)"
        )
    n = len(rotation_layers[0])
    if any(len(layer) != n for layer in rotation_layers):
        raise DimensionMismatchError("every rotation layer needs n angles")
    suffix = BitMatrix.identity(n)
    parts: list[BitMatrix] = [suffix]
    for block in reversed(blocks):
        if block.z_map.shape != (n, n):
            raise DimensionMismatchError(f"block map {block.z_map.shape} for n={n}")
        suffix = mat_mul_gf2(suffix, block.z_map)
        parts.append(suffix.transpose())
    arch = vstack(parts[::-1])
    theta = np.concatenate([np.asarray(layer, dtype=np.float64) for layer in rotation_layers])
    return IqpSpec.from_rows(arch, theta)


def feedforward_update(
    angles: Sequence[float] | np.ndarray, t: TransferMatrix, m: Sequence[int] | np.ndarray
) -> np.ndarray:
    """Absorb the frame ``Z^(T m)`` into the next rotation layer: ``+pi/2`` per frame bit."""
    theta = np.asarray(angles, dtype=np.float64).reshape(-1)
    if theta.size != t.matrix.rows:
        raise DimensionMismatchError(f"{theta.size} angles for {t.matrix.rows} system qubits")
    frame = t.correction(m)
    return np.mod(theta + 0.5 * math.pi * frame, TWO_PI)


def _shift_with_resets(
    block: Sequence[Instruction], offset: int, stale: set[int]
) -> list[Instruction]:
    """Shift outcome slots by ``offset`` and reset measured auxiliaries right before reuse.

    ``stale`` holds auxiliaries that were measured and not yet reset; it is updated
    in place so consecutive blocks share one view of the auxiliary register.
    """
    out: list[Instruction] = []
    for ins in block:
        if isinstance(ins, ResetAux):
            continue
        if isinstance(ins, CX):
            for q in (ins.control, ins.target):
                if q in stale:
                    out.append(ResetAux(qubit=q))
                    stale.discard(q)
        if isinstance(ins, MeasureX):
            stale.add(ins.qubit)
            ins = ins.model_copy(update={"slot": ins.slot + offset})
        out.append(ins)
    return out


def build_measurement_driven_circuit(
    blocks: Sequence[FanoutStaircase | ConjugatingBlock],
    rotation_layers: Sequence[Sequence[float]],
    feed_forward: bool = True,
    final_hadamard: bool = False,
) -> DynamicCircuit:
    """Interleave ``H^n``, rotation layers and blocks into one dynamic circuit.

    With ``final_hadamard`` the circuit ends with ``H^n``, so the computational
    basis distribution of its output is the IQP sampling distribution.

    Staircase blocks contribute their measurement rounds; every rotation that
    follows a staircase carries the outcome slots of that staircase's frame.
    Blocks exposing ``gates`` (ancilla-free CX networks) contribute plain CX.
    """
    if len(rotation_layers) != len(blocks) + 1:
        raise DimensionMismatchError(
            f"{len(rotation_layers)} rotation layers for {len(blocks)} blocks (need L + 1)"
        )
    n = len(rotation_layers[0])
    n_aux = max([b.circuit.n_aux for b in blocks if isinstance(b, FanoutStaircase)], default=0)
    instructions: list[Instruction] = [H(qubit=q) for q in range(n)]
    instructions.extend(RZ(qubit=q, angle=a) for q, a in enumerate(rotation_layers[0]))
    offset = 0
    stale: set[int] = set()
    for block, layer in zip(blocks, rotation_layers[1:]):
        frames: list[tuple[int, ...]] = [()] * n
        if isinstance(block, FanoutStaircase):
            instructions.extend(_shift_with_resets(block.circuit.instructions, offset, stale))
            if feed_forward:
                frames = block.frame_slots(offset)
            offset += block.circuit.n_slots
        else:
            gates = block.gates  # type: ignore[attr-defined]
            instructions.extend(CX(control=c, target=t) for c, t in gates)
        instructions.extend(RZ(qubit=q, angle=a, frame=frames[q]) for q, a in enumerate(layer))
    if final_hadamard:
        instructions.extend(H(qubit=q) for q in range(n))
    return DynamicCircuit(
        n_system=n,
        n_aux=n_aux,
        instructions=tuple(instructions),
        metadata={
            "layers": len(blocks),
            "feed_forward": feed_forward,
            "final_hadamard": final_hadamard,
        },
    )


def synthesize_klocal(r: int, ell: int, k: int) -> list[tuple[tuple[int, ...], float]]:
    """Decompose ``exp(i * ell*pi/2^k * Z^{(x)r})`` into Z strings of weight at most ``k``.

    Expanding ``Z = 1 - 2b`` over bits and dropping products of more than ``k``
    bits (they contribute multiples of ``2*pi``) leaves, for every support of
    weight ``w``, the coefficient ``sum_{t <= k-w} C(r-w, t) (-1)^t`` times
    ``ell*pi/2^k``. Equality holds up to a global phase.

    Returns:
        ``(support, angle)`` pairs with angles in ``[0, 2*pi)``; zero angles are omitted.
    """
    if r < 1 or k < 1:
        raise ValueError(f"need r >= 1 and k >= 1, got r={r}, k={k}")
    if not 0 <= ell < 2**k:
        raise ValueError(f"ell must lie in [0, 2^k), got {ell}")
    base = ell * math.pi / 2**k
    terms: list[tuple[tuple[int, ...], float]] = []
    for w in range(1, min(r, k) + 1):
        coeff = sum(math.comb(r - w, t) * (-1) ** t for t in range(k - w + 1))
        angle = canonical_angle(coeff * base)
        if coeff == 0 or angle == 0.0:
            continue
        terms.extend((support, angle) for support in itertools.combinations(range(r), w))
    return terms


def depth_and_counts(c: DynamicCircuit) -> tuple[int, int, int]:
    """Greedy two-qubit depth, CX count and measurement count."""
    ready: dict[int, int] = {}
    depth = cx = meas = 0
    for ins in c.instructions:
        if isinstance(ins, CX):
            layer = max(ready.get(ins.control, 0), ready.get(ins.target, 0)) + 1
            ready[ins.control] = ready[ins.target] = layer
            depth = max(depth, layer)
            cx += 1
        elif isinstance(ins, MeasureX):
            meas += 1
    return depth, cx, meas


@dataclass(frozen=True)
class CxCounts:
    dynamic: int
    effective: int
    optimized: int


def cx_count_comparison(staircase: FanoutStaircase) -> CxCounts:
    """CX counts of the dynamic circuit, its effective fan-out form and the eliminated form.

    The effective form applies each round's unit-triangular map ``E`` with one CX
    per off-diagonal entry; the optimized form synthesizes the composed basis map
    by Gaussian elimination.
    """
    maps = analyze_circuit(staircase.circuit)
    n = staircase.n_system
    effective = sum(rm.e_map.popcount() - n for rm in maps.rounds)
    optimized = synthesize_cx_circuit(staircase.basis_map).count
    return CxCounts(
        dynamic=depth_and_counts(staircase.circuit)[1], effective=effective, optimized=optimized
    )
