"""Dense state-vector engine for dynamic circuits and Hamiltonian phase states.

Basis states are big-endian: qubit 0 is the most significant bit of the basis
index. Auxiliaries enter the live register in ``|0>`` the first time an
instruction touches them and leave it as soon as they are measured.
"""

from __future__ import annotations

import csv
import logging
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
from scipy import stats

from md_iqp.circuits.baselines import random_cx_layers
from md_iqp.circuits.models import CX, RZ, DynamicCircuit, H, MeasureX, ResetAux, ZFrame
from md_iqp.circuits.staircase import IqpSpec, effective_iqp
from md_iqp.errors import DimensionMismatchError, ResourceLimitError
from md_iqp.layout.grid import AllToAllLayout, GridLayout, system_coordinates
from md_iqp.settings import settings

logger = logging.getLogger(__name__)

_H = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) / math.sqrt(2.0)
_PROB_TOL = 1e-14
_CHUNK = 1 << 16


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state on ``n`` qubits with ``2**n`` big-endian amplitudes."""

    n: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size != 2**self.n:
            raise DimensionMismatchError(f"{amps.size} amplitudes for {self.n} qubits")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zero(cls, n: int) -> StateVector:
        amps = np.zeros(2**n, dtype=np.complex128)
        amps[0] = 1.0
        return cls(n, amps)

    @classmethod
    def plus(cls, n: int) -> StateVector:
        return cls(n, np.full(2**n, 2.0 ** (-n / 2), dtype=np.complex128))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.n)

    def fidelity(self, other: StateVector) -> float:
        """``|<self|other>|^2``; insensitive to global phase."""
        if other.n != self.n:
            raise DimensionMismatchError(f"fidelity between {self.n} and {other.n} qubits")
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2)

    def apply_hadamards(self) -> StateVector:
        """``H`` on every qubit, as applied before sampling an IQP circuit."""
        psi = self.tensor()
        for ax in range(self.n):
            psi = apply_1q(psi, _H, ax)
        return StateVector(self.n, psi.reshape(-1))


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probability vector over ``2**n`` big-endian bitstrings."""

    n: int
    probs: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.probs, dtype=np.float64).reshape(-1)
        if p.size != 2**self.n:
            raise DimensionMismatchError(f"{p.size} probabilities for {self.n} bits")
        if (p < -1e-12).any() or not math.isclose(float(p.sum()), 1.0, abs_tol=1e-10):
            raise ValueError("probabilities must be non-negative and sum to 1")
        p = np.clip(p, 0.0, None)
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)

    def bitstring(self, index: int) -> str:
        return format(index, f"0{self.n}b") if self.n else ""

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["bitstring", "probability"])
            for idx, p in enumerate(self.probs):
                writer.writerow([self.bitstring(idx), repr(float(p))])

    def to_bytes(self) -> bytes:
        return self.probs.astype("<f8").tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> Distribution:
        probs = np.frombuffer(blob, dtype="<f8")
        n = int(round(math.log2(probs.size))) if probs.size else -1
        if n < 0 or 2**n != probs.size:
            raise DimensionMismatchError(f"{probs.size} probabilities is not a power of two")
        return cls(n, probs.astype(np.float64))


def distribution_to_csv(d: Distribution, path: str | Path) -> None:
    d.to_csv(path)


def distribution_to_bytes(d: Distribution) -> bytes:
    return d.to_bytes()


def apply_1q(psi: np.ndarray, gate: np.ndarray, ax: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(gate, psi, axes=([1], [ax])), 0, ax)


def _slice(ndim: int, ax: int, value: int) -> tuple[slice | int, ...]:
    idx: list[slice | int] = [slice(None)] * ndim
    idx[ax] = value
    return tuple(idx)


class Register:
    """Live qubits of a running dynamic circuit."""

    def __init__(self, n_system: int, initial: StateVector | None, cap: int) -> None:
        if n_system > cap:
            raise ResourceLimitError(f"{n_system} system qubits exceed the cap of {cap}")
        init = initial if initial is not None else StateVector.zero(n_system)
        if init.n != n_system:
            raise DimensionMismatchError(
                f"initial state on {init.n} qubits, circuit has {n_system}"
            )
        self.cap = cap
        self.axes: list[int] = list(range(n_system))
        self.psi = np.array(init.tensor(), dtype=np.complex128, copy=True)
        self.stale: set[int] = set()

    def copy(self) -> Register:
        clone = object.__new__(Register)
        clone.cap = self.cap
        clone.axes = list(self.axes)
        clone.psi = self.psi.copy()
        clone.stale = set(self.stale)
        return clone

    def axis(self, q: int) -> int:
        if q in self.stale:
            raise ValueError(f"qubit {q} used after measurement without reset")
        if q not in self.axes:
            if len(self.axes) + 1 > self.cap:
                raise ResourceLimitError(
                    f"live register would grow to {len(self.axes) + 1} qubits (cap {self.cap})"
                )
            self.psi = np.stack([self.psi, np.zeros_like(self.psi)], axis=-1)
            self.axes.append(q)
        return self.axes.index(q)

    def cx(self, c: int, t: int) -> None:
        a, b = self.axis(c), self.axis(t)
        idx = _slice(self.psi.ndim, a, 1)
        sub = self.psi[idx]
        self.psi[idx] = np.flip(sub, axis=b - 1 if b > a else b).copy()

    def h(self, q: int) -> None:
        self.psi = apply_1q(self.psi, _H, self.axis(q))

    def phase(self, q: int, angle: float) -> None:
        """``exp(i * angle * Z)`` on ``q``."""
        ax = self.axis(q)
        self.psi[_slice(self.psi.ndim, ax, 0)] *= np.exp(1j * angle)
        self.psi[_slice(self.psi.ndim, ax, 1)] *= np.exp(-1j * angle)

    def z(self, q: int) -> None:
        self.psi[_slice(self.psi.ndim, self.axis(q), 1)] *= -1.0

    def x(self, q: int) -> None:
        ax = self.axis(q)
        self.psi = np.flip(self.psi, axis=ax).copy()

    def y(self, q: int) -> None:
        """Pauli Y up to a global phase."""
        self.z(q)
        self.x(q)

    def x_basis_probs(self, q: int) -> tuple[float, float]:
        if q in self.stale:
            raise ValueError(f"auxiliary {q} measured twice without reset")
        if q not in self.axes:
            return 0.5, 0.5
        self.h(q)
        ax = self.axes.index(q)
        p1 = float(np.sum(np.abs(self.psi[_slice(self.psi.ndim, ax, 1)]) ** 2))
        total = float(np.sum(np.abs(self.psi) ** 2))
        return (total - p1) / total, p1 / total

    def collapse(self, q: int, outcome: int, prob: float) -> None:
        """Project onto ``outcome`` after :meth:`x_basis_probs` and drop the axis."""
        self.stale.add(q)
        if q not in self.axes:
            return
        ax = self.axes.index(q)
        self.psi = np.take(self.psi, outcome, axis=ax) / math.sqrt(prob)
        self.axes.pop(ax)

    def reset(self, q: int) -> None:
        if q in self.axes:
            raise ValueError(f"reset of auxiliary {q} while it is still live")
        self.stale.discard(q)

    def system_state(self, n_system: int) -> StateVector:
        if len(self.axes) != n_system:
            live = sorted(set(self.axes) - set(range(n_system)))
            raise ValueError(f"auxiliaries {live} were never measured")
        order = [self.axes.index(q) for q in range(n_system)]
        psi = np.transpose(self.psi, order) if self.psi.ndim else self.psi
        return StateVector(n_system, psi.reshape(-1))


@dataclass(frozen=True)
class DynamicResult:
    """Final system state, measurement record and branch probability.

    Attributes:
        state: Post-measurement system state.
        outcomes: Outcome bits indexed by position in the sorted slot list.
        probability: Probability of this branch (1 for unmeasured circuits).
    """

    state: StateVector
    outcomes: tuple[int, ...]
    probability: float


def _parity(bits: Mapping[int, int], frame: Iterable[int]) -> int:
    return sum(bits[s] for s in frame) & 1


def _execute(
    c: DynamicCircuit,
    reg: Register,
    start: int,
    bits: dict[int, int],
    prob: float,
    choose: _Chooser,
) -> list[tuple[Register, dict[int, int], float]]:
    stack = [(reg, start, bits, prob)]
    done: list[tuple[Register, dict[int, int], float]] = []
    instructions = c.instructions
    while stack:
        reg, pos, bits, prob = stack.pop()
        while pos < len(instructions):
            ins = instructions[pos]
            pos += 1
            if isinstance(ins, CX):
                reg.cx(ins.control, ins.target)
            elif isinstance(ins, H):
                reg.h(ins.qubit)
            elif isinstance(ins, RZ):
                reg.phase(ins.qubit, ins.angle + 0.5 * math.pi * _parity(bits, ins.frame))
            elif isinstance(ins, ZFrame):
                if _parity(bits, ins.frame):
                    reg.z(ins.qubit)
            elif isinstance(ins, ResetAux):
                reg.reset(ins.qubit)
            elif isinstance(ins, MeasureX):
                probs = reg.x_basis_probs(ins.qubit)
                outcomes = choose(ins.slot, probs)
                for k, outcome in enumerate(outcomes):
                    branch = reg if k == len(outcomes) - 1 else reg.copy()
                    branch.collapse(ins.qubit, outcome, probs[outcome])
                    new_bits = {**bits, ins.slot: outcome}
                    if k < len(outcomes) - 1:
                        stack.append((branch, pos, new_bits, prob * probs[outcome]))
                    else:
                        bits, prob = new_bits, prob * probs[outcome]
                if not outcomes:
                    break
        else:
            done.append((reg, bits, prob))
    return done


class _Chooser:
    def __init__(
        self,
        mode: str,
        rng: np.random.Generator | None = None,
        fixed: Mapping[int, int] | None = None,
    ) -> None:
        self.mode = mode
        self.rng = rng
        self.fixed = fixed or {}

    def __call__(self, slot: int, probs: tuple[float, float]) -> list[int]:
        if self.mode == "enumerate":
            return [b for b in (0, 1) if probs[b] > _PROB_TOL]
        if self.mode == "fixed":
            bit = self.fixed[slot]
            if probs[bit] <= _PROB_TOL:
                raise ValueError(f"outcome {bit} on slot {slot} has zero probability")
            return [bit]
        assert self.rng is not None
        return [int(self.rng.random() < probs[1])]


def run_dynamic(
    c: DynamicCircuit,
    mode: Literal["sample", "fixed", "enumerate"] = "sample",
    seed: int | None = None,
    outcomes: Sequence[int] | None = None,
    initial: StateVector | None = None,
) -> DynamicResult | list[DynamicResult]:
    """Execute a dynamic circuit on the dense simulator.

    Args:
        c: Circuit to run; auxiliaries start in ``|0>``.
        mode: ``"sample"`` draws outcomes from ``seed``; ``"fixed"`` forces
            ``outcomes``; ``"enumerate"`` explores every branch with nonzero
            probability depth-first.
        seed: RNG seed for ``"sample"``.
        outcomes: One bit per measurement, ordered by slot, for ``"fixed"``.
        initial: System input state; defaults to ``|0...0>``.

    Returns:
        One :class:`DynamicResult`, or a list of them for ``"enumerate"``.

    Raises:
        ResourceLimitError: If the live register or the branch count exceeds its cap.
    """
    slots = sorted(ins.slot for ins in c.instructions if isinstance(ins, MeasureX))
    rank = {s: i for i, s in enumerate(slots)}
    if mode == "fixed":
        if outcomes is None or len(outcomes) != len(slots):
            got = None if outcomes is None else len(outcomes)
            raise DimensionMismatchError(f"expected {len(slots)} fixed outcomes, got {got}")
        if any(b not in (0, 1) for b in outcomes):
            raise ValueError("fixed outcomes must be bits")
        chooser = _Chooser("fixed", fixed={s: int(outcomes[rank[s]]) for s in slots})
    elif mode == "enumerate":
        if 2 ** len(slots) > settings.max_branches:
            raise ResourceLimitError(
                f"{len(slots)} measurements exceed the branch cap of {settings.max_branches}"
            )
        chooser = _Chooser("enumerate")
    elif mode == "sample":
        chooser = _Chooser("sample", rng=np.random.default_rng(seed))
    else:
        raise ValueError(f"unknown mode {mode!r}")

    reg = Register(c.n_system, initial, settings.max_qubits)
    results = [
        DynamicResult(
            state=r.system_state(c.n_system),
            outcomes=tuple(bits[s] for s in slots),
            probability=p,
        )
        for r, bits, p in _execute(c, reg, 0, {}, 1.0, chooser)
    ]
    if mode == "enumerate":
        return sorted(results, key=lambda r: r.outcomes)
    return results[0]


def phase_state(spec: IqpSpec) -> StateVector:
    """``2^(-n/2) e^{i phi} sum_x exp(i sum_r theta_r (-1)^(A_r . x)) |x>``."""
    n = spec.n
    if n > settings.max_qubits:
        raise ResourceLimitError(f"phase state on {n} qubits exceeds the cap {settings.max_qubits}")
    arch = spec.architecture.to_dense().astype(np.int64).T
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    amps = np.empty(2**n, dtype=np.complex128)
    for start in range(0, 2**n, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, 2**n), dtype=np.int64)
        bits = (idx[:, None] >> shifts) & 1
        signs = 1.0 - 2.0 * ((bits @ arch) & 1)
        amps[start : start + idx.size] = np.exp(1j * (signs @ spec.theta))
    amps *= np.exp(1j * spec.global_phase) * 2.0 ** (-n / 2)
    return StateVector(n, amps)


def output_distribution(s: StateVector) -> Distribution:
    p = np.abs(s.amplitudes) ** 2
    return Distribution(s.n, p / p.sum())


def iqp_distribution(spec: IqpSpec) -> Distribution:
    """Sampling distribution of the IQP circuit: ``H^n`` applied to the phase state."""
    return output_distribution(phase_state(spec).apply_hadamards())


def uniform_distribution(n: int) -> Distribution:
    return Distribution(n, np.full(2**n, 2.0**-n))


def sample(d: Distribution, shots: int, seed: int | None = None) -> dict[str, int]:
    """Multinomial shot counts keyed by bitstring; bitstrings with no hits are omitted."""
    if shots < 0:
        raise ValueError("shots must be non-negative")
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, d.probs / d.probs.sum())
    return {d.bitstring(int(i)): int(counts[i]) for i in np.flatnonzero(counts)}


def counts_to_array(counts: Mapping[str, int], n: int) -> np.ndarray:
    arr = np.zeros(2**n, dtype=np.int64)
    for bitstring, k in counts.items():
        arr[int(bitstring, 2) if bitstring else 0] += k
    return arr


def chi_square_fit(
    counts: Mapping[str, int], d: Distribution, min_expected: float = 5.0
) -> tuple[float, float]:
    """Pearson chi-square of observed counts against ``d``.

    Cells with expected count below ``min_expected`` are pooled into one cell.

    Returns:
        ``(statistic, p_value)``.
    """
    observed = counts_to_array(counts, d.n)
    expected = d.probs * observed.sum()
    small = expected < min_expected
    obs = list(observed[~small])
    exp = list(expected[~small])
    if small.any() and expected[small].sum() > 0:
        obs.append(int(observed[small].sum()))
        exp.append(float(expected[small].sum()))
    if len(obs) < 2:
        return 0.0, 1.0
    f_obs = np.asarray(obs, dtype=np.float64)
    f_exp = np.asarray(exp, dtype=np.float64)
    f_exp *= f_obs.sum() / f_exp.sum()
    result = stats.chisquare(f_obs, f_exp)
    return float(result.statistic), float(result.pvalue)


def collision_probability(d: Distribution) -> float:
    return float(np.sum(d.probs**2))


def haar_collision(n: int) -> float:
    return 2.0 / (2**n + 1)


def entanglement_entropy(s: StateVector, subset: Iterable[int]) -> float:
    """Von Neumann entropy (nats) of the reduced state on ``subset``."""
    left = sorted(set(subset))
    if not left or len(left) >= s.n or any(not 0 <= q < s.n for q in left):
        raise ValueError(f"subset must be a nonempty proper subset of {s.n} qubits")
    right = [q for q in range(s.n) if q not in left]
    mat = np.transpose(s.tensor(), left + right).reshape(2 ** len(left), -1)
    sv = np.linalg.svd(mat, compute_uv=False)
    p = sv**2
    p = p[p > 1e-15]
    return float(-np.sum(p * np.log(p)))


def xi_cost(s: StateVector, layout: GridLayout, eta: float = 1.0) -> float:
    """Summed cut entropies over all vertical and horizontal cuts of the system grid."""
    coords = system_coordinates(layout)
    if len(coords) != s.n:
        raise DimensionMismatchError(f"layout has {len(coords)} system sites, state has {s.n}")
    cols = np.array([c for c, _ in coords])
    rows = np.array([r for _, r in coords])
    total = 0.0
    for axis in (cols, rows):
        for cut in range(int(axis.max()) if axis.size else 0):
            side = np.flatnonzero(axis <= cut)
            if 0 < side.size < s.n:
                total += entanglement_entropy(s, side.tolist())
    return total / eta


def total_variation(p: Distribution, q: Distribution) -> float:
    if p.probs.size != q.probs.size:
        raise DimensionMismatchError(f"distributions of size {p.probs.size} and {q.probs.size}")
    return float(min(1.0, 0.5 * np.abs(p.probs - q.probs).sum()))


def expectation_z(s: StateVector | Distribution, qubits: Sequence[int]) -> float:
    """``<Z_{q1} ... Z_{qk}>`` in the computational basis."""
    d = output_distribution(s) if isinstance(s, StateVector) else s
    idx = np.arange(2**d.n, dtype=np.int64)
    parity = np.zeros_like(idx)
    for q in qubits:
        parity ^= (idx >> (d.n - 1 - q)) & 1
    return float(np.sum(d.probs * (1 - 2 * parity)))


def random_iqp_baseline(
    layout: GridLayout | AllToAllLayout,
    depth: int,
    layers: int = 1,
    seed: int | None = None,
) -> IqpSpec:
    """Ancilla-free IQP spec from ``layers`` random CX blocks of two-qubit depth ``depth``.

    Rotation angles are uniform on ``[0, 2*pi)``. With ``layers=1`` and
    ``depth=6*n`` this is the linear-depth reference for the xi cost.
    """
    rng = np.random.default_rng(seed)
    n = layout.n_system
    blocks = [random_cx_layers(layout, depth, int(rng.integers(2**63 - 1))) for _ in range(layers)]
    angles = [rng.uniform(0.0, 2 * math.pi, n) for _ in range(layers + 1)]
    return effective_iqp(blocks, angles)


def xi_lin_baseline(
    layout: GridLayout, instances: int = 20, seed: int | None = None
) -> float:
    """Mean xi cost of depth-``6n`` ancilla-free IQP states on the system grid."""
    seeds = np.random.SeedSequence(seed).spawn(instances)
    n = layout.n_system
    values = []
    for child in seeds:
        spec = random_iqp_baseline(layout, 6 * n, 1, int(child.generate_state(1)[0]))
        values.append(xi_cost(phase_state(spec), layout))
    logger.info("xi_lin baseline over %d instances: %.4f", instances, float(np.mean(values)))
    return float(np.mean(values))
