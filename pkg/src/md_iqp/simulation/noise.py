"""Monte Carlo Pauli-noise trajectories, total-variation sweeps and saturation fits.

A trajectory runs the circuit on the dense simulator with sampled measurement
outcomes (feed-forward still applies) and injects Pauli errors:

* after every CX, with probability ``p2``, one of the 15 non-identity two-qubit
  Paulis (``"joint"``), or an independent single-qubit depolarizing event of
  strength ``p2`` on each qubit (``"marginal"``);
* after every H or RZ, with probability ``p1``, one of X, Y, Z;
* after every scheduled moment of duration ``tau``, a Z on every live qubit with
  probability ``(1 - exp(-tau / T2)) / 2``.

Measurements are ideal. The trajectory's exact output distribution is
accumulated, so there is no shot noise on top of the trajectory average.
"""

from __future__ import annotations

import csv
import logging
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import least_squares

from md_iqp.circuits.models import (
    CX,
    RZ,
    DynamicCircuit,
    H,
    Instruction,
    MeasureX,
    ResetAux,
    ZFrame,
)
from md_iqp.circuits.staircase import FanoutStaircase
from md_iqp.errors import GridError
from md_iqp.layout.grid import GridLayout, system_coordinates
from md_iqp.linalg.gf2 import synthesize_cx_circuit
from md_iqp.settings import settings
from md_iqp.simulation.simcore import Distribution, Register, output_distribution, total_variation

logger = logging.getLogger(__name__)

_PAULIS = ("i", "x", "y", "z")


class NoiseModel(BaseModel):
    """Gate depolarizing and T2 dephasing parameters.

    ``t2_ns=None`` means no dephasing. Durations are wall-clock nanoseconds per
    scheduled moment: ``cx_layer_ns`` for moments holding a CX and
    ``single_layer_ns`` for all others.
    """

    model_config = ConfigDict(frozen=True)

    p1: float = Field(default=0.0, ge=0.0, le=1.0, description="single-qubit depolarizing")
    p2: float = Field(default=0.0, ge=0.0, le=1.0, description="two-qubit depolarizing")
    t2_ns: float | None = Field(default=None, gt=0.0, description="dephasing time")
    cx_layer_ns: float = Field(default=200.0, ge=0.0)
    single_layer_ns: float = Field(default=0.0, ge=0.0)
    depolarizing: Literal["joint", "marginal"] = "joint"

    def dephasing_probability(self, tau: float) -> float:
        if self.t2_ns is None or tau <= 0:
            return 0.0
        return 0.5 * (1.0 - math.exp(-tau / self.t2_ns))

    @property
    def is_ideal(self) -> bool:
        return self.p1 == 0 and self.p2 == 0 and self.t2_ns is None


class SaturationFit(BaseModel):
    """``delta_tv(t) ~ delta_inf * (1 - exp(-kappa * t))``."""

    delta_inf: float = Field(ge=0.0, le=1.0)
    kappa: float = Field(ge=0.0, description="rate in 1/ns")
    residual: float = Field(ge=0.0, description="root-mean-square residual")
    degenerate: bool = False


class SweepRow(BaseModel):
    param: str
    value: float
    mean_tv: float
    stddev: float
    trajectories: int
    seed: int


def _qubits(ins: Instruction) -> tuple[int, ...]:
    return (ins.control, ins.target) if isinstance(ins, CX) else (ins.qubit,)


def schedule_moments(c: DynamicCircuit) -> list[list[Instruction]]:
    """ASAP moments; frame-reading instructions wait for the measurements they read."""
    ready: dict[int, int] = {}
    slot_ready: dict[int, int] = {}
    moments: list[list[Instruction]] = []
    for ins in c.instructions:
        frame = ins.frame if isinstance(ins, (RZ, ZFrame)) else ()
        qs = _qubits(ins)
        m = max([ready.get(q, 0) for q in qs] + [slot_ready.get(s, 0) for s in frame])
        for q in qs:
            ready[q] = m + 1
        if isinstance(ins, MeasureX):
            slot_ready[ins.slot] = m + 1
        while len(moments) <= m:
            moments.append([])
        moments[m].append(ins)
    return moments


def _moment_duration(moment: Sequence[Instruction], nm: NoiseModel) -> float:
    return nm.cx_layer_ns if any(isinstance(i, CX) for i in moment) else nm.single_layer_ns


def circuit_duration(c: DynamicCircuit, nm: NoiseModel) -> float:
    return float(sum(_moment_duration(m, nm) for m in schedule_moments(c)))


def _apply_pauli(reg: Register, q: int, pauli: str) -> None:
    if pauli == "x":
        reg.x(q)
    elif pauli == "y":
        reg.y(q)
    elif pauli == "z":
        reg.z(q)


def _depolarize_1q(reg: Register, q: int, p: float, rng: np.random.Generator) -> None:
    if p > 0 and rng.random() < p:
        _apply_pauli(reg, q, _PAULIS[1 + int(rng.integers(3))])


def _depolarize_cx(reg: Register, a: int, b: int, nm: NoiseModel, rng: np.random.Generator) -> None:
    if nm.p2 == 0:
        return
    if nm.depolarizing == "marginal":
        _depolarize_1q(reg, a, nm.p2, rng)
        _depolarize_1q(reg, b, nm.p2, rng)
    elif rng.random() < nm.p2:
        k = 1 + int(rng.integers(15))
        _apply_pauli(reg, a, _PAULIS[k // 4])
        _apply_pauli(reg, b, _PAULIS[k % 4])


def _trajectory(
    c: DynamicCircuit,
    moments: list[list[Instruction]],
    nm: NoiseModel,
    rng: np.random.Generator,
) -> np.ndarray:
    reg = Register(c.n_system, None, settings.max_qubits)
    bits: dict[int, int] = {}
    for moment in moments:
        for ins in moment:
            if isinstance(ins, CX):
                reg.cx(ins.control, ins.target)
                _depolarize_cx(reg, ins.control, ins.target, nm, rng)
            elif isinstance(ins, H):
                reg.h(ins.qubit)
                _depolarize_1q(reg, ins.qubit, nm.p1, rng)
            elif isinstance(ins, RZ):
                flip = sum(bits[s] for s in ins.frame) & 1
                reg.phase(ins.qubit, ins.angle + 0.5 * math.pi * flip)
                _depolarize_1q(reg, ins.qubit, nm.p1, rng)
            elif isinstance(ins, ZFrame):
                if sum(bits[s] for s in ins.frame) & 1:
                    reg.z(ins.qubit)
            elif isinstance(ins, ResetAux):
                reg.reset(ins.qubit)
            elif isinstance(ins, MeasureX):
                probs = reg.x_basis_probs(ins.qubit)
                bit = int(rng.random() < probs[1])
                reg.collapse(ins.qubit, bit, probs[bit])
                bits[ins.slot] = bit
        p_z = nm.dephasing_probability(_moment_duration(moment, nm))
        if p_z > 0:
            for q in list(reg.axes):
                if rng.random() < p_z:
                    reg.z(q)
    return output_distribution(reg.system_state(c.n_system)).probs


def noisy_distribution(
    c: DynamicCircuit,
    nm: NoiseModel,
    trajectories: int | None = None,
    seed: int = 0,
) -> Distribution:
    """Average exact output distribution over Pauli-injection trajectories.

    Trajectory ``t`` draws from ``default_rng([seed, t])``, so the result does not
    depend on the worker count.
    """
    trajectories = settings.trajectories if trajectories is None else trajectories
    if trajectories < 1:
        raise ValueError("trajectories must be >= 1")
    moments = schedule_moments(c)

    def run(t: int) -> np.ndarray:
        return _trajectory(c, moments, nm, np.random.default_rng([seed, t]))

    with ThreadPoolExecutor(max_workers=max(1, settings.threads)) as pool:
        acc = np.zeros(2**c.n_system)
        for probs in pool.map(run, range(trajectories)):
            acc += probs
    return Distribution(c.n_system, acc / trajectories)


def ideal_distribution(c: DynamicCircuit, seed: int = 0) -> Distribution:
    """Noise-free output distribution of a feed-forward corrected circuit (one trajectory)."""
    return noisy_distribution(c, NoiseModel(), trajectories=1, seed=seed)


def tv_sweep(
    circuits: Sequence[DynamicCircuit],
    param: Literal["p1", "p2", "t2_ns", "cx_layer_ns"],
    values: Sequence[float],
    base: NoiseModel | None = None,
    trajectories: int | None = None,
    seed: int = 0,
    ideal: Sequence[Distribution] | None = None,
) -> list[SweepRow]:
    """Mean and spread of total-variation distance across ``circuits`` for each value."""
    base = base or NoiseModel()
    trajectories = settings.trajectories if trajectories is None else trajectories
    if ideal is None:
        ideal = [ideal_distribution(c, seed) for c in circuits]
    references = list(ideal)
    rows: list[SweepRow] = []
    for value in values:
        nm = NoiseModel.model_validate({**base.model_dump(), param: value})
        tvs = [
            total_variation(noisy_distribution(c, nm, trajectories, seed + i), ref)
            for i, (c, ref) in enumerate(zip(circuits, references))
        ]
        rows.append(
            SweepRow(
                param=param,
                value=float(value),
                mean_tv=float(np.mean(tvs)),
                stddev=float(np.std(tvs)),
                trajectories=trajectories,
                seed=seed,
            )
        )
        logger.info("%s=%g mean_tv=%.4f", param, value, rows[-1].mean_tv)
    return rows


def write_sweep_csv(rows: Sequence[SweepRow], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(SweepRow.model_fields))
        for r in rows:
            writer.writerow([r.param, r.value, r.mean_tv, r.stddev, r.trajectories, r.seed])


def dephasing_series(
    circuit: DynamicCircuit,
    nm: NoiseModel,
    scales: Sequence[float],
    trajectories: int | None = None,
    seed: int = 0,
) -> list[tuple[float, float]]:
    """``(duration_ns, delta_tv)`` pairs with layer durations stretched by ``scales``."""
    if nm.t2_ns is None:
        raise ValueError("dephasing series needs a finite t2_ns")
    ref = ideal_distribution(circuit, seed)
    points: list[tuple[float, float]] = []
    for s in scales:
        scaled = NoiseModel.model_validate(
            {
                **nm.model_dump(),
                "cx_layer_ns": nm.cx_layer_ns * s,
                "single_layer_ns": nm.single_layer_ns * s,
            }
        )
        tv = total_variation(noisy_distribution(circuit, scaled, trajectories, seed), ref)
        points.append((circuit_duration(circuit, scaled), tv))
    return points


def _saturation(params: np.ndarray, t: np.ndarray) -> np.ndarray:
    return params[0] * (1.0 - np.exp(-params[1] * t))


def fit_saturation(points: Sequence[tuple[float, float]]) -> SaturationFit:
    """Least-squares fit of ``delta_inf * (1 - exp(-kappa * t))``.

    ``kappa`` is seeded from a log-spaced grid (with the best ``delta_inf`` for each
    candidate) and refined by bounded trust-region least squares.
    """
    if len(points) < 3:
        raise ValueError("need at least 3 points")
    t = np.array([p[0] for p in points], dtype=np.float64)
    y = np.array([p[1] for p in points], dtype=np.float64)
    if (t < 0).any():
        raise ValueError("durations must be non-negative")
    if np.ptp(y) < 1e-15 or t.max() <= 0:
        level = float(np.clip(y.mean(), 0.0, 1.0))
        rms = float(np.sqrt(np.mean(y**2)))
        return SaturationFit(delta_inf=level, kappa=0.0, residual=rms, degenerate=True)

    best: tuple[float, np.ndarray] | None = None
    for kappa in np.logspace(-3, 3, 61) / t.max():
        shape = 1.0 - np.exp(-kappa * t)
        level = float(np.clip(shape @ y / max(shape @ shape, 1e-300), 0.0, 1.0))
        sse = float(np.sum((level * shape - y) ** 2))
        if best is None or sse < best[0]:
            best = (sse, np.array([level, kappa]))
    assert best is not None
    fit = least_squares(
        lambda p: _saturation(p, t) - y,
        best[1],
        bounds=([0.0, 0.0], [1.0, np.inf]),
        x_scale="jac",
        ftol=1e-15,
        xtol=1e-15,
        gtol=1e-15,
        max_nfev=10_000,
    )
    resid = float(np.sqrt(np.mean(fit.fun**2)))
    return SaturationFit(delta_inf=float(fit.x[0]), kappa=float(fit.x[1]), residual=resid)


def _swap(a: int, b: int) -> list[CX]:
    return [CX(control=a, target=b), CX(control=b, target=a), CX(control=a, target=b)]


def _routed_cx(
    c: int, t: int, coords: Sequence[tuple[int, int]], at: dict[tuple[int, int], int]
) -> list[CX]:
    """CX between arbitrary system qubits using nearest-neighbor SWAPs there and back."""
    (cx_, cy), (tx, ty) = coords[c], coords[t]
    walk: list[int] = [c]
    x, y = cx_, cy
    while abs(x - tx) + abs(y - ty) > 1:
        if x != tx:
            x += 1 if tx > x else -1
        else:
            y += 1 if ty > y else -1
        if (x, y) not in at:
            raise GridError(f"no system site at {(x, y)} for routing")
        walk.append(at[(x, y)])
    ops: list[CX] = []
    for a, b in zip(walk, walk[1:]):
        ops.extend(_swap(a, b))
    ops.append(CX(control=walk[-1], target=t))
    for a, b in reversed(list(zip(walk, walk[1:]))):
        ops.extend(_swap(a, b))
    return ops


def compile_unitary(
    staircases: Sequence[FanoutStaircase],
    rotation_layers: Sequence[Sequence[float]],
    layout: GridLayout | None = None,
    final_hadamard: bool = True,
) -> DynamicCircuit:
    """Ancilla-free unitary circuit with the same effective IQP spec.

    Each staircase's basis map is synthesized by Gaussian elimination. With a
    ``layout`` every CX is routed onto nearest neighbors of the system grid.
    """
    n = len(rotation_layers[0])
    route: Callable[[int, int], list[CX]]
    if layout is None:
        def route(c: int, t: int) -> list[CX]:
            return [CX(control=c, target=t)]
    else:
        coords = system_coordinates(layout)
        at = {xy: q for q, xy in enumerate(coords)}

        def route(c: int, t: int) -> list[CX]:
            return _routed_cx(c, t, coords, at)

    ops: list[Instruction] = [H(qubit=q) for q in range(n)]
    ops.extend(RZ(qubit=q, angle=a) for q, a in enumerate(rotation_layers[0]))
    for fs, layer in zip(staircases, rotation_layers[1:]):
        for c, t in synthesize_cx_circuit(fs.basis_map).gates:
            ops.extend(route(c, t))
        ops.extend(RZ(qubit=q, angle=a) for q, a in enumerate(layer))
    if final_hadamard:
        ops.extend(H(qubit=q) for q in range(n))
    return DynamicCircuit(n_system=n, instructions=tuple(ops), metadata={"compiled": True})
