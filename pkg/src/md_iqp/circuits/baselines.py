"""Ancilla-free CX networks used as baselines for the staircase."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from md_iqp.layout.grid import AllToAllLayout, GridLayout, system_neighbor_pairs
from md_iqp.linalg.gf2 import BitMatrix, CxGateList, replay_cx_circuit


@dataclass(frozen=True)
class CxBlock:
    """Unitary CX network on system qubits only.

    Attributes:
        n: Number of system qubits.
        gates: ``(control, target)`` pairs in circuit order.
    """

    n: int
    gates: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        CxGateList(self.n, self.gates)

    @cached_property
    def basis_map(self) -> BitMatrix:
        return replay_cx_circuit(CxGateList(self.n, self.gates))

    @cached_property
    def z_map(self) -> BitMatrix:
        """Conjugation of Z strings: ``CX(c, t)`` sends ``Z_t`` to ``Z_c Z_t``."""
        z = BitMatrix.identity(self.n).words.copy()
        for c, t in self.gates:
            z[c] ^= z[t]
        return BitMatrix(self.n, self.n, z)

    @property
    def depth(self) -> int:
        ready = [0] * self.n
        for c, t in self.gates:
            ready[c] = ready[t] = max(ready[c], ready[t]) + 1
        return max(ready, default=0)


def _matching(pairs: Sequence[tuple[int, int]], rng: np.random.Generator) -> list[tuple[int, int]]:
    used: set[int] = set()
    layer: list[tuple[int, int]] = []
    for idx in rng.permutation(len(pairs)):
        a, b = pairs[int(idx)]
        if a in used or b in used:
            continue
        used.update((a, b))
        layer.append((a, b) if rng.random() < 0.5 else (b, a))
    return layer


def random_cx_layers(
    layout: GridLayout | AllToAllLayout, depth: int, seed: int | None = None
) -> CxBlock:
    """``depth`` layers of disjoint random CX gates, each with a random orientation.

    On a grid, gates act on nearest neighbors of the system sub-grid. With
    all-to-all connectivity every layer pairs up a random permutation.
    """
    if depth < 0:
        raise ValueError(f"depth must be non-negative, got {depth}")
    rng = np.random.default_rng(seed)
    n = layout.n_system
    gates: list[tuple[int, int]] = []
    if isinstance(layout, GridLayout):
        pairs = system_neighbor_pairs(layout)
        for _ in range(depth):
            gates.extend(_matching(pairs, rng))
    else:
        for _ in range(depth):
            perm = rng.permutation(n)
            for i in range(0, n - 1, 2):
                a, b = int(perm[i]), int(perm[i + 1])
                gates.append((a, b) if rng.random() < 0.5 else (b, a))
    return CxBlock(n, tuple(gates))
