"""Readout-gap demonstration: one multibody cycle against a local Floquet cycle.

Two inputs that agree on every local marginal differ only in the phase of a
three-qubit coherence on a well-separated triplet ``S``. A single heavy
multibody string on ``S`` turns that phase into a ``Z_S`` population, while
a nearest-neighbor cycle of the same total time can only see it through a
product of three local rotations.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Callable, Sequence
from typing import Literal

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import shortest_path

from md_iqp.circuits.staircase import architecture, build_staircase
from md_iqp.layout.grid import GridLayout, square_system_layout
from md_iqp.linalg.gf2 import BitMatrix, vstack
from md_iqp.reservoir.floquet import (
    Edge,
    MultibodyReservoir,
    grid_edges,
    local_reservoir,
    path_edges,
)
from md_iqp.simulation.simcore import StateVector, expectation_z

logger = logging.getLogger(__name__)

Graph = Literal["path", "grid"]


def _graph(n: int, graph: Graph) -> tuple[list[Edge], GridLayout]:
    if graph == "path":
        return path_edges(n), GridLayout(2 * n - 1, 1)
    if graph == "grid":
        side = math.isqrt(n)
        if side * side != n:
            raise ValueError(f"grid graph needs a square qubit count, got {n}")
        return grid_edges(side, side), square_system_layout(side)
    raise ValueError(f"unknown graph {graph!r}")


def select_triplet(n: int, edges: Sequence[Edge]) -> tuple[tuple[int, int, int], int]:
    """Triplet maximizing the smallest pairwise graph distance.

    Raises:
        ValueError: If that distance is below ``n / (3 * max_degree)``.
    """
    if n < 3:
        raise ValueError("a triplet needs at least three qubits")
    rows = [a for a, b in edges] + [b for a, b in edges]
    cols = [b for a, b in edges] + [a for a, b in edges]
    adj = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n)).tocsr()
    dist = shortest_path(adj, unweighted=True, directed=False)
    degree = max(int(d) for d in np.asarray(adj.sum(axis=1)).reshape(-1))
    best: tuple[int, int, int] | None = None
    best_d = -1.0
    for trip in itertools.combinations(range(n), 3):
        d = min(dist[trip[0], trip[1]], dist[trip[0], trip[2]], dist[trip[1], trip[2]])
        if d > best_d:
            best, best_d = trip, d
    required = n / (3 * max(degree, 1))
    if best is None or not np.isfinite(best_d) or best_d < required:
        raise ValueError(
            f"no triplet with pairwise distance >= {required:.2f}; best is {best} at {best_d}"
        )
    return best, int(best_d)


def coherence_inputs(n: int, triplet: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """``(|000> + (-1)^l i |111>)_S / sqrt(2)`` with ``|+>`` elsewhere, for ``l = 0, 1``."""
    idx = np.arange(2**n, dtype=np.int64)
    on_s = np.zeros(idx.size, dtype=np.int64)
    for q in triplet:
        on_s += (idx >> (n - 1 - q)) & 1
    amp = 2.0 ** (-(n - 3) / 2) / math.sqrt(2.0)
    states = []
    for sign in (1.0, -1.0):
        psi = np.zeros(idx.size, dtype=np.complex128)
        psi[on_s == 0] = amp
        psi[on_s == 3] = sign * 1j * amp
        states.append(psi)
    return states[0], states[1]


def _gap(
    step: Callable[[np.ndarray], np.ndarray],
    inputs: tuple[np.ndarray, np.ndarray],
    n: int,
    triplet: Sequence[int],
) -> float:
    values = [expectation_z(StateVector(n, step(psi)), triplet) for psi in inputs]
    return abs(values[0] - values[1])


def theorem2_demo(
    n: int, epsilon: float = 0.0, graph: Graph = "path", seed: int | None = None
) -> tuple[float, float]:
    """Readout gaps ``|<Z_S>_0 - <Z_S>_1|`` after one cycle of each reservoir.

    The multibody reservoir uses the ``X`` sector of a staircase architecture on
    ``graph`` plus a heavy row on ``S`` with coefficient ``pi/4``; rows with odd
    overlap on ``S`` are damped by ``epsilon / n``. The local reservoir is one
    transverse-field Ising cycle on the same graph with the same total time.

    Returns:
        ``(gap_measurement_driven, gap_local)``.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    edges, layout = _graph(n, graph)
    triplet, distance = select_triplet(n, edges)
    logger.info("triplet %s at pairwise distance %d", triplet, distance)
    rng = np.random.default_rng(seed)

    fs = build_staircase(layout, 1, seed=int(rng.integers(2**63 - 1)), random_extras=False)
    base = architecture(fs)
    heavy_row = np.zeros((1, n), dtype=np.uint8)
    heavy_row[0, list(triplet)] = 1
    heavy = BitMatrix.from_dense(heavy_row)
    arch = vstack([base, heavy])
    coeffs = rng.normal(0.0, math.sqrt(0.5), size=base.rows)
    dense = base.to_dense().astype(np.int64)
    odd = dense[:, list(triplet)].sum(axis=1) % 2 == 1
    coeffs[odd] *= epsilon / n
    coeffs = np.append(coeffs, math.pi / 4)
    multibody = MultibodyReservoir(n, arch, ("x",), {"x": coeffs}, tau=1.0)

    local = local_reservoir("tfi", n, edges, seed=int(rng.integers(2**63 - 1)), cycles=1)
    inputs = coherence_inputs(n, triplet)
    return (
        _gap(multibody.step, inputs, n, triplet),
        _gap(local.step, inputs, n, triplet),
    )
