"""Checkerboard lattices and random directed Hamiltonian paths.

Sites are ``(x, y)`` pairs with ``0 <= x < width`` and ``0 <= y < height``.
Site ``(x, y)`` holds a system qubit when ``x + y`` is even and an auxiliary
qubit otherwise, so ``(0, 0)`` is always a system site. Qubit indices run over
system sites in row-major order first, then over auxiliary sites in row-major
order.

Paths are stored as successor arrays (``-1`` marks the end of the path). A
random path starts from the boustrophedon zig-zag and is rerouted by
split-and-mend moves on 2x2 plaquettes: flipping an antiparallel pair of edges
splits the path into a shorter path plus a loop, and a second flip on a
plaquette shared by the loop and the path merges them again.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import cached_property
from typing import Protocol

import numpy as np

from md_iqp.errors import GridError
from md_iqp.settings import settings

logger = logging.getLogger(__name__)

Site = tuple[int, int]


@dataclass(frozen=True)
class HamiltonianPath:
    """Ordered site sequence of a directed Hamiltonian path."""

    sites: tuple[Site, ...]

    def __len__(self) -> int:
        return len(self.sites)

    def to_json(self) -> list[list[int]]:
        return [[x, y] for x, y in self.sites]

    @classmethod
    def from_json(cls, payload: Sequence[Sequence[int]]) -> HamiltonianPath:
        return cls(tuple((int(p[0]), int(p[1])) for p in payload))


@dataclass(frozen=True)
class GridLayout:
    """Checkerboard lattice of system and auxiliary qubits with 4-neighbor adjacency.

    Attributes:
        width: Number of columns.
        height: Number of rows.
    """

    width: int
    height: int

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise GridError(f"grid dimensions must be >= 1, got {self.width}x{self.height}")

    @property
    def n_sites(self) -> int:
        return self.width * self.height

    @staticmethod
    def is_system(site: Site) -> bool:
        return (site[0] + site[1]) % 2 == 0

    def in_bounds(self, site: Site) -> bool:
        return 0 <= site[0] < self.width and 0 <= site[1] < self.height

    @cached_property
    def system_sites(self) -> tuple[Site, ...]:
        return tuple(
            (x, y) for y in range(self.height) for x in range(self.width) if (x + y) % 2 == 0
        )

    @cached_property
    def aux_sites(self) -> tuple[Site, ...]:
        return tuple(
            (x, y) for y in range(self.height) for x in range(self.width) if (x + y) % 2 == 1
        )

    @property
    def n_system(self) -> int:
        return len(self.system_sites)

    @property
    def n_aux(self) -> int:
        return len(self.aux_sites)

    @cached_property
    def _qubit_of(self) -> dict[Site, int]:
        order = self.system_sites + self.aux_sites
        return {site: q for q, site in enumerate(order)}

    def qubit(self, site: Site) -> int:
        return self._qubit_of[site]

    def neighbors(self, site: Site) -> list[Site]:
        x, y = site
        cand = [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)]
        return [s for s in cand if self.in_bounds(s)]

    def sample_path(self, rng: np.random.Generator, iterations: int | None = None) -> list[int]:
        """Random Hamiltonian path as qubit indices, starting at a random system corner."""
        w1, h1 = self.width - 1, self.height - 1
        corners = [
            c
            for c in ((0, 0), (w1, 0), (0, h1), (w1, h1))
            if self.is_system(c)
        ]
        start = corners[int(rng.integers(len(corners)))]
        seed = int(rng.integers(2**63 - 1))
        path = random_hamiltonian_path(self, start=start, iterations=iterations, seed=seed)
        return [self.qubit(s) for s in path.sites]


@dataclass(frozen=True)
class AllToAllLayout:
    """All-to-all connectivity: any system qubit may couple to any auxiliary.

    Paths interleave a random permutation of system qubits with a random
    permutation of auxiliaries. ``n_aux`` defaults to ``n_system - 1``.
    """

    n_system: int
    n_aux_override: int | None = field(default=None)

    def __post_init__(self) -> None:
        if self.n_system < 1:
            raise GridError("all-to-all layout needs at least one system qubit")
        if self.n_aux_override is not None and self.n_aux_override < 0:
            raise GridError("auxiliary count must be non-negative")

    @property
    def n_aux(self) -> int:
        return self.n_system - 1 if self.n_aux_override is None else self.n_aux_override

    def sample_path(self, rng: np.random.Generator, iterations: int | None = None) -> list[int]:
        sys_order = rng.permutation(self.n_system)
        aux_order = self.n_system + rng.permutation(self.n_aux)
        path: list[int] = []
        for i, q in enumerate(sys_order):
            path.append(int(q))
            if i < self.n_aux:
                path.append(int(aux_order[i]))
        path.extend(int(a) for a in aux_order[self.n_system :])
        return path


class QubitLayout(Protocol):
    """Anything that knows its register split and can sample alternating paths."""

    @property
    def n_system(self) -> int: ...

    @property
    def n_aux(self) -> int: ...

    def sample_path(
        self, rng: np.random.Generator, iterations: int | None = None
    ) -> list[int]: ...


def checkerboard_layout(width: int, height: int) -> GridLayout:
    return GridLayout(width, height)


def square_system_layout(side: int) -> GridLayout:
    """Checkerboard of width ``2*side`` whose system sites form a ``side x side`` grid."""
    if side < 1:
        raise GridError(f"side must be >= 1, got {side}")
    return GridLayout(2 * side, side)


def system_coordinates(layout: GridLayout) -> list[Site]:
    """Position ``(column, row)`` of each system qubit inside the system sub-grid.

    The column is the rank of the site among the system sites of its lattice row.
    """
    coords: list[Site] = []
    rank_in_row: dict[int, int] = {}
    for x, y in layout.system_sites:
        col = rank_in_row.get(y, 0)
        rank_in_row[y] = col + 1
        coords.append((col, y))
    return coords


def system_neighbor_pairs(layout: GridLayout) -> list[tuple[int, int]]:
    """Nearest-neighbor pairs of the system sub-grid, as system qubit indices."""
    coords = system_coordinates(layout)
    index = {c: q for q, c in enumerate(coords)}
    pairs: list[tuple[int, int]] = []
    for q, (c, r) in enumerate(coords):
        for nb in ((c + 1, r), (c, r + 1)):
            if nb in index:
                pairs.append((q, index[nb]))
    return pairs


def _zigzag_successors(layout: GridLayout, start: Site) -> np.ndarray:
    w, h = layout.width, layout.height
    order: list[Site] = []
    for y in range(h):
        xs = range(w) if y % 2 == 0 else range(w - 1, -1, -1)
        order.extend((x, y) for x in xs)
    flip_x, flip_y = start[0] == w - 1 and w > 1, start[1] == h - 1 and h > 1
    order = [((w - 1 - x) if flip_x else x, (h - 1 - y) if flip_y else y) for x, y in order]
    nxt = np.full(w * h, -1, dtype=np.int64)
    for (x0, y0), (x1, y1) in zip(order, order[1:]):
        nxt[y0 * w + x0] = y1 * w + x1
    return nxt


def _plaquettes(layout: GridLayout) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    w, h = layout.width, layout.height
    xs, ys = np.meshgrid(np.arange(w - 1), np.arange(h - 1))
    a = (ys * w + xs).ravel()
    # a=(x,y) b=(x+1,y) c=(x+1,y+1) d=(x,y+1)
    return a, a + 1, a + w + 1, a + w


def _split_candidates(nxt: np.ndarray, sq: tuple[np.ndarray, ...]) -> np.ndarray:
    a, b, c, d = sq
    return (
        ((nxt[a] == b) & (nxt[c] == d))
        | ((nxt[b] == a) & (nxt[d] == c))
        | ((nxt[a] == d) & (nxt[c] == b))
        | ((nxt[d] == a) & (nxt[b] == c))
    )


def _antiparallel_pair(
    nxt: np.ndarray, a: int, b: int, c: int, d: int
) -> tuple[int, int, int, int]:
    for p1, p2, l1, l2 in ((a, b, c, d), (b, a, d, c), (a, d, c, b), (d, a, b, c)):
        if nxt[p1] == p2 and nxt[l1] == l2:
            return p1, p2, l1, l2
    raise GridError("plaquette carries no antiparallel pair")


def _flip(nxt: np.ndarray, p1: int, p2: int, l1: int, l2: int) -> None:
    # p1->p2, l1->l2 with p1~l2 and p2~l1 become p1->l2, l1->p2
    nxt[p1] = l2
    nxt[l1] = p2


def _cycle_through(nxt: list[int], site: int) -> list[int] | None:
    seen = [site]
    cur = nxt[site]
    while cur != -1 and cur != site:
        seen.append(cur)
        cur = nxt[cur]
    return seen if cur == site else None


def _edge(nxt: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return (nxt[u] == v) | (nxt[v] == u)


def _adjacent(u: int, v: int, width: int) -> bool:
    (uy, ux), (vy, vx) = divmod(u, width), divmod(v, width)
    return abs(ux - vx) + abs(uy - vy) == 1


def _mend(
    nxt: np.ndarray,
    loop: list[int],
    sq: tuple[np.ndarray, ...],
    width: int,
    rng: np.random.Generator,
) -> bool:
    a, b, c, d = sq
    in_loop = np.zeros(nxt.size, dtype=bool)
    in_loop[loop] = True
    horizontal = _edge(nxt, a, b) & _edge(nxt, d, c) & (in_loop[a] != in_loop[d])
    horizontal &= (in_loop[a] == in_loop[b]) & (in_loop[d] == in_loop[c])
    vertical = _edge(nxt, a, d) & _edge(nxt, b, c) & (in_loop[a] != in_loop[b])
    vertical &= (in_loop[a] == in_loop[d]) & (in_loop[b] == in_loop[c])
    options = [(int(i), "h") for i in np.flatnonzero(horizontal)]
    options += [(int(i), "v") for i in np.flatnonzero(vertical)]
    if not options:
        return False
    i, kind = options[int(rng.integers(len(options)))]
    if kind == "h":
        sides = ((int(a[i]), int(b[i])), (int(d[i]), int(c[i])))
    else:
        sides = ((int(a[i]), int(d[i])), (int(b[i]), int(c[i])))
    path_side, loop_side = sides if not in_loop[sides[0][0]] else (sides[1], sides[0])
    u, v = path_side if nxt[path_side[0]] == path_side[1] else path_side[::-1]
    x, y = loop_side if nxt[loop_side[0]] == loop_side[1] else loop_side[::-1]
    if not _adjacent(u, y, width):
        # loop runs parallel to the path edge; reverse it first
        for prev, cur in zip(loop, loop[1:] + loop[:1]):
            nxt[cur] = prev
        x, y = y, x
    _flip(nxt, u, v, x, y)
    return True


def _extract(layout: GridLayout, nxt: np.ndarray) -> HamiltonianPath:
    w = layout.width
    indegree = np.bincount(nxt[nxt >= 0], minlength=nxt.size)
    heads = np.flatnonzero(indegree == 0)
    if heads.size != 1:
        raise GridError(f"successor field has {heads.size} in-degree-0 sites")
    order: list[Site] = []
    cur = int(heads[0])
    while cur != -1 and len(order) <= nxt.size:
        order.append((cur % w, cur // w))
        cur = int(nxt[cur])
    return HamiltonianPath(tuple(order))


def random_hamiltonian_path(
    layout: GridLayout,
    start: Site = (0, 0),
    iterations: int | None = None,
    seed: int | None = None,
) -> HamiltonianPath:
    """Random directed Hamiltonian path by split-and-mend rerouting of the zig-zag.

    Args:
        layout: Lattice to cover; needs at least two sites.
        start: Corner where the initial zig-zag begins.
        iterations: Split-and-mend iterations; ``0`` returns the zig-zag itself.
            Defaults to ``settings.path_iterations``.
        seed: Seed for the iteration RNG.

    Returns:
        A path visiting every site once through lattice-adjacent steps.
    """
    if layout.n_sites < 2:
        raise GridError("a Hamiltonian path needs at least two sites")
    if not layout.in_bounds(start):
        raise GridError(f"start {start} outside {layout.width}x{layout.height} grid")
    w1, h1 = layout.width - 1, layout.height - 1
    corners = {(0, 0), (w1, 0), (0, h1), (w1, h1)}
    if start not in corners:
        raise GridError(f"zig-zag initialization needs a corner start, got {start}")
    iterations = settings.path_iterations if iterations is None else iterations
    if iterations < 0:
        raise ValueError("iterations must be non-negative")

    nxt = _zigzag_successors(layout, start)
    if layout.width > 1 and layout.height > 1 and iterations:
        rng = np.random.default_rng(seed)
        sq = _plaquettes(layout)
        skipped = 0
        for it in range(iterations):
            eligible = np.flatnonzero(_split_candidates(nxt, sq))
            if eligible.size == 0:
                skipped += 1
                logger.debug("iteration %d: no split candidate", it)
                continue
            i = int(eligible[int(rng.integers(eligible.size))])
            corner = (int(sq[0][i]), int(sq[1][i]), int(sq[2][i]), int(sq[3][i]))
            p1, p2, l1, l2 = _antiparallel_pair(nxt, *corner)
            _flip(nxt, p1, p2, l1, l2)
            as_list = nxt.tolist()
            loop = _cycle_through(as_list, p2) or _cycle_through(as_list, l2)
            if loop is None:
                raise GridError("split flip did not produce a loop")
            if not _mend(nxt, loop, sq, layout.width, rng):
                _flip(nxt, p1, l2, l1, p2)
                skipped += 1
                logger.debug("iteration %d: no mend candidate, split undone", it)
        if skipped:
            logger.info("path generation skipped %d of %d iterations", skipped, iterations)
    return _extract(layout, nxt)


def validate_path(layout: GridLayout, path: HamiltonianPath) -> bool:
    sites = path.sites
    if len(sites) != layout.n_sites or len(set(sites)) != len(sites):
        return False
    if not all(layout.in_bounds(s) for s in sites):
        return False
    return all(abs(x0 - x1) + abs(y0 - y1) == 1 for (x0, y0), (x1, y1) in zip(sites, sites[1:]))
