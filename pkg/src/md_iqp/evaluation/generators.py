from __future__ import annotations

import math
from typing import Literal

from md_iqp.circuits.baselines import random_cx_layers
from md_iqp.circuits.staircase import architecture, build_staircase
from md_iqp.layout.grid import AllToAllLayout, GridLayout, square_system_layout
from md_iqp.linalg.gf2 import BitMatrix

Connectivity = Literal["grid", "all-to-all"]
Generator = Literal["measurement-driven", "ancilla-free"]


def layout_for(connectivity: Connectivity, size: int) -> GridLayout | AllToAllLayout:
    """Layout with ``size`` system qubits; grids need a perfect square."""
    if connectivity == "all-to-all":
        return AllToAllLayout(size)
    side = math.isqrt(size)
    if side * side != size:
        raise ValueError(f"grid sizes must be perfect squares, got {size}")
    return square_system_layout(side)


def md_architecture(
    layout: GridLayout | AllToAllLayout,
    D: int,  # noqa: N803
    seed: int | None = None,
    r1: int = 1,
    r2: int = 1,
    random_extras: bool = True,
) -> BitMatrix:
    return architecture(build_staircase(layout, D, r1, r2, seed, random_extras))


def ancilla_free_architecture(
    layout: GridLayout | AllToAllLayout, depth: int, seed: int | None = None
) -> BitMatrix:
    return architecture(random_cx_layers(layout, depth, seed))


def make_architecture(
    generator: Generator,
    layout: GridLayout | AllToAllLayout,
    depth: int,
    seed: int | None = None,
) -> BitMatrix:
    """``depth`` is the path count for staircases and the CX-layer count otherwise."""
    if generator == "measurement-driven":
        return md_architecture(layout, depth, seed)
    return ancilla_free_architecture(layout, depth, seed)
