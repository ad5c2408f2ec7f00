"""SSH phase-classification benchmark over reservoir families."""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal, cast

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from md_iqp.errors import ConfigError
from md_iqp.layout.grid import GridLayout, QubitLayout, square_system_layout
from md_iqp.reservoir.features import Classifier, FeatureTable, extract_features, train_eval
from md_iqp.reservoir.floquet import (
    Edge,
    LocalFamily,
    Reservoir,
    Sector,
    grid_edges,
    load_edge_list,
    local_reservoir,
    multibody_reservoir,
    path_edges,
    run_cycles,
)
from md_iqp.reservoir.ssh import PHASE_LABELS, SshPhaseParams, lowest_eigenstates, perturb
from md_iqp.settings import settings

logger = logging.getLogger(__name__)

_SECTORS: dict[str, Sector] = {"xy": "XY", "xz": "XZ", "yz": "YZ", "xyz": "XYZ"}


class ReservoirBenchConfig(BaseModel):
    """Parameters of one benchmark run.

    Family names are ``heisenberg``, ``tfi``, ``xy`` or ``multibody-<sector>``
    with sector ``xy``, ``xz``, ``yz`` or ``xyz``; a ``-noff`` suffix on a
    multibody family leaves its Pauli frames uncorrected.
    """

    model_config = ConfigDict(frozen=True)

    n: int = Field(8, ge=2, description="Chain length and reservoir width.")
    samples_per_class: int = Field(150, ge=2)
    levels: int = Field(20, ge=1, description="Eigenstates are drawn from this many lowest levels.")
    cycles: int = Field(10, ge=1)
    total_time: float = Field(1.0, gt=0)
    shots: int = Field(8192, ge=1)
    readout_error: float = Field(5e-3, ge=0.0, le=1.0)
    sigma: float = Field(0.03, ge=0.0)
    sigma_scale: Literal["variance", "std"] = "variance"
    families: tuple[str, ...] = ("multibody-xy", "multibody-xy-noff", "tfi")
    classifiers: tuple[Classifier, ...] = ("ridge", "knn")
    k: int = Field(21, ge=1)
    test_size: float = Field(0.3, gt=0.0, lt=1.0)
    architecture_seeds: int = Field(10, ge=1)
    frame_trajectories: int = Field(4, ge=1)
    edges: str = Field("path", description="'path', 'grid' or a JSON edge-list file.")
    phase_params: SshPhaseParams = SshPhaseParams()
    seed: int = 0


@dataclass(frozen=True)
class BenchRow:
    family: str
    classifier: str
    architecture_seed: int
    cycle: int
    accuracy: float


def parse_family(name: str) -> tuple[str, Sector | None, bool]:
    """``(kind, sector, feed_forward)`` for a family name."""
    if name in ("heisenberg", "tfi", "xy"):
        return name, None, True
    parts = name.split("-")
    if parts[0] == "multibody" and len(parts) in (2, 3) and parts[1] in _SECTORS:
        if len(parts) == 3 and parts[2] != "noff":
            raise ValueError(f"unknown reservoir family {name!r}")
        return "multibody", _SECTORS[parts[1]], len(parts) == 2
    raise ValueError(f"unknown reservoir family {name!r}")


def resolve_edges(spec: str, n: int) -> list[Edge]:
    if spec == "path":
        return path_edges(n)
    if spec == "grid":
        side = int(np.sqrt(n))
        if side * side != n:
            raise ValueError(f"grid edges need a square qubit count, got {n}")
        return grid_edges(side, side)
    return load_edge_list(spec)


def multibody_layout(spec: str, n: int) -> QubitLayout:
    """Checkerboard whose system qubits carry the same graph as :func:`resolve_edges`.

    A path becomes one row of ``2n - 1`` sites, a square grid the matching
    checkerboard. Edge-list files have no staircase layout.

    Raises:
        ConfigError: For edge-list files.
    """
    if spec == "path":
        return GridLayout(2 * n - 1, 1)
    if spec == "grid":
        side = math.isqrt(n)
        if side * side != n:
            raise ValueError(f"grid edges need a square qubit count, got {n}")
        return square_system_layout(side)
    raise ConfigError(
        f"multibody families need 'path' or 'grid' connectivity, not edge list {spec!r}"
    )


def make_reservoir(
    family: str,
    n: int,
    edges: list[Edge],
    seed: int,
    total_time: float = 1.0,
    cycles: int = 10,
    layout: QubitLayout | None = None,
) -> Reservoir:
    """Build one reservoir; multibody families use ``layout`` (all-to-all when omitted)."""
    kind, sector, feed_forward = parse_family(family)
    if kind == "multibody":
        assert sector is not None
        return multibody_reservoir(
            n,
            sector,
            seed=seed,
            layout=layout,
            total_time=total_time,
            cycles=cycles,
            feed_forward=feed_forward,
        )
    local = cast(LocalFamily, kind)
    return local_reservoir(local, n, edges, seed=seed, total_time=total_time, cycles=cycles)


def build_dataset(config: ReservoirBenchConfig) -> tuple[np.ndarray, tuple[str, ...]]:
    """Perturbed low-lying SSH eigenstates, ``samples_per_class`` per phase, one per row."""
    states: list[np.ndarray] = []
    labels: list[str] = []
    for p, label in enumerate(PHASE_LABELS):
        eig = lowest_eigenstates(config.phase_params.spec(label, config.n), config.levels)
        rng = np.random.default_rng([config.seed, p])
        picks = rng.integers(config.levels, size=config.samples_per_class)

        def make(i: int, level: int, p: int = p, vectors: np.ndarray = eig.vectors) -> np.ndarray:
            return perturb(
                vectors[:, level].astype(np.complex128),
                config.sigma,
                seed=int(np.random.SeedSequence([config.seed, p, i]).generate_state(1)[0]),
                scale=config.sigma_scale,
            )

        with ThreadPoolExecutor(max_workers=max(1, settings.threads)) as pool:
            states.extend(pool.map(make, range(len(picks)), (int(x) for x in picks)))
        labels.extend([label] * config.samples_per_class)
        logger.info("sampled %d %s states (degenerate=%s)", len(picks), label, eig.degenerate)
    return np.vstack(states), tuple(labels)


def reservoir_features(
    reservoir: Reservoir,
    states: np.ndarray,
    labels: tuple[str, ...],
    cycles: int,
    shots: int = 8192,
    readout_error: float = 5e-3,
    seed: int = 0,
    frame_trajectories: int = 4,
) -> FeatureTable:
    """Shot-sampled ``<Z_i>`` after every cycle for every input state.

    Uncorrected multibody reservoirs average the output distribution over
    ``frame_trajectories`` random frame histories before sampling.
    """
    uncorrected = not getattr(reservoir, "feed_forward", True)
    runs = frame_trajectories if uncorrected else 1

    def featurize(s: int) -> np.ndarray:
        probs = np.zeros((cycles, states.shape[1]))
        for t in range(runs):
            rng = np.random.default_rng([seed, s, t])
            for c, psi in enumerate(run_cycles(reservoir, states[s], cycles, rng)):
                probs[c] += np.abs(psi) ** 2
        shot_rng = np.random.default_rng([seed, s, runs])
        return np.stack(
            [
                extract_features(
                    probs[c] / runs, shots, readout_error, shot_rng, probabilities=True
                )
                for c in range(cycles)
            ]
        )

    with ThreadPoolExecutor(max_workers=max(1, settings.threads)) as pool:
        feats = list(pool.map(featurize, range(states.shape[0])))
    return FeatureTable(np.stack(feats), labels)


@dataclass(frozen=True)
class BenchResult:
    rows: tuple[BenchRow, ...]

    def mean_accuracy(self, family: str, classifier: str, cycle: int) -> float:
        vals = [
            r.accuracy
            for r in self.rows
            if (r.family, r.classifier, r.cycle) == (family, classifier, cycle)
        ]
        if not vals:
            raise KeyError(f"no rows for {family}/{classifier} at cycle {cycle}")
        return float(np.mean(vals))

    def summary(self) -> list[dict[str, float | int | str]]:
        groups: dict[tuple[str, str, int], list[float]] = defaultdict(list)
        for r in self.rows:
            groups[(r.family, r.classifier, r.cycle)].append(r.accuracy)
        return [
            {
                "family": fam,
                "classifier": clf,
                "cycle": cyc,
                "mean_accuracy": float(np.mean(acc)),
                "std_accuracy": float(np.std(acc)),
                "realizations": len(acc),
            }
            for (fam, clf, cyc), acc in sorted(groups.items())
        ]


def reservoir_benchmark(config: ReservoirBenchConfig) -> BenchResult:
    """Classification accuracy per family, classifier, architecture seed and cycle.

    Every family sees the same dataset, the same readout noise model and the same
    train/test split.
    """
    for family in config.families:
        parse_family(family)
    edges = resolve_edges(config.edges, config.n)
    multibody = any(parse_family(f)[0] == "multibody" for f in config.families)
    layout = multibody_layout(config.edges, config.n) if multibody else None
    states, labels = build_dataset(config)
    rows: list[BenchRow] = []
    for a in range(config.architecture_seeds):
        for f_idx, family in enumerate(config.families):
            arch_seed = int(np.random.SeedSequence([config.seed, a]).generate_state(1)[0])
            reservoir = make_reservoir(
                family, config.n, edges, arch_seed, config.total_time, config.cycles, layout
            )
            table = reservoir_features(
                reservoir,
                states,
                labels,
                config.cycles,
                config.shots,
                config.readout_error,
                seed=int(np.random.SeedSequence([config.seed, a, f_idx]).generate_state(1)[0]),
                frame_trajectories=config.frame_trajectories,
            )
            for clf in config.classifiers:
                for cycle in range(1, config.cycles + 1):
                    acc = train_eval(
                        table.at_cycle(cycle),
                        labels,
                        clf,
                        k=config.k,
                        test_size=config.test_size,
                        seed=config.seed,
                    )
                    rows.append(BenchRow(family, clf, a, cycle, acc))
            final = [r.accuracy for r in rows[-len(config.classifiers) * config.cycles :]]
            logger.info(
                "architecture %d %s: last-cycle accuracy %s",
                a,
                family,
                final[config.cycles - 1 :: config.cycles],
            )
    return BenchResult(tuple(rows))
