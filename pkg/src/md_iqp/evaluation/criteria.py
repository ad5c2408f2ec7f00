"""Statistical-randomness certification of architecture matrices.

An architecture passes when three checks hold together: the spectrum of its
standardized covariance follows the Marchenko-Pastur law, its row and column
Hamming weights and pairwise distances follow binomial laws, and random square
submatrices are nearly full rank over GF(2).
"""

from __future__ import annotations

import csv
import logging
import math
from collections.abc import Sequence
from pathlib import Path

import numpy as np
from pydantic import BaseModel, Field, computed_field
from scipy import integrate, linalg, stats

from md_iqp.evaluation.generators import Connectivity, Generator, layout_for, make_architecture
from md_iqp.linalg.gf2 import BitMatrix, rank_gf2

logger = logging.getLogger(__name__)


class CriterionThresholds(BaseModel):
    mp_max_distance: float = Field(default=0.05, gt=0.0, le=1.0)
    hamming_min_pvalue: float = Field(default=1e-3, ge=0.0, le=1.0)
    rank_min_fraction: float = Field(default=0.9, ge=0.0, le=1.0)
    rank_trials: int = Field(default=200, ge=1)


class HammingReport(BaseModel):
    """Chi-square p-values of weight and pairwise-distance statistics against binomials."""

    rows_pvalue: float
    cols_pvalue: float
    pairwise_rows_pvalue: float
    pairwise_cols_pvalue: float
    row_weight_hist: list[int]
    col_weight_hist: list[int]
    threshold: float = 1e-3

    @computed_field  # type: ignore[prop-decorator]
    @property
    def rows_pass(self) -> bool:
        return self.rows_pvalue >= self.threshold

    @computed_field  # type: ignore[prop-decorator]
    @property
    def cols_pass(self) -> bool:
        return self.cols_pvalue >= self.threshold

    @computed_field  # type: ignore[prop-decorator]
    @property
    def pairwise_pass(self) -> bool:
        return min(self.pairwise_rows_pvalue, self.pairwise_cols_pvalue) >= self.threshold


class CriterionReport(BaseModel):
    mp_distance: float
    mp_pass: bool
    hamming_rows_pass: bool
    hamming_cols_pass: bool
    hamming_pairwise_pass: bool
    rank_fraction: float = Field(ge=0.0, le=1.0)
    rank_pass: bool

    @computed_field  # type: ignore[prop-decorator]
    @property
    def overall(self) -> bool:
        hamming = self.hamming_rows_pass and self.hamming_cols_pass and self.hamming_pairwise_pass
        return self.mp_pass and hamming and self.rank_pass


def standardized_covariance(a: BitMatrix) -> np.ndarray:
    """``(2A-1)^T (2A-1) / s`` when ``s >= n``, otherwise ``(2A-1)(2A-1)^T / n``.

    Rows of ``A`` are the samples, so the result always has unit diagonal.
    """
    if a.rows < 1 or a.cols < 1:
        raise ValueError("standardized covariance needs a nonempty matrix")
    x = 2.0 * a.to_dense().astype(np.float64) - 1.0
    if a.rows >= a.cols:
        return (x.T @ x) / a.rows
    return (x @ x.T) / a.cols


def aspect_ratio(a: BitMatrix) -> float:
    return min(a.rows, a.cols) / max(a.rows, a.cols)


def mp_edges(gamma: float) -> tuple[float, float]:
    root = math.sqrt(gamma)
    return (1.0 - root) ** 2, (1.0 + root) ** 2


def mp_density(lam: float | np.ndarray, gamma: float) -> float | np.ndarray:
    """Continuous part of the Marchenko-Pastur density for ratio ``gamma``.

    For ``gamma > 1`` the law also carries a point mass ``1 - 1/gamma`` at zero,
    which this function leaves out; :func:`mp_cdf` includes it.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    lo, hi = mp_edges(gamma)
    x = np.asarray(lam, dtype=np.float64)
    inside = (x > lo) & (x < hi) & (x > 0)
    out = np.zeros_like(x)
    xi = x[inside]
    out[inside] = np.sqrt((hi - xi) * (xi - lo)) / (2.0 * math.pi * gamma * xi)
    return float(out) if out.ndim == 0 else out


def _phi_integrand(phi: float, gamma: float) -> float:
    lo, hi = mp_edges(gamma)
    mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
    lam = mid - half * math.cos(phi)
    if lam <= 0:
        return 0.0
    return (half * math.sin(phi)) ** 2 / (2.0 * math.pi * gamma * lam)


def mp_cdf(x: Sequence[float] | np.ndarray, gamma: float) -> np.ndarray:
    """Marchenko-Pastur CDF at each ``x``.

    The density is integrated in the variable ``lam = mid - half*cos(phi)``, which
    removes the square-root endpoints. Sorted evaluation points are handled by
    integrating between consecutive points and accumulating.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    lo, hi = mp_edges(gamma)
    mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
    pts = np.asarray(x, dtype=np.float64).reshape(-1)
    order = np.argsort(pts)
    phis = np.arccos(np.clip((mid - pts[order]) / half, -1.0, 1.0))
    pieces = np.empty(phis.size)
    prev = 0.0
    for i, phi in enumerate(phis):
        if phi > prev:
            pieces[i] = integrate.quad(_phi_integrand, prev, phi, args=(gamma,))[0]
        else:
            pieces[i] = 0.0
        prev = max(prev, phi)
    cdf_sorted = np.cumsum(pieces)
    if gamma > 1:
        atom = 1.0 - 1.0 / gamma
        cdf_sorted = np.where(pts[order] >= 0, atom + cdf_sorted, 0.0)
    out = np.empty_like(cdf_sorted)
    out[order] = np.clip(cdf_sorted, 0.0, 1.0)
    return out


def mp_distance(eigs: Sequence[float] | np.ndarray, gamma: float) -> float:
    """Two-sided Kolmogorov-Smirnov distance between the spectrum and the MP law."""
    e = np.sort(np.asarray(eigs, dtype=np.float64).reshape(-1))
    if e.size == 0:
        raise ValueError("empty spectrum")
    cdf = mp_cdf(e, gamma)
    n = e.size
    upper = np.arange(1, n + 1) / n
    lower = np.arange(0, n) / n
    return float(max(np.max(upper - cdf), np.max(cdf - lower)))


def spectrum(a: BitMatrix) -> tuple[np.ndarray, float]:
    return linalg.eigvalsh(standardized_covariance(a)), aspect_ratio(a)


def spectral_histogram(
    eigs: Sequence[float] | np.ndarray, gamma: float, bins: int = 50
) -> list[tuple[float, float, float]]:
    """``(bin center, empirical density, MP density)`` rows over the MP support."""
    lo, hi = mp_edges(gamma)
    e = np.asarray(eigs, dtype=np.float64)
    span = (min(lo, float(e.min())), max(hi, float(e.max())))
    hist, edges = np.histogram(e, bins=bins, range=span, density=True)
    centers = 0.5 * (edges[:-1] + edges[1:])
    density = np.asarray(mp_density(centers, gamma))
    return [(float(c), float(h), float(d)) for c, h, d in zip(centers, hist, density)]


def write_spectral_csv(rows: Sequence[tuple[float, float, float]], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_center", "empirical_density", "mp_density"])
        writer.writerows(rows)


def merged_chisquare(values: Sequence[int] | np.ndarray, trials: int) -> float:
    """p-value of values against ``Binomial(trials, 1/2)``.

    Adjacent bins are merged left to right until each group expects at least 5
    counts; a short tail is folded into the last group. Fewer than two groups
    fails outright.
    """
    v = np.asarray(values, dtype=np.int64)
    if v.size == 0:
        return 0.0
    observed = np.bincount(v, minlength=trials + 1)[: trials + 1].astype(np.float64)
    expected = stats.binom.pmf(np.arange(trials + 1), trials, 0.5) * v.size
    groups_obs: list[float] = []
    groups_exp: list[float] = []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= 5.0:
            groups_obs.append(acc_o)
            groups_exp.append(acc_e)
            acc_o = acc_e = 0.0
    if groups_obs:
        groups_obs[-1] += acc_o
        groups_exp[-1] += acc_e
    if len(groups_obs) < 2:
        return 0.0
    f_obs = np.asarray(groups_obs)
    f_exp = np.asarray(groups_exp)
    f_exp *= f_obs.sum() / f_exp.sum()
    return float(stats.chisquare(f_obs, f_exp).pvalue)


def _pair_distances(dense: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    perm = rng.permutation(dense.shape[0])
    half = perm.size // 2
    a, b = dense[perm[:half]], dense[perm[half : 2 * half]]
    return np.sum(a != b, axis=1)


def hamming_statistics(a: BitMatrix, seed: int = 0, threshold: float = 1e-3) -> HammingReport:
    """Row/column weights and disjoint-pair distances against ``Binomial(., 1/2)``.

    Rows are compared with ``Binomial(n, 1/2)`` and columns with ``Binomial(s, 1/2)``.
    Pairwise distances use disjoint pairs from a seeded permutation so that the
    tested values are independent for an i.i.d. matrix.
    """
    dense = a.to_dense()
    rng = np.random.default_rng(seed)
    row_w = dense.sum(axis=1)
    col_w = dense.sum(axis=0)
    return HammingReport(
        rows_pvalue=merged_chisquare(row_w, a.cols),
        cols_pvalue=merged_chisquare(col_w, a.rows),
        pairwise_rows_pvalue=merged_chisquare(_pair_distances(dense, rng), a.cols),
        pairwise_cols_pvalue=merged_chisquare(_pair_distances(dense.T, rng), a.rows),
        row_weight_hist=np.bincount(row_w.astype(np.int64), minlength=a.cols + 1).tolist(),
        col_weight_hist=np.bincount(col_w.astype(np.int64), minlength=a.rows + 1).tolist(),
        threshold=threshold,
    )


def submatrix_rank_fraction(a: BitMatrix, trials: int = 200, seed: int = 0) -> float:
    """Fraction of random ``side x side`` submatrices with GF(2) rank at least ``side - 2``.

    ``side = min(s, n) // 2``; trial ``t`` draws rows and columns from
    ``default_rng([seed, t])``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    side = min(a.rows, a.cols) // 2
    if side < 3:
        raise ValueError(f"submatrix side {side} is below 3 for a {a.rows}x{a.cols} matrix")
    dense = a.to_dense()
    hits = 0
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        rows = np.sort(rng.choice(a.rows, side, replace=False))
        cols = np.sort(rng.choice(a.cols, side, replace=False))
        if rank_gf2(BitMatrix.from_dense(dense[np.ix_(rows, cols)])) >= side - 2:
            hits += 1
    return hits / trials


def criterion1(
    a: BitMatrix, thresholds: CriterionThresholds | None = None, seed: int = 0
) -> CriterionReport:
    th = thresholds or CriterionThresholds()
    eigs, gamma = spectrum(a)
    dist = mp_distance(eigs, gamma)
    ham = hamming_statistics(a, seed, th.hamming_min_pvalue)
    frac = submatrix_rank_fraction(a, th.rank_trials, seed)
    report = CriterionReport(
        mp_distance=dist,
        mp_pass=dist <= th.mp_max_distance,
        hamming_rows_pass=ham.rows_pass,
        hamming_cols_pass=ham.cols_pass,
        hamming_pairwise_pass=ham.pairwise_pass,
        rank_fraction=frac,
        rank_pass=frac >= th.rank_min_fraction,
    )
    logger.debug("criterion1 on %dx%d: %s", a.rows, a.cols, report.model_dump())
    return report


class DepthScanRow(BaseModel):
    generator: str
    connectivity: str
    size: int
    depth: int | None = Field(description="smallest passing depth, None if none up to the cap")
    pass_fraction: float


def _passes(
    generator: Generator,
    connectivity: Connectivity,
    size: int,
    depth: int,
    seeds: Sequence[int],
    thresholds: CriterionThresholds | None,
) -> float:
    layout = layout_for(connectivity, size)
    wins = sum(
        criterion1(make_architecture(generator, layout, depth, s), thresholds, s).overall
        for s in seeds
    )
    return wins / len(seeds)


def min_depth_scan(
    generator: Generator,
    connectivity: Connectivity,
    sizes: Sequence[int],
    seed: int = 0,
    seeds_per_depth: int = 10,
    max_depth: int = 64,
    thresholds: CriterionThresholds | None = None,
) -> list[DepthScanRow]:
    """Smallest depth per size at which a majority of seeds passes :func:`criterion1`.

    Depth is the number of paths for measurement-driven staircases and the number
    of CX layers for ancilla-free circuits. Passing is assumed monotone in depth,
    so the search is a binary search on ``[1, max_depth]``.
    """
    rows: list[DepthScanRow] = []
    for size in sizes:
        children = np.random.SeedSequence([seed, size]).spawn(seeds_per_depth)
        seeds = [int(c.generate_state(1)[0]) for c in children]
        lo, hi = 1, max_depth
        best: tuple[int, float] | None = None
        while lo <= hi:
            mid = (lo + hi) // 2
            frac = _passes(generator, connectivity, size, mid, seeds, thresholds)
            logger.info("%s/%s n=%d depth=%d pass=%.2f", generator, connectivity, size, mid, frac)
            if frac > 0.5:
                best = (mid, frac)
                hi = mid - 1
            else:
                lo = mid + 1
        rows.append(
            DepthScanRow(
                generator=generator,
                connectivity=connectivity,
                size=size,
                depth=best[0] if best else None,
                pass_fraction=best[1] if best else 0.0,
            )
        )
    return rows
