"""Shot-sampled local Z features and the classical readouts trained on them."""

from __future__ import annotations

import csv
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
from sklearn.linear_model import RidgeClassifier
from sklearn.model_selection import train_test_split
from sklearn.neighbors import KNeighborsClassifier
from sklearn.preprocessing import StandardScaler

from md_iqp.errors import DimensionMismatchError

logger = logging.getLogger(__name__)

Classifier = Literal["ridge", "knn"]


def extract_features(
    state: np.ndarray,
    shots: int = 8192,
    readout_error: float = 5e-3,
    seed: int | np.random.Generator | None = None,
    probabilities: bool = False,
) -> np.ndarray:
    """Estimate ``<Z_i>`` for every qubit from sampled bitstrings.

    Args:
        state: Amplitudes, or computational-basis probabilities when
            ``probabilities`` is set.
        shots: Number of sampled bitstrings.
        readout_error: Independent symmetric flip probability per qubit and shot.
        seed: Seed or generator for the shots and the flips.

    Returns:
        ``n`` values in ``[-1, 1]``.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if not 0.0 <= readout_error <= 1.0:
        raise ValueError("readout_error must lie in [0, 1]")
    arr = np.asarray(state)
    probs = arr.real.astype(np.float64) if probabilities else np.abs(arr) ** 2
    n = int(round(math.log2(probs.size)))
    if 2**n != probs.size:
        raise DimensionMismatchError(f"{probs.size} entries is not a qubit register")
    probs = np.clip(probs, 0.0, None)
    probs = probs / probs.sum()
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    idx = rng.choice(probs.size, size=shots, p=probs)
    bits = (idx[:, None] >> np.arange(n - 1, -1, -1)) & 1
    if readout_error > 0:
        bits = bits ^ (rng.random(bits.shape) < readout_error)
    return 1.0 - 2.0 * bits.mean(axis=0)


@dataclass(frozen=True)
class FeatureTable:
    """Features per sample and recorded cycle.

    Attributes:
        features: Array of shape ``(samples, cycles, n)``.
        labels: One class label per sample.
    """

    features: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        feats = np.asarray(self.features, dtype=np.float64)
        if feats.ndim != 3:
            raise DimensionMismatchError("features need shape (samples, cycles, n)")
        if feats.shape[0] != len(self.labels):
            raise DimensionMismatchError(f"{feats.shape[0]} samples for {len(self.labels)} labels")
        if np.any(np.abs(feats) > 1.0 + 1e-12):
            raise ValueError("Z features must lie in [-1, 1]")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def cycles(self) -> int:
        return int(self.features.shape[1])

    @property
    def n(self) -> int:
        return int(self.features.shape[2])

    def at_cycle(self, cycle: int) -> np.ndarray:
        """Features after ``cycle`` Floquet cycles (1-based)."""
        if not 1 <= cycle <= self.cycles:
            raise IndexError(f"cycle {cycle} outside 1..{self.cycles}")
        return self.features[:, cycle - 1, :]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["sample_id", "cycle", *[f"f{i + 1}" for i in range(self.n)], "label"])
            for s, label in enumerate(self.labels):
                for c in range(self.cycles):
                    row = [repr(float(v)) for v in self.features[s, c]]
                    writer.writerow([s, c + 1, *row, label])

    @classmethod
    def from_csv(cls, path: str | Path) -> FeatureTable:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            raise ValueError(f"no feature rows in {path}")
        n = sum(1 for key in rows[0] if key.startswith("f"))
        samples = max(int(r["sample_id"]) for r in rows) + 1
        cycles = max(int(r["cycle"]) for r in rows)
        feats = np.zeros((samples, cycles, n))
        labels = [""] * samples
        for r in rows:
            s, c = int(r["sample_id"]), int(r["cycle"]) - 1
            feats[s, c] = [float(r[f"f{i + 1}"]) for i in range(n)]
            labels[s] = r["label"]
        return cls(feats, tuple(labels))


def _classifier(kind: Classifier, k: int) -> RidgeClassifier | KNeighborsClassifier:
    if kind == "ridge":
        return RidgeClassifier(alpha=1.0)
    if kind == "knn":
        return KNeighborsClassifier(n_neighbors=k)
    raise ValueError(f"unknown classifier {kind!r}")


def split_seed(seed: int | None) -> int | None:
    """Fold an arbitrary non-negative seed into the 32-bit range scikit-learn accepts."""
    if seed is None:
        return None
    return int(np.random.SeedSequence(seed).generate_state(1, dtype=np.uint32)[0])


def train_eval(
    features: np.ndarray,
    labels: Sequence[str],
    classifier: Classifier = "ridge",
    k: int = 21,
    test_size: float = 0.3,
    seed: int | None = 0,
) -> float:
    """Held-out accuracy of a readout trained on standardized features.

    The split is stratified by label and the scaler sees only the training rows.

    Raises:
        ValueError: If fewer than two classes are present.
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    y = np.asarray(labels)
    if x.shape[0] != y.size:
        raise DimensionMismatchError(f"{x.shape[0]} feature rows for {y.size} labels")
    if np.unique(y).size < 2:
        raise ValueError("need at least two classes to train a classifier")
    x_train, x_test, y_train, y_test = train_test_split(
        x, y, test_size=test_size, random_state=split_seed(seed), stratify=y
    )
    scaler = StandardScaler().fit(x_train)
    model = _classifier(classifier, min(k, len(y_train)))
    model.fit(scaler.transform(x_train), y_train)
    accuracy = float(np.mean(model.predict(scaler.transform(x_test)) == y_test))
    logger.debug("%s accuracy %.3f on %d held-out samples", classifier, accuracy, y_test.size)
    return accuracy
