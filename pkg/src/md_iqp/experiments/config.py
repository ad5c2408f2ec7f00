from __future__ import annotations

import hashlib
import json
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, TypeVar

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from md_iqp.errors import ConfigError
from md_iqp.settings import settings

T = TypeVar("T")
R = TypeVar("R")


class ExperimentConfig(BaseModel):
    """One experiment invocation.

    Attributes:
        name: Registered experiment name.
        params: Experiment parameters, validated by the experiment's own model.
        seed: Master seed; every module seed is derived from it.
        output_dir: Root under which the run directory is created.
        threads: Workers for independent instances; results do not depend on it.
    """

    model_config = ConfigDict(extra="forbid")

    name: str = Field(min_length=1)
    params: dict[str, Any] = Field(default_factory=dict)
    seed: int = Field(default=0, ge=0, lt=2**64)
    output_dir: str = Field(default_factory=lambda: settings.output_dir)
    threads: int = Field(default_factory=lambda: settings.threads, ge=1)


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    try:
        return ExperimentConfig.model_validate(payload)
    except ValidationError as exc:
        raise ConfigError(f"invalid config {path}: {exc}") from exc


def derive_seed(master: int, module: str, index: int = 0) -> int:
    """Stable 63-bit seed for ``(master, module, index)``; independent of call order."""
    tag = int.from_bytes(hashlib.sha256(module.encode("utf-8")).digest()[:8], "little")
    state = np.random.SeedSequence([master, tag, index]).generate_state(2, dtype=np.uint32)
    return (int(state[0]) << 31) ^ int(state[1])


@dataclass(frozen=True)
class RunContext:
    """Seed and worker plumbing handed to every experiment."""

    name: str
    seed: int
    threads: int = 1
    log: list[str] = field(default_factory=list, compare=False)

    def seed_for(self, module: str, index: int = 0) -> int:
        return derive_seed(self.seed, module, index)

    def map(self, fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
        with ThreadPoolExecutor(max_workers=max(1, self.threads)) as pool:
            return list(pool.map(fn, items))

    def step(self, message: str) -> None:
        self.log.append(message)


@dataclass
class ExperimentOutput:
    """Summary plus named row tables; tables become ``<name>.csv`` files."""

    summary: dict[str, Any]
    tables: dict[str, list[dict[str, Any]]] = field(default_factory=dict)
    passed: bool | None = None
