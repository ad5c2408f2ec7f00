"""Run one experiment into its own directory with metadata, results and a hash manifest."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import subprocess
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from md_iqp import __version__
from md_iqp.errors import ConfigError
from md_iqp.experiments.config import ExperimentConfig, ExperimentOutput, RunContext
from md_iqp.experiments.registry import get_experiment

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


@dataclass(frozen=True)
class RunManifest:
    run_dir: Path
    status: int
    files: dict[str, str]
    passed: bool | None = None

    def to_json(self) -> dict[str, Any]:
        return {
            "run_dir": str(self.run_dir),
            "status": self.status,
            "files": self.files,
            "passed": self.passed,
        }


def git_describe() -> str:
    try:
        proc = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            capture_output=True,
            text=True,
            cwd=Path(__file__).resolve().parent,
            timeout=5,
            check=False,
        )
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return proc.stdout.strip() if proc.returncode == 0 and proc.stdout.strip() else "unknown"


def _plain(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _write_json(path: Path, payload: Any) -> None:
    path.write_text(
        json.dumps(payload, indent=2, sort_keys=True, default=_plain) + "\n", encoding="utf-8"
    )


def _write_csv(path: Path, rows: list[dict[str, Any]]) -> None:
    header: list[str] = []
    for row in rows:
        header.extend(k for k in row if k not in header)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=header, restval="")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: "" if v is None else _plain_scalar(v) for k, v in row.items()})


def _plain_scalar(value: Any) -> Any:
    return value.item() if isinstance(value, np.generic) else value


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run_experiment(config: ExperimentConfig, out_dir: str | Path | None = None) -> RunManifest:
    """Validate, run and record one experiment.

    Configuration problems raise :class:`ConfigError` before anything is written.
    A failing experiment still leaves metadata, an ``error.json`` and the manifest,
    and reports a nonzero status.
    """
    experiment = get_experiment(config.name)
    params = experiment.parse(config.params)
    run_dir = Path(out_dir if out_dir is not None else config.output_dir)
    run_dir = run_dir / f"{config.name}-{config.seed}"
    ctx = RunContext(config.name, config.seed, config.threads)

    logger.info("running %s (seed %d) into %s", config.name, config.seed, run_dir)
    output: ExperimentOutput | None = None
    error: str | None = None
    try:
        output = experiment.run(params, ctx)
    except Exception as exc:  # noqa: BLE001
        logger.exception("experiment %s failed after %d steps", config.name, len(ctx.log))
        error = f"{type(exc).__name__}: {exc}"

    run_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    if output is not None:
        status = EXIT_FAILED if output.passed is False else EXIT_OK
        results = run_dir / "results.json"
        _write_json(results, {"summary": output.summary, "passed": output.passed})
        written.append(results)
        for name, rows in sorted(output.tables.items()):
            table = run_dir / f"{name}.csv"
            _write_csv(table, rows)
            written.append(table)
    else:
        status = EXIT_FAILED
        err = run_dir / "error.json"
        _write_json(err, {"error": error, "completed_steps": ctx.log})
        written.append(err)

    metadata = run_dir / "metadata.json"
    _write_json(
        metadata,
        {
            "experiment": config.name,
            "seed": config.seed,
            "version": __version__,
            "git": git_describe(),
            "config": config.model_dump(mode="json"),
            "params": params.model_dump(mode="json"),
            "steps": ctx.log,
            "status": status,
        },
    )
    written.insert(0, metadata)

    files = {p.name: _sha256(p) for p in written}
    manifest = RunManifest(run_dir, status, files, output.passed if output else None)
    _write_json(run_dir / "manifest.json", manifest.to_json() | {"run_dir": run_dir.name})
    for step in ctx.log:
        logger.info("[%s] %s", config.name, step)
    return manifest


def sample_config_path(name: str) -> Path:
    """Bundled sample config for a registered experiment."""
    get_experiment(name)
    bundled = resources.files("md_iqp.experiments").joinpath("configs").joinpath(f"{name}.json")
    path = Path(str(bundled))
    if not path.is_file():
        raise ConfigError(f"no bundled sample config for {name}")
    return path
