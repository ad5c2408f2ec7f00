"""Tests for experiment configs, the registry and the run recorder."""

from __future__ import annotations

import csv
import dataclasses
import json
from pathlib import Path

import pytest

from md_iqp.errors import ConfigError
from md_iqp.experiments.config import (
    ExperimentConfig,
    ExperimentOutput,
    RunContext,
    derive_seed,
    load_config,
)
from md_iqp.experiments.registry import REGISTRY, get_experiment, list_experiments
from md_iqp.experiments.runner import (
    EXIT_FAILED,
    EXIT_OK,
    run_experiment,
    sample_config_path,
)

EXPECTED_NAMES = [
    "equivalence-oracle",
    "criteria-scan",
    "anticoncentration",
    "xi-cost",
    "tv-sweep",
    "dephasing-fit",
    "cx-count",
    "theorem2-demo",
    "reservoir-bench",
]


@pytest.fixture
def oracle_config() -> ExperimentConfig:
    """Smallest grid equivalence run: one instance, two sampled branches."""
    return ExperimentConfig(
        name="equivalence-oracle",
        seed=11,
        params={"connectivity": "grid", "size": 4, "layers": 1, "instances": 1,
                "outcome_samples": 2},
    )


class TestSeeds:
    """Derived seeds are stable and independent of call order."""

    def test_deterministic_and_in_range(self) -> None:
        a = derive_seed(5, "staircase", 3)
        assert a == derive_seed(5, "staircase", 3)
        assert 0 <= a < 2**63

    def test_distinct_inputs_give_distinct_seeds(self) -> None:
        seeds = {
            derive_seed(5, "staircase", 0),
            derive_seed(5, "staircase", 1),
            derive_seed(5, "noise", 0),
            derive_seed(6, "staircase", 0),
        }
        assert len(seeds) == 4

    def test_context_map_keeps_order(self) -> None:
        ctx = RunContext("x", 1, threads=3)
        assert ctx.map(lambda v: v * v, range(10)) == [v * v for v in range(10)]
        assert ctx.seed_for("m", 2) == derive_seed(1, "m", 2)


class TestLoadConfig:
    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(ConfigError):
            load_config(tmp_path / "absent.json")

    def test_bad_json(self, tmp_path: Path) -> None:
        path = tmp_path / "bad.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_unknown_key_rejected(self, tmp_path: Path) -> None:
        path = tmp_path / "extra.json"
        path.write_text(json.dumps({"name": "cx-count", "colour": "red"}), encoding="utf-8")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_valid(self, tmp_path: Path) -> None:
        path = tmp_path / "ok.json"
        path.write_text(json.dumps({"name": "cx-count", "seed": 4}), encoding="utf-8")
        config = load_config(path)
        assert config.name == "cx-count"
        assert config.seed == 4
        assert config.params == {}

    @pytest.mark.parametrize("name", EXPECTED_NAMES)
    def test_bundled_samples_load(self, name: str) -> None:
        config = load_config(sample_config_path(name))
        assert config.name == name
        get_experiment(name).parse(config.params)


class TestRegistry:
    def test_names_in_order(self) -> None:
        assert [name for name, _ in list_experiments()] == EXPECTED_NAMES
        assert all(desc for _, desc in list_experiments())

    def test_unknown_name(self) -> None:
        with pytest.raises(ConfigError, match="unknown experiment"):
            get_experiment("nope")

    def test_parse_rejects_unknown_param(self) -> None:
        with pytest.raises(ConfigError):
            get_experiment("cx-count").parse({"sizes": [4], "bogus": 1})

    def test_parse_rejects_out_of_range(self) -> None:
        with pytest.raises(ConfigError):
            get_experiment("equivalence-oracle").parse({"instances": 0})


class TestRunExperiment:
    """Run directories, status codes and reproducibility."""

    def test_writes_run_directory(self, oracle_config: ExperimentConfig, tmp_path: Path) -> None:
        manifest = run_experiment(oracle_config, tmp_path)
        assert manifest.status == EXIT_OK
        assert manifest.passed is True
        assert manifest.run_dir == tmp_path / "equivalence-oracle-11"
        for name in ("metadata.json", "results.json", "branches.csv", "manifest.json"):
            assert (manifest.run_dir / name).is_file()
        assert set(manifest.files) == {"metadata.json", "results.json", "branches.csv"}

        results = json.loads((manifest.run_dir / "results.json").read_text(encoding="utf-8"))
        assert results["summary"]["checks"] == 2
        assert results["summary"]["failures"] == 0
        assert results["summary"]["min_fidelity"] == pytest.approx(1.0, abs=1e-9)

        with open(manifest.run_dir / "branches.csv", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 2
        assert {"instance", "branch", "outcomes", "fidelity", "passed"} <= set(rows[0])

        metadata = json.loads((manifest.run_dir / "metadata.json").read_text(encoding="utf-8"))
        assert metadata["experiment"] == "equivalence-oracle"
        assert metadata["seed"] == 11
        assert metadata["params"]["layers"] == 1
        assert metadata["status"] == EXIT_OK

    def test_reruns_reproduce_results(
        self, oracle_config: ExperimentConfig, tmp_path: Path
    ) -> None:
        first = run_experiment(oracle_config, tmp_path / "a")
        threaded = oracle_config.model_copy(update={"threads": 2})
        second = run_experiment(threaded, tmp_path / "b")
        for name in ("results.json", "branches.csv"):
            assert first.files[name] == second.files[name]

    def test_failure_leaves_error_record(
        self, oracle_config: ExperimentConfig, tmp_path: Path, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        def boom(params: object, ctx: RunContext) -> ExperimentOutput:
            ctx.step("started")
            raise RuntimeError("exploded")

        exp = REGISTRY["equivalence-oracle"]
        monkeypatch.setitem(REGISTRY, exp.name, dataclasses.replace(exp, run=boom))
        manifest = run_experiment(oracle_config, tmp_path)
        assert manifest.status == EXIT_FAILED
        assert manifest.passed is None
        error = json.loads((manifest.run_dir / "error.json").read_text(encoding="utf-8"))
        assert "exploded" in error["error"]
        assert error["completed_steps"] == ["started"]
        assert (manifest.run_dir / "manifest.json").is_file()

    def test_config_errors_write_nothing(self, tmp_path: Path) -> None:
        with pytest.raises(ConfigError):
            run_experiment(ExperimentConfig(name="nope"), tmp_path)
        with pytest.raises(ConfigError):
            run_experiment(
                ExperimentConfig(name="cx-count", params={"instances": 0}), tmp_path
            )
        assert list(tmp_path.iterdir()) == []

    def test_theorem_demo_gap(self, tmp_path: Path) -> None:
        config = ExperimentConfig(
            name="theorem2-demo", seed=2, params={"n": 9, "epsilons": [0.0], "seeds": 1}
        )
        manifest = run_experiment(config, tmp_path)
        assert manifest.status == EXIT_OK
        results = json.loads((manifest.run_dir / "results.json").read_text(encoding="utf-8"))
        assert results["summary"]["min_gap_md"] == pytest.approx(2.0, abs=1e-9)
        assert results["summary"]["max_gap_local"] < 2.0

    def test_cx_count_rows(self, tmp_path: Path) -> None:
        config = ExperimentConfig(
            name="cx-count", seed=3, params={"sizes": [4], "D": 1, "instances": 2}
        )
        manifest = run_experiment(config, tmp_path)
        assert manifest.status == EXIT_OK
        with open(manifest.run_dir / "cx_count.csv", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 2
        for row in rows:
            assert int(row["dynamic"]) > 0
            assert int(row["optimized"]) >= 0
