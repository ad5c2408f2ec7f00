"""Command-line entry point: ``md-iqp <command> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from md_iqp.errors import ConfigError, MdIqpError
from md_iqp.settings import settings

logger = logging.getLogger("md_iqp.cli")

MODEL_PARAMS = {"depol": "p2", "dephase": "t2_ns"}
MODEL_CHOICES = {"depol": ("p1", "p2"), "dephase": ("t2_ns", "cx_layer_ns")}


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _grid_dims(text: str) -> tuple[int, int]:
    width, sep, height = text.lower().partition("x")
    try:
        if not sep:
            raise ValueError(text)
        return int(width), int(height)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from exc


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _cmd_staircase_gen(args: argparse.Namespace) -> int:
    from md_iqp.circuits.staircase import architecture, build_staircase, depth_and_counts
    from md_iqp.evaluation.generators import layout_for
    from md_iqp.layout.grid import AllToAllLayout, GridLayout

    layout: GridLayout | AllToAllLayout
    if args.grid is not None:
        if args.size is not None:
            raise ConfigError("--grid and --size are mutually exclusive")
        layout = GridLayout(*args.grid)
    elif args.size is not None:
        layout = layout_for(args.layout, args.size)
    else:
        raise ConfigError("staircase gen needs --grid WxH or --size")
    fs = build_staircase(
        layout,
        args.D,
        r1=args.r1,
        r2=args.r2,
        seed=args.seed,
        random_extras=not args.no_extras,
        path_iterations=args.path_iters,
        path_seed=args.path_seed,
    )
    depth, cx, meas = depth_and_counts(fs.circuit)
    logger.info("staircase: depth %d, %d CX, %d measurements", depth, cx, meas)
    _write(fs.circuit.to_json() + "\n", args.out)
    if args.architecture:
        Path(args.architecture).write_text(
            json.dumps(architecture(fs).to_json(), indent=2) + "\n", encoding="utf-8"
        )
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    from md_iqp.circuits.models import DynamicCircuit
    from md_iqp.circuits.staircase import IqpSpec
    from md_iqp.simulation.simcore import (
        DynamicResult,
        distribution_to_csv,
        iqp_distribution,
        output_distribution,
        run_dynamic,
        sample,
    )

    if args.iqp:
        spec = IqpSpec.from_json(json.loads(Path(args.iqp).read_text(encoding="utf-8")))
        dist = iqp_distribution(spec)
    else:
        circuit = DynamicCircuit.from_json(Path(args.circuit).read_text(encoding="utf-8"))
        result = run_dynamic(circuit, "sample", seed=args.seed)
        assert isinstance(result, DynamicResult)
        logger.info("outcomes %s (probability %.3g)", result.outcomes, result.probability)
        dist = output_distribution(result.state)
    if args.mode == "sample":
        counts = sample(dist, args.shots, args.seed)
        lines = "".join(f"{bits},{hits}\n" for bits, hits in sorted(counts.items()))
        _write("bitstring,count\n" + lines, args.out)
    elif args.out:
        distribution_to_csv(dist, args.out)
    else:
        for i in np.flatnonzero(dist.probs > 1e-15):
            sys.stdout.write(f"{dist.bitstring(int(i))},{dist.probs[i]!r}\n")
    return 0


def _cmd_noise_sweep(args: argparse.Namespace) -> int:
    from md_iqp.circuits.models import DynamicCircuit
    from md_iqp.simulation.noise import NoiseModel, tv_sweep, write_sweep_csv

    param = args.param or MODEL_PARAMS[args.model or "depol"]
    if args.model and param not in MODEL_CHOICES[args.model]:
        raise ConfigError(f"--param {param} is not a {args.model} parameter")
    circuit = DynamicCircuit.from_json(Path(args.circuit).read_text(encoding="utf-8"))
    base = NoiseModel(depolarizing=args.depolarizing)
    rows = tv_sweep([circuit], param, args.values, base, args.trajectories, args.seed)
    if args.out:
        write_sweep_csv(rows, args.out)
    else:
        for r in rows:
            sys.stdout.write(f"{r.param}={r.value:g}\t{r.mean_tv:.6f}\n")
    return 0


def _cmd_criteria_check(args: argparse.Namespace) -> int:
    from md_iqp.evaluation.criteria import CriterionThresholds, criterion1
    from md_iqp.linalg.gf2 import BitMatrix

    payload = json.loads(Path(args.architecture).read_text(encoding="utf-8"))
    thresholds = CriterionThresholds(mp_max_distance=args.mp_max_distance)
    report = criterion1(BitMatrix.from_json(payload), thresholds, args.seed)
    _write(report.model_dump_json(indent=2) + "\n", None)
    return 0 if report.overall else 1


def _cmd_reservoir_run(args: argparse.Namespace) -> int:
    from md_iqp.reservoir.bench import (
        ReservoirBenchConfig,
        build_dataset,
        make_reservoir,
        multibody_layout,
        parse_family,
        reservoir_features,
        resolve_edges,
    )
    from md_iqp.reservoir.features import train_eval
    from md_iqp.reservoir.ssh import SshPhaseParams, load_phase_params

    phases = load_phase_params(args.phase_params) if args.phase_params else SshPhaseParams()
    config = ReservoirBenchConfig(
        n=args.n,
        samples_per_class=args.samples,
        cycles=args.cycles,
        shots=args.shots,
        readout_error=args.readout_error,
        families=(args.family,),
        phase_params=phases,
        seed=args.seed,
    )
    states, labels = build_dataset(config)
    edges = resolve_edges(config.edges, config.n)
    multibody = parse_family(args.family)[0] == "multibody"
    layout = multibody_layout(config.edges, config.n) if multibody else None
    reservoir = make_reservoir(
        args.family, config.n, edges, args.seed, cycles=config.cycles, layout=layout
    )
    table = reservoir_features(
        reservoir, states, labels, config.cycles, config.shots, config.readout_error, args.seed
    )
    if args.out:
        table.to_csv(args.out)
    for cycle in range(1, config.cycles + 1):
        acc = train_eval(table.at_cycle(cycle), labels, args.classifier, seed=args.seed)
        sys.stdout.write(f"cycle {cycle}\t{acc:.3f}\n")
    return 0


def _cmd_experiments_list(args: argparse.Namespace) -> int:
    from md_iqp.experiments.registry import list_experiments

    for name, description in list_experiments():
        sys.stdout.write(f"{name}\t{description}\n")
    return 0


def _cmd_experiments_run(args: argparse.Namespace) -> int:
    from md_iqp.experiments.config import load_config
    from md_iqp.experiments.runner import run_experiment, sample_config_path

    if args.config:
        config = load_config(args.config)
    elif args.experiment:
        config = load_config(sample_config_path(args.experiment))
    else:
        raise ConfigError("experiments run needs --config or --experiment")
    if args.experiment and args.experiment != config.name:
        raise ConfigError(f"--experiment {args.experiment} does not match config {config.name}")
    update: dict[str, object] = {}
    if args.seed is not None:
        update["seed"] = args.seed
    if args.out is not None:
        update["output_dir"] = args.out
    if args.threads is not None:
        update["threads"] = args.threads
    config = config.model_validate({**config.model_dump(), **update})
    manifest = run_experiment(config)
    sys.stdout.write(json.dumps(manifest.to_json(), indent=2) + "\n")
    return manifest.status


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run(
        "md_iqp.api.server:app", host=args.host, port=args.port, log_level=args.log_level.lower()
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="md-iqp", description=__doc__)
    parser.add_argument("--log-level", default=settings.log_level, help="root logging level")
    sub = parser.add_subparsers(dest="command", required=True)

    stair = sub.add_parser("staircase", help="fan-out staircase construction")
    stair_sub = stair.add_subparsers(dest="action", required=True)
    gen = stair_sub.add_parser("gen", help="build one randomized staircase")
    gen.add_argument("--layout", choices=("grid", "all-to-all"), default="grid")
    gen.add_argument("--grid", type=_grid_dims, help="checkerboard WxH of system and aux sites")
    gen.add_argument("--size", type=int, help="system qubits for --layout")
    gen.add_argument("--D", type=int, default=2, help="number of random paths")
    gen.add_argument("--r1", type=int, default=1)
    gen.add_argument("--r2", type=int, default=1)
    gen.add_argument("--no-extras", action="store_true", help="plain two-layer ladders only")
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--path-seed", type=int, default=None, help="separate seed for the paths")
    gen.add_argument("--path-iters", type=int, default=None, help="split-and-mend iterations")
    gen.add_argument("--out", help="circuit JSON (default: stdout)")
    gen.add_argument("--architecture", help="also write the architecture matrix JSON here")
    gen.set_defaults(func=_cmd_staircase_gen)

    sim = sub.add_parser("simulate", help="output distribution of a circuit or IQP spec")
    src = sim.add_mutually_exclusive_group(required=True)
    src.add_argument("--circuit", help="dynamic circuit JSON")
    src.add_argument("--iqp", help="IQP spec JSON")
    sim.add_argument("--mode", choices=("exact", "sample"), default="exact")
    sim.add_argument("--shots", type=int, default=1024, help="shots in sample mode")
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--out", help="distribution or counts CSV")
    sim.set_defaults(func=_cmd_simulate)

    noise = sub.add_parser("noise", help="noise studies")
    noise_sub = noise.add_subparsers(dest="action", required=True)
    sweep = noise_sub.add_parser("sweep", help="total variation versus one noise parameter")
    sweep.add_argument("--circuit", required=True, help="dynamic circuit JSON ending in H^n")
    sweep.add_argument("--model", choices=("depol", "dephase"), default=None)
    sweep.add_argument("--param", choices=("p1", "p2", "t2_ns", "cx_layer_ns"), default=None)
    sweep.add_argument("--values", type=_floats, required=True, help="comma-separated values")
    sweep.add_argument("--trajectories", type=int, default=None)
    sweep.add_argument("--depolarizing", choices=("joint", "marginal"), default="joint")
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--out", help="sweep CSV")
    sweep.set_defaults(func=_cmd_noise_sweep)

    crit = sub.add_parser("criteria", help="randomness criterion")
    crit_sub = crit.add_subparsers(dest="action", required=True)
    check = crit_sub.add_parser("check", help="check an architecture matrix")
    check.add_argument(
        "--arch", "--architecture", dest="architecture", required=True, help="architecture JSON"
    )
    check.add_argument("--mp-max-distance", type=float, default=0.05)
    check.add_argument("--seed", type=int, default=0)
    check.set_defaults(func=_cmd_criteria_check)

    res = sub.add_parser("reservoir", help="reservoir classification")
    res_sub = res.add_subparsers(dest="action", required=True)
    run = res_sub.add_parser("run", help="features and accuracy per cycle for one family")
    run.add_argument("--phase-params", help="KEY=value file of SSH phase parameters")
    run.add_argument("--family", default="multibody-xy")
    run.add_argument("--cycles", type=int, default=10)
    run.add_argument("--n", type=int, default=8)
    run.add_argument("--samples", type=int, default=150, help="samples per class")
    run.add_argument("--shots", type=int, default=8192)
    run.add_argument("--readout-error", type=float, default=5e-3)
    run.add_argument("--classifier", choices=("ridge", "knn"), default="ridge")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--out", help="feature table CSV")
    run.set_defaults(func=_cmd_reservoir_run)

    exp = sub.add_parser("experiments", help="registered experiment pipelines")
    exp_sub = exp.add_subparsers(dest="action", required=True)
    exp_list = exp_sub.add_parser("list", help="names and descriptions")
    exp_list.set_defaults(func=_cmd_experiments_list)
    exp_run = exp_sub.add_parser("run", help="run one experiment")
    exp_run.add_argument("--config", help="experiment config JSON")
    exp_run.add_argument("--experiment", help="experiment name (bundled sample config)")
    exp_run.add_argument("--seed", type=int, default=None)
    exp_run.add_argument("--out", help="output root directory")
    exp_run.add_argument("--threads", type=int, default=None)
    exp_run.set_defaults(func=_cmd_experiments_run)

    serve = sub.add_parser("serve", help="HTTP API")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(func=_cmd_serve)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=args.log_level.upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return int(args.func(args))
    except ConfigError as exc:
        logger.error("%s", exc)
        return 2
    except (MdIqpError, ValueError, OSError) as exc:
        logger.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
