"""Command-line surface.

Every subcommand reads a JSON document (``--config``), applies ``--set
dotted.key=value`` overrides, validates it with the matching pydantic model
and writes its outputs under ``--output-dir``. Errors go to stderr as one
JSON object and map to exit codes 2 (usage), 3 (config) and 4 (runtime).
"""
import argparse
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional, Sequence

from pydantic import BaseModel, ValidationError

import config as settings
from app.core.errors import ConfigError, UsageError, WeightedFPPError
from app.core.file_storage import ReportStorage
from app.dmetric import trace_d_ball
from app.engine import run_eden_chain, run_fpp
from app.experiments import run_experiment
from app.models.cli import EXPERIMENT_KINDS, SUBCOMMANDS, CliConfig, DBallConfig, LambdaConfig, RunSummary
from app.models.experiment import ExperimentSpec
from app.models.run import RunConfig
from app.render import pixmap_bytes, render_snapshot, render_vertices
from app.snapshots import read_snapshot_binary, read_snapshot_csv, write_snapshot_binary, write_snapshot_csv
from app.weights import build_norm, build_weight, compute_lambda, compute_shape_constants

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message, category="usage.invalid")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", dest="config_path", help="JSON configuration file")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="Override a dotted configuration key (repeatable)")
    common.add_argument("--seed", type=int, help="Base seed")
    common.add_argument("--threads", type=int, default=settings.DEFAULT_THREADS, help="Replicate workers")
    common.add_argument("--output-dir", default=settings.OUTPUT_DIR, help="Output directory")
    common.add_argument("--quiet", action="store_true", help="No progress bars, warnings only")

    parser = _Parser(prog="python -m app", description="Weighted first-passage percolation simulator")
    sub = parser.add_subparsers(dest="subcommand", parser_class=_Parser)
    simulate = sub.add_parser("simulate", parents=[common], help="Grow one cluster")
    simulate.add_argument("--sampler", choices=["fpp", "eden"], default="fpp")
    simulate.add_argument("--render", action="store_true", help="Also write the final cluster as a pixmap (d=2)")
    dball = sub.add_parser("dball", parents=[common], help="Trace a D-ball boundary")
    dball.add_argument("--alpha", type=float)
    dball.add_argument("--profile", help="const:<value>, norm_power:<norm> or norm_ratio:<norm>")
    dball.add_argument("--mu", help="euclidean, l1 or linf")
    dball.add_argument("--radius", type=float)
    dball.add_argument("--resolution", type=int, help="Number of directions")
    sub.add_parser("lambda", parents=[common], help="Half D-circumference of the unit sphere")
    for name in EXPERIMENT_KINDS:
        sub.add_parser(name, parents=[common], help=f"{EXPERIMENT_KINDS[name]} experiment")
    render = sub.add_parser("render", parents=[common], help="Render a snapshot as a P6 pixmap")
    render.add_argument("--snapshot", required=True, help="Snapshot file (.bin or .csv)")
    render.add_argument("--colormap", default="viridis")
    render.add_argument("--out", help="Output pixmap path")
    return parser


def load_document(path: Optional[str]) -> Dict[str, Any]:
    if path is None:
        return {}
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}", category="config.not_found")
    try:
        with open(path, "r") as f:
            document = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e.msg} at line {e.lineno})")
    if not isinstance(document, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return document


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(document: Dict[str, Any], overrides: Sequence[str]) -> Dict[str, Any]:
    """Set ``a.b.c=value`` paths; values are parsed as JSON when possible."""
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"override '{item}' is not KEY=VALUE")
        node = document
        parts = key.split(".")
        for part in parts[:-1]:
            child = node.get(part)
            if child is None:
                child = node[part] = {}
            if not isinstance(child, dict):
                raise ConfigError(f"override '{key}': '{part}' is not an object")
            node = child
        node[parts[-1]] = _parse_value(value)
    return document


def validate(model: type, document: Dict[str, Any]) -> BaseModel:
    """Validate with ``model``; unknown keys surface as config.unknown_key with their dotted path."""
    try:
        return model.model_validate(document)
    except ValidationError as e:
        errors = e.errors()
        unknown = [".".join(str(p) for p in err["loc"]) for err in errors if err["type"] == "extra_forbidden"]
        if unknown:
            raise ConfigError(f"unknown configuration key: {unknown[0]}", category="config.unknown_key")
        first = errors[0]
        where = ".".join(str(p) for p in first["loc"]) or "<root>"
        raise ConfigError(f"invalid configuration at {where}: {first['msg']}")


def _profile_flag(text: str) -> Dict[str, Any]:
    kind, _, arg = text.partition(":")
    if kind in ("const", "constant"):
        return {"kind": "constant", "value": float(arg or 1.0)}
    if kind in ("norm_power", "norm_ratio") and arg:
        return {"kind": kind, "norm": {"kind": arg}}
    raise UsageError(f"--profile '{text}' is not const:<value>, norm_power:<norm> or norm_ratio:<norm>")


def cmd_simulate(cli: CliConfig, args, storage: ReportStorage, document: Dict[str, Any]) -> None:
    if cli.seed is not None:
        document["seed"] = cli.seed
    run_config = validate(RunConfig, document)
    runner = run_eden_chain if args.sampler == "eden" else run_fpp
    result = runner(run_config)
    state = result.final_state
    files = []
    for snap in result.snapshots:
        files.append(write_snapshot_csv(storage.path(f"snapshot_{snap.step}.csv"), snap))
        files.append(write_snapshot_binary(storage.path(f"snapshot_{snap.step}.bin"), snap))
    final = state.snapshot(state.step_count, result.stop_time)
    files.append(write_snapshot_csv(storage.path("cluster.csv"), final))
    files.append(write_snapshot_binary(storage.path("cluster.bin"), final))
    if args.render:
        path = storage.path("cluster.ppm")
        with open(path, "wb") as f:
            f.write(pixmap_bytes(render_snapshot(final)))
        files.append(path)
    summary = RunSummary(config=run_config, sampler=result.sampler, step_count=result.step_count,
                         vertex_count=len(state.vertex_times), stop_time=result.stop_time,
                         exit_vertex=list(result.exit_vertex) if result.exit_vertex else None,
                         rng_draw_count=result.rng_draw_count,
                         exit_times={repr(float(r)): t for r, t in result.exit_times.items()},
                         files=[os.path.basename(p) for p in files])
    storage.save_json("run.json", summary)


def cmd_dball(cli: CliConfig, args, storage: ReportStorage, document: Dict[str, Any]) -> None:
    if args.alpha is not None:
        document.setdefault("weight", {})["alpha"] = args.alpha
    if args.profile is not None:
        document.setdefault("weight", {})["profile"] = _profile_flag(args.profile)
    if args.mu is not None:
        document["mu"] = {"kind": args.mu}
    if args.radius is not None:
        document["radius"] = args.radius
    if args.resolution is not None:
        document["angular_resolution"] = args.resolution
    cfg = validate(DBallConfig, document)
    f = build_weight(cfg.weight, cfg.dimension)
    ball = trace_d_ball(f, build_norm(cfg.mu, cfg.dimension), cfg.radius, cfg.angular_resolution,
                        step=cfg.step, reach=cfg.reach)
    ball.to_csv(storage.path("dball.csv"))
    storage.save_json("dball.json", {"config": cfg, "report": ball.report()})


def cmd_lambda(cli: CliConfig, args, storage: ReportStorage, document: Dict[str, Any]) -> None:
    cfg = validate(LambdaConfig, document)
    f = build_weight(cfg.weight, cfg.dimension)
    mu = build_norm(cfg.mu, cfg.dimension)
    constants = compute_shape_constants(mu, 1024, cfg.dimension)
    lam = compute_lambda(f, mu, cfg.sphere_resolution, cfg.quad_nodes, cfg.extrapolate)
    threshold = 1.0 + 1.0 / (constants.rho_upper * f.kappa_upper * lam.value)
    storage.save_json("lambda.json", {"config": cfg, "lambda": lam, "shape_constants": constants,
                                      "kappa_upper": f.kappa_upper, "alpha_threshold": threshold})


def cmd_experiment(cli: CliConfig, args, storage: ReportStorage, document: Dict[str, Any]) -> None:
    kind = EXPERIMENT_KINDS[cli.subcommand]
    if document.setdefault("kind", kind) != kind:
        raise ConfigError(f"config kind '{document['kind']}' does not match subcommand '{cli.subcommand}'")
    if cli.seed is not None:
        document.setdefault("engine_config", {})["seed"] = cli.seed
    spec = validate(ExperimentSpec, document)
    if spec.output_dir and cli.output_dir == settings.OUTPUT_DIR:
        storage = ReportStorage(spec.output_dir)
    run_experiment(spec, storage, threads=cli.threads, quiet=cli.quiet)


def cmd_render(cli: CliConfig, args, storage: ReportStorage, document: Dict[str, Any]) -> None:
    path = args.snapshot
    if path.endswith(".csv"):
        rows = read_snapshot_csv(path)
        if rows and len(rows[0]) != 4:
            raise ConfigError("only d=2 snapshots can be rendered", category="config.invalid")
        seen, vertices = {(0, 0)}, [(0, 0)]
        for _, _, *coords in rows:
            if tuple(coords) not in seen:
                seen.add(tuple(coords))
                vertices.append(tuple(coords))
        image = render_vertices(vertices, args.colormap)
    else:
        if not os.path.exists(path):
            raise ConfigError(f"snapshot file not found: {path}", category="config.not_found")
        image = render_snapshot(read_snapshot_binary(path), args.colormap)
    out = args.out or storage.path(os.path.splitext(os.path.basename(path))[0] + ".ppm")
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    with open(out, "wb") as f:
        f.write(pixmap_bytes(image))


COMMANDS = {"simulate": cmd_simulate, "dball": cmd_dball, "lambda": cmd_lambda, "render": cmd_render,
            **{name: cmd_experiment for name in EXPERIMENT_KINDS}}


def configure_logging(quiet: bool) -> None:
    logging.basicConfig(level=logging.WARNING if quiet else settings.LOG_LEVEL,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def parse_and_dispatch(argv: List[str]) -> int:
    """Run one subcommand; returns the process exit code."""
    try:
        args = build_parser().parse_args(argv)
        if args.subcommand is None:
            raise UsageError(f"a subcommand is required: {', '.join(SUBCOMMANDS)}")
        cli = CliConfig(subcommand=args.subcommand, config_path=args.config_path, overrides=args.overrides,
                        output_dir=args.output_dir, seed=args.seed, threads=max(1, args.threads), quiet=args.quiet)
        configure_logging(cli.quiet)
        document = apply_overrides(load_document(cli.config_path), cli.overrides)
        COMMANDS[cli.subcommand](cli, args, ReportStorage(cli.output_dir), document)
    except WeightedFPPError as e:
        sys.stderr.write(json.dumps(e.to_dict(), sort_keys=True) + "\n")
        return e.exit_code
    return 0


def main() -> None:
    sys.exit(parse_and_dispatch(sys.argv[1:]))
