"""Command-line harness: run experiments from YAML configs and summarise artifacts.

Exit codes: 0 success, 1 numerical guard, 2 config error, 3 capacity, 4 no artifacts.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import yaml

from homsim import __version__
from homsim.errors import CapacityError, NumericalGuardError
from homsim.experiments import EXPERIMENTS, Param, Table

EXIT_OK, EXIT_GUARD, EXIT_CONFIG, EXIT_CAPACITY, EXIT_NO_ARTIFACTS = 0, 1, 2, 3, 4
TOP_LEVEL_KEYS = {"experiment", "seed", "output_path", "parameters"}
SCHEMA_VERSION = 1
MAX_SEED = 2**64 - 1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    parameters: dict
    seed: int = 0
    output_path: str = "results"

    def canonical(self) -> dict:
        # output_path is where results go, not what they are, so it stays out of the hash
        return {"experiment": self.experiment, "parameters": self.parameters, "seed": self.seed}

    @property
    def config_hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _check_value(name: str, value, spec: Param):
    def scalar(v, kind, where):
        if kind is float:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{where} must be a number, got {v!r}")
            return float(v)
        if kind is int:
            if isinstance(v, bool) or not isinstance(v, int):
                raise ConfigError(f"{where} must be an integer, got {v!r}")
            return v
        if not isinstance(v, kind):
            raise ConfigError(f"{where} must be {kind.__name__}, got {v!r}")
        return v

    if spec.kind is list:
        if not isinstance(value, list):
            raise ConfigError(f"parameter {name!r} must be a list, got {value!r}")
        if spec.item is None:
            return list(value)
        return [scalar(v, spec.item, f"element of {name!r}") for v in value]
    value = scalar(value, spec.kind, f"parameter {name!r}")
    if spec.choices and value not in spec.choices:
        raise ConfigError(f"parameter {name!r} must be one of {list(spec.choices)}, got {value!r}")
    return value


def build_config(raw, experiment: str | None = None) -> ExperimentConfig:
    """Validate a parsed config mapping and fill in parameter defaults."""
    raw = {} if raw is None else raw
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(raw) - TOP_LEVEL_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    name = raw.get("experiment", experiment)
    if experiment is not None and name != experiment:
        raise ConfigError(f"config is for {name!r}, not {experiment!r}")
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}; choose from {sorted(EXPERIMENTS)}")
    schema = EXPERIMENTS[name].params
    params = raw.get("parameters") or {}
    if not isinstance(params, dict):
        raise ConfigError("parameters must be a mapping")
    unknown = set(params) - set(schema)
    if unknown:
        raise ConfigError(f"unknown parameters for {name}: {sorted(unknown)}")
    resolved = {k: _check_value(k, params.get(k, spec.default), spec) for k, spec in schema.items()}
    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed <= MAX_SEED:
        raise ConfigError(f"seed must be an integer in [0, 2^64), got {seed!r}")
    out = raw.get("output_path", "results")
    if not isinstance(out, str):
        raise ConfigError(f"output_path must be text, got {out!r}")
    return ExperimentConfig(name, resolved, seed, out)


def _read_yaml(path: str | Path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc


def load_config(path: str | Path, experiment: str | None = None) -> ExperimentConfig:
    return build_config(_read_yaml(path), experiment)


def _cell(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, int):
        return str(v)
    if hasattr(v, "dtype"):
        return _cell(v.item())
    return str(v)


def render_csv(table: Table) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.header)
    for row in sorted(table.rows, key=lambda r: tuple(r)):
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _check_distribution(table: Table):
    if table.distribution_column is None:
        return
    col = table.header.index(table.distribution_column)
    total = sum(float(r[col]) for r in table.rows)
    if abs(total - 1.0) > 1e-9:
        raise NumericalGuardError(f"column {table.distribution_column!r} sums to {total:.17g}, not 1")


def execute(config: ExperimentConfig, out_dir: str | Path | None = None) -> tuple:
    """Run one experiment and write ``<experiment>.csv`` and ``<experiment>.json``.

    Nothing is written unless the run completes.
    """
    start = time.perf_counter()
    table = EXPERIMENTS[config.experiment].runner(config.parameters, config.seed)
    _check_distribution(table)
    wall = time.perf_counter() - start
    out_dir = Path(config.output_path if out_dir is None else out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{config.experiment}.csv"
    json_path = out_dir / f"{config.experiment}.json"
    csv_path.write_text(render_csv(table), encoding="utf-8")
    record = {
        "schema_version": SCHEMA_VERSION,
        "experiment": config.experiment,
        "config": config.canonical(),
        "config_hash": config.config_hash,
        "seed": config.seed,
        "version": __version__,
        "wall_time": wall,
        "csv": csv_path.name,
        "metrics": {k: {"expected": _json_num(e), "computed": _json_num(c)} for k, (e, c) in table.metrics.items()},
    }
    json_path.write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return csv_path, json_path, table


def _json_num(v):
    if v is None:
        return None
    return v.item() if hasattr(v, "item") else v


def _fmt(v) -> str:
    return "-" if v is None else format(v, ".12g")


def report(directory: str | Path, stream=None) -> int:
    stream = sys.stdout if stream is None else stream
    d = Path(directory)
    records = []
    for path in sorted(d.glob("*.json")) if d.is_dir() else []:
        try:
            rec = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError):
            continue
        if isinstance(rec, dict) and "metrics" in rec and "experiment" in rec:
            records.append(rec)
    if not records:
        print(f"no run artifacts found in {d}", file=sys.stderr)
        return EXIT_NO_ARTIFACTS
    rows = [("experiment", "metric", "expected", "computed", "|delta|")]
    for rec in records:
        for name, m in sorted(rec["metrics"].items()):
            e, c = m.get("expected"), m.get("computed")
            delta = None if e is None or c is None else abs(c - e)
            rows.append((rec["experiment"], name, _fmt(e), _fmt(c), _fmt(delta)))
    widths = [max(len(r[i]) for r in rows) for i in range(5)]
    for r in rows:
        print("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip(), file=stream)
    return EXIT_OK


def _add_run_flags(p: argparse.ArgumentParser, config_required: bool):
    p.add_argument("--config", required=config_required, help="YAML experiment config")
    p.add_argument("--out", help="output directory (overrides output_path)")
    p.add_argument("--seed", type=int, help="RNG seed (overrides the config)")
    p.add_argument("--quiet", action="store_true", help="suppress the metric summary")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="homsim", description="Run linear-optics interference experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run_flags(sub.add_parser("run", help="run the experiment named in a config file"), True)
    for name, exp in sorted(EXPERIMENTS.items()):
        p = sub.add_parser(name, help=exp.doc)
        _add_run_flags(p, False)
        p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                       help="override one parameter (VALUE is parsed as YAML)")
    r = sub.add_parser("report", help="tabulate expected vs computed metrics of finished runs")
    r.add_argument("directory")
    return parser


def _config_from_args(args) -> ExperimentConfig:
    experiment = None if args.command == "run" else args.command
    raw = _read_yaml(args.config) if args.config else {}
    raw = {} if raw is None else raw
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    raw = dict(raw)
    overrides = getattr(args, "param", [])
    if overrides:
        params = dict(raw.get("parameters") or {})
        for item in overrides:
            key, sep, value = item.partition("=")
            if not sep:
                raise ConfigError(f"--param expects KEY=VALUE, got {item!r}")
            params[key.strip()] = yaml.safe_load(value)
        raw["parameters"] = params
    if args.seed is not None:
        raw["seed"] = args.seed
    return build_config(raw, experiment)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "report":
        return report(args.directory)
    try:
        config = _config_from_args(args)
        csv_path, json_path, table = execute(config, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapacityError as exc:
        print(f"capacity exceeded: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except NumericalGuardError as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except ValueError as exc:
        # invalid parameter values caught by the physics layer
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not args.quiet:
        print(f"wrote {csv_path} and {json_path}")
        for name, (e, c) in table.metrics.items():
            print(f"  {name}: expected {_fmt(e)}, computed {_fmt(c)}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
