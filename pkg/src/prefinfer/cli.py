"""Pipeline command-line front end.

Stages communicate only through files in the artifact directory, so each one
can be rerun or tested in isolation:

    config init   -> config.json
    data prepare  -> window_train.json, window_eval.json
    train-agent   -> agent.json, agent.meta.json
    gen-demos     -> demos.csv
    train-dwpi    -> dwpi.json, dwpi.meta.json
    infer         -> prints an inferred weight pair
    validate      -> validation.json
    compare       -> comparison.json
    report        -> validation.<fmt>, comparison.<fmt>
    run-all       -> the whole chain

Exit codes: 0 ok, 1 usage, 2 config, 3 missing artifact, 4 runtime failure.
PREFINFER_OUT overrides the configured artifact directory; an explicit --out
beats both.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import agent, datahub, dwpi, experiments, scenarios
from .env import EnvConfig, PreferenceWeights
from .errors import (
    ArtifactMissing,
    ConfigInvalid,
    IoFailure,
    PrefinferError,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_MISSING = 3
EXIT_RUNTIME = 4

CONFIG_NAME = "config.json"
TRAIN_WINDOW_NAME = "window_train.json"
EVAL_WINDOW_NAME = "window_eval.json"
AGENT_NAME = "agent.json"
DEMOS_NAME = "demos.csv"
DWPI_NAME = "dwpi.json"
VALIDATION_NAME = "validation.json"
COMPARISON_NAME = "comparison.json"


@dataclass(frozen=True)
class DataConfig:
    source: str = "synthetic"
    train_seed: int = 7
    eval_seed: int = 19
    eval_days: int = 7
    price_csv: str | None = None
    renewable_csv: str | None = None
    background_csv: str | None = None
    timestamp_column: str = "timestamp"
    value_column: str = "value"

    def __post_init__(self):
        if self.source not in ("synthetic", "csv"):
            raise ConfigInvalid(f"data.source must be synthetic or csv, got {self.source!r}")
        if self.eval_days < 1:
            raise ConfigInvalid("data.eval_days must be >= 1")
        if self.source == "csv":
            for name in ("price_csv", "renewable_csv", "background_csv"):
                if getattr(self, name) is None:
                    raise ConfigInvalid(f"data.{name} is required for csv source")

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "train_seed": self.train_seed,
            "eval_seed": self.eval_seed,
            "eval_days": self.eval_days,
            "price_csv": self.price_csv,
            "renewable_csv": self.renewable_csv,
            "background_csv": self.background_csv,
            "timestamp_column": self.timestamp_column,
            "value_column": self.value_column,
        }


@dataclass(frozen=True)
class RunConfig:
    seed: int = 42
    out_dir: str = "artifacts"
    grid_step: float = 0.01
    data: DataConfig = field(default_factory=DataConfig)
    env: EnvConfig = field(default_factory=EnvConfig)
    agent: agent.AgentHyper = field(default_factory=agent.AgentHyper)
    dwpi: dwpi.DwpiHyper = field(default_factory=dwpi.DwpiHyper)

    def __post_init__(self):
        if not 0 < self.grid_step <= 1:
            raise ConfigInvalid(f"grid_step {self.grid_step} outside (0, 1]")

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "out_dir": self.out_dir,
            "grid_step": self.grid_step,
            "data": self.data.to_dict(),
            "env": self.env.to_dict(),
            "agent": self.agent.to_dict(),
            "dwpi": self.dwpi.to_dict(),
        }

    @staticmethod
    def from_dict(payload: dict) -> "RunConfig":
        try:
            return RunConfig(
                seed=int(payload["seed"]),
                out_dir=str(payload["out_dir"]),
                grid_step=float(payload["grid_step"]),
                data=DataConfig(**payload["data"]),
                env=EnvConfig.from_dict(payload["env"]),
                agent=agent.AgentHyper.from_dict(payload["agent"]),
                dwpi=dwpi.DwpiHyper.from_dict(payload["dwpi"]),
            )
        except ConfigInvalid:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigInvalid(str(exc)) from exc


def load_config(path: Path) -> RunConfig:
    if not path.exists():
        raise ArtifactMissing(f"config file {path} not found (run `config init`)")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"{path}: {exc}") from exc
    return RunConfig.from_dict(payload)


@dataclass
class Context:
    """Resolved invocation: config plus effective out dir and seed."""

    config: RunConfig
    out: Path
    seed: int
    force: bool


def _resolve(args: argparse.Namespace) -> Context:
    out_flag = getattr(args, "out", None)
    env_out = os.environ.get("PREFINFER_OUT")
    config_path = getattr(args, "config", None)
    if config_path is not None:
        config = load_config(Path(config_path))
    else:
        default_out = Path(out_flag or env_out or "artifacts")
        candidate = default_out / CONFIG_NAME
        config = load_config(candidate) if candidate.exists() else RunConfig()
    out = Path(out_flag or env_out or config.out_dir)
    seed = getattr(args, "seed", None)
    return Context(
        config=config,
        out=out,
        seed=config.seed if seed is None else int(seed),
        force=bool(getattr(args, "force", False)),
    )


def _check_outputs(ctx: Context, *names: str) -> list[Path]:
    ctx.out.mkdir(parents=True, exist_ok=True)
    paths = [ctx.out / name for name in names]
    if not ctx.force:
        existing = [str(p) for p in paths if p.exists()]
        if existing:
            raise IoFailure(
                f"refusing to overwrite {', '.join(existing)} (use --force)"
            )
    return paths


def _require(ctx: Context, name: str, producer: str) -> Path:
    path = ctx.out / name
    if not path.exists():
        raise ArtifactMissing(f"{path} not found; run `{producer}` first")
    return path


def _stage_seeds(master: int) -> dict[str, int]:
    agent_seed, dwpi_seed, compare_seed = np.random.SeedSequence(master).generate_state(3)
    return {
        "agent": int(agent_seed),
        "dwpi": int(dwpi_seed),
        "compare": int(compare_seed),
    }


# --- commands ---

def cmd_config_init(args: argparse.Namespace) -> int:
    out = Path(getattr(args, "out", None) or os.environ.get("PREFINFER_OUT") or "artifacts")
    out.mkdir(parents=True, exist_ok=True)
    path = Path(args.config) if args.config else out / CONFIG_NAME
    if path.exists() and not args.force:
        raise IoFailure(f"refusing to overwrite {path} (use --force)")
    config = RunConfig(out_dir=str(out))
    path.write_text(
        json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    print(f"wrote {path}")
    return EXIT_OK


def _prepare_windows(ctx: Context) -> tuple[datahub.DataWindow, datahub.DataWindow]:
    data = ctx.config.data
    if data.source == "synthetic":
        window_train = datahub.synthesize(data.train_seed, days=1)
        window_eval = datahub.synthesize(data.eval_seed, days=data.eval_days)
        return window_train, window_eval
    series = {}
    for key, path in (
        ("price", data.price_csv),
        ("renewable", data.renewable_csv),
        ("background", data.background_csv),
    ):
        points = datahub.parse_csv(path, data.timestamp_column, data.value_column)
        series[key] = datahub.hourly_average(points)
    full = datahub.align_series(series["price"], series["renewable"], series["background"])
    if full.days < data.eval_days:
        raise ConfigInvalid(
            f"ingested data covers {full.days} days, need {data.eval_days}"
        )
    window_train = datahub.slice_window(full, 0)
    window_eval = datahub.DataWindow(
        price=datahub.HourlySeries(full.price.start_hour,
                                   full.price.values[: data.eval_days * 24]),
        renewable=datahub.HourlySeries(full.renewable.start_hour,
                                       full.renewable.values[: data.eval_days * 24]),
        background=datahub.HourlySeries(full.background.start_hour,
                                        full.background.values[: data.eval_days * 24]),
        days=data.eval_days,
    )
    return window_train, window_eval


def cmd_data_prepare(args: argparse.Namespace) -> int:
    ctx = _resolve(args)
    overrides = {
        key: value
        for key, value in (
            ("timestamp_column", getattr(args, "timestamp_column", None)),
            ("value_column", getattr(args, "value_column", None)),
        )
        if value is not None
    }
    if overrides:
        ctx.config = dataclasses.replace(
            ctx.config, data=dataclasses.replace(ctx.config.data, **overrides)
        )
    train_path, eval_path = _check_outputs(ctx, TRAIN_WINDOW_NAME, EVAL_WINDOW_NAME)
    window_train, window_eval = _prepare_windows(ctx)
    datahub.save_window(window_train, train_path)
    datahub.save_window(window_eval, eval_path)
    print(f"wrote {train_path} (1 day) and {eval_path} ({window_eval.days} days)")
    return EXIT_OK


def cmd_train_agent(args: argparse.Namespace) -> int:
    ctx = _resolve(args)
    window_train = datahub.load_window(_require(ctx, TRAIN_WINDOW_NAME, "data prepare"))
    (path,) = _check_outputs(ctx, AGENT_NAME)
    seed = _stage_seeds(ctx.seed)["agent"]
    weights = _parse_weights(getattr(args, "weights", None))
    if weights is None:
        net = agent.train_dwmorl(window_train, ctx.config.env, ctx.config.agent, seed)
    else:
        net = agent.train_fixed(window_train, ctx.config.env, ctx.config.agent,
                                weights, seed)
    agent.save_policy(path, net, ctx.config.agent, seed)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_gen_demos(args: argparse.Namespace) -> int:
    ctx = _resolve(args)
    window_train = datahub.load_window(_require(ctx, TRAIN_WINDOW_NAME, "data prepare"))
    net, _, _ = agent.load_policy(_require(ctx, AGENT_NAME, "train-agent"))
    (path,) = _check_outputs(ctx, DEMOS_NAME)
    grid = dwpi.weight_grid(ctx.config.grid_step)
    records = dwpi.build_dataset(net, window_train, ctx.config.env, grid)
    dwpi.save_dataset(records, path)
    print(f"wrote {path} ({len(records)} records)")
    return EXIT_OK


def cmd_train_dwpi(args: argparse.Namespace) -> int:
    ctx = _resolve(args)
    records = dwpi.load_dataset(_require(ctx, DEMOS_NAME, "gen-demos"))
    (path,) = _check_outputs(ctx, DWPI_NAME)
    seed = _stage_seeds(ctx.seed)["dwpi"]
    model, scaler = dwpi.train_dwpi(records, ctx.config.dwpi, seed)
    dwpi.save_model(path, model, scaler, ctx.config.dwpi, seed)
    mse = dwpi.training_mse(model, scaler, records)
    print(f"wrote {path} (training MSE {mse:.5f})")
    return EXIT_OK


def cmd_infer(args: argparse.Namespace) -> int:
    ctx = _resolve(args)
    window_train = datahub.load_window(_require(ctx, TRAIN_WINDOW_NAME, "data prepare"))
    model, scaler, _, _ = dwpi.load_model(_require(ctx, DWPI_NAME, "train-dwpi"))
    hours = _parse_schedule(args.schedule)
    schedule = scenarios.custom_schedule(hours)
    features = scenarios.demo_features(schedule, window_train, ctx.config.env)
    weights = dwpi.infer(model, scaler, features)
    print(json.dumps({"w_cost": weights.w_cost, "w_comf": weights.w_comf}))
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    ctx = _resolve(args)
    window_train = datahub.load_window(_require(ctx, TRAIN_WINDOW_NAME, "data prepare"))
    model, scaler, _, _ = dwpi.load_model(_require(ctx, DWPI_NAME, "train-dwpi"))
    (path,) = _check_outputs(ctx, VALIDATION_NAME)
    report = experiments.run_validation(model, scaler, window_train, ctx.config.env)
    experiments.emit_report(report, "json", path)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    ctx = _resolve(args)
    window_train = datahub.load_window(_require(ctx, TRAIN_WINDOW_NAME, "data prepare"))
    window_eval = datahub.load_window(_require(ctx, EVAL_WINDOW_NAME, "data prepare"))
    model, scaler, _, _ = dwpi.load_model(_require(ctx, DWPI_NAME, "train-dwpi"))
    (path,) = _check_outputs(ctx, COMPARISON_NAME)
    validation = experiments.run_validation(model, scaler, window_train, ctx.config.env)
    inferred = {
        row.scenario: PreferenceWeights(row.w_cost, row.w_comf)
        for row in validation.rows
    }
    report = experiments.run_comparison(
        inferred, window_train, window_eval, ctx.config.env, ctx.config.agent,
        _stage_seeds(ctx.seed)["compare"],
    )
    experiments.emit_report(report, "json", path)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    ctx = _resolve(args)
    fmt = args.format
    suffix = {"json": "json", "markdown": "md"}.get(fmt)
    if suffix is None:
        raise ConfigInvalid(f"unknown format {fmt!r}")
    wrote = []
    for name, producer in ((VALIDATION_NAME, "validate"), (COMPARISON_NAME, "compare")):
        source = _require(ctx, name, producer)
        report = experiments.load_report(source)
        target = ctx.out / (Path(name).stem + "." + suffix)
        if target != source and target.exists() and not ctx.force:
            raise IoFailure(f"refusing to overwrite {target} (use --force)")
        experiments.emit_report(report, fmt, target)
        wrote.append(str(target))
    print("wrote " + ", ".join(wrote))
    return EXIT_OK


def cmd_run_all(args: argparse.Namespace) -> int:
    for fn in (cmd_data_prepare, cmd_train_agent, cmd_gen_demos,
               cmd_train_dwpi, cmd_validate, cmd_compare):
        code = fn(args)
        if code != EXIT_OK:
            return code
    for fmt in ("json", "markdown"):
        args.format = fmt
        code = cmd_report(args)
        if code != EXIT_OK:
            return code
    return EXIT_OK


def _parse_schedule(raw: str) -> frozenset[int]:
    try:
        hours = frozenset(int(h) for h in raw.split(","))
    except ValueError as exc:
        raise ConfigInvalid(f"bad schedule {raw!r}: {exc}") from exc
    if not hours:
        raise ConfigInvalid("schedule is empty")
    return hours


def _parse_weights(raw: str | None) -> PreferenceWeights | None:
    if raw is None:
        return None
    try:
        parts = [float(v) for v in raw.split(",")]
    except ValueError as exc:
        raise ConfigInvalid(f"bad weights {raw!r}: {exc}") from exc
    if len(parts) != 2 or abs(sum(parts) - 1.0) > 1e-9 or min(parts) < 0:
        raise ConfigInvalid(f"weights {raw!r} must be two non-negatives summing to 1")
    return PreferenceWeights(parts[0], parts[1])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prefinfer",
        description="Preference inference pipeline for the two-objective "
                    "home energy environment",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, force: bool = True):
        p.add_argument("--config", help="path to config.json")
        p.add_argument("--seed", type=int, help="override the configured master seed")
        p.add_argument("--out", help="artifact directory")
        if force:
            p.add_argument("--force", action="store_true",
                           help="overwrite existing artifacts")

    p = sub.add_parser("config", help="configuration management")
    config_sub = p.add_subparsers(dest="config_command", required=True)
    p_init = config_sub.add_parser("init", help="write a default config.json")
    common(p_init)
    p_init.set_defaults(func=cmd_config_init)

    p = sub.add_parser("data", help="data preparation")
    data_sub = p.add_subparsers(dest="data_command", required=True)
    p_prep = data_sub.add_parser("prepare", help="build train/eval windows")
    common(p_prep)
    p_prep.add_argument("--timestamp-column", help="CSV timestamp column name")
    p_prep.add_argument("--value-column", help="CSV value column name")
    p_prep.set_defaults(func=cmd_data_prepare)

    p = sub.add_parser("train-agent", help="train the dynamic-weight agent")
    common(p)
    p.add_argument("--weights", help="train with a fixed W_COST,W_COMF pair instead")
    p.set_defaults(func=cmd_train_agent)

    p = sub.add_parser("gen-demos", help="sweep the weight grid into a dataset")
    common(p)
    p.set_defaults(func=cmd_gen_demos)

    p = sub.add_parser("train-dwpi", help="train the inference model")
    common(p)
    p.set_defaults(func=cmd_train_dwpi)

    p = sub.add_parser("infer", help="infer weights for a schedule")
    common(p, force=False)
    p.add_argument("--schedule", required=True,
                   help="comma-separated run hours, e.g. 2,3")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("validate", help="run the inference validation experiment")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("compare", help="run the simulated comparison experiment")
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("report", help="re-emit reports in a chosen format")
    common(p)
    p.add_argument("--format", default="json", choices=["json", "markdown"])
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("run-all", help="full pipeline: data through reports")
    common(p)
    p.set_defaults(func=cmd_run_all)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ArtifactMissing as exc:
        print(f"missing artifact: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except PrefinferError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # damaged artifacts, filesystem surprises
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
