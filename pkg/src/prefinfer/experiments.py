"""End-to-end experiment drivers and their reports.

Two experiments: inference validation (infer weights for the three built-in
user scenarios and check the qualitative margins/ordering) and the simulated
comparison (retrain a fixed-preference agent per inferred weight pair, deploy
it over a 7-day window, and tabulate agent vs user cumulative rewards).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import dwpi, scenarios
from .agent import AgentHyper, rollout, train_fixed
from .datahub import DataWindow
from .env import EnvConfig, PreferenceWeights, WindowStats
from .errors import IoFailure, ModelMissing, WindowMismatch

# qualitative trend order: most comfort-seeking first
TREND_ORDER = (
    scenarios.ALWAYS_MAX_COMFORT,
    scenarios.MIXTURE,
    scenarios.ALWAYS_SAVE_COST,
)


@dataclass(frozen=True)
class ValidationRow:
    scenario: str
    demo_cost: float
    demo_comfort: float
    w_cost: float
    w_comf: float

    @property
    def margin(self) -> float:
        return self.w_comf - self.w_cost


@dataclass(frozen=True)
class ValidationReport:
    rows: tuple[ValidationRow, ...]

    def row(self, scenario: str) -> ValidationRow:
        for row in self.rows:
            if row.scenario == scenario:
                return row
        raise KeyError(scenario)

    def comfort_margin(self) -> float:
        return self.row(scenarios.ALWAYS_MAX_COMFORT).margin

    def cost_margin(self) -> float:
        return -self.row(scenarios.ALWAYS_SAVE_COST).margin

    def mixture_gap(self) -> float:
        return abs(self.row(scenarios.MIXTURE).margin)

    def ordering_ok(self) -> bool:
        """Inferred comfort weight strictly decreasing along the trend order."""
        w = [self.row(s).w_comf for s in TREND_ORDER]
        return w[0] > w[1] > w[2]

    def to_dict(self) -> dict:
        return {
            "experiment": "inference_validation",
            "rows": [
                {
                    "scenario": r.scenario,
                    "demo_cost": r.demo_cost,
                    "demo_comfort": r.demo_comfort,
                    "w_cost": r.w_cost,
                    "w_comf": r.w_comf,
                }
                for r in self.rows
            ],
            "checks": {
                "comfort_margin": self.comfort_margin(),
                "cost_margin": self.cost_margin(),
                "mixture_gap": self.mixture_gap(),
                "ordering_ok": self.ordering_ok(),
            },
        }

    @staticmethod
    def from_dict(payload: dict) -> "ValidationReport":
        return ValidationReport(
            rows=tuple(
                ValidationRow(
                    scenario=r["scenario"],
                    demo_cost=float(r["demo_cost"]),
                    demo_comfort=float(r["demo_comfort"]),
                    w_cost=float(r["w_cost"]),
                    w_comf=float(r["w_comf"]),
                )
                for r in payload["rows"]
            )
        )

    def to_markdown(self) -> str:
        lines = [
            "# Inference validation",
            "",
            "| Scenario | Demonstration [cost, comfort] | w_cost | w_comf |",
            "|---|---|---|---|",
        ]
        for r in self.rows:
            lines.append(
                f"| {r.scenario} | [{r.demo_cost:.4f}, {r.demo_comfort:.4f}] "
                f"| {r.w_cost:.4f} | {r.w_comf:.4f} |"
            )
        lines += [
            "",
            f"- comfort margin (always_max_comfort): {self.comfort_margin():.4f}",
            f"- cost margin (always_save_cost): {self.cost_margin():.4f}",
            f"- mixture gap: {self.mixture_gap():.4f}",
            f"- comfort-weight ordering holds: {self.ordering_ok()}",
        ]
        return "\n".join(lines) + "\n"


def run_validation(model, scaler, window_train: DataWindow,
                   config: EnvConfig) -> ValidationReport:
    """Infer weights for each built-in scenario's single-day demonstration."""
    if model is None or scaler is None:
        raise ModelMissing("inference model and scaler are required")
    if window_train.days != 1:
        raise WindowMismatch("validation demonstrations need a 1-day window")
    rows = []
    for name in scenarios.SCENARIO_ORDER:
        schedule = scenarios.builtin_schedule(name)
        features = scenarios.demo_features(schedule, window_train, config)
        weights = dwpi.infer(model, scaler, features)
        rows.append(
            ValidationRow(
                scenario=name,
                demo_cost=features.cost,
                demo_comfort=features.comfort,
                w_cost=weights.w_cost,
                w_comf=weights.w_comf,
            )
        )
    return ValidationReport(rows=tuple(rows))


@dataclass(frozen=True)
class ComparisonRow:
    scenario: str
    w_cost: float
    w_comf: float
    user_cost: float
    user_comfort: float
    agent_cost: float
    agent_comfort: float

    @property
    def cost_deviation(self) -> float:
        return abs(self.agent_cost - self.user_cost)

    @property
    def comfort_deviation(self) -> float:
        return abs(self.agent_comfort - self.user_comfort)


@dataclass(frozen=True)
class ComparisonReport:
    rows: tuple[ComparisonRow, ...]
    eval_days: int

    def row(self, scenario: str) -> ComparisonRow:
        for row in self.rows:
            if row.scenario == scenario:
                return row
        raise KeyError(scenario)

    def comfort_ordering_ok(self) -> bool:
        c = [self.row(s).agent_comfort for s in TREND_ORDER]
        return c[0] >= c[1] >= c[2]

    def cost_ordering_ok(self) -> bool:
        c = [self.row(s).agent_cost for s in TREND_ORDER]
        return c[0] <= c[1] <= c[2]

    def to_dict(self) -> dict:
        return {
            "experiment": "simulated_comparison",
            "eval_days": self.eval_days,
            "rows": [
                {
                    "scenario": r.scenario,
                    "weights": {"w_cost": r.w_cost, "w_comf": r.w_comf},
                    "user": {"cost": r.user_cost, "comfort": r.user_comfort},
                    "agent": {"cost": r.agent_cost, "comfort": r.agent_comfort},
                    "deviation_l1": {
                        "cost": r.cost_deviation,
                        "comfort": r.comfort_deviation,
                    },
                }
                for r in self.rows
            ],
            "checks": {
                "comfort_ordering_ok": self.comfort_ordering_ok(),
                "cost_ordering_ok": self.cost_ordering_ok(),
            },
        }

    @staticmethod
    def from_dict(payload: dict) -> "ComparisonReport":
        return ComparisonReport(
            rows=tuple(
                ComparisonRow(
                    scenario=r["scenario"],
                    w_cost=float(r["weights"]["w_cost"]),
                    w_comf=float(r["weights"]["w_comf"]),
                    user_cost=float(r["user"]["cost"]),
                    user_comfort=float(r["user"]["comfort"]),
                    agent_cost=float(r["agent"]["cost"]),
                    agent_comfort=float(r["agent"]["comfort"]),
                )
                for r in payload["rows"]
            ),
            eval_days=int(payload["eval_days"]),
        )

    def to_markdown(self) -> str:
        lines = [
            f"# Simulated comparison ({self.eval_days}-day deployment)",
            "",
            "| Scenario | Weights [cost, comfort] | User [cost, comfort] "
            "| Agent [cost, comfort] | L1 deviation [cost, comfort] |",
            "|---|---|---|---|---|",
        ]
        for r in self.rows:
            lines.append(
                f"| {r.scenario} | [{r.w_cost:.4f}, {r.w_comf:.4f}] "
                f"| [{r.user_cost:.4f}, {r.user_comfort:.4f}] "
                f"| [{r.agent_cost:.4f}, {r.agent_comfort:.4f}] "
                f"| [{r.cost_deviation:.4f}, {r.comfort_deviation:.4f}] |"
            )
        lines += [
            "",
            f"- agent comfort ordering holds: {self.comfort_ordering_ok()}",
            f"- agent cost ordering holds: {self.cost_ordering_ok()}",
        ]
        return "\n".join(lines) + "\n"


def run_comparison(inferred: dict[str, PreferenceWeights],
                   window_train: DataWindow, window_eval: DataWindow,
                   config: EnvConfig, hyper: AgentHyper,
                   seed: int) -> ComparisonReport:
    """Per scenario: retrain with the inferred weights fixed, deploy greedily
    over the evaluation window, and compare against the rule-based user on
    the same window."""
    if window_eval.days != 7:
        raise WindowMismatch(f"evaluation window has {window_eval.days} days, expected 7")
    if window_train.days != 1:
        raise WindowMismatch("fixed-weight retraining needs a 1-day window")
    missing = [s for s in scenarios.SCENARIO_ORDER if s not in inferred]
    if missing:
        raise ModelMissing(f"no inferred weights for: {', '.join(missing)}")

    stats = WindowStats.from_window(window_train)
    scenario_seeds = np.random.SeedSequence(seed).generate_state(
        len(scenarios.SCENARIO_ORDER)
    )
    rows = []
    for name, agent_seed in zip(scenarios.SCENARIO_ORDER, scenario_seeds):
        weights = inferred[name]
        net = train_fixed(window_train, config, hyper, weights, int(agent_seed))
        _, agent_total = rollout(net, weights, window_eval, config, stats, greedy=True)
        user_total = scenarios.run_schedule(
            scenarios.builtin_schedule(name), window_eval, config
        )
        rows.append(
            ComparisonRow(
                scenario=name,
                w_cost=weights.w_cost,
                w_comf=weights.w_comf,
                user_cost=user_total.cost,
                user_comfort=user_total.comfort,
                agent_cost=agent_total.cost,
                agent_comfort=agent_total.comfort,
            )
        )
    return ComparisonReport(rows=tuple(rows), eval_days=window_eval.days)


def emit_report(report, fmt: str, path: str | Path) -> Path:
    """Write a report as stable JSON or a markdown table; the format is
    validated before anything touches the filesystem."""
    if fmt == "json":
        text = json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    elif fmt == "markdown":
        text = report.to_markdown()
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    path = Path(path)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    return path


def load_report(path: str | Path):
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("experiment") == "inference_validation":
        return ValidationReport.from_dict(payload)
    if payload.get("experiment") == "simulated_comparison":
        return ComparisonReport.from_dict(payload)
    raise IoFailure(f"{path}: unrecognized report payload")
