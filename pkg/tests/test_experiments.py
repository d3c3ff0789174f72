import json

import pytest

from prefinfer import datahub, dwpi, experiments, scenarios
from prefinfer.agent import AgentHyper
from prefinfer.dwpi import DemoRecord, DwpiHyper
from prefinfer.env import EnvConfig, PreferenceWeights, RewardVector
from prefinfer.errors import IoFailure, ModelMissing, WindowMismatch
from prefinfer.experiments import (
    ComparisonReport,
    ComparisonRow,
    ValidationReport,
    ValidationRow,
)


def stub_validation(w_max=(0.25, 0.75), w_save=(0.85, 0.15), w_mix=(0.55, 0.45)):
    return ValidationReport(rows=(
        ValidationRow("always_max_comfort", -7.2, 3.0, *w_max),
        ValidationRow("always_save_cost", -5.6, 0.0, *w_save),
        ValidationRow("mixture", -6.3, 2.0, *w_mix),
    ))


def stub_comparison():
    return ComparisonReport(
        rows=(
            ComparisonRow("always_max_comfort", 0.25, 0.75, -50.0, 21.0, -49.0, 21.0),
            ComparisonRow("always_save_cost", 0.85, 0.15, -39.0, 0.0, -39.0, 0.0),
            ComparisonRow("mixture", 0.55, 0.45, -44.0, 14.0, -44.5, 14.0),
        ),
        eval_days=7,
    )


class TestValidationReportChecks:
    def test_margins(self):
        report = stub_validation()
        assert report.comfort_margin() == pytest.approx(0.5)
        assert report.cost_margin() == pytest.approx(0.7)
        assert report.mixture_gap() == pytest.approx(0.1)

    def test_ordering_holds(self):
        assert stub_validation().ordering_ok()

    def test_ordering_detects_violation(self):
        report = stub_validation(w_mix=(0.2, 0.8))  # mixture above max_comfort
        assert not report.ordering_ok()

    def test_dict_round_trip(self):
        report = stub_validation()
        assert ValidationReport.from_dict(report.to_dict()) == report


class TestComparisonReportChecks:
    def test_orderings_hold(self):
        report = stub_comparison()
        assert report.comfort_ordering_ok()
        assert report.cost_ordering_ok()

    def test_comfort_ordering_violation(self):
        report = ComparisonReport(
            rows=(
                ComparisonRow("always_max_comfort", 0.25, 0.75, -50.0, 21.0, -49.0, 10.0),
                ComparisonRow("always_save_cost", 0.85, 0.15, -39.0, 0.0, -39.0, 0.0),
                ComparisonRow("mixture", 0.55, 0.45, -44.0, 14.0, -44.5, 14.0),
            ),
            eval_days=7,
        )
        assert not report.comfort_ordering_ok()

    def test_deviations_are_absolute(self):
        row = stub_comparison().row("mixture")
        assert row.cost_deviation == pytest.approx(0.5)
        assert row.comfort_deviation == 0.0

    def test_dict_round_trip(self):
        report = stub_comparison()
        assert ComparisonReport.from_dict(report.to_dict()) == report


class TestRunValidation:
    def test_three_rows_on_simplex(self):
        window = datahub.synthesize(7, 1)
        config = EnvConfig()
        records = []
        for k in range(101):
            w = k / 100
            records.append(DemoRecord(
                RewardVector(-8.0 + 3.0 * w, 3.0 * (1.0 - w)),
                PreferenceWeights(w, 1.0 - w),
            ))
        model, scaler = dwpi.train_dwpi(records, DwpiHyper(epochs=50), seed=0)
        report = experiments.run_validation(model, scaler, window, config)
        assert len(report.rows) == 3
        assert [r.scenario for r in report.rows] == list(scenarios.SCENARIO_ORDER)
        for row in report.rows:
            assert row.w_cost + row.w_comf == pytest.approx(1.0, abs=1e-9)

    def test_missing_model(self):
        window = datahub.synthesize(7, 1)
        with pytest.raises(ModelMissing):
            experiments.run_validation(None, None, window, EnvConfig())

    def test_needs_single_day_window(self):
        window = datahub.synthesize(7, 2)
        records = [
            DemoRecord(RewardVector(-8.0, 3.0), PreferenceWeights(0.0, 1.0)),
            DemoRecord(RewardVector(-5.0, 0.0), PreferenceWeights(1.0, 0.0)),
        ] * 16
        model, scaler = dwpi.train_dwpi(records, DwpiHyper(epochs=1), seed=0)
        with pytest.raises(WindowMismatch):
            experiments.run_validation(model, scaler, window, EnvConfig())


TINY_HYPER = AgentHyper(episodes=25, start_training_after=2, target_copy_period=5)


def tiny_inferred():
    return {
        "always_max_comfort": PreferenceWeights(0.25, 0.75),
        "always_save_cost": PreferenceWeights(0.85, 0.15),
        "mixture": PreferenceWeights(0.55, 0.45),
    }


class TestRunComparison:
    def test_report_structure(self):
        window_train = datahub.synthesize(7, 1)
        window_eval = datahub.synthesize(19, 7)
        report = experiments.run_comparison(
            tiny_inferred(), window_train, window_eval, EnvConfig(), TINY_HYPER, seed=0
        )
        assert len(report.rows) == 3
        assert report.eval_days == 7
        for row in report.rows:
            assert row.user_cost <= 0.0
            assert row.agent_cost <= 0.0
            assert row.user_comfort >= 0.0

    def test_user_results_match_schedules(self):
        window_train = datahub.synthesize(7, 1)
        window_eval = datahub.synthesize(19, 7)
        config = EnvConfig()
        report = experiments.run_comparison(
            tiny_inferred(), window_train, window_eval, config, TINY_HYPER, seed=0
        )
        for name in scenarios.SCENARIO_ORDER:
            expected = scenarios.run_schedule(
                scenarios.builtin_schedule(name), window_eval, config
            )
            row = report.row(name)
            assert row.user_cost == pytest.approx(expected.cost)
            assert row.user_comfort == expected.comfort

    def test_eval_window_must_be_seven_days(self):
        window_train = datahub.synthesize(7, 1)
        window_eval = datahub.synthesize(19, 6)
        with pytest.raises(WindowMismatch):
            experiments.run_comparison(
                tiny_inferred(), window_train, window_eval, EnvConfig(), TINY_HYPER, 0
            )

    def test_all_scenarios_required(self):
        window_train = datahub.synthesize(7, 1)
        window_eval = datahub.synthesize(19, 7)
        inferred = tiny_inferred()
        del inferred["mixture"]
        with pytest.raises(ModelMissing):
            experiments.run_comparison(
                inferred, window_train, window_eval, EnvConfig(), TINY_HYPER, 0
            )

    def test_deterministic(self):
        window_train = datahub.synthesize(7, 1)
        window_eval = datahub.synthesize(19, 7)
        args = (tiny_inferred(), window_train, window_eval, EnvConfig(), TINY_HYPER, 3)
        assert experiments.run_comparison(*args) == experiments.run_comparison(*args)


class TestEmitReport:
    def test_json_round_trip(self, tmp_path):
        report = stub_validation()
        path = experiments.emit_report(report, "json", tmp_path / "validation.json")
        assert experiments.load_report(path) == report

    def test_comparison_json_round_trip(self, tmp_path):
        report = stub_comparison()
        path = experiments.emit_report(report, "json", tmp_path / "comparison.json")
        assert experiments.load_report(path) == report

    def test_markdown_has_one_row_per_scenario(self, tmp_path):
        path = experiments.emit_report(stub_comparison(), "markdown", tmp_path / "c.md")
        body = path.read_text()
        for name in scenarios.SCENARIO_ORDER:
            assert body.count(f"| {name} |") == 1

    def test_unknown_format_fails_before_write(self, tmp_path):
        target = tmp_path / "report.out"
        with pytest.raises(ValueError):
            experiments.emit_report(stub_validation(), "yaml", target)
        assert not target.exists()

    def test_emit_is_byte_stable(self, tmp_path):
        report = stub_comparison()
        a = experiments.emit_report(report, "json", tmp_path / "a.json")
        b = experiments.emit_report(report, "json", tmp_path / "b.json")
        assert a.read_bytes() == b.read_bytes()

    def test_load_rejects_unknown_payload(self, tmp_path):
        path = tmp_path / "weird.json"
        path.write_text(json.dumps({"experiment": "other"}))
        with pytest.raises(IoFailure):
            experiments.load_report(path)
