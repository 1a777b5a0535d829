import math

import pytest
from pydantic import ValidationError

from evolution_engine import CampaignReport, ExceptionHit, MetricSummary, RunRecord
from experiments import build_experiment
from reporting import (
    Metric,
    ReportError,
    ReportRow,
    Scope,
    compare,
    exception_rows,
    improvement,
    read_coverage_csv,
    render_summary,
    report_rows,
    summarize,
    write_coverage_csv,
    write_exceptions_csv,
)


def _record(run_id, mean, exceptions=()):
    m = MetricSummary(max=mean + 5, mean=mean, sd=1.0, cumulative=mean + 10)
    return RunRecord(
        run_id=run_id,
        target="strict_parser",
        seed=run_id,
        generations=4,
        executions=40,
        metrics={"branch": m, "line": m, "function": m},
        exceptions=[ExceptionHit(type=t, location=loc, first_generation=g) for t, loc, g in exceptions],
        stop_reason="work",
        wall_time=1.0,
    )


@pytest.fixture
def report():
    cfg = build_experiment(5, {"runs": 3})
    return CampaignReport(
        config=cfg,
        targets=["strict_parser"],
        runs=[
            _record(1, 10.0, [("UnexpectedEnd", "B4", 0)]),
            _record(2, 20.0, [("UnexpectedEnd", "B4", 2), ("LeadingZero", "B76", 3)]),
            _record(3, 30.0),
        ],
        wall_time=3.0,
    )


def test_summary_across_runs(report):
    table = summarize(report_rows(report))
    e = table.entry("strict_parser", "branch")
    assert e.runs == 3
    assert e.mean == pytest.approx(20.0)
    assert e.sd == pytest.approx(math.sqrt(200 / 3))
    assert e.max == pytest.approx(35.0)
    assert e.cumulative_mean == pytest.approx(30.0)


def test_single_run_has_zero_sd():
    rows = [
        ReportRow(run_id=1, target="t", metric=Metric.BRANCH, scope=Scope.PER_INPUT_MEAN, value=42.0),
        ReportRow(run_id=1, target="t", metric=Metric.BRANCH, scope=Scope.PER_INPUT_MAX, value=50.0),
    ]
    e = summarize(rows).entry("t", Metric.BRANCH)
    assert e.sd == 0.0
    assert e.mean == 42.0


def test_summary_needs_rows():
    with pytest.raises(ReportError):
        summarize([])


def test_row_values_are_percentages():
    with pytest.raises(ValidationError):
        ReportRow(run_id=1, target="t", metric="branch", scope="cumulative", value=100.5)


def test_improvement():
    assert improvement(1.0, 2.66) == pytest.approx(166.0)
    assert improvement(20.0, 10.0) == pytest.approx(-50.0)
    assert improvement(0.0, 5.0) is None


def test_compare_lists_shared_entries(report):
    base = summarize(report_rows(report))
    text = compare(base, base)
    assert "+0.0%" in text
    assert text.count("strict_parser") == 3


def test_exception_rows(report):
    rows = exception_rows(report)
    assert len(rows) == 6
    by_run = {(r.run_id, r.exception_type): r for r in rows}
    assert by_run[(1, "LeadingZero")].triggered is False
    assert by_run[(1, "LeadingZero")].first_trigger_generation is None
    assert by_run[(2, "UnexpectedEnd")].first_trigger_generation == 2
    assert sum(r.triggered for r in rows) == 3
    assert report.exception_frequencies() == {
        ("strict_parser", "LeadingZero", "B76"): 1,
        ("strict_parser", "UnexpectedEnd", "B4"): 2,
    }


def test_csv_files_are_stable(report, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_coverage_csv(report_rows(report), str(a))
    write_coverage_csv(report_rows(report), str(b))
    assert a.read_bytes() == b.read_bytes()

    lines = a.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "run_id,target,metric,scope,value"
    assert lines[1] == "1,strict_parser,branch,per_input_mean,10.00"
    assert len(lines) == 1 + 3 * 3 * 4

    rows = read_coverage_csv(str(a))
    assert summarize(rows) == summarize(report_rows(report))


def test_exceptions_csv(report, tmp_path):
    path = tmp_path / "exceptions.csv"
    write_exceptions_csv(exception_rows(report), str(path))
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "run_id,target,exception_type,location,triggered,first_trigger_generation"
    assert "1,strict_parser,LeadingZero,B76,false," in lines
    assert "2,strict_parser,LeadingZero,B76,true,3" in lines


def test_read_rejects_foreign_csv(tmp_path):
    path = tmp_path / "other.csv"
    path.write_text("a,b\n1,2\n", encoding="utf-8")
    with pytest.raises(ReportError):
        read_coverage_csv(str(path))
    with pytest.raises(ReportError):
        read_coverage_csv(str(tmp_path / "missing.csv"))


def test_render_summary(report):
    table = summarize(report_rows(report))
    text = render_summary(report, table)
    assert text.startswith("experiment 5: initial=ProbabilisticFromSamples fitness=BranchCoverage")
    assert "runs (of 3)" in text
    assert "LeadingZero" in text
    assert "wall time" in text.splitlines()[-1]
