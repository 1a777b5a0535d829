"""
Campaign reports: coverage rows, exception rows and the Max / Mean / SD
summary table.

CSV files use two decimals and a fixed row order and carry no timing
fields, so identical campaigns give identical bytes.
"""
from __future__ import annotations

import csv
from enum import Enum
from typing import Iterable, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from evolution_engine import CampaignReport


class ReportError(ValueError):
    """Rows cannot be summarized (none given, or unreadable)."""


class Metric(str, Enum):
    BRANCH   = "branch"
    LINE     = "line"
    FUNCTION = "function"


class Scope(str, Enum):
    PER_INPUT_MEAN = "per_input_mean"
    PER_INPUT_MAX  = "per_input_max"
    PER_INPUT_SD   = "per_input_sd"
    CUMULATIVE     = "cumulative"


class ReportRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    run_id: int
    target: str
    metric: Metric
    scope:  Scope
    value:  float = Field(ge=0.0, le=100.0)


COVERAGE_COLUMNS   = ["run_id", "target", "metric", "scope", "value"]
EXCEPTION_COLUMNS  = ["run_id", "target", "exception_type", "location", "triggered",
                      "first_trigger_generation"]


# ── Rows ──────────────────────────────────────────────────────────────────────

def report_rows(report: CampaignReport) -> list[ReportRow]:
    rows: list[ReportRow] = []
    for record in report.runs:
        for metric in Metric:
            m = record.metrics[metric.value]
            for scope, value in (
                (Scope.PER_INPUT_MEAN, m.mean),
                (Scope.PER_INPUT_MAX,  m.max),
                (Scope.PER_INPUT_SD,   m.sd),
                (Scope.CUMULATIVE,     m.cumulative),
            ):
                rows.append(ReportRow(run_id=record.run_id, target=record.target,
                                      metric=metric, scope=scope, value=value))
    return rows


class ExceptionRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    run_id:                   int
    target:                   str
    exception_type:           str
    location:                 str
    triggered:                bool
    first_trigger_generation: int | None = None

    @model_validator(mode="after")
    def _generation_iff_triggered(self) -> "ExceptionRow":
        if self.triggered != (self.first_trigger_generation is not None):
            raise ValueError("first_trigger_generation is set exactly when triggered")
        return self


def exception_rows(report: CampaignReport) -> list[ExceptionRow]:
    """One row per run for every exception any run found on that target."""
    seen: dict[str, set[tuple[str, str]]] = {}
    for record in report.runs:
        seen.setdefault(record.target, set()).update((h.type, h.location) for h in record.exceptions)

    rows: list[ExceptionRow] = []
    for record in report.runs:
        first = {(h.type, h.location): h.first_generation for h in record.exceptions}
        for exc_type, location in sorted(seen[record.target]):
            generation = first.get((exc_type, location))
            rows.append(ExceptionRow(
                run_id=record.run_id,
                target=record.target,
                exception_type=exc_type,
                location=location,
                triggered=generation is not None,
                first_trigger_generation=generation,
            ))
    return rows


def write_coverage_csv(rows: Iterable[ReportRow], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(COVERAGE_COLUMNS)
        for r in rows:
            writer.writerow([r.run_id, r.target, r.metric.value, r.scope.value, f"{r.value:.2f}"])


def write_exceptions_csv(rows: Iterable[ExceptionRow], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(EXCEPTION_COLUMNS)
        for r in rows:
            writer.writerow([
                r.run_id, r.target, r.exception_type, r.location,
                "true" if r.triggered else "false",
                "" if r.first_trigger_generation is None else r.first_trigger_generation,
            ])


def read_coverage_csv(path: str) -> list[ReportRow]:
    try:
        with open(path, encoding="utf-8", newline="") as f:
            reader = csv.DictReader(f)
            if reader.fieldnames != COVERAGE_COLUMNS:
                raise ReportError(f"{path}: expected columns {','.join(COVERAGE_COLUMNS)}")
            return [ReportRow(**row) for row in reader]
    except OSError as e:
        raise ReportError(f"cannot read {path}: {e}") from e


# ── Summary ───────────────────────────────────────────────────────────────────

class SummaryEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    target:          str
    metric:          Metric
    max:             float
    mean:            float
    sd:              float
    cumulative_mean: float
    runs:            int


class SummaryTable(BaseModel):
    model_config = ConfigDict(frozen=True)

    entries: list[SummaryEntry]

    def entry(self, target: str, metric: Metric | str) -> SummaryEntry:
        metric = Metric(metric)
        for e in self.entries:
            if e.target == target and e.metric is metric:
                return e
        raise KeyError(f"no summary for {target}/{metric.value}")

    def render_text(self) -> str:
        width = max([len("target")] + [len(e.target) for e in self.entries])
        header = f"{'target':<{width}}  {'metric':<8}  {'Max':>7}  {'Mean':>7}  {'SD':>7}  {'Cumul.':>7}"
        lines = [header, "-" * len(header)]
        for e in self.entries:
            lines.append(
                f"{e.target:<{width}}  {e.metric.value:<8}  {e.max:>7.2f}  {e.mean:>7.2f}  "
                f"{e.sd:>7.2f}  {e.cumulative_mean:>7.2f}"
            )
        return "\n".join(lines)

    def render_csv(self) -> str:
        lines = ["target,metric,max,mean,sd,cumulative_mean,runs"]
        for e in self.entries:
            lines.append(
                f"{e.target},{e.metric.value},{e.max:.2f},{e.mean:.2f},{e.sd:.2f},"
                f"{e.cumulative_mean:.2f},{e.runs}"
            )
        return "\n".join(lines) + "\n"


def summarize(rows: Sequence[ReportRow]) -> SummaryTable:
    """Across runs, per (target, metric): Max of per-input maxima, Mean and
    population SD of per-input means, and the mean cumulative coverage."""
    if not rows:
        raise ReportError("nothing to summarize: no report rows")
    groups: dict[tuple[str, Metric], dict[Scope, dict[int, float]]] = {}
    for r in rows:
        groups.setdefault((r.target, r.metric), {}).setdefault(r.scope, {})[r.run_id] = r.value

    entries = []
    for (target, metric), by_scope in groups.items():
        means  = np.asarray(list(by_scope.get(Scope.PER_INPUT_MEAN, {}).values()), dtype=float)
        maxima = list(by_scope.get(Scope.PER_INPUT_MAX, {}).values())
        cumul  = list(by_scope.get(Scope.CUMULATIVE, {}).values())
        if means.size == 0:
            raise ReportError(f"{target}/{metric.value}: no per_input_mean rows")
        entries.append(SummaryEntry(
            target=target,
            metric=metric,
            max=max(maxima) if maxima else float(means.max()),
            mean=float(means.mean()),
            sd=float(means.std()),
            cumulative_mean=float(np.mean(cumul)) if cumul else 0.0,
            runs=int(means.size),
        ))
    return SummaryTable(entries=entries)


def improvement(base_mean: float, new_mean: float) -> float | None:
    """Relative change in percent; None when the baseline is zero."""
    if base_mean == 0:
        return None
    return (new_mean - base_mean) / base_mean * 100


def compare(base: SummaryTable, new: SummaryTable) -> str:
    """Per (target, metric) improvement of `new` over `base` as aligned text."""
    lines = ["target            metric    base mean  new mean  improvement"]
    for e in new.entries:
        try:
            b = base.entry(e.target, e.metric)
        except KeyError:
            continue
        delta = improvement(b.mean, e.mean)
        shown = "n/a" if delta is None else f"{delta:+.1f}%"
        lines.append(f"{e.target:<16}  {e.metric.value:<8}  {b.mean:>9.2f}  {e.mean:>8.2f}  {shown:>11}")
    return "\n".join(lines)


def exception_table(report: CampaignReport) -> str:
    """Runs-triggered counts per (target, type, location)."""
    total = report.config.runs
    freq  = report.exception_frequencies()
    if not freq:
        return "no exceptions triggered"
    lines = [f"target            exception              location  runs (of {total})"]
    for (target, exc_type, location), count in freq.items():
        lines.append(f"{target:<16}  {exc_type:<21}  {location:<8}  {count}")
    return "\n".join(lines)


def render_summary(report: CampaignReport, table: SummaryTable, comparison: str | None = None) -> str:
    cfg = report.config
    header = [
        f"{cfg.label}: initial={cfg.initial_input.value} fitness={cfg.fitness.mode.value}"
        + (f" ({cfg.fitness.w_feedback}, {cfg.fitness.w_structure})" if cfg.fitness.mode.value == "Weighted" else "")
        + f" crossover={'on' if cfg.crossover_enabled else 'off'} mutation={cfg.mutation_mode.value}",
        f"runs={cfg.runs} population={cfg.population_size} budget={cfg.time_budget:g}s "
        f"seed={cfg.master_seed} clock={cfg.budget_clock}",
        f"targets: {', '.join(report.targets)}",
        *(f"note: {n}" for n in cfg.notes),
        "",
        table.render_text(),
        "",
        exception_table(report),
    ]
    if comparison:
        header += ["", comparison]
    header += ["", f"wall time {report.wall_time:.1f}s"]
    return "\n".join(header) + "\n"
