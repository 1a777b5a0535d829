"""
Command-line entry point.

    python app.py --experiment 7 --grammar grammars/json.g --targets all \
                  --seconds 60 --runs 2 --seed 42 --out results/

Exit codes: 0 success, 1 unexpected failure (see last_error.log),
2 usage or configuration error, 3 grammar or sample error, 4 target error.
"""
from __future__ import annotations

import argparse
import logging
import os
import shlex
import sys
import traceback
from datetime import datetime

from pydantic import ValidationError

from evolution_engine import SamplesRequiredError, run_campaign
from experiments import InitialInput, build_experiment, load_overrides
from fuzz_config import FUZZ_DEFAULTS
from grammar_core import GrammarError, load_grammar
from harness import (
    ExternalCommandError,
    MalformedCoverageError,
    UnknownTargetError,
    get_target,
    register_builtin_targets,
    register_external,
    registered_targets,
)
from input_parser import InputParseError
from probabilistic_grammar import learn_probabilities
from reporting import (
    ReportError,
    compare,
    exception_rows,
    read_coverage_csv,
    render_summary,
    report_rows,
    summarize,
    write_coverage_csv,
    write_exceptions_csv,
)

log = logging.getLogger(__name__)

ERROR_LOG = "last_error.log"

EXIT_OK      = 0
EXIT_FAILURE = 1
EXIT_USAGE   = 2
EXIT_GRAMMAR = 3
EXIT_TARGET  = 4

# CLI flag -> ExperimentConfig field
_FLAG_FIELDS = {
    "seconds":  "time_budget",
    "runs":     "runs",
    "pop_size": "population_size",
    "seed":     "master_seed",
}


class UsageError(Exception):
    """Bad flag combination or configuration file."""


def _log_error(context: str, exc: BaseException) -> None:
    """Write the last error with timestamp to last_error.log (no input data)."""
    with open(ERROR_LOG, "w", encoding="utf-8") as f:
        f.write(f"[{datetime.now().isoformat(timespec='seconds')}] {context}\n\n")
        traceback.print_exception(type(exc), exc, exc.__traceback__, file=f)


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="gafuzz",
        description="Grammar-guided genetic-algorithm fuzzer for JSON consumers.",
    )
    p.add_argument("--experiment", default="7", choices=[*map(str, range(1, 8)), "custom"],
                   help="preset configuration (default 7)")
    p.add_argument("--grammar", required=True, help="grammar file (name ::= alt | alt ;)")
    p.add_argument("--samples", help="directory of sample inputs for the probabilistic modes")
    p.add_argument("--targets", default="all", help="'all' or comma-separated target names")
    p.add_argument("--seconds", type=float, help="time budget per run, shared by the targets")
    p.add_argument("--runs", type=int, help="independent runs")
    p.add_argument("--pop-size", type=int, help="population size")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--out", default=FUZZ_DEFAULTS["out_dir"], help="report directory")
    p.add_argument("--config", help="key=value file overriding preset fields")
    p.add_argument("--external-cmd", nargs="+", metavar="ARG",
                   help="register an external target run as this command")
    p.add_argument("--external-branches", type=int,
                   help="branch total of the external target")
    p.add_argument("--compare", metavar="CSV",
                   help="baseline coverage_report.csv to compute improvements against")
    p.add_argument("--log-level", default=FUZZ_DEFAULTS["log_level"],
                   choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    return p


def _load_samples(folder: str) -> tuple[list[str], list[str]]:
    try:
        names = sorted(n for n in os.listdir(folder) if not n.startswith("."))
        texts = []
        for name in names:
            with open(os.path.join(folder, name), encoding="utf-8") as f:
                texts.append(f.read())
    except OSError as e:
        raise UsageError(f"cannot read samples from {folder}: {e}") from e
    if not texts:
        raise UsageError(f"no sample files in {folder}")
    return texts, names


def _external_command(parts: list[str]) -> list[str]:
    return shlex.split(parts[0]) if len(parts) == 1 else parts


def _campaign(args: argparse.Namespace) -> int:
    overrides: dict = {}
    if args.config:
        try:
            overrides = load_overrides(args.config)
        except OSError as e:
            raise UsageError(f"cannot read config {args.config}: {e}") from e
    external_b_total = overrides.pop("external_b_total", None)
    if args.external_branches is not None:
        external_b_total = args.external_branches
    for flag, field in _FLAG_FIELDS.items():
        value = getattr(args, flag)
        if value is not None:
            overrides[field] = value
    try:
        cfg = build_experiment(args.experiment, overrides)
    except ValidationError as e:
        raise UsageError(f"invalid configuration: {e}") from e

    grammar = load_grammar(args.grammar)

    samples = names = None
    if cfg.initial_input is InitialInput.PROBABILISTIC:
        samples, names = _load_samples(args.samples or FUZZ_DEFAULTS["samples_dir"])
        learn_probabilities(grammar, samples, names)  # fail fast on a bad sample

    register_builtin_targets()
    if args.external_cmd:
        if not external_b_total:
            raise UsageError("--external-cmd needs --external-branches (or external_b_total in --config)")
        register_external("external", _external_command(args.external_cmd), int(external_b_total))
    if args.targets == "all":
        targets = registered_targets()
    else:
        targets = [get_target(name.strip()) for name in args.targets.split(",") if name.strip()]

    baseline = summarize(read_coverage_csv(args.compare)) if args.compare else None

    os.makedirs(args.out, exist_ok=True)
    log.info("%s: %d run(s) x %gs over %s", cfg.label, cfg.runs, cfg.time_budget,
             ", ".join(t.name for t in targets))
    report = run_campaign(cfg, grammar, samples, targets, out_dir=args.out, sample_names=names)

    rows  = report_rows(report)
    table = summarize(rows)
    write_coverage_csv(rows, os.path.join(args.out, "coverage_report.csv"))
    write_exceptions_csv(exception_rows(report), os.path.join(args.out, "exceptions.csv"))
    with open(os.path.join(args.out, "summary.csv"), "w", encoding="utf-8", newline="") as f:
        f.write(table.render_csv())
    comparison = compare(baseline, table) if baseline is not None else None
    summary = render_summary(report, table, comparison)
    with open(os.path.join(args.out, "summary.txt"), "w", encoding="utf-8") as f:
        f.write(summary)
    print(summary, end="")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    logging.basicConfig(
        level=args.log_level,
        format="%(asctime)s %(levelname)-7s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        return _campaign(args)
    except (UsageError, SamplesRequiredError, ReportError) as e:
        print(f"error: {e}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except (GrammarError, InputParseError) as e:
        print(f"grammar error: {e}", file=sys.stderr)
        return EXIT_GRAMMAR
    except (UnknownTargetError, ExternalCommandError, MalformedCoverageError) as e:
        print(f"target error: {e}", file=sys.stderr)
        return EXIT_TARGET
    except Exception as e:
        _log_error(f"argv={argv if argv is not None else sys.argv[1:]}", e)
        print(f"unexpected failure: {e} (details in {ERROR_LOG})", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
