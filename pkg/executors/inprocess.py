"""
Executor: in-process
Runs an instrumented module from targets/ in the calling thread. Branch
sites feed a private Trace; line and function coverage come from a tracer
limited to the target's source file.
"""
from __future__ import annotations

import time
from types import ModuleType

from instrumentation import ExecutionTimeout, SiteMap, TargetFault, Trace, line_ids, recording
from harness import ExceptionRecord, ExecutionOutcome, input_digest


def _location(trace: Trace) -> str:
    return f"B{trace.last_site}" if trace.last_site is not None else "entry"


def run(module: ModuleType, sites: SiteMap, text: str, timeout: float,
        trace_lines: bool = True) -> ExecutionOutcome:
    """Execute module.process(text) once and report what it covered.

    Args:
        module:      Instrumented target module exposing process().
        sites:       Static site map from instrumentation.scan_module.
        text:        The input.
        timeout:     Wall-clock allowance in seconds.
        trace_lines: Also record line and function coverage.

    Returns:
        ExecutionOutcome; faults raised by the target are part of the outcome.
    """
    started = time.perf_counter()
    trace = Trace(deadline=started + timeout)
    exception = None
    try:
        with recording(trace, sites, trace_lines):
            module.process(text)
    except TargetFault as e:
        exception = ExceptionRecord(type=e.kind, location=_location(trace))
    except ExecutionTimeout:
        exception = ExceptionRecord(type="Timeout", location=_location(trace))
    except Exception as e:  # any crash of the target is a finding
        exception = ExceptionRecord(type=type(e).__name__, location=_location(trace))

    return ExecutionOutcome(
        covered_branches=frozenset(trace.branches),
        covered_lines=line_ids(trace, sites),
        covered_functions=frozenset(trace.functions),
        exception=exception,
        duration=time.perf_counter() - started,
        input_ref=input_digest(text),
        steps=trace.steps,
    )
