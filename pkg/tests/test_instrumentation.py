import importlib
import importlib.util
import inspect
import re
import time

import pytest

import toy_target
from instrumentation import (
    ExecutionTimeout,
    Trace,
    arm,
    hit,
    line_ids,
    recording,
    scan_module,
)

BUILTIN_MODULES = ["strict_parser", "lenient_parser", "flattener", "pretty_printer", "number_validator"]

_HIT = re.compile(r"\bhit\((\d+)\)")
_ARM = re.compile(r"\barm\(.*, (\d+), (\d+)\)")


def _load(tmp_path, name, source):
    path = tmp_path / f"{name}.py"
    path.write_text(source, encoding="utf-8")
    found = importlib.util.spec_from_file_location(name, path)
    module = importlib.util.module_from_spec(found)
    found.loader.exec_module(module)
    return module


def test_sites_are_inert_outside_recording():
    hit(3)
    assert arm(1 > 0, 0, 1) is True


def test_recording_collects_arms():
    trace = Trace(deadline=time.perf_counter() + 10)
    sites = scan_module(toy_target)
    with recording(trace, sites, trace_lines=False):
        assert arm(0, 4, 5) is False
        hit(7)
    assert trace.branches == {5, 7}
    assert trace.last_site == 7
    assert trace.steps == 2


@pytest.mark.parametrize("name", BUILTIN_MODULES)
def test_branch_total_matches_source_scan(name):
    module = importlib.import_module(f"targets.{name}")
    source = inspect.getsource(module)
    ids = [int(x) for x in _HIT.findall(source)]
    for then_id, else_id in _ARM.findall(source):
        ids += [int(then_id), int(else_id)]
    sites = scan_module(module)
    assert sites.b_total == len(ids) == len(set(ids))
    assert sites.branch_ids == frozenset(range(len(ids)))
    assert sites.b_total >= 40
    assert sites.line_total > 0 and sites.function_total > 0


def test_toy_target_totals():
    sites = scan_module(toy_target)
    assert sites.b_total == 3
    assert sites.function_total == 1
    assert sites.line_total == 7


def test_line_and_function_coverage():
    sites = scan_module(toy_target)
    trace = Trace(deadline=time.perf_counter() + 10)
    with recording(trace, sites):
        toy_target.process("ab")
    lines = line_ids(trace, sites)
    assert trace.branches == {0, 1, 2}
    assert trace.functions == {0}
    assert len(lines) == 6  # everything but the raise
    assert all(0 <= i < sites.line_total for i in lines)


def test_step_limit():
    trace = Trace(deadline=time.perf_counter() + 10, max_steps=5)
    sites = scan_module(toy_target)
    with pytest.raises(ExecutionTimeout):
        with recording(trace, sites, trace_lines=False):
            for _ in range(10):
                hit(0)
    hit(0)  # recording is over, no trace left behind


def test_deadline():
    trace = Trace(deadline=time.perf_counter() - 1)
    sites = scan_module(toy_target)
    with pytest.raises(ExecutionTimeout):
        with recording(trace, sites, trace_lines=False):
            for _ in range(5000):
                hit(0)
    assert trace.steps == 1024


def test_duplicate_ids_rejected(tmp_path):
    module = _load(tmp_path, "dup_target", (
        "from instrumentation import hit\n"
        "def process(text):\n"
        "    hit(0)\n"
        "    hit(0)\n"
    ))
    with pytest.raises(ValueError, match="duplicate"):
        scan_module(module)


def test_gaps_rejected(tmp_path):
    module = _load(tmp_path, "gap_target", (
        "from instrumentation import arm\n"
        "def process(text):\n"
        "    arm(text, 0, 2)\n"
    ))
    with pytest.raises(ValueError, match="0..1"):
        scan_module(module)
