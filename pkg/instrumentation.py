"""
Shared instrumentation used by the built-in targets.

Branches are manual sites: every conditional arm calls hit(<id>) or wraps its
condition in arm(<cond>, <then id>, <else id>). IDs are small integers, unique
and contiguous within one target module, so the branch total is exact.

Line and function coverage come from a per-thread tracer restricted to the
target's source file; totals are read from the module's AST.
"""
from __future__ import annotations

import ast
import inspect
import sys
import threading
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from types import FrameType, ModuleType
from typing import Any, Iterator

_local = threading.local()

_DEADLINE_CHECK_MASK = 0x3FF   # check the wall clock every 1024 steps
DEFAULT_MAX_STEPS    = 2_000_000


class TargetFault(Exception):
    """A fault a target raises on purpose.

    The location is the last branch arm recorded before the raise, i.e. the
    check that detected the fault.
    """

    def __init__(self, kind: str, detail: str = ""):
        self.kind   = kind
        self.detail = detail
        super().__init__(f"{kind}: {detail}" if detail else kind)


class ExecutionTimeout(BaseException):
    """Raised inside a target when its step or time allowance runs out."""


@dataclass
class Trace:
    deadline:  float
    max_steps: int = DEFAULT_MAX_STEPS
    branches:  set[int] = field(default_factory=set)
    lines:     set[int] = field(default_factory=set)
    functions: set[int] = field(default_factory=set)
    steps:     int = 0
    last_site: int | None = None

    def tick(self) -> None:
        self.steps += 1
        if self.steps > self.max_steps:
            raise ExecutionTimeout(f"step limit {self.max_steps} reached")
        if not self.steps & _DEADLINE_CHECK_MASK and time.perf_counter() > self.deadline:
            raise ExecutionTimeout("deadline passed")


def hit(site: int) -> None:
    """Record one branch arm. No-op outside a recording."""
    trace: Trace | None = getattr(_local, "trace", None)
    if trace is None:
        return
    trace.branches.add(site)
    trace.last_site = site
    trace.tick()


def arm(cond: Any, then_site: int, else_site: int) -> bool:
    """Record the taken arm of a two-way conditional and return its truth value."""
    taken = bool(cond)
    hit(then_site if taken else else_site)
    return taken


# ── Static site map ───────────────────────────────────────────────────────────

@dataclass(frozen=True)
class SiteMap:
    filename:       str
    branch_ids:     frozenset[int]
    line_owner:     dict[int, int]      # source line -> first line of its statement
    statement_ids:  dict[int, int]      # statement first line -> line id
    function_ids:   dict[int, int]      # code co_firstlineno -> function id

    @property
    def b_total(self) -> int:
        return len(self.branch_ids)

    @property
    def line_total(self) -> int:
        return len(self.statement_ids)

    @property
    def function_total(self) -> int:
        return len(self.function_ids)


def _site_ids(call: ast.Call) -> list[int]:
    func = call.func
    name = func.id if isinstance(func, ast.Name) else getattr(func, "attr", None)
    if name == "hit":
        args = call.args[:1]
    elif name == "arm":
        args = call.args[1:3]
    else:
        return []
    ids = []
    for a in args:
        if not (isinstance(a, ast.Constant) and isinstance(a.value, int)):
            raise ValueError(f"line {call.lineno}: branch sites must be integer literals")
        ids.append(a.value)
    return ids


def _is_docstring(stmt: ast.stmt) -> bool:
    return (isinstance(stmt, ast.Expr) and isinstance(stmt.value, ast.Constant)
            and isinstance(stmt.value.value, str))


def scan_module(module: ModuleType) -> SiteMap:
    """Build the static site map of an instrumented target module."""
    source   = inspect.getsource(module)
    tree     = ast.parse(source)
    filename = module.process.__code__.co_filename

    branch_ids: list[int] = []
    for node in ast.walk(tree):
        if isinstance(node, ast.Call):
            branch_ids.extend(_site_ids(node))
    unique = set(branch_ids)
    if len(unique) != len(branch_ids):
        raise ValueError(f"{module.__name__}: duplicate branch site ids")
    if unique != set(range(len(unique))):
        raise ValueError(f"{module.__name__}: branch site ids must be 0..{len(unique) - 1}")

    functions = sorted(
        (n for n in ast.walk(tree) if isinstance(n, (ast.FunctionDef, ast.AsyncFunctionDef))),
        key=lambda n: n.lineno,
    )
    function_ids = {
        (fn.decorator_list[0].lineno if fn.decorator_list else fn.lineno): i
        for i, fn in enumerate(functions)
    }

    # ast.walk is breadth-first, so inner statements overwrite their parents' lines
    line_owner: dict[int, int] = {}
    for fn in functions:
        for node in ast.walk(fn):
            if not isinstance(node, ast.stmt) or node is fn or _is_docstring(node):
                continue
            last = node.end_lineno or node.lineno
            body = getattr(node, "body", None)
            if isinstance(body, list) and body and isinstance(body[0], ast.stmt):
                last = max(node.lineno, body[0].lineno - 1)
            for line in range(node.lineno, last + 1):
                line_owner[line] = node.lineno
    statement_ids = {line: i for i, line in enumerate(sorted(set(line_owner.values())))}

    return SiteMap(
        filename=filename,
        branch_ids=frozenset(unique),
        line_owner=line_owner,
        statement_ids=statement_ids,
        function_ids=function_ids,
    )


# ── Recording ─────────────────────────────────────────────────────────────────

@contextmanager
def recording(trace: Trace, sites: SiteMap, trace_lines: bool = True) -> Iterator[Trace]:
    """Route hit() calls of this thread into `trace` and trace the target's lines."""
    previous_trace = getattr(_local, "trace", None)
    previous_tracer = sys.gettrace()
    _local.trace = trace

    filename   = sites.filename
    line_owner = sites.line_owner
    functions  = sites.function_ids

    def local_tracer(frame: FrameType, event: str, arg: Any):
        if event == "line":
            owner = line_owner.get(frame.f_lineno)
            if owner is not None:
                trace.lines.add(owner)
            trace.tick()
        return local_tracer

    def global_tracer(frame: FrameType, event: str, arg: Any):
        if frame.f_code.co_filename != filename:
            return None
        fn = functions.get(frame.f_code.co_firstlineno)
        if fn is not None:
            trace.functions.add(fn)
        return local_tracer

    if trace_lines:
        sys.settrace(global_tracer)
    try:
        yield trace
    finally:
        if trace_lines:
            sys.settrace(previous_tracer)
        _local.trace = previous_trace


def line_ids(trace: Trace, sites: SiteMap) -> frozenset[int]:
    return frozenset(sites.statement_ids[line] for line in trace.lines)
