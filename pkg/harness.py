"""
Target harness.
Keeps the registry of fuzz targets and delegates each execution to the
executor backend of the target's kind.

Supported backends (executors/<kind>.py, each must expose run()):
  inprocess — instrumented Python modules from targets/ (or any module that
              uses instrumentation.hit/arm and exposes process(text))
  external  — any program honouring the coverage wire format

To add a built-in target:
  1. Create targets/my_target.py with a process(text) function whose
     branches are marked with hit()/arm() using ids 0..n-1.
  2. Add an entry to TARGETS in target_registry.py.
"""
from __future__ import annotations

import hashlib
import importlib
import logging
import threading
from dataclasses import dataclass
from types import ModuleType
from typing import Iterable, Literal

from pydantic import BaseModel, ConfigDict, Field

from instrumentation import SiteMap, scan_module
from target_registry import TARGETS

log = logging.getLogger(__name__)


# ── Errors ────────────────────────────────────────────────────────────────────

class UnknownTargetError(LookupError):
    """No target registered under that name."""


class ExternalCommandError(RuntimeError):
    """The external target command cannot be started."""


class MalformedCoverageError(ValueError):
    """An external target wrote a coverage line outside the B/L/F<n> format."""


# ── Models ────────────────────────────────────────────────────────────────────

class ExceptionRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    type:     str
    location: str


class ExecutionOutcome(BaseModel):
    model_config = ConfigDict(frozen=True)

    covered_branches:  frozenset[int]
    covered_lines:     frozenset[int] = frozenset()
    covered_functions: frozenset[int] = frozenset()
    exception:         ExceptionRecord | None = None
    duration:          float = Field(default=0.0, ge=0.0)
    input_ref:         str   = ""
    steps:             int   = 0


class TargetInfo(BaseModel):
    model_config = ConfigDict(frozen=True)

    name:           str
    kind:           Literal["inprocess", "external"] = "inprocess"
    b_total:        int = Field(ge=1)
    line_total:     int = Field(default=0, ge=0)
    function_total: int = Field(default=0, ge=0)
    description:    str = ""
    planted_bug:    str = ""


@dataclass(frozen=True)
class Coverage:
    branches:  frozenset[int] = frozenset()
    lines:     frozenset[int] = frozenset()
    functions: frozenset[int] = frozenset()


@dataclass(frozen=True)
class _Entry:
    info:        TargetInfo
    module:      ModuleType | None = None
    sites:       SiteMap | None = None
    command:     tuple[str, ...] = ()
    trace_lines: bool = True


# ── Registry ──────────────────────────────────────────────────────────────────

_REGISTRY: dict[str, _Entry] = {}
_LOCK = threading.Lock()


def input_digest(text: str) -> str:
    return hashlib.sha1(text.encode("utf-8", errors="surrogatepass")).hexdigest()[:16]


def register_target(module: ModuleType, name: str | None = None, description: str = "",
                    planted_bug: str = "", trace_lines: bool = True) -> TargetInfo:
    """Register an instrumented module; totals are read from its source."""
    sites = scan_module(module)
    if sites.b_total == 0:
        raise ValueError(f"{module.__name__} has no branch sites")
    if not description and module.__doc__:
        description = module.__doc__.strip().splitlines()[0]
    info = TargetInfo(
        name=name or module.__name__.rsplit(".", 1)[-1],
        kind="inprocess",
        b_total=sites.b_total,
        line_total=sites.line_total,
        function_total=sites.function_total,
        description=description,
        planted_bug=planted_bug,
    )
    with _LOCK:
        _REGISTRY[info.name] = _Entry(info, module=module, sites=sites, trace_lines=trace_lines)
    log.debug("registered %s: %d branches, %d lines, %d functions",
              info.name, info.b_total, info.line_total, info.function_total)
    return info


def register_external(name: str, command: Iterable[str], b_total: int,
                      line_total: int = 0, function_total: int = 0,
                      description: str = "") -> TargetInfo:
    command = tuple(command)
    if not command:
        raise ExternalCommandError("external target needs a command")
    info = TargetInfo(
        name=name,
        kind="external",
        b_total=b_total,
        line_total=line_total,
        function_total=function_total,
        description=description or " ".join(command),
    )
    with _LOCK:
        _REGISTRY[name] = _Entry(info, command=command)
    return info


def register_builtin_targets() -> list[TargetInfo]:
    """Register every target listed in target_registry.TARGETS (idempotent)."""
    infos = []
    for name, cfg in TARGETS.items():
        existing = _REGISTRY.get(name)
        if existing is not None:
            infos.append(existing.info)
            continue
        try:
            module = importlib.import_module(f"targets.{cfg['module']}")
        except ModuleNotFoundError:
            raise RuntimeError(
                f"Target module '{cfg['module']}' not found. "
                f"Create targets/{cfg['module']}.py or fix TARGETS in target_registry.py."
            )
        infos.append(register_target(
            module,
            name=name,
            description=cfg["description"],
            planted_bug=cfg["planted_bug"],
            trace_lines=cfg["trace_lines"],
        ))
    return infos


def get_target(name: str) -> TargetInfo:
    entry = _REGISTRY.get(name)
    if entry is None:
        known = ", ".join(sorted(_REGISTRY)) or "none"
        raise UnknownTargetError(f"unknown target {name!r} (registered: {known})")
    return entry.info


def registered_targets() -> list[TargetInfo]:
    return [entry.info for entry in _REGISTRY.values()]


def unregister_target(name: str) -> None:
    with _LOCK:
        _REGISTRY.pop(name, None)


# ── Execution ─────────────────────────────────────────────────────────────────

def _in_range(ids: frozenset[int], total: int) -> frozenset[int]:
    # a total of 0 means undeclared: keep every non-negative id
    return frozenset(x for x in ids if x >= 0 and (not total or x < total))


def _within_totals(outcome: ExecutionOutcome, info: TargetInfo) -> ExecutionOutcome:
    """Drop ids an external program reports beyond its declared totals.

    Line and function totals are optional for external programs; when one is
    not declared, the reported ids are kept as they are.
    """
    branches  = frozenset(b for b in outcome.covered_branches if 0 <= b < info.b_total)
    lines     = _in_range(outcome.covered_lines, info.line_total)
    functions = _in_range(outcome.covered_functions, info.function_total)
    if len(branches) != len(outcome.covered_branches):
        log.warning("%s reported branch ids outside [0, %d); ignored", info.name, info.b_total)
    return outcome.model_copy(update={
        "covered_branches":  branches,
        "covered_lines":     lines,
        "covered_functions": functions,
    })


def execute(target: TargetInfo | str, text: str, timeout: float) -> ExecutionOutcome:
    """Run one input against a registered target.

    Exceptions raised by the target are reported in the outcome, never
    propagated. Harness failures (missing command, malformed coverage) raise.
    """
    if timeout <= 0:
        raise ValueError(f"timeout must be positive, got {timeout}")
    name  = target if isinstance(target, str) else target.name
    entry = _REGISTRY.get(name)
    if entry is None:
        raise UnknownTargetError(f"unknown target {name!r}")

    backend = importlib.import_module(f"executors.{entry.info.kind}")
    if entry.info.kind == "external":
        return _within_totals(backend.run(list(entry.command), text, timeout), entry.info)
    return backend.run(entry.module, entry.sites, text, timeout, entry.trace_lines)


def execute_external(command: Iterable[str], text: str, timeout: float) -> ExecutionOutcome:
    """Run an unregistered external command once; ids are reported as written."""
    if timeout <= 0:
        raise ValueError(f"timeout must be positive, got {timeout}")
    backend = importlib.import_module("executors.external")
    return backend.run(list(command), text, timeout)


def merge_outcomes(outcomes: Iterable[ExecutionOutcome]) -> Coverage:
    """Union of the covered sets."""
    branches:  set[int] = set()
    lines:     set[int] = set()
    functions: set[int] = set()
    for o in outcomes:
        branches  |= o.covered_branches
        lines     |= o.covered_lines
        functions |= o.covered_functions
    return Coverage(frozenset(branches), frozenset(lines), frozenset(functions))
