"""
Executor: external program
Runs any command that speaks the coverage wire format:

  stdin        the input, UTF-8
  COVERAGE_OUT path of a file the program writes, one id per line:
               B<n> branch, L<n> line, F<n> function
  exit status  0 = no exception; otherwise the first stderr line may read
               EXC:<type>:<location>
"""
from __future__ import annotations

import os
import re
import subprocess
import tempfile
import time

from harness import ExceptionRecord, ExecutionOutcome, ExternalCommandError, MalformedCoverageError, input_digest

_COVERAGE_LINE = re.compile(r"^([BLF])(\d+)$")
_EXC_LINE      = re.compile(r"^EXC:([^:]+):(.*)$")


def parse_coverage(text: str) -> tuple[frozenset[int], frozenset[int], frozenset[int]]:
    """Branch, line and function id sets from coverage file contents."""
    found: dict[str, set[int]] = {"B": set(), "L": set(), "F": set()}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        m = _COVERAGE_LINE.match(line)
        if m is None:
            raise MalformedCoverageError(f"coverage line {number}: {raw!r}")
        found[m.group(1)].add(int(m.group(2)))
    return frozenset(found["B"]), frozenset(found["L"]), frozenset(found["F"])


def parse_exception(returncode: int, stderr: bytes) -> ExceptionRecord | None:
    if returncode == 0:
        return None
    first = stderr.decode("utf-8", errors="replace").splitlines()[:1]
    m = _EXC_LINE.match(first[0].strip()) if first else None
    if m is not None:
        return ExceptionRecord(type=m.group(1), location=m.group(2) or "external")
    if returncode < 0:
        return ExceptionRecord(type=f"Signal{-returncode}", location="external")
    return ExceptionRecord(type=f"Exit{returncode}", location="external")


def _read_coverage(path: str, strict: bool) -> tuple[frozenset[int], frozenset[int], frozenset[int]]:
    try:
        with open(path, encoding="utf-8", errors="replace") as f:
            content = f.read()
    except FileNotFoundError:
        return frozenset(), frozenset(), frozenset()
    try:
        return parse_coverage(content)
    except MalformedCoverageError:
        if strict:
            raise
        return frozenset(), frozenset(), frozenset()


def run(command: list[str], text: str, timeout: float) -> ExecutionOutcome:
    """Execute the command once with `text` on stdin.

    Raises:
        ExternalCommandError:   the command cannot be started.
        MalformedCoverageError: the coverage file has a line outside the format.
    """
    with tempfile.TemporaryDirectory(prefix="gafuzz-") as tmpdir:
        coverage_path = os.path.join(tmpdir, "coverage.txt")
        env = {**os.environ, "COVERAGE_OUT": coverage_path}
        started = time.perf_counter()
        try:
            proc = subprocess.run(
                command,
                input=text.encode("utf-8"),
                capture_output=True,
                env=env,
                timeout=timeout,
            )
        except FileNotFoundError as e:
            raise ExternalCommandError(
                f"External target command not found: {command[0]!r}. "
                "Check --external-cmd."
            ) from e
        except PermissionError as e:
            raise ExternalCommandError(f"External target command is not executable: {command[0]!r}") from e
        except subprocess.TimeoutExpired:
            # killed mid-write: keep whatever coverage made it to disk
            branches, lines, functions = _read_coverage(coverage_path, strict=False)
            return ExecutionOutcome(
                covered_branches=branches,
                covered_lines=lines,
                covered_functions=functions,
                exception=ExceptionRecord(type="Timeout", location="external"),
                duration=time.perf_counter() - started,
                input_ref=input_digest(text),
            )
        duration = time.perf_counter() - started
        branches, lines, functions = _read_coverage(coverage_path, strict=True)

    return ExecutionOutcome(
        covered_branches=branches,
        covered_lines=lines,
        covered_functions=functions,
        exception=parse_exception(proc.returncode, proc.stderr),
        duration=duration,
        input_ref=input_digest(text),
    )
