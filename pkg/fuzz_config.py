"""
Centralized fuzzer defaults.
Every value below can be overridden with the matching FUZZ_* environment
variable, or in a .env file next to app.py (see .env.example).
"""
import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

ROOT = Path(__file__).resolve().parent


def _env(name: str, default, cast=str):
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    return cast(raw)


FUZZ_DEFAULTS = {
    # Height limit of generated derivation trees (nonterminal levels)
    "max_depth":    _env("FUZZ_MAX_DEPTH", 80, int),
    # Offspring larger than this (in tree nodes) are replaced by a parent clone
    "max_nodes":    _env("FUZZ_MAX_NODES", 2000, int),
    # Per-execution allowance in seconds
    "timeout":      _env("FUZZ_TIMEOUT", 1.0, float),
    # Threads evaluating a population; 1 = evaluate on the coordinating thread
    "workers":      _env("FUZZ_WORKERS", 1, int),
    # "work" = deterministic virtual cost (capped by wall time), "wall" = wall time only
    "budget_clock": _env("FUZZ_BUDGET_CLOCK", "work"),
    "log_level":    _env("FUZZ_LOG_LEVEL", "INFO").upper(),
    "out_dir":      _env("FUZZ_OUT_DIR", "results"),
    "samples_dir":  str(ROOT / "samples"),
}

# Virtual seconds charged by the "work" budget clock
WORK_COSTS = {
    "execution": 1.8e-3,   # fixed cost per target execution
    "step":      24e-6,    # per instrumentation step (branch arm or traced line)
    "node":      120e-6,   # per derivation-tree node generated
}

# Sequence-bearing rules of the shipped JSON grammar: (container, sequence, item)
CONTAINER_SHAPES = [
    ("object", "members", "member"),
    ("array", "elements", "element"),
]
