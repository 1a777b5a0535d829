"""
Target: Flattener
Turns a JSON document into dotted-path / value pairs:

    {"a": {"b": [1, "x"]}}  ->  a.b[0] = 1
                                a.b[1] = "x"

Paths deeper than a few levels are tallied by depth band for the summary
line. Nesting beyond MAX_DEPTH raises DepthLimitExceeded.
"""
from __future__ import annotations

import json
import math
from typing import Any

from instrumentation import TargetFault, arm

MAX_DEPTH       = 8
MAX_STRING      = 32
SAFE_INTEGER    = 2 ** 53


class _Pairs(list):
    """Object members in document order, duplicates included."""


class _Flattener:
    def __init__(self):
        self.rows: list[tuple[str, str]] = []
        self.bands = {"shallow": 0, "nested": 0, "deep": 0, "very_deep": 0}

    def check_depth(self, depth: int) -> None:
        if arm(depth > MAX_DEPTH, 0, 1):
            raise TargetFault("DepthLimitExceeded", f"depth {depth}")
        if arm(depth > 6, 2, 3):
            self.bands["very_deep"] += 1
        elif arm(depth > 4, 4, 5):
            self.bands["deep"] += 1
        elif arm(depth > 2, 6, 7):
            self.bands["nested"] += 1
        else:
            self.bands["shallow"] += 1

    def flatten(self, value: Any, prefix: str, depth: int) -> None:
        if arm(isinstance(value, _Pairs), 8, 9):
            depth += 1
            self.check_depth(depth)
            if arm(not value, 10, 11):
                self.rows.append((prefix or "$", "{}"))
                return
            seen: set[str] = set()
            for key, item in value:
                if arm(key in seen, 12, 13):
                    key = f"{key}~{len(seen)}"
                seen.add(key)
                self.flatten(item, _join(prefix, key), depth)
            return
        if arm(isinstance(value, list), 14, 15):
            depth += 1
            self.check_depth(depth)
            if arm(not value, 16, 17):
                self.rows.append((prefix or "$", "[]"))
                return
            for i, item in enumerate(value):
                self.flatten(item, f"{prefix}[{i}]", depth)
            return
        self.rows.append((prefix or "$", _scalar(value)))


def _join(prefix: str, key: str) -> str:
    if arm(key == "", 18, 19):
        key = '""'
    elif arm("." in key or "[" in key, 20, 21):
        key = json.dumps(key)
    elif arm(key.isdigit(), 22, 23):
        key = f"#{key}"
    if arm(not prefix, 24, 25):
        return key
    return f"{prefix}.{key}"


def _scalar(value: Any) -> str:
    if arm(value is None, 26, 27):
        return "null"
    if arm(isinstance(value, bool), 28, 29):
        return "true" if value else "false"
    if arm(isinstance(value, int), 30, 31):
        if arm(abs(value) >= SAFE_INTEGER, 32, 33):
            return json.dumps(str(value))
        if arm(value < 0, 34, 35):
            return f"-{-value}"
        return str(value)
    if arm(isinstance(value, float), 36, 37):
        if arm(math.isinf(value) or math.isnan(value), 38, 39):
            return "null"
        if arm(value.is_integer() and abs(value) < SAFE_INTEGER, 40, 41):
            return str(int(value))
        return repr(value)
    if arm(value == "", 42, 43):
        return '""'
    if arm(len(value) > MAX_STRING, 44, 45):
        value = value[:MAX_STRING] + "..."
    if arm(any(ord(c) > 0x7F for c in value), 46, 47):
        return json.dumps(value, ensure_ascii=False)
    return json.dumps(value)


def process(text: str) -> list[str]:
    if arm(not text.strip(), 48, 49):
        raise TargetFault("EmptyInput")
    doc = json.loads(text, object_pairs_hook=_Pairs)
    flattener = _Flattener()
    flattener.flatten(doc, "", 0)
    lines = [f"{path} = {value}" for path, value in flattener.rows]
    if arm(any(flattener.bands[b] for b in ("deep", "very_deep")), 50, 51):
        lines.append("# deep paths: " + ", ".join(f"{k}={v}" for k, v in flattener.bands.items() if v))
    return lines
