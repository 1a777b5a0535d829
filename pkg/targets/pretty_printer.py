"""
Target: Pretty Printer
Parses with the standard json module, then re-emits the document with
two-space indentation, ASCII-only escapes and short scalar arrays kept on one
line. An object that is itself an array element and has an empty key raises
EmptyKeyInArray; objects nested deeper inside that element do not.
"""
from __future__ import annotations

import json
import math
from typing import Any

from instrumentation import TargetFault, arm, hit

INDENT        = "  "
INLINE_ITEMS  = 4
COMPACT_LEVEL = 6


class _Pairs(list):
    pass


class _Printer:
    def __init__(self):
        self.out: list[str] = []

    def indent(self, level: int) -> None:
        if arm(level > COMPACT_LEVEL, 0, 1):
            self.out.append(INDENT * COMPACT_LEVEL + " " * (level - COMPACT_LEVEL))
        else:
            self.out.append(INDENT * level)

    def emit(self, value: Any, level: int, in_array: bool) -> None:
        if arm(isinstance(value, _Pairs), 2, 3):
            self.emit_object(value, level, in_array)
        elif arm(isinstance(value, list), 4, 5):
            self.emit_array(value, level)
        else:
            self.emit_scalar(value)

    def emit_object(self, pairs: _Pairs, level: int, in_array: bool) -> None:
        if arm(not pairs, 6, 7):
            self.out.append("{}")
            return
        self.out.append("{\n")
        for i, (key, value) in enumerate(pairs):
            if arm(key == "" and in_array, 8, 9):
                raise TargetFault("EmptyKeyInArray", f"member {i}")
            if arm(i > 0, 10, 11):
                self.out.append(",\n")
            self.indent(level + 1)
            self.emit_string(key)
            self.out.append(": ")
            self.emit(value, level + 1, in_array=False)
        self.out.append("\n")
        self.indent(level)
        self.out.append("}")

    def emit_array(self, items: list, level: int) -> None:
        if arm(not items, 12, 13):
            self.out.append("[]")
            return
        scalars = all(not isinstance(x, list) for x in items)
        if arm(scalars and len(items) <= INLINE_ITEMS, 14, 15):
            self.out.append("[")
            for i, item in enumerate(items):
                if arm(i > 0, 16, 17):
                    self.out.append(", ")
                self.emit_scalar(item)
            self.out.append("]")
            return
        self.out.append("[\n")
        for i, item in enumerate(items):
            if arm(i > 0, 18, 19):
                self.out.append(",\n")
            self.indent(level + 1)
            self.emit(item, level + 1, in_array=True)
        self.out.append("\n")
        self.indent(level)
        self.out.append("]")

    def emit_scalar(self, value: Any) -> None:
        if arm(value is None, 20, 21):
            self.out.append("null")
        elif arm(value is True or value is False, 22, 23):
            self.out.append("true" if value else "false")
        elif arm(isinstance(value, int), 24, 25):
            if arm(value < 0, 26, 27):
                self.out.append("-")
                value = -value
            self.out.append(str(value))
        elif arm(isinstance(value, float), 28, 29):
            if arm(math.isinf(value) or math.isnan(value), 30, 31):
                self.out.append("null")
            elif arm(value.is_integer() and abs(value) < 1e16, 32, 33):
                self.out.append(f"{value:.1f}")
            else:
                self.out.append(repr(value))
        else:
            self.emit_string(value)

    def emit_string(self, s: str) -> None:
        self.out.append('"')
        for c in s:
            code = ord(c)
            if arm(c == '"' or c == "\\", 34, 35):
                self.out.append("\\" + c)
            elif arm(c == "\n", 36, 37):
                self.out.append("\\n")
            elif arm(c == "\t", 38, 39):
                self.out.append("\\t")
            elif arm(code < 0x20, 40, 41):
                self.out.append(f"\\u{code:04x}")
            elif arm(code > 0xFFFF, 42, 43):
                code -= 0x10000
                self.out.append(f"\\u{0xD800 + (code >> 10):04x}\\u{0xDC00 + (code & 0x3FF):04x}")
            elif arm(code > 0x7F, 44, 45):
                self.out.append(f"\\u{code:04x}")
            else:
                self.out.append(c)
        self.out.append('"')


def process(text: str) -> str:
    hit(46)
    if arm(not text.strip(), 47, 48):
        raise TargetFault("EmptyInput")
    doc = json.loads(text, object_pairs_hook=_Pairs)
    printer = _Printer()
    printer.emit(doc, 0, in_array=False)
    if arm(isinstance(doc, (list, _Pairs)), 49, 50):
        printer.out.append("\n")
    return "".join(printer.out)
