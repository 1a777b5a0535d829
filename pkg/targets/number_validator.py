"""
Target: Number Validator
Scans a JSON document for numeric literals (skipping string contents) and
classifies each one by shape and precision class. A literal with 17 or more
significant digits raises PrecisionOverflow.
"""
from __future__ import annotations

from instrumentation import TargetFault, arm

PRECISION_LIMIT = 17
INT32_MAX       = 2 ** 31 - 1
INT64_MAX       = 2 ** 63 - 1

_DIGITS    = frozenset("0123456789")
_NUM_CHARS = frozenset("+-.eE0123456789")


def _skip_string(text: str, pos: int) -> int:
    pos += 1
    while True:
        if arm(pos >= len(text), 0, 1):
            raise TargetFault("UnterminatedString")
        c = text[pos]
        if arm(c == "\\", 2, 3):
            pos += 2
        elif arm(c == '"', 4, 5):
            return pos + 1
        else:
            pos += 1


def _token_end(text: str, pos: int) -> int:
    while pos < len(text) and text[pos] in _NUM_CHARS:
        pos += 1
    return pos


def _digits(tok: str, i: int) -> int:
    while arm(i < len(tok) and tok[i] in _DIGITS, 6, 7):
        i += 1
    return i


def _classify(tok: str) -> str:
    i = 0
    negative = arm(tok[0] == "-", 8, 9)
    if negative:
        i = 1
    start = i
    i = _digits(tok, i)
    int_part = tok[start:i]
    if arm(int_part == "", 10, 11):
        raise TargetFault("BadNumber", repr(tok))
    if arm(len(int_part) > 1 and int_part[0] == "0", 12, 13):
        raise TargetFault("LeadingZero", repr(tok))

    frac_part = ""
    if arm(i < len(tok) and tok[i] == ".", 14, 15):
        start = i + 1
        i = _digits(tok, start)
        frac_part = tok[start:i]
        if arm(frac_part == "", 16, 17):
            raise TargetFault("BadNumber", repr(tok))

    exponent = 0
    has_exponent = arm(i < len(tok) and tok[i] in "eE", 18, 19)
    if has_exponent:
        i += 1
        sign = 1
        if arm(i < len(tok) and tok[i] in "+-", 20, 21):
            sign = -1 if tok[i] == "-" else 1
            i += 1
        start = i
        i = _digits(tok, start)
        if arm(i == start, 22, 23):
            raise TargetFault("BadExponent", repr(tok))
        exponent = sign * int(tok[start:i])

    if arm(i != len(tok), 24, 25):
        raise TargetFault("BadNumber", repr(tok))

    significant = (int_part + frac_part).lstrip("0")
    digits = len(significant)
    if arm(digits >= PRECISION_LIMIT, 26, 27):
        raise TargetFault("PrecisionOverflow", f"{digits} significant digits")
    if arm(digits > 15, 28, 29):
        precision = "inexact"
    elif arm(digits > 9, 30, 31):
        precision = "double"
    elif arm(digits > 4, 32, 33):
        precision = "single"
    elif arm(digits == 0, 34, 35):
        precision = "zero"
    else:
        precision = "short"

    if arm(frac_part or has_exponent, 36, 37):
        magnitude = len(int_part.lstrip("0")) + exponent
        if arm(magnitude > 308, 38, 39):
            shape = "overflow"
        elif arm(magnitude < -307 and digits, 40, 41):
            shape = "subnormal"
        elif arm(frac_part.strip("0") == "" and not has_exponent, 42, 43):
            shape = "integral-float"
        else:
            shape = "float"
    else:
        value = int(int_part)
        if arm(value > INT64_MAX, 44, 45):
            shape = "bigint"
        elif arm(value > INT32_MAX, 46, 47):
            shape = "int64"
        else:
            shape = "int32"

    if arm(negative and digits == 0, 48, 49):
        shape = "negative-zero"
    return f"{shape}/{precision}"


def process(text: str) -> list[str]:
    if arm(not text.strip(), 50, 51):
        raise TargetFault("EmptyInput")
    found: list[str] = []
    pos = 0
    while arm(pos < len(text), 52, 53):
        c = text[pos]
        if arm(c == '"', 54, 55):
            pos = _skip_string(text, pos)
        elif arm(c == "-" or c in _DIGITS, 56, 57):
            end = _token_end(text, pos)
            found.append(_classify(text[pos:end]))
            pos = end
        else:
            pos += 1
    if arm(not found, 58, 59):
        return ["no numbers"]
    return found
