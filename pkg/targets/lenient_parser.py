"""
Target: Lenient Parser
Tokenizer plus an explicit-stack builder (no recursion). Accepts what
browsers and config loaders tend to tolerate: trailing commas, single-quoted
strings, leading zeros, a leading '+' on numbers and unknown escapes.
"""
from __future__ import annotations

from typing import Any, Iterator

from instrumentation import TargetFault, arm

MAX_NESTING = 1000

_WS        = frozenset(" \t\n\r")
_DIGITS    = frozenset("0123456789")
_HEX       = frozenset("0123456789abcdefABCDEF")
_PUNCT     = frozenset("{}[]:,")
_QUOTES    = frozenset("\"'")
_NUM_START = frozenset("+-.0123456789")
_WORDS     = {"true": True, "false": False, "null": None}
_SIMPLE_ESCAPES = {
    '"': '"', "'": "'", "\\": "\\", "/": "/",
    "b": "\b", "f": "\f", "n": "\n", "r": "\r", "t": "\t",
}


# ── Tokenizer ─────────────────────────────────────────────────────────────────

def _read_string(text: str, pos: int, quote: str) -> tuple[str, int]:
    pos += 1
    out: list[str] = []
    while True:
        if arm(pos >= len(text), 0, 1):
            raise TargetFault("UnterminatedString")
        c = text[pos]
        if arm(c == quote, 2, 3):
            return "".join(out), pos + 1
        if arm(c == "\\", 4, 5):
            nxt = text[pos + 1:pos + 2]
            if arm(nxt == "u", 6, 7):
                digits = text[pos + 2:pos + 6]
                if arm(len(digits) == 4 and all(d in _HEX for d in digits), 8, 9):
                    out.append(chr(int(digits, 16)))
                    pos += 6
                    continue
                raise TargetFault("BadUnicodeEscape", repr(digits))
            if arm(nxt in _SIMPLE_ESCAPES, 10, 11):
                out.append(_SIMPLE_ESCAPES[nxt])
                pos += 2
                continue
            if arm(nxt == "", 12, 13):
                raise TargetFault("UnterminatedString")
            out.append(nxt)  # unknown escape keeps the character
            pos += 2
            continue
        if arm(c == "\n", 14, 15):
            raise TargetFault("NewlineInString")
        out.append(c)
        pos += 1


def _read_digits(text: str, pos: int) -> int:
    while arm(pos < len(text) and text[pos] in _DIGITS, 16, 17):
        pos += 1
    return pos


def _read_number(text: str, pos: int) -> tuple[int | float, int]:
    start = pos
    if arm(text[pos] in "+-", 18, 19):
        pos += 1
    digits_start = pos
    pos = _read_digits(text, pos)
    n_digits = pos - digits_start
    is_float = False
    if arm(pos < len(text) and text[pos] == ".", 20, 21):
        frac_start = pos + 1
        pos = _read_digits(text, frac_start)
        n_digits += pos - frac_start
        is_float = True
    if arm(n_digits == 0, 22, 23):
        raise TargetFault("BadNumber", repr(text[start:pos + 1]))
    if arm(pos < len(text) and text[pos] in "eE", 24, 25):
        pos += 1
        if arm(pos < len(text) and text[pos] in "+-", 26, 27):
            pos += 1
        exp_start = pos
        pos = _read_digits(text, pos)
        if arm(pos == exp_start, 28, 29):
            raise TargetFault("BadExponent")
        is_float = True
    literal = text[start:pos]
    if arm(is_float, 30, 31):
        return float(literal), pos
    return int(literal), pos


def _tokens(text: str) -> Iterator[tuple[str, Any]]:
    pos = 0
    n = len(text)
    while True:
        while arm(pos < n and text[pos] in _WS, 32, 33):
            pos += 1
        if arm(pos >= n, 34, 35):
            yield "eof", None
            return
        c = text[pos]
        if arm(c in _PUNCT, 36, 37):
            yield c, None
            pos += 1
        elif arm(c in _QUOTES, 38, 39):
            value, pos = _read_string(text, pos, c)
            yield "str", value
        elif arm(c in _NUM_START, 40, 41):
            value, pos = _read_number(text, pos)
            yield "num", value
        elif arm(c.isalpha(), 42, 43):
            end = pos
            while end < n and text[end].isalpha():
                end += 1
            word = text[pos:end]
            if arm(word in _WORDS, 44, 45):
                yield "lit", _WORDS[word]
                pos = end
            else:
                raise TargetFault("UnknownWord", repr(word))
        else:
            raise TargetFault("UnexpectedChar", repr(c))


# ── Builder ───────────────────────────────────────────────────────────────────

class _Frame:
    __slots__ = ("container", "is_object", "key", "expect", "trailing")

    def __init__(self, container: dict | list):
        self.container = container
        self.is_object = isinstance(container, dict)
        self.key: str | None = None
        self.expect = "first"   # first | key | colon | value | item | sep
        self.trailing = False


def _attach(stack: list[_Frame], value: Any) -> bool:
    """Place a finished value into the open container; True when it was the root."""
    if arm(not stack, 46, 47):
        return True
    frame = stack[-1]
    if arm(frame.is_object, 48, 49):
        if arm(frame.key in frame.container, 50, 51):
            del frame.container[frame.key]
        frame.container[frame.key] = value
    else:
        frame.container.append(value)
    frame.expect = "sep"
    return False


def process(text: str):
    if arm(not text.strip(), 52, 53):
        raise TargetFault("EmptyInput")
    stack: list[_Frame] = []
    root: Any = None
    finished = False
    for kind, value in _tokens(text):
        if arm(finished, 54, 55):
            if arm(kind == "eof", 56, 57):
                return root
            raise TargetFault("TrailingData", kind)
        if arm(kind == "eof", 58, 59):
            raise TargetFault("UnexpectedEnd")
        frame = stack[-1] if stack else None

        if arm(frame is not None and frame.is_object and frame.expect in ("first", "key"), 60, 61):
            if arm(kind == "str", 62, 63):
                frame.key, frame.expect = value, "colon"
            elif arm(kind == "}", 64, 65):
                frame.trailing = frame.expect == "key"
                stack.pop()
                if _attach(stack, frame.container):
                    finished, root = True, frame.container
            else:
                raise TargetFault("ExpectedKey", kind)
            continue

        if arm(frame is not None and frame.expect == "colon", 66, 67):
            if arm(kind != ":", 68, 69):
                raise TargetFault("ExpectedColon", kind)
            frame.expect = "value"
            continue

        if arm(frame is not None and frame.expect == "sep", 70, 71):
            closer = "}" if frame.is_object else "]"
            if arm(kind == ",", 72, 73):
                frame.expect = "key" if frame.is_object else "item"
            elif arm(kind == closer, 74, 75):
                stack.pop()
                if _attach(stack, frame.container):
                    finished, root = True, frame.container
            else:
                raise TargetFault("ExpectedSeparator", kind)
            continue

        # a value is expected: top level, object value or array item
        if arm(kind == "]" and frame is not None and not frame.is_object, 76, 77):
            frame.trailing = frame.expect == "item"
            stack.pop()
            if _attach(stack, frame.container):
                finished, root = True, frame.container
            continue
        if arm(kind in ("{", "["), 78, 79):
            if arm(len(stack) >= MAX_NESTING, 80, 81):
                raise TargetFault("NestingTooDeep")
            stack.append(_Frame({} if kind == "{" else []))
            continue
        if arm(kind in ("str", "num", "lit"), 82, 83):
            if _attach(stack, value):
                finished, root = True, value
            continue
        raise TargetFault("UnexpectedToken", kind)
    return root
