"""
Target: Strict Parser
Recursive-descent JSON parser that follows RFC 8259 to the letter: double
quotes only, no trailing commas, no leading zeros, no raw control characters
inside strings, nothing after the top-level value.
"""
from instrumentation import TargetFault, arm

MAX_NESTING = 512

_WS      = frozenset(" \t\n\r")
_DIGITS  = frozenset("0123456789")
_ONENINE = frozenset("123456789")
_HEX     = frozenset("0123456789abcdefABCDEF")
_ESCAPES = {'"': '"', "\\": "\\", "/": "/", "b": "\b", "f": "\f", "n": "\n", "r": "\r", "t": "\t"}


class _Parser:
    def __init__(self, text: str):
        self.text  = text
        self.pos   = 0
        self.depth = 0
        self.non_ascii = False

    def peek(self) -> str:
        if arm(self.pos < len(self.text), 0, 1):
            return self.text[self.pos]
        return ""

    def skip_ws(self) -> None:
        while arm(self.pos < len(self.text) and self.text[self.pos] in _WS, 2, 3):
            self.pos += 1

    def expect(self, ch: str) -> None:
        c = self.peek()
        if arm(c == "", 4, 5):
            raise TargetFault("UnexpectedEnd", f"expected {ch!r}")
        if arm(c != ch, 6, 7):
            raise TargetFault("UnexpectedChar", f"expected {ch!r}, found {c!r}")
        self.pos += 1

    def value(self):
        self.skip_ws()
        c = self.peek()
        if arm(c == "{", 8, 9):
            return self.object()
        if arm(c == "[", 10, 11):
            return self.array()
        if arm(c == '"', 12, 13):
            return self.string()
        if arm(c == "-" or c in _DIGITS, 14, 15):
            return self.number()
        if arm(c in ("t", "f", "n"), 16, 17):
            return self.literal()
        if arm(c == "", 18, 19):
            raise TargetFault("UnexpectedEnd", "value expected")
        raise TargetFault("UnexpectedChar", f"value expected, found {c!r}")

    def enter(self) -> None:
        self.depth += 1
        if arm(self.depth > MAX_NESTING, 20, 21):
            raise TargetFault("NestingTooDeep")

    def literal(self):
        for word, value in (("true", True), ("false", False), ("null", None)):
            if arm(self.text.startswith(word, self.pos), 22, 23):
                self.pos += len(word)
                return value
        raise TargetFault("BadLiteral")

    def object(self) -> dict:
        self.enter()
        self.pos += 1
        result: dict = {}
        self.skip_ws()
        if arm(self.peek() == "}", 24, 25):
            self.pos += 1
            self.depth -= 1
            return result
        while True:
            self.skip_ws()
            c = self.peek()
            if arm(c == "", 26, 27):
                raise TargetFault("UnexpectedEnd", "object key expected")
            if arm(c != '"', 28, 29):
                raise TargetFault("UnexpectedChar", "object key must be a string")
            key = self.string()
            if arm(key in result, 30, 31):
                del result[key]  # last duplicate wins and moves to the end
            self.skip_ws()
            self.expect(":")
            result[key] = self.value()
            self.skip_ws()
            c = self.peek()
            if arm(c == ",", 32, 33):
                self.pos += 1
                continue
            if arm(c == "}", 34, 35):
                self.pos += 1
                self.depth -= 1
                return result
            if arm(c == "", 36, 37):
                raise TargetFault("UnexpectedEnd", "',' or '}' expected")
            raise TargetFault("UnexpectedChar", f"',' or '}}' expected, found {c!r}")

    def array(self) -> list:
        self.enter()
        self.pos += 1
        items: list = []
        self.skip_ws()
        if arm(self.peek() == "]", 38, 39):
            self.pos += 1
            self.depth -= 1
            return items
        while True:
            items.append(self.value())
            self.skip_ws()
            c = self.peek()
            if arm(c == ",", 40, 41):
                self.pos += 1
                continue
            if arm(c == "]", 42, 43):
                self.pos += 1
                self.depth -= 1
                return items
            if arm(c == "", 44, 45):
                raise TargetFault("UnexpectedEnd", "',' or ']' expected")
            raise TargetFault("UnexpectedChar", f"',' or ']' expected, found {c!r}")

    def string(self) -> str:
        self.pos += 1
        out: list[str] = []
        text = self.text
        while True:
            if arm(self.pos >= len(text), 46, 47):
                raise TargetFault("UnterminatedString")
            c = text[self.pos]
            if arm(c == '"', 48, 49):
                self.pos += 1
                return "".join(out)
            if arm(c == "\\", 50, 51):
                out.append(self.escape())
                continue
            if arm(ord(c) < 0x20, 52, 53):
                raise TargetFault("ControlCharacter", f"U+{ord(c):04X}")
            if arm(ord(c) > 0x7F, 54, 55):
                self.non_ascii = True
            out.append(c)
            self.pos += 1

    def escape(self) -> str:
        self.pos += 1
        code = self.peek()
        if arm(code == "", 56, 57):
            raise TargetFault("UnterminatedString")
        if arm(code in _ESCAPES, 58, 59):
            self.pos += 1
            return _ESCAPES[code]
        if arm(code != "u", 60, 61):
            raise TargetFault("BadEscape", repr(code))
        cp = self.hex4(self.pos + 1)
        self.pos += 5
        if arm(0xD800 <= cp <= 0xDBFF, 62, 63):
            low_ok = self.text.startswith("\\u", self.pos) and 0xDC00 <= self.hex4(self.pos + 2, strict=False) <= 0xDFFF
            if arm(low_ok, 64, 65):
                low = self.hex4(self.pos + 2)
                self.pos += 6
                return chr(0x10000 + ((cp - 0xD800) << 10) + (low - 0xDC00))
            raise TargetFault("LoneSurrogate", f"U+{cp:04X}")
        if arm(0xDC00 <= cp <= 0xDFFF, 66, 67):
            raise TargetFault("LoneSurrogate", f"U+{cp:04X}")
        return chr(cp)

    def hex4(self, at: int, strict: bool = True) -> int:
        digits = self.text[at:at + 4]
        if arm(len(digits) == 4 and all(d in _HEX for d in digits), 68, 69):
            return int(digits, 16)
        if strict:
            raise TargetFault("BadUnicodeEscape", repr(digits))
        return -1

    def digits(self) -> int:
        start = self.pos
        while arm(self.pos < len(self.text) and self.text[self.pos] in _DIGITS, 70, 71):
            self.pos += 1
        return self.pos - start

    def number(self):
        start = self.pos
        if arm(self.peek() == "-", 72, 73):
            self.pos += 1
        c = self.peek()
        if arm(c == "0", 74, 75):
            self.pos += 1
            if arm(self.peek() in _DIGITS, 76, 77):
                raise TargetFault("LeadingZero")
        elif arm(c in _ONENINE, 78, 79):
            self.digits()
        else:
            raise TargetFault("BadNumber", "digit expected")
        is_float = False
        if arm(self.peek() == ".", 80, 81):
            self.pos += 1
            if arm(self.digits() == 0, 82, 83):
                raise TargetFault("BadNumber", "digit expected after '.'")
            is_float = True
        if arm(self.peek() in ("e", "E"), 84, 85):
            self.pos += 1
            if arm(self.peek() in ("+", "-"), 86, 87):
                self.pos += 1
            if arm(self.digits() == 0, 88, 89):
                raise TargetFault("BadNumber", "digit expected in exponent")
            is_float = True
        literal = self.text[start:self.pos]
        if arm(is_float, 90, 91):
            return float(literal)
        return int(literal)


def process(text: str):
    if arm(not text, 92, 93):
        raise TargetFault("EmptyInput")
    parser = _Parser(text)
    value = parser.value()
    parser.skip_ws()
    if arm(parser.pos != len(text), 94, 95):
        raise TargetFault("TrailingData", f"at offset {parser.pos}")
    return value
