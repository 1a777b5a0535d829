"""
Grammar core: production rules, derivation trees and the grammar file format.

Grammar file format (UTF-8), one statement per rule:

    name ::= seq | seq | ... ;

  - seq is a whitespace-separated list of symbols
  - "..." is a terminal literal; escapes \\"  \\\\  \\n  \\t  \\uXXXX
  - bare identifiers [A-Za-z_][A-Za-z0-9_-]* are nonterminals
  - ""   is the empty terminal (empty sequence)
  - #    starts a comment that runs to the end of the line

The first rule's left-hand side is the start symbol. Repeated rules for the
same name are merged, alternatives kept in file order.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Union


class GrammarError(ValueError):
    """Grammar file could not be read, or the grammar breaks an invariant."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line   = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class GenerationImpossible(GrammarError):
    """No derivation of the requested symbol fits in the depth budget."""


# ── Grammar symbols ───────────────────────────────────────────────────────────

@dataclass(frozen=True, slots=True)
class Lit:
    text: str


@dataclass(frozen=True, slots=True)
class Ref:
    name: str


Symbol      = Union[Lit, Ref]
Alternative = tuple[Symbol, ...]


@dataclass(frozen=True, eq=False)
class Grammar:
    rules:        dict[str, tuple[Alternative, ...]]
    start_symbol: str

    def alternatives(self, name: str) -> tuple[Alternative, ...]:
        return self.rules[name]

    @cached_property
    def min_heights(self) -> dict[str, float]:
        """Minimal derivation height per nonterminal (inf when it never bottoms out)."""
        heights = {name: math.inf for name in self.rules}
        changed = True
        while changed:
            changed = False
            for name, alts in self.rules.items():
                best = min(_alt_height(alt, heights) for alt in alts)
                if best < heights[name]:
                    heights[name] = best
                    changed = True
        return heights

    @cached_property
    def alt_min_heights(self) -> dict[str, tuple[float, ...]]:
        heights = self.min_heights
        return {
            name: tuple(_alt_height(alt, heights) for alt in alts)
            for name, alts in self.rules.items()
        }

    def __repr__(self) -> str:
        return f"Grammar(start={self.start_symbol!r}, rules={len(self.rules)})"


def _alt_height(alt: Alternative, heights: dict[str, float]) -> float:
    return 1 + max((heights[s.name] for s in alt if isinstance(s, Ref)), default=0)


# ── Derivation trees ──────────────────────────────────────────────────────────

@dataclass(frozen=True, slots=True)
class Terminal:
    text: str


@dataclass(frozen=True, slots=True)
class Nonterminal:
    name:      str
    alt_index: int
    children:  tuple["DerivationTree", ...]


DerivationTree = Union[Terminal, Nonterminal]
Path           = tuple[int, ...]


def serialize(tree: DerivationTree) -> str:
    """Concatenate terminal leaves left to right."""
    parts: list[str] = []
    stack = [tree]
    while stack:
        node = stack.pop()
        if isinstance(node, Terminal):
            parts.append(node.text)
        else:
            stack.extend(reversed(node.children))
    return "".join(parts)


def node_count(tree: DerivationTree) -> int:
    count = 0
    stack = [tree]
    while stack:
        node = stack.pop()
        count += 1
        if isinstance(node, Nonterminal):
            stack.extend(node.children)
    return count


def tree_height(tree: DerivationTree) -> int:
    """Number of nonterminal levels on the longest root-to-leaf path."""
    best  = 0
    stack = [(tree, 0)]
    while stack:
        node, depth = stack.pop()
        if isinstance(node, Nonterminal):
            depth += 1
            best = max(best, depth)
            stack.extend((child, depth) for child in node.children)
    return best


def iter_nodes(tree: DerivationTree) -> Iterator[tuple[Path, Nonterminal]]:
    """Yield (path, node) for every nonterminal node, pre-order."""
    stack: list[tuple[Path, DerivationTree]] = [((), tree)]
    while stack:
        path, node = stack.pop()
        if isinstance(node, Nonterminal):
            yield path, node
            for i in range(len(node.children) - 1, -1, -1):
                stack.append((path + (i,), node.children[i]))


def node_at(tree: DerivationTree, path: Path) -> DerivationTree:
    for i in path:
        tree = tree.children[i]  # type: ignore[union-attr]
    return tree


def replace_at(tree: DerivationTree, path: Path, subtree: DerivationTree) -> DerivationTree:
    """Return a copy of tree with the node at path replaced; tree is untouched."""
    if not path:
        return subtree
    spine = [tree]
    for i in path[:-1]:
        spine.append(spine[-1].children[i])  # type: ignore[union-attr]
    new = subtree
    for parent, i in zip(reversed(spine), reversed(path)):
        kids = list(parent.children)  # type: ignore[union-attr]
        kids[i] = new
        new = Nonterminal(parent.name, parent.alt_index, tuple(kids))  # type: ignore[union-attr]
    return new


def rule_applications(tree: DerivationTree) -> Iterator[tuple[str, int]]:
    for _, node in iter_nodes(tree):
        yield node.name, node.alt_index


# ── Grammar file parsing ──────────────────────────────────────────────────────

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<define>::=)
  | (?P<bar>\|)
  | (?P<end>;)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_-]*)
    """,
    re.VERBOSE,
)

_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}


@dataclass(frozen=True, slots=True)
class _Token:
    kind:   str
    value:  str
    line:   int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        column = pos - line_start + 1
        if m is None:
            if text[pos] == '"':
                raise GrammarError("unterminated string literal", line, column)
            raise GrammarError(f"unexpected character {text[pos]!r}", line, column)
        kind = m.lastgroup or ""
        if kind == "string":
            tokens.append(_Token(kind, _unescape(m.group(), line, column), line, column))
        elif kind not in ("ws", "comment"):
            tokens.append(_Token(kind, m.group(), line, column))
        newlines = m.group().count("\n")
        if newlines:
            line += newlines
            line_start = m.start() + m.group().rindex("\n") + 1
        pos = m.end()
    return tokens


def _unescape(literal: str, line: int, column: int) -> str:
    body = literal[1:-1]
    out: list[str] = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        code = body[i + 1]
        if code in _ESCAPES:
            out.append(_ESCAPES[code])
            i += 2
        elif code == "u" and re.fullmatch(r"[0-9A-Fa-f]{4}", body[i + 2:i + 6]):
            out.append(chr(int(body[i + 2:i + 6], 16)))
            i += 6
        else:
            raise GrammarError(f"invalid escape \\{code}", line, column + i + 1)
    return "".join(out)


def parse_grammar(text: str) -> Grammar:
    """Parse grammar-file content into a Grammar (rules in file order)."""
    tokens = _tokenize(text)
    rules: dict[str, list[Alternative]] = {}
    refs:  list[_Token] = []
    i = 0

    def expect(kind: str) -> _Token:
        nonlocal i
        if i >= len(tokens):
            last = tokens[-1] if tokens else _Token("eof", "", 1, 1)
            raise GrammarError(f"expected {kind!r} but reached end of file", last.line, last.column)
        tok = tokens[i]
        if tok.kind != kind:
            raise GrammarError(f"expected {kind!r}, found {tok.value!r}", tok.line, tok.column)
        i += 1
        return tok

    while i < len(tokens):
        lhs = expect("ident")
        expect("define")
        alts: list[Alternative] = []
        seq:  list[Symbol] = []
        while True:
            if i >= len(tokens):
                raise GrammarError(f"rule {lhs.value!r} is missing ';'", lhs.line, lhs.column)
            tok = tokens[i]
            i += 1
            if tok.kind == "string":
                seq.append(Lit(tok.value))
            elif tok.kind == "ident":
                seq.append(Ref(tok.value))
                refs.append(tok)
            elif tok.kind in ("bar", "end"):
                if not seq:
                    raise GrammarError("empty alternative (write \"\" for the empty sequence)",
                                       tok.line, tok.column)
                alts.append(tuple(seq))
                seq = []
                if tok.kind == "end":
                    break
            else:
                raise GrammarError(f"unexpected {tok.value!r}", tok.line, tok.column)
        rules.setdefault(lhs.value, []).extend(alts)

    if not rules:
        raise GrammarError("grammar has no rules", 1, 1)
    for tok in refs:
        if tok.value not in rules:
            raise GrammarError(f"undefined nonterminal {tok.value!r}", tok.line, tok.column)

    return Grammar(
        rules={name: tuple(alts) for name, alts in rules.items()},
        start_symbol=next(iter(rules)),
    )


def load_grammar(path: str) -> Grammar:
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise GrammarError(f"cannot read grammar file {path}: {e.strerror}") from e
    except UnicodeDecodeError as e:
        raise GrammarError(f"grammar file {path} is not UTF-8 (byte {e.start})") from e
    return parse_grammar(text)
