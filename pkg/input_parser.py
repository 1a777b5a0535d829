"""
Parse concrete inputs back into derivation trees.

Top-down, memoized per (nonterminal, offset). Each memo entry maps every
reachable end offset to the first tree found for it, trying alternatives in
the order they are listed, so ambiguous inputs always get the same tree.
Left-recursive calls see an empty entry and fail instead of looping.
"""
from __future__ import annotations

import sys
from contextlib import contextmanager
from typing import Iterator

from grammar_core import DerivationTree, Grammar, Lit, Nonterminal, Terminal

_RECURSION_FLOOR = 20_000


class InputParseError(ValueError):
    """Text is not in the grammar's language."""

    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} at offset {offset}")


@contextmanager
def _deep_recursion() -> Iterator[None]:
    old = sys.getrecursionlimit()
    if old < _RECURSION_FLOOR:
        sys.setrecursionlimit(_RECURSION_FLOOR)
    try:
        yield
    finally:
        sys.setrecursionlimit(old)


class _ChartParser:
    def __init__(self, grammar: Grammar, text: str):
        self.grammar  = grammar
        self.text     = text
        self.memo:    dict[tuple[str, int], dict[int, Nonterminal]] = {}
        self.furthest = 0

    def parse(self, name: str, pos: int) -> dict[int, Nonterminal]:
        key = (name, pos)
        cached = self.memo.get(key)
        if cached is not None:
            return cached
        self.memo[key] = {}

        text = self.text
        results: dict[int, Nonterminal] = {}
        for alt_index, alt in enumerate(self.grammar.rules[name]):
            states: dict[int, tuple[DerivationTree, ...]] = {pos: ()}
            for sym in alt:
                advanced: dict[int, tuple[DerivationTree, ...]] = {}
                for at, kids in states.items():
                    if isinstance(sym, Lit):
                        if text.startswith(sym.text, at):
                            end = at + len(sym.text)
                            if end not in advanced:
                                advanced[end] = kids + (Terminal(sym.text),)
                        elif at > self.furthest:
                            self.furthest = at
                    else:
                        for end, sub in self.parse(sym.name, at).items():
                            if end not in advanced:
                                advanced[end] = kids + (sub,)
                states = advanced
                if not states:
                    break
            for end, kids in states.items():
                if end not in results:
                    results[end] = Nonterminal(name, alt_index, kids)
                    if end > self.furthest:
                        self.furthest = end

        self.memo[key] = results
        return results


def parse_input(g: Grammar, text: str) -> Nonterminal:
    """Derivation tree of text under g; raises InputParseError on failure."""
    parser = _ChartParser(g, text)
    with _deep_recursion():
        results = parser.parse(g.start_symbol, 0)
    tree = results.get(len(text))
    if tree is None:
        raise InputParseError(f"input does not match {g.start_symbol!r}", parser.furthest)
    return tree


def parses(g: Grammar, text: str) -> bool:
    try:
        parse_input(g, text)
    except InputParseError:
        return False
    return True
