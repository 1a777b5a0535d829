"""
Derivation-tree generation from a grammar.

Alternatives are filtered by their minimal derivation height so that every
expansion is guaranteed to bottom out inside the depth budget; no rejection
sampling is needed. An optional node cap bounds size the same way: past it,
open expansions take their minimal derivation.
"""
from __future__ import annotations

from bisect import bisect_right
from itertools import accumulate
from typing import TYPE_CHECKING, Callable, Sequence

import numpy as np

from grammar_core import (
    DerivationTree,
    GenerationImpossible,
    Grammar,
    Lit,
    Nonterminal,
    Terminal,
)

if TYPE_CHECKING:
    from probabilistic_grammar import ProbabilisticGrammar

# chooser(rule name, admissible alternative indexes, rng) -> chosen index
Chooser = Callable[[str, Sequence[int], np.random.Generator], int]


def _pick(rng: np.random.Generator, n: int) -> int:
    return min(int(rng.random() * n), n - 1)


def _uniform(name: str, admissible: Sequence[int], rng: np.random.Generator) -> int:
    return admissible[_pick(rng, len(admissible))]


class _NodeBudget:
    """Nodes generated so far. Past the limit, expansion switches to minimal derivations."""

    def __init__(self, limit: int | None):
        if limit is not None and limit < 1:
            raise ValueError(f"max_nodes must be >= 1, got {limit}")
        self.limit = limit
        self.count = 0

    @property
    def spent(self) -> bool:
        return self.limit is not None and self.count >= self.limit


def _expand(g: Grammar, name: str, budget: int, rng: np.random.Generator,
            choose: Chooser, nodes: _NodeBudget) -> Nonterminal:
    heights    = g.alt_min_heights[name]
    admissible = [i for i, h in enumerate(heights) if h <= budget]
    if not admissible:
        raise GenerationImpossible(
            f"no derivation of {name!r} fits in depth {budget} "
            f"(minimal height {g.min_heights[name]})"
        )
    if nodes.spent:
        return minimal_tree(g, name)
    alt_index = choose(name, admissible, rng)
    nodes.count += 1
    children: list[DerivationTree] = []
    for sym in g.rules[name][alt_index]:
        if isinstance(sym, Lit):
            nodes.count += 1
            children.append(Terminal(sym.text))
        else:
            children.append(_expand(g, sym.name, budget - 1, rng, choose, nodes))
    return Nonterminal(name, alt_index, tuple(children))


def generate_random(g: Grammar, max_depth: int, rng: np.random.Generator,
                    max_nodes: int | None = None) -> Nonterminal:
    """Random tree rooted at the start symbol, alternatives chosen uniformly.

    With max_nodes, every expansion still open once that many nodes exist is
    finished with its minimal derivation.
    """
    if max_depth < 1:
        raise ValueError(f"max_depth must be >= 1, got {max_depth}")
    return _expand(g, g.start_symbol, max_depth, rng, _uniform, _NodeBudget(max_nodes))


def sample_weighted(pg: "ProbabilisticGrammar", max_depth: int,
                    rng: np.random.Generator, max_nodes: int | None = None) -> Nonterminal:
    """Like generate_random, but alternatives are drawn proportionally to pg's weights.

    Weights are renormalized over the depth-admissible alternatives. If every
    admissible alternative has zero weight the choice falls back to uniform.
    max_nodes caps growth the same way as in generate_random.
    """
    if max_depth < 1:
        raise ValueError(f"max_depth must be >= 1, got {max_depth}")

    def choose(name: str, admissible: Sequence[int], rng: np.random.Generator) -> int:
        weights = pg.weights[name]
        cumulative = list(accumulate(weights[i] for i in admissible))
        total = cumulative[-1]
        if total <= 0:
            return _uniform(name, admissible, rng)
        # bisect_right never lands on a zero-width interval
        k = bisect_right(cumulative, rng.random() * total)
        return admissible[min(k, len(admissible) - 1)]

    return _expand(pg.base, pg.base.start_symbol, max_depth, rng, choose, _NodeBudget(max_nodes))


# ── Minimal derivations ───────────────────────────────────────────────────────

def minimal_tree(g: Grammar, name: str) -> Nonterminal:
    """Deterministic smallest-height derivation (first minimal alternative)."""
    heights = g.alt_min_heights[name]
    best    = min(heights)
    if best == float("inf"):
        raise GenerationImpossible(f"{name!r} has no finite derivation")
    alt_index = heights.index(best)
    children: list[DerivationTree] = []
    for sym in g.rules[name][alt_index]:
        if isinstance(sym, Lit):
            children.append(Terminal(sym.text))
        else:
            children.append(minimal_tree(g, sym.name))
    return Nonterminal(name, alt_index, tuple(children))
