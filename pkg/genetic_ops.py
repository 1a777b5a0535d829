"""
Genetic operators over derivation trees.

Operators never touch raw text: they cut, splice and permute the item
subtrees of container nodes (JSON objects and arrays) and rebuild the
separator chain from the grammar, so every offspring stays in the language.
Parents are never modified.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from grammar_core import (
    DerivationTree,
    Grammar,
    GrammarError,
    Lit,
    Nonterminal,
    Path,
    Ref,
    Terminal,
    iter_nodes,
    node_at,
    node_count,
    replace_at,
    serialize,
)
from input_generator import minimal_tree

if TYPE_CHECKING:
    from harness import ExecutionOutcome


class CrossoverInfeasible(Exception):
    """Parents share no nonterminal that could be exchanged."""


class SelectionError(ValueError):
    """Tournament called on members without fitness, or with a bad size."""


# ── Individuals ───────────────────────────────────────────────────────────────

@dataclass(eq=False)
class Individual:
    tree:    Nonterminal
    text:    str
    size:    int
    fitness: float | None = None
    outcome: "ExecutionOutcome | None" = None

    @classmethod
    def from_tree(cls, tree: Nonterminal) -> "Individual":
        return cls(tree, serialize(tree), node_count(tree))

    def clone(self) -> "Individual":
        """Same input, cached evaluation kept."""
        return Individual(self.tree, self.text, self.size, self.fitness, self.outcome)


@dataclass
class Population:
    members:    list[Individual]
    generation: int = 0

    def __len__(self) -> int:
        return len(self.members)

    def best(self) -> Individual:
        return self.members[ranked_indexes(self.members)[0]]


def _rank_key(members: Sequence[Individual], i: int) -> tuple[float, int, int]:
    ind = members[i]
    if ind.fitness is None:
        raise SelectionError(f"member {i} has no fitness")
    return (-ind.fitness, ind.size, i)


def ranked_indexes(members: Sequence[Individual]) -> list[int]:
    """Best first: higher fitness, then smaller tree, then earlier index."""
    return sorted(range(len(members)), key=lambda i: _rank_key(members, i))


def tournament_select(pop: Population, k: int, rng: np.random.Generator) -> Individual:
    members = pop.members
    if not 1 <= k <= len(members):
        raise SelectionError(f"tournament size {k} outside [1, {len(members)}]")
    unset = [i for i, m in enumerate(members) if m.fitness is None]
    if unset:
        raise SelectionError(f"members without fitness: {unset[:5]}")
    contestants = rng.choice(len(members), size=k, replace=False)
    winner = min((int(i) for i in contestants), key=lambda i: _rank_key(members, i))
    return members[winner]


# ── Container shapes ──────────────────────────────────────────────────────────

@dataclass(frozen=True)
class ContainerShape:
    """A sequence-bearing rule, e.g. object ::= "{" ws "}" | "{" members "}"
    with members ::= member | member "," members."""
    container: str
    sequence:  str
    item:      str


@dataclass(frozen=True)
class _ResolvedShape:
    shape:           ContainerShape
    empty_alt:       int
    empty_children:  tuple[DerivationTree, ...]
    filled_alt:      int
    filled_children: tuple[DerivationTree, ...]
    slot:            int
    single_alt:      int
    pair_alt:        int
    separator:       tuple[DerivationTree, ...]


def _filler(g: Grammar, alt: tuple, skip: int | None = None) -> tuple[DerivationTree, ...]:
    kids: list[DerivationTree] = []
    for i, sym in enumerate(alt):
        if i == skip:
            kids.append(Terminal(""))  # placeholder, replaced on rebuild
        elif isinstance(sym, Lit):
            kids.append(Terminal(sym.text))
        else:
            kids.append(minimal_tree(g, sym.name))
    return tuple(kids)


def _resolve(g: Grammar, shape: ContainerShape) -> _ResolvedShape:
    for name in (shape.container, shape.sequence, shape.item):
        if name not in g.rules:
            raise GrammarError(f"container shape refers to unknown rule {name!r}")

    seq_ref   = Ref(shape.sequence)
    item_ref  = Ref(shape.item)
    container = g.rules[shape.container]
    filled    = [i for i, alt in enumerate(container) if seq_ref in alt]
    empty     = [i for i, alt in enumerate(container) if seq_ref not in alt]
    if len(filled) != 1 or not empty:
        raise GrammarError(
            f"{shape.container!r} needs exactly one alternative using {shape.sequence!r} "
            "and at least one without it"
        )
    filled_alt = filled[0]
    slot       = container[filled_alt].index(seq_ref)

    seq_alts = g.rules[shape.sequence]
    singles  = [i for i, alt in enumerate(seq_alts) if alt == (item_ref,)]
    pairs    = [i for i, alt in enumerate(seq_alts)
                if len(alt) >= 2 and alt[0] == item_ref and alt[-1] == seq_ref]
    if len(seq_alts) != 2 or len(singles) != 1 or len(pairs) != 1:
        raise GrammarError(
            f"{shape.sequence!r} must be exactly `{shape.item} | {shape.item} <sep> {shape.sequence}`"
        )
    pair_alt = pairs[0]
    return _ResolvedShape(
        shape=shape,
        empty_alt=empty[0],
        empty_children=_filler(g, container[empty[0]]),
        filled_alt=filled_alt,
        filled_children=_filler(g, container[filled_alt], skip=slot),
        slot=slot,
        single_alt=singles[0],
        pair_alt=pair_alt,
        separator=_filler(g, seq_alts[pair_alt][1:-1]),
    )


# ── Operators ─────────────────────────────────────────────────────────────────

class GeneticOperators:
    """Crossover and mutation bound to one grammar and its container shapes."""

    def __init__(self, grammar: Grammar, shapes: Sequence[ContainerShape]):
        self.grammar = grammar
        self._shapes = {s.container: _resolve(grammar, s) for s in shapes}

    # ── Container helpers ───────────────────────────────────────────────────

    def is_container(self, node: DerivationTree) -> bool:
        return isinstance(node, Nonterminal) and node.name in self._shapes

    def items(self, node: Nonterminal) -> list[DerivationTree]:
        """Item subtrees (object members / array elements) of a container node."""
        rs = self._shapes[node.name]
        if node.alt_index != rs.filled_alt:
            return []
        out: list[DerivationTree] = []
        seq = node.children[rs.slot]
        while isinstance(seq, Nonterminal):
            out.append(seq.children[0])
            if seq.alt_index == rs.single_alt:
                break
            seq = seq.children[-1]
        return out

    def rebuild(self, node: Nonterminal, items: Sequence[DerivationTree]) -> Nonterminal:
        """Container of the same kind holding `items`, separators regenerated."""
        rs = self._shapes[node.name]
        if not items:
            if node.alt_index == rs.empty_alt:
                return node
            return Nonterminal(node.name, rs.empty_alt, rs.empty_children)

        name = rs.shape.sequence
        seq  = Nonterminal(name, rs.single_alt, (items[-1],))
        for item in reversed(items[:-1]):
            seq = Nonterminal(name, rs.pair_alt, (item, *rs.separator, seq))

        kids = list(node.children if node.alt_index == rs.filled_alt else rs.filled_children)
        kids[rs.slot] = seq
        return Nonterminal(node.name, rs.filled_alt, tuple(kids))

    def root_container(self, tree: Nonterminal) -> tuple[Path, Nonterminal] | None:
        """Outermost container node, or None when the input is a scalar."""
        for path, node in iter_nodes(tree):
            if node.name in self._shapes:
                return path, node
        return None

    def containers(self, tree: Nonterminal, min_items: int = 0) -> list[tuple[Path, Nonterminal]]:
        return [
            (path, node) for path, node in iter_nodes(tree)
            if node.name in self._shapes and len(self.items(node)) >= min_items
        ]

    # ── Crossover ───────────────────────────────────────────────────────────

    def one_point_crossover(self, a: Individual, b: Individual,
                            rng: np.random.Generator) -> tuple[Individual, Individual]:
        ra = self.root_container(a.tree)
        rb = self.root_container(b.tree)
        if ra is not None and rb is not None and ra[1].name == rb[1].name:
            len_a = len(self.items(ra[1]))
            len_b = len(self.items(rb[1]))
            if len_a and len_b:
                i = int(rng.integers(0, len_a + 1))
                j = int(rng.integers(0, len_b + 1))
                return self.splice(a, b, i, j)
        return self.subtree_exchange(a, b, rng)

    def splice(self, a: Individual, b: Individual, i: int, j: int) -> tuple[Individual, Individual]:
        """child1 = A[:i] + B[j:], child2 = B[:j] + A[i:] over the root sequences."""
        ra = self.root_container(a.tree)
        rb = self.root_container(b.tree)
        if ra is None or rb is None or ra[1].name != rb[1].name:
            raise CrossoverInfeasible("splice needs two roots of the same container kind")
        (path_a, root_a), (path_b, root_b) = ra, rb
        A, B = self.items(root_a), self.items(root_b)
        if not (0 <= i <= len(A) and 0 <= j <= len(B)):
            raise ValueError(f"cut points ({i}, {j}) outside ({len(A)}, {len(B)})")
        child1 = replace_at(a.tree, path_a, self.rebuild(root_a, A[:i] + B[j:]))
        child2 = replace_at(b.tree, path_b, self.rebuild(root_b, B[:j] + A[i:]))
        return Individual.from_tree(child1), Individual.from_tree(child2)

    def subtree_exchange(self, a: Individual, b: Individual,
                         rng: np.random.Generator) -> tuple[Individual, Individual]:
        """Swap one random same-named nonterminal subtree between the parents."""
        in_b: dict[str, list[Path]] = {}
        for path, node in iter_nodes(b.tree):
            if path:
                in_b.setdefault(node.name, []).append(path)
        candidates = [(path, node) for path, node in iter_nodes(a.tree)
                      if path and node.name in in_b]
        if not candidates:
            raise CrossoverInfeasible("parents share no exchangeable nonterminal")

        path_a, node_a = candidates[int(rng.integers(0, len(candidates)))]
        paths_b = in_b[node_a.name]
        path_b  = paths_b[int(rng.integers(0, len(paths_b)))]
        node_b  = node_at(b.tree, path_b)

        child1 = replace_at(a.tree, path_a, node_b)
        child2 = replace_at(b.tree, path_b, node_a)
        return Individual.from_tree(child1), Individual.from_tree(child2)

    # ── Mutation ────────────────────────────────────────────────────────────

    def reorder_mutation(self, ind: Individual, rng: np.random.Generator) -> Individual:
        """Permute the items of one random container holding at least two of them."""
        eligible = self.containers(ind.tree, min_items=2)
        if not eligible:
            return Individual(ind.tree, ind.text, ind.size)
        path, node = eligible[int(rng.integers(0, len(eligible)))]
        items = self.items(node)
        order = _non_identity_permutation(len(items), rng)
        mutated = self.rebuild(node, [items[k] for k in order])
        return Individual.from_tree(replace_at(ind.tree, path, mutated))


def _non_identity_permutation(n: int, rng: np.random.Generator) -> list[int]:
    identity = list(range(n))
    while True:
        order = [int(x) for x in rng.permutation(n)]
        if order != identity:
            return order
