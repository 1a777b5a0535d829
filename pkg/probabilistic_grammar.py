"""
Probabilistic grammar: one weight per alternative, learned from sample inputs
by counting rule applications in their derivation trees.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from grammar_core import DerivationTree, Grammar, rule_applications
from input_parser import InputParseError, parse_input


class SampleParseError(InputParseError):
    """A learning sample is not in the grammar's language."""

    def __init__(self, index: int, name: str, offset: int):
        self.index = index
        self.name  = name
        super().__init__(f"sample {name!r} does not parse", offset)


@dataclass(frozen=True, eq=False)
class ProbabilisticGrammar:
    base:    Grammar
    weights: dict[str, tuple[float, ...]]

    def __post_init__(self) -> None:
        for name, alts in self.base.rules.items():
            w = self.weights.get(name)
            if w is None or len(w) != len(alts):
                raise ValueError(f"rule {name!r} needs {len(alts)} weights, got {w!r}")
            if any(x < 0 for x in w) or sum(w) <= 0:
                raise ValueError(f"rule {name!r} weights must be non-negative with a positive sum")

    @classmethod
    def uniform(cls, g: Grammar) -> "ProbabilisticGrammar":
        return cls(g, {name: tuple(1.0 / len(alts) for _ in alts) for name, alts in g.rules.items()})


def learn_from_trees(g: Grammar, trees: Iterable[DerivationTree]) -> ProbabilisticGrammar:
    """Add-one smoothed relative frequencies of rule applications."""
    counts: Counter[tuple[str, int]] = Counter()
    for tree in trees:
        counts.update(rule_applications(tree))
    weights: dict[str, tuple[float, ...]] = {}
    for name, alts in g.rules.items():
        per_alt = [counts[(name, i)] for i in range(len(alts))]
        denom   = sum(per_alt) + len(alts)
        weights[name] = tuple((c + 1) / denom for c in per_alt)
    return ProbabilisticGrammar(g, weights)


def learn_probabilities(g: Grammar, samples: list[str],
                        names: list[str] | None = None) -> ProbabilisticGrammar:
    """Parse every sample and learn smoothed rule probabilities from the trees."""
    trees = []
    for i, text in enumerate(samples):
        try:
            trees.append(parse_input(g, text))
        except InputParseError as e:
            label = names[i] if names else f"#{i}"
            raise SampleParseError(i, label, e.offset) from e
    return learn_from_trees(g, trees)


def mutate_probabilities(pg: ProbabilisticGrammar, rate: float,
                         rng: np.random.Generator) -> ProbabilisticGrammar:
    """Resample each rule's weights from a uniform Dirichlet with probability `rate`."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"rate must be within [0, 1], got {rate}")
    weights: dict[str, tuple[float, ...]] = {}
    for name, current in pg.weights.items():
        if rng.random() < rate:
            fresh = rng.dirichlet(np.ones(len(current)))
            weights[name] = tuple(float(x) for x in fresh / fresh.sum())
        else:
            weights[name] = current
    return ProbabilisticGrammar(pg.base, weights)
