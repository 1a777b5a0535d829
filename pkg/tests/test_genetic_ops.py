from collections import Counter

import numpy as np
import pytest
from hypothesis import given, strategies as st

from genetic_ops import (
    ContainerShape,
    CrossoverInfeasible,
    GeneticOperators,
    Individual,
    Population,
    SelectionError,
    tournament_select,
)
from grammar_core import GrammarError, Nonterminal, parse_grammar, serialize
from input_generator import generate_random
from input_parser import parse_input, parses


def _ind(g, text):
    return Individual.from_tree(parse_input(g, text))


def _root_items(ops, ind):
    _, root = ops.root_container(ind.tree)
    return [serialize(item) for item in ops.items(root)]


def _scored(fitness_and_sizes):
    return Population([
        Individual(Nonterminal("s", 0, ()), f"m{i}", size, fitness)
        for i, (fitness, size) in enumerate(fitness_and_sizes)
    ])


# ── Splice crossover ──────────────────────────────────────────────────────────

def test_splice_example(json_grammar, json_ops):
    a, b = _ind(json_grammar, "[1,2]"), _ind(json_grammar, "[3,4]")
    c1, c2 = json_ops.splice(a, b, 1, 1)
    assert (c1.text, c2.text) == ("[1,4]", "[3,2]")
    assert (a.text, b.text) == ("[1,2]", "[3,4]")


@pytest.mark.parametrize("i, j, expected", [
    (0, 0, ("[3,4]", "[1,2]")),
    (2, 2, ("[1,2]", "[3,4]")),
    (0, 2, ("[]", "[3,4,1,2]")),
])
def test_splice_boundaries(json_grammar, json_ops, i, j, expected):
    c1, c2 = json_ops.splice(_ind(json_grammar, "[1,2]"), _ind(json_grammar, "[3,4]"), i, j)
    assert (c1.text, c2.text) == expected


def test_splice_objects_keep_whitespace(json_grammar, json_ops):
    a = _ind(json_grammar, '{ "a": 1, "b": 2 }')
    b = _ind(json_grammar, '{"c":3}')
    c1, c2 = json_ops.splice(a, b, 1, 0)
    assert c1.text == '{ "a": 1,"c":3}'
    assert c2.text == '{ "b": 2 }'


def test_splice_rejects_mismatched_roots(json_grammar, json_ops):
    with pytest.raises(CrossoverInfeasible):
        json_ops.splice(_ind(json_grammar, "[1]"), _ind(json_grammar, '{"a":1}'), 0, 0)


def test_crossover_on_small_grammar(small_grammar, small_ops, rng):
    a = _ind(small_grammar, '{"a":1}')
    b = _ind(small_grammar, '{"b":2,"c":3}')
    c1, c2 = small_ops.splice(a, b, 1, 1)
    assert (c1.text, c2.text) == ('{"a":1,"c":3}', '{"b":2}')
    for _ in range(20):
        for child in small_ops.one_point_crossover(a, b, rng):
            assert parses(small_grammar, child.text)


@given(seed=st.integers(0, 2**32 - 1))
def test_splice_conserves_root_items(json_grammar, json_ops, seed):
    rng = np.random.default_rng(seed)
    a = _ind(json_grammar, "[1,[2,3],{}]")
    b = _ind(json_grammar, '[true,"x"]')
    i, j = int(rng.integers(0, 4)), int(rng.integers(0, 3))
    c1, c2 = json_ops.splice(a, b, i, j)
    before = Counter(_root_items(json_ops, a) + _root_items(json_ops, b))
    after  = Counter(_root_items(json_ops, c1) + _root_items(json_ops, c2))
    assert before == after


# ── Subtree exchange ──────────────────────────────────────────────────────────

def test_scalar_parents_fall_back_to_subtree_exchange(json_grammar, json_ops, rng):
    a, b = _ind(json_grammar, "1"), _ind(json_grammar, '"x"')
    c1, c2 = json_ops.one_point_crossover(a, b, rng)
    assert parses(json_grammar, c1.text) and parses(json_grammar, c2.text)


def test_object_and_array_parents_exchange_subtrees(json_grammar, json_ops, monkeypatch):
    a, b = _ind(json_grammar, "{}"), _ind(json_grammar, "[1,2]")
    with pytest.raises(CrossoverInfeasible):
        json_ops.splice(a, b, 0, 0)

    calls = []
    exchange = json_ops.subtree_exchange
    monkeypatch.setattr(json_ops, "subtree_exchange",
                        lambda *args: calls.append(args) or exchange(*args))
    rng = np.random.default_rng(77)
    for _ in range(50):
        c1, c2 = json_ops.one_point_crossover(a, b, rng)
        assert parses(json_grammar, c1.text) and parses(json_grammar, c2.text)
    assert len(calls) == 50
    assert (a.text, b.text) == ("{}", "[1,2]")


def test_nothing_to_exchange():
    g = parse_grammar('s ::= "a" | "b" ;')
    ops = GeneticOperators(g, [])
    a = Individual.from_tree(parse_input(g, "a"))
    b = Individual.from_tree(parse_input(g, "b"))
    with pytest.raises(CrossoverInfeasible):
        ops.one_point_crossover(a, b, np.random.default_rng(0))


# ── Reorder mutation ──────────────────────────────────────────────────────────

def test_reorder_permutes_root_items(json_grammar, json_ops, rng):
    ind = _ind(json_grammar, "[1,2,3]")
    for _ in range(20):
        mutated = json_ops.reorder_mutation(ind, rng)
        assert sorted(_root_items(json_ops, mutated)) == ["1", "2", "3"]
        assert mutated.text != ind.text
    assert ind.text == "[1,2,3]"


def test_reorder_without_eligible_container(json_grammar, json_ops, rng):
    ind = _ind(json_grammar, "[[1]]")
    mutated = json_ops.reorder_mutation(ind, rng)
    assert mutated.tree is ind.tree
    assert mutated.fitness is None


@given(seed=st.integers(0, 2**32 - 1))
def test_reorder_keeps_character_multiset(json_grammar, json_ops, seed):
    rng = np.random.default_rng(seed)
    ind = Individual.from_tree(generate_random(json_grammar, 40, rng))
    mutated = json_ops.reorder_mutation(ind, rng)
    assert Counter(mutated.text) == Counter(ind.text)
    assert parses(json_grammar, mutated.text)


# ── Validity closure ──────────────────────────────────────────────────────────

def test_offspring_stay_in_language(json_grammar, json_ops):
    rng = np.random.default_rng(2024)
    pool = [Individual.from_tree(generate_random(json_grammar, 30, rng)) for _ in range(60)]
    for _ in range(200):
        a = pool[int(rng.integers(0, len(pool)))]
        b = pool[int(rng.integers(0, len(pool)))]
        try:
            children = json_ops.one_point_crossover(a, b, rng)
        except CrossoverInfeasible:
            continue
        for child in children:
            assert parses(json_grammar, child.text)
            mutant = json_ops.reorder_mutation(child, rng)
            assert parses(json_grammar, mutant.text)


def test_bad_container_shape(json_grammar):
    with pytest.raises(GrammarError):
        GeneticOperators(json_grammar, [ContainerShape("object", "elements", "member")])
    with pytest.raises(GrammarError):
        GeneticOperators(json_grammar, [ContainerShape("object", "members", "nope")])


# ── Tournament selection ──────────────────────────────────────────────────────

def test_full_tournament_returns_best(rng):
    pop = _scored([(10, 5), (40, 9), (40, 3), (5, 1)])
    for _ in range(10):
        assert tournament_select(pop, 4, rng) is pop.members[2]
    assert pop.best() is pop.members[2]


def test_ties_broken_by_size_then_index(rng):
    pop = _scored([(50, 4), (50, 4), (50, 9)])
    assert tournament_select(pop, 3, rng) is pop.members[0]


def test_single_member_tournament(rng):
    pop = _scored([(1, 1), (2, 1), (3, 1)])
    winners = {tournament_select(pop, 1, rng).text for _ in range(100)}
    assert winners == {"m0", "m1", "m2"}


def test_tournament_preconditions(rng):
    pop = _scored([(1, 1), (2, 1)])
    with pytest.raises(SelectionError):
        tournament_select(pop, 0, rng)
    with pytest.raises(SelectionError):
        tournament_select(pop, 3, rng)
    pop.members[1].fitness = None
    with pytest.raises(SelectionError):
        tournament_select(pop, 1, rng)


def test_clone_keeps_evaluation():
    ind = Individual(Nonterminal("s", 0, ()), "x", 1, fitness=12.5)
    twin = ind.clone()
    assert twin is not ind
    assert (twin.tree, twin.text, twin.fitness) == (ind.tree, "x", 12.5)


# ── Closure at scale ──────────────────────────────────────────────────────────

def _random_pool(json_grammar, rng, size=200):
    return [Individual.from_tree(generate_random(json_grammar, 12, rng)) for _ in range(size)]


@pytest.mark.slow
def test_crossover_closure_over_ten_thousand_pairs(json_grammar, json_ops):
    rng = np.random.default_rng(31)
    pool = _random_pool(json_grammar, rng)
    checked = 0
    while checked < 10_000:
        a = pool[int(rng.integers(0, len(pool)))]
        b = pool[int(rng.integers(0, len(pool)))]
        try:
            children = json_ops.one_point_crossover(a, b, rng)
        except CrossoverInfeasible:
            continue
        for child in children:
            assert parses(json_grammar, child.text), child.text
        checked += 1


@pytest.mark.slow
def test_reorder_closure_over_ten_thousand_mutants(json_grammar, json_ops):
    rng = np.random.default_rng(32)
    pool = _random_pool(json_grammar, rng)
    for _ in range(10_000):
        parent = pool[int(rng.integers(0, len(pool)))]
        mutant = json_ops.reorder_mutation(parent, rng)
        assert parses(json_grammar, mutant.text), mutant.text
