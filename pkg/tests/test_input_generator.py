import json
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, strategies as st

from grammar_core import GenerationImpossible, node_count, parse_grammar, serialize, tree_height
from input_generator import generate_random, minimal_tree, sample_weighted
from input_parser import parses
from probabilistic_grammar import ProbabilisticGrammar


def test_single_derivation():
    g = parse_grammar('s ::= "a" ;')
    for seed in range(5):
        assert serialize(generate_random(g, 5, np.random.default_rng(seed))) == "a"


@given(seed=st.integers(0, 2**32 - 1))
def test_generated_json_is_valid(json_grammar, seed):
    tree = generate_random(json_grammar, 80, np.random.default_rng(seed))
    text = serialize(tree)
    assert tree_height(tree) <= 80
    assert parses(json_grammar, text)
    json.loads(text)


@given(seed=st.integers(0, 2**32 - 1), depth=st.integers(6, 20))
def test_depth_limit_respected(json_grammar, seed, depth):
    tree = generate_random(json_grammar, depth, np.random.default_rng(seed))
    assert tree_height(tree) <= depth


def test_shallow_budget_forces_terminating_alternative():
    g = parse_grammar('s ::= "(" s ")" | "x" ;')
    assert serialize(generate_random(g, 1, np.random.default_rng(0))) == "x"


def test_generation_impossible():
    g = parse_grammar('s ::= t ; t ::= "a" ;')
    with pytest.raises(GenerationImpossible):
        generate_random(g, 1, np.random.default_rng(0))


def test_max_depth_must_be_positive():
    g = parse_grammar('s ::= "a" ;')
    with pytest.raises(ValueError):
        generate_random(g, 0, np.random.default_rng(0))


def test_same_seed_same_tree(json_grammar):
    a = generate_random(json_grammar, 40, np.random.default_rng(7))
    b = generate_random(json_grammar, 40, np.random.default_rng(7))
    assert a == b


def test_zero_weight_alternative_never_drawn():
    g  = parse_grammar('s ::= "a" | "b" ;')
    pg = ProbabilisticGrammar(g, {"s": (1.0, 0.0)})
    rng = np.random.default_rng(3)
    assert {serialize(sample_weighted(pg, 3, rng)) for _ in range(200)} == {"a"}


def test_weighted_sampling_matches_weights():
    g  = parse_grammar('s ::= "a" | "b" | "c" ;')
    pg = ProbabilisticGrammar(g, {"s": (0.2, 0.3, 0.5)})
    rng = np.random.default_rng(0)
    n = 3000
    counts = Counter(serialize(sample_weighted(pg, 2, rng)) for _ in range(n))
    expected = {"a": 0.2 * n, "b": 0.3 * n, "c": 0.5 * n}
    chi2 = sum((counts[k] - e) ** 2 / e for k, e in expected.items())
    assert chi2 < 9.21  # df = 2, 1% level


def test_weights_renormalized_over_admissible_alternatives():
    g  = parse_grammar('s ::= "(" s ")" | "x" ;')
    pg = ProbabilisticGrammar(g, {"s": (0.99, 0.01)})
    assert serialize(sample_weighted(pg, 1, np.random.default_rng(0))) == "x"


def test_minimal_tree_is_deterministic(json_grammar):
    assert serialize(minimal_tree(json_grammar, "json")) == "{}"
    assert serialize(minimal_tree(json_grammar, "members")) == '"":{}'
    assert minimal_tree(json_grammar, "value") == minimal_tree(json_grammar, "value")


def _root_value_choice(tree):
    element = tree.children[0]
    return element.children[1].alt_index


def test_uniform_weights_match_uniform_generation(json_grammar):
    pg = ProbabilisticGrammar.uniform(json_grammar)
    n = 10_000
    rng_a, rng_b = np.random.default_rng(11), np.random.default_rng(12)
    plain    = Counter(_root_value_choice(generate_random(json_grammar, 8, rng_a)) for _ in range(n))
    weighted = Counter(_root_value_choice(sample_weighted(pg, 8, rng_b)) for _ in range(n))

    table = np.array([[plain[k] for k in range(3)], [weighted[k] for k in range(3)]], dtype=float)
    expected = table.sum(axis=1, keepdims=True) * table.sum(axis=0, keepdims=True) / table.sum()
    chi2 = float(((table - expected) ** 2 / expected).sum())
    assert chi2 < 9.21  # df = 2, 1% level


def _runaway_weights(g):
    weights = dict(ProbabilisticGrammar.uniform(g).weights)
    for name in ("members", "elements", "chars", "digits", "ws"):
        weights[name] = (0.01, 0.99)
    weights["value"] = (0.5, 0.49, 0.01)
    return ProbabilisticGrammar(g, weights)


def test_node_cap_stops_runaway_weights(json_grammar):
    pg  = _runaway_weights(json_grammar)
    rng = np.random.default_rng(5)
    for _ in range(20):
        tree = sample_weighted(pg, 40, rng, max_nodes=300)
        assert node_count(tree) <= 300 + 40 * 100
        assert tree_height(tree) <= 40
        json.loads(serialize(tree))


def test_node_cap_applies_to_uniform_generation(json_grammar):
    rng = np.random.default_rng(9)
    for _ in range(50):
        tree = generate_random(json_grammar, 30, rng, max_nodes=50)
        assert node_count(tree) <= 50 + 30 * 100
        assert parses(json_grammar, serialize(tree))


def test_node_cap_must_be_positive(json_grammar):
    with pytest.raises(ValueError):
        generate_random(json_grammar, 5, np.random.default_rng(0), max_nodes=0)
