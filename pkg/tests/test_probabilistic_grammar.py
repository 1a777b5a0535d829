import numpy as np
import pytest

from grammar_core import parse_grammar
from probabilistic_grammar import (
    ProbabilisticGrammar,
    SampleParseError,
    learn_probabilities,
    mutate_probabilities,
)

CORPUS = [
    "{}",
    '{"a":1}',
    '{"ab":"c"}',
    '{"a":true,"b":false}',
    '{"x":{}}',
]


def test_two_empty_objects(small_grammar):
    pg = learn_probabilities(small_grammar, ["{}", "{}"])
    assert pg.weights["json"] == pytest.approx((1 / 4, 3 / 4), abs=1e-9)


def test_unused_rules_stay_uniform(small_grammar):
    pg = learn_probabilities(small_grammar, ["{}"])
    assert pg.weights["value"] == pytest.approx((1 / 6,) * 6, abs=1e-9)


def test_hand_counted_corpus(small_grammar):
    pg = learn_probabilities(small_grammar, CORPUS)
    # json: 4 filled objects, 2 empty ones (one nested)
    assert pg.weights["json"] == pytest.approx((5 / 8, 3 / 8), abs=1e-9)
    # pairs: 4 single-pair tails, 1 pair followed by more pairs
    assert pg.weights["pairs"] == pytest.approx((5 / 7, 2 / 7), abs=1e-9)
    # value: string, number, json, true, false once each; null never
    assert pg.weights["value"] == pytest.approx((2 / 11,) * 5 + (1 / 11,), abs=1e-9)
    # letters: six single-letter tails ("ab" ends in one), one longer step
    assert pg.weights["letters"] == pytest.approx((7 / 9, 2 / 9), abs=1e-9)


def test_weights_are_distributions(json_grammar, samples):
    pg = learn_probabilities(json_grammar, samples)
    for name, weights in pg.weights.items():
        assert len(weights) == len(json_grammar.rules[name])
        assert sum(weights) == pytest.approx(1.0, abs=1e-9)
        assert all(w > 0 for w in weights)


def test_unparsable_sample_names_the_sample(small_grammar):
    with pytest.raises(SampleParseError) as info:
        learn_probabilities(small_grammar, ["{}", "{,}"], names=["ok.json", "bad.json"])
    assert info.value.index == 1
    assert info.value.name == "bad.json"
    assert info.value.offset == 1


def test_invalid_weights_rejected():
    g = parse_grammar('s ::= "a" | "b" ;')
    with pytest.raises(ValueError):
        ProbabilisticGrammar(g, {"s": (1.0,)})
    with pytest.raises(ValueError):
        ProbabilisticGrammar(g, {"s": (0.0, 0.0)})
    with pytest.raises(ValueError):
        ProbabilisticGrammar(g, {"s": (-0.5, 1.5)})


def test_mutation_rate_zero_is_identity(small_grammar):
    pg = learn_probabilities(small_grammar, CORPUS)
    same = mutate_probabilities(pg, 0.0, np.random.default_rng(0))
    assert same.weights == pg.weights


def test_mutation_rate_one_resamples_every_rule(small_grammar):
    pg = learn_probabilities(small_grammar, CORPUS)
    mutated = mutate_probabilities(pg, 1.0, np.random.default_rng(0))
    for name, weights in mutated.weights.items():
        assert sum(weights) == pytest.approx(1.0, abs=1e-9)
        if len(weights) > 1:
            assert weights != pg.weights[name]
    assert pg.weights == learn_probabilities(small_grammar, CORPUS).weights


@pytest.mark.parametrize("rate", [-0.1, 1.5])
def test_mutation_rate_out_of_range(small_grammar, rate):
    pg = ProbabilisticGrammar.uniform(small_grammar)
    with pytest.raises(ValueError):
        mutate_probabilities(pg, rate, np.random.default_rng(0))


def test_mutation_rate_half_selects_each_rule_half_the_time(json_grammar):
    pg = ProbabilisticGrammar.uniform(json_grammar)
    rng = np.random.default_rng(2)
    names = [name for name, w in pg.weights.items() if len(w) > 1]
    trials = 2000
    changed = dict.fromkeys(names, 0)
    for _ in range(trials):
        mutated = mutate_probabilities(pg, 0.5, rng)
        for name in names:
            changed[name] += mutated.weights[name] != pg.weights[name]

    overall = sum(changed.values()) / (trials * len(names))
    assert 0.45 <= overall <= 0.55
    for name, count in changed.items():
        assert 0.43 <= count / trials <= 0.57, name
