import numpy as np
import pytest
from hypothesis import given, strategies as st

from grammar_core import parse_grammar, serialize
from input_generator import generate_random
from input_parser import InputParseError, parse_input, parses


@given(seed=st.integers(0, 2**32 - 1))
def test_generated_inputs_reparse_to_same_text(json_grammar, seed):
    text = serialize(generate_random(json_grammar, 60, np.random.default_rng(seed)))
    assert serialize(parse_input(json_grammar, text)) == text


def test_shipped_samples_parse(json_grammar, samples):
    assert len(samples) == 5
    for text in samples:
        assert serialize(parse_input(json_grammar, text)) == text


@pytest.mark.parametrize("text, ok", [
    ("{}", True),
    ('{"a":1}', True),
    ('{"a":{"b":true},"c":"x9"}', True),
    ('{"a":1,}', False),
    ('{"a": 1}', False),
    ("[]", False),
])
def test_small_grammar_membership(small_grammar, text, ok):
    assert parses(small_grammar, text) is ok


def test_failure_offset(small_grammar):
    with pytest.raises(InputParseError) as info:
        parse_input(small_grammar, "{")
    assert info.value.offset == 1


def test_trailing_garbage_offset(small_grammar):
    with pytest.raises(InputParseError) as info:
        parse_input(small_grammar, "{}x")
    assert info.value.offset == 2


def test_ambiguous_input_gets_first_listed_tree():
    g = parse_grammar('s ::= a | b ; a ::= "x" ; b ::= "x" ;')
    tree = parse_input(g, "x")
    assert tree.alt_index == 0
    assert tree.children[0].name == "a"


def test_left_recursion_terminates():
    g = parse_grammar('s ::= s "a" | "a" ;')
    assert parses(g, "a")
    assert not parses(g, "b")


def test_deep_nesting(json_grammar):
    text = "[" * 300 + "]" * 300
    assert serialize(parse_input(json_grammar, text)) == text
