import os

import hypothesis
import numpy as np
import pytest

from fuzz_config import CONTAINER_SHAPES, ROOT
from genetic_ops import ContainerShape, GeneticOperators
from grammar_core import load_grammar
from harness import register_builtin_targets

hypothesis.settings.register_profile("dev", max_examples=50, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=1000, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "dev"))

SAMPLES_DIR = ROOT / "samples"


@pytest.fixture(scope="session")
def json_grammar():
    return load_grammar(str(ROOT / "grammars" / "json.g"))


@pytest.fixture(scope="session")
def small_grammar():
    return load_grammar(str(ROOT / "grammars" / "json_small.g"))


@pytest.fixture(scope="session")
def json_ops(json_grammar):
    return GeneticOperators(json_grammar, [ContainerShape(*s) for s in CONTAINER_SHAPES])


@pytest.fixture(scope="session")
def small_ops(small_grammar):
    return GeneticOperators(small_grammar, [ContainerShape("json", "pairs", "pair")])


@pytest.fixture(scope="session")
def samples():
    names = sorted(p.name for p in SAMPLES_DIR.iterdir())
    return [(SAMPLES_DIR / n).read_text(encoding="utf-8") for n in names]


@pytest.fixture(scope="session")
def builtin_targets():
    return {info.name: info for info in register_builtin_targets()}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
