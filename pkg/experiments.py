"""
Experiment presets.

Ids 1-7 are the comparison configurations; "custom" starts from the
grammar-only configuration (7) and is meant to be overridden with a
key=value file.
"""
from __future__ import annotations

from enum import Enum
from typing import Any, Literal, Mapping

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from fitness import FitnessConfig, FitnessMode
from fuzz_config import FUZZ_DEFAULTS


class InitialInput(str, Enum):
    PROBABILISTIC = "ProbabilisticFromSamples"
    RANDOM        = "RandomFromGrammar"


class MutationMode(str, Enum):
    NONE                = "None"
    GRAMMAR_PROBABILITY = "GrammarProbability"
    REORDER             = "ReorderElements"


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", validate_default=True)

    id:                        int | Literal["custom"] = "custom"
    initial_input:             InitialInput  = InitialInput.RANDOM
    fitness:                   FitnessConfig = FitnessConfig()
    crossover_enabled:         bool          = True
    mutation_mode:             MutationMode  = MutationMode.REORDER
    population_size:           int   = Field(default=100, ge=1)
    time_budget:               float = Field(default=600.0, gt=0)
    runs:                      int   = Field(default=30, ge=1)
    tournament_k:              int   = Field(default=4, ge=1)
    crossover_prob:            float = Field(default=0.9, ge=0.0, le=1.0)
    mutation_prob:             float = Field(default=0.3, ge=0.0, le=1.0)
    elitism_count:             int   = Field(default=1, ge=0)
    max_depth:                 int   = Field(default=FUZZ_DEFAULTS["max_depth"], ge=1)
    master_seed:               int   = Field(default=0, ge=0)
    probability_mutation_rate: float = Field(default=0.1, ge=0.0, le=1.0)
    timeout:                   float = Field(default=FUZZ_DEFAULTS["timeout"], gt=0)
    max_nodes:                 int   = Field(default=FUZZ_DEFAULTS["max_nodes"], ge=1)
    workers:                   int   = Field(default=FUZZ_DEFAULTS["workers"], ge=1)
    budget_clock:              Literal["work", "wall"] = FUZZ_DEFAULTS["budget_clock"]
    checkpoint:                bool  = False
    notes:                     tuple[str, ...] = ()

    @field_validator("id", mode="before")
    @classmethod
    def _known_id(cls, v: Any) -> Any:
        if isinstance(v, str) and v != "custom":
            v = int(v)
        if isinstance(v, int) and not 1 <= v <= 7:
            raise ValueError(f"experiment id must be 1-7 or 'custom', got {v}")
        return v

    @model_validator(mode="after")
    def _elites_fit(self) -> "ExperimentConfig":
        if self.elitism_count > self.population_size:
            raise ValueError(
                f"elitism_count {self.elitism_count} exceeds population_size {self.population_size}"
            )
        return self

    @property
    def label(self) -> str:
        return f"experiment {self.id}" if self.id != "custom" else "custom experiment"


# ─────────────────────────────────────────────────────────────────────────────
#  Experiment registry
#
#  Per-experiment fields:
#    initial_input     — ProbabilisticFromSamples (learn from samples/) or
#                        RandomFromGrammar (cold start)
#    fitness           — FitnessConfig fields: mode, w_feedback, w_structure
#    crossover_enabled — one-point crossover on the root container
#    mutation_mode     — None, GrammarProbability (mutate the learned weights)
#                        or ReorderElements (permute one container's items)
#    notes             — lines printed in the report header
# ─────────────────────────────────────────────────────────────────────────────

_DEFAULT_FLAGS = {
    "population_size": 100,
    "time_budget":     600.0,
    "runs":            30,
    "tournament_k":    4,
    "crossover_prob":  0.9,
    "mutation_prob":   0.3,
    "elitism_count":   1,
}

_PROBABILISTIC = {
    **_DEFAULT_FLAGS,
    "initial_input": InitialInput.PROBABILISTIC,
}

_BRANCH = {"mode": FitnessMode.BRANCH_COVERAGE}


def _weighted(w_feedback: float, w_structure: float) -> dict:
    return {"mode": FitnessMode.WEIGHTED, "w_feedback": w_feedback, "w_structure": w_structure}


EXPERIMENTS: dict[int, dict] = {

    1: {
        **_PROBABILISTIC,
        "fitness":           _weighted(0.5, 0.5),
        "crossover_enabled": False,
        "mutation_mode":     MutationMode.GRAMMAR_PROBABILITY,
        "notes": ("experiment 1 lists no fitness weights; (0.5, 0.5) assumed",),
    },

    2: {
        **_PROBABILISTIC,
        "fitness":           _weighted(0.5, 0.5),
        "crossover_enabled": False,
        "mutation_mode":     MutationMode.GRAMMAR_PROBABILITY,
    },

    3: {
        **_PROBABILISTIC,
        "fitness":           _weighted(0.9, 0.1),
        "crossover_enabled": False,
        "mutation_mode":     MutationMode.GRAMMAR_PROBABILITY,
    },

    4: {
        **_PROBABILISTIC,
        "fitness":           _weighted(0.1, 0.9),
        "crossover_enabled": False,
        "mutation_mode":     MutationMode.GRAMMAR_PROBABILITY,
    },

    5: {
        **_PROBABILISTIC,
        "fitness":           _BRANCH,
        "crossover_enabled": True,
        "mutation_mode":     MutationMode.NONE,
    },

    6: {
        **_PROBABILISTIC,
        "fitness":           _BRANCH,
        "crossover_enabled": True,
        "mutation_mode":     MutationMode.REORDER,
    },

    7: {
        **_DEFAULT_FLAGS,
        "initial_input":     InitialInput.RANDOM,
        "fitness":           _BRANCH,
        "crossover_enabled": True,
        "mutation_mode":     MutationMode.REORDER,
    },
}

_FITNESS_KEYS = {"fitness_mode": "mode", "w_feedback": "w_feedback", "w_structure": "w_structure"}


def build_experiment(experiment: int | str,
                     overrides: Mapping[str, Any] | None = None) -> ExperimentConfig:
    """Expand a preset id (or "custom") and apply field overrides.

    Overrides use ExperimentConfig field names, plus fitness_mode, w_feedback
    and w_structure for the fitness block. Raises pydantic.ValidationError on
    unknown keys or bad values, KeyError on an unknown preset id.
    """
    if experiment == "custom":
        fields: dict[str, Any] = {**EXPERIMENTS[7], "id": "custom"}
    else:
        key = int(experiment)
        if key not in EXPERIMENTS:
            raise KeyError(f"unknown experiment {experiment!r}; choose 1-7 or custom")
        fields = {**EXPERIMENTS[key], "id": key}
    fitness = dict(fields.pop("fitness"))
    given   = dict(overrides or {})

    for name, value in given.items():
        if name in _FITNESS_KEYS:
            fitness[_FITNESS_KEYS[name]] = value
        else:
            fields[name] = value
    if ("w_feedback" in given or "w_structure" in given) and "fitness_mode" not in given:
        fitness["mode"] = FitnessMode.WEIGHTED
    return ExperimentConfig(**fields, fitness=FitnessConfig(**fitness))


def load_overrides(path: str) -> dict[str, str]:
    """key=value lines (# comments allowed) as a dict of strings.

    Raises FileNotFoundError when the file is missing.
    """
    with open(path, encoding="utf-8") as f:
        values = dotenv_values(stream=f)
    return {k: v for k, v in values.items() if v is not None}
