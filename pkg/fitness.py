"""
Fitness functions.

Two modes:
  BranchCoverage — unique branches hit by one execution / branches in the target × 100
  Weighted       — w_feedback · feedback_score + w_structure · structure_score, both in [0, 1]
"""
from __future__ import annotations

import math
from enum import Enum
from typing import TYPE_CHECKING, Iterable

from pydantic import BaseModel, ConfigDict, Field, model_validator

if TYPE_CHECKING:
    from genetic_ops import Individual, Population
    from harness import ExecutionOutcome, TargetInfo


class FitnessError(ValueError):
    """Fitness called outside its contract."""


class InvalidTargetError(FitnessError):
    """Target declares no branches."""


class FitnessMode(str, Enum):
    BRANCH_COVERAGE = "BranchCoverage"
    WEIGHTED        = "Weighted"


class FitnessConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode:        FitnessMode = FitnessMode.BRANCH_COVERAGE
    w_feedback:  float       = Field(default=0.5, ge=0.0, le=1.0)
    w_structure: float       = Field(default=0.5, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _weights_sum_to_one(self) -> "FitnessConfig":
        if self.mode is FitnessMode.WEIGHTED and not math.isclose(
            self.w_feedback + self.w_structure, 1.0, rel_tol=0.0, abs_tol=1e-9
        ):
            raise ValueError(
                f"weights must sum to 1, got {self.w_feedback} + {self.w_structure}"
            )
        return self


def branch_fitness(b_exec: int, b_total: int) -> float:
    if b_total <= 0:
        raise InvalidTargetError(f"target has {b_total} branches")
    if not 0 <= b_exec <= b_total:
        raise FitnessError(f"covered branches {b_exec} outside [0, {b_total}]")
    return b_exec / b_total * 100


def weighted_fitness(feedback: float, structure: float, cfg: FitnessConfig) -> float:
    if cfg.mode is not FitnessMode.WEIGHTED:
        raise FitnessError("weighted_fitness needs a Weighted fitness config")
    for label, value in (("feedback", feedback), ("structure", structure)):
        if not 0.0 <= value <= 1.0:
            raise FitnessError(f"{label} score {value} outside [0, 1]")
    return cfg.w_feedback * feedback + cfg.w_structure * structure


def feedback_score(outcome: "ExecutionOutcome", known_types: Iterable[str] = ()) -> float:
    """0 without an exception; 0.5 plus up to 0.5 for exception types new to the campaign.

    known_types is the campaign's exception-type history before this generation.
    """
    if outcome.exception is None:
        return 0.0
    known     = set(known_types)
    triggered = {outcome.exception.type}
    new       = triggered - known
    seen      = max(1, len(known | triggered))
    return 0.5 + 0.5 * len(new) / seen


def structure_score(ind: "Individual", pop: "Population") -> float:
    """Node count relative to the largest member of the population."""
    if not pop.members:
        raise FitnessError("structure_score needs a non-empty population")
    largest = max(m.size for m in pop.members)
    return ind.size / largest if largest else 1.0


def score_individual(ind: "Individual", pop: "Population", cfg: FitnessConfig,
                     target: "TargetInfo", known_types: Iterable[str] = ()) -> float:
    """Fitness of an executed individual under the active mode."""
    outcome = ind.outcome
    if outcome is None:
        raise FitnessError("individual has not been executed")
    if cfg.mode is FitnessMode.BRANCH_COVERAGE:
        return branch_fitness(len(outcome.covered_branches), target.b_total)
    return weighted_fitness(
        feedback_score(outcome, known_types),
        structure_score(ind, pop),
        cfg,
    )
