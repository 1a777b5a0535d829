"""
Evolution engine: time-budgeted fuzzing campaigns.

A campaign repeats `runs` independent runs. Within a run every selected
target gets its own population, campaign state and random stream, and an
equal share of the run's time budget. Each generation keeps the elites,
fills the rest by tournament selection + crossover + mutation (or, in
GrammarProbability mode, by sampling a re-learned and mutated probabilistic
grammar) and evaluates the newcomers against the target. The budget is
checked while offspring are built; a generation cut short is completed with
evaluated members carried over from the previous one.
"""
from __future__ import annotations

import json
import logging
import os
import time
from concurrent.futures import Executor, ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict

from experiments import ExperimentConfig, InitialInput, MutationMode
from fitness import score_individual
from fuzz_config import CONTAINER_SHAPES, WORK_COSTS
from genetic_ops import (
    ContainerShape,
    CrossoverInfeasible,
    GeneticOperators,
    Individual,
    Population,
    ranked_indexes,
    tournament_select,
)
from grammar_core import Grammar
from harness import ExecutionOutcome, TargetInfo, execute, get_target
from input_generator import generate_random, sample_weighted
from probabilistic_grammar import (
    ProbabilisticGrammar,
    learn_from_trees,
    learn_probabilities,
    mutate_probabilities,
)

log = logging.getLogger(__name__)


class SamplesRequiredError(ValueError):
    """Probabilistic initialisation was requested without sample inputs."""


# ── Campaign state ────────────────────────────────────────────────────────────

@dataclass
class CampaignState:
    """Everything one (run, target) campaign has seen so far."""
    branches:        set[int] = field(default_factory=set)
    lines:           set[int] = field(default_factory=set)
    functions:       set[int] = field(default_factory=set)
    exception_sites: dict[tuple[str, str], int] = field(default_factory=dict)  # (type, location) -> first generation
    executions:      int = 0
    weights:         ProbabilisticGrammar | None = None

    def known_types(self) -> frozenset[str]:
        return frozenset(t for t, _ in self.exception_sites)

    def absorb(self, outcome: ExecutionOutcome, generation: int) -> None:
        self.branches  |= outcome.covered_branches
        self.lines     |= outcome.covered_lines
        self.functions |= outcome.covered_functions
        self.executions += 1
        exc = outcome.exception
        if exc is not None:
            self.exception_sites.setdefault((exc.type, exc.location), generation)

    def to_checkpoint(self) -> dict:
        return {
            "branches":   sorted(self.branches),
            "lines":      sorted(self.lines),
            "functions":  sorted(self.functions),
            "executions": self.executions,
            "exceptions": [
                {"type": t, "location": loc, "first_generation": g}
                for (t, loc), g in sorted(self.exception_sites.items())
            ],
            "weights": (
                {name: list(w) for name, w in self.weights.weights.items()}
                if self.weights is not None else None
            ),
        }


class BudgetClock:
    """Decides when a campaign's time share is used up.

    "work" mode charges a fixed virtual cost per execution, per
    instrumentation step and per generated tree node, so the stopping point
    does not depend on machine load; wall time still caps it. "wall" mode
    uses wall time only.
    """

    def __init__(self, budget: float, mode: str = "work", costs: dict[str, float] = WORK_COSTS):
        if mode not in ("work", "wall"):
            raise ValueError(f"budget clock mode must be 'work' or 'wall', got {mode!r}")
        self.budget  = budget
        self.mode    = mode
        self.costs   = costs
        self.work    = 0.0
        self.started = time.perf_counter()

    def charge_execution(self, outcome: ExecutionOutcome) -> None:
        if outcome.steps:
            self.work += self.costs["execution"] + self.costs["step"] * outcome.steps
        else:
            self.work += self.costs["execution"] + outcome.duration  # external targets report no steps

    def charge_nodes(self, count: int) -> None:
        self.work += self.costs["node"] * count

    def wall(self) -> float:
        return time.perf_counter() - self.started

    def stop_reason(self) -> str | None:
        if self.mode == "work" and self.work >= self.budget:
            return "work"
        if self.wall() >= self.budget:
            return "wall"
        return None

    def exhausted(self) -> bool:
        return self.stop_reason() is not None


ClockFactory = Callable[[float, str], BudgetClock]


# ── Report models ─────────────────────────────────────────────────────────────

class MetricSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    max:        float
    mean:       float
    sd:         float
    cumulative: float


class ExceptionHit(BaseModel):
    model_config = ConfigDict(frozen=True)

    type:             str
    location:         str
    first_generation: int


class RunRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    run_id:      int
    target:      str
    seed:        int
    generations: int
    executions:  int
    metrics:     dict[str, MetricSummary]
    exceptions:  list[ExceptionHit]
    stop_reason: str
    wall_time:   float


class CampaignReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    config:    ExperimentConfig
    targets:   list[str]
    runs:      list[RunRecord]
    wall_time: float

    def exception_frequencies(self) -> dict[tuple[str, str, str], int]:
        """(target, type, location) -> number of runs that triggered it."""
        counts: dict[tuple[str, str, str], int] = {}
        for record in self.runs:
            for hit in record.exceptions:
                key = (record.target, hit.type, hit.location)
                counts[key] = counts.get(key, 0) + 1
        return dict(sorted(counts.items()))

    def reproducible_json(self) -> str:
        """The report without wall-clock fields."""
        return self.model_dump_json(exclude={
            "wall_time": True,
            "runs": {"__all__": {"wall_time"}},
        })


# ── Population lifecycle ──────────────────────────────────────────────────────

def init_population(cfg: ExperimentConfig, grammar: Grammar, samples: Sequence[str] | None,
                    rng: np.random.Generator, state: CampaignState | None = None,
                    sample_names: Sequence[str] | None = None) -> Population:
    """Generation 0: learned from samples or drawn uniformly from the grammar."""
    size = cfg.population_size
    if cfg.initial_input is InitialInput.PROBABILISTIC:
        if not samples:
            raise SamplesRequiredError(f"{cfg.label} learns from samples but none were given")
        pg = learn_probabilities(grammar, list(samples), list(sample_names) if sample_names else None)
        trees = [sample_weighted(pg, cfg.max_depth, rng, cfg.max_nodes) for _ in range(size)]
    else:
        pg = ProbabilisticGrammar.uniform(grammar)
        trees = [generate_random(grammar, cfg.max_depth, rng, cfg.max_nodes) for _ in range(size)]
    if state is not None:
        state.weights = pg
    return Population([Individual.from_tree(t) for t in trees], generation=0)


def evaluate_population(pop: Population, cfg: ExperimentConfig, target: TargetInfo,
                        state: CampaignState, clock: BudgetClock | None = None,
                        pool: Executor | None = None) -> None:
    """Execute members without an outcome, then score every member lacking fitness.

    The exception history used by the feedback score is the one from before
    this generation; the new outcomes are absorbed afterwards.
    """
    pending = [m for m in pop.members if m.outcome is None]
    texts   = [m.text for m in pending]
    if pool is not None:
        outcomes = list(pool.map(lambda t: execute(target, t, cfg.timeout), texts))
    else:
        outcomes = [execute(target, t, cfg.timeout) for t in texts]
    for member, outcome in zip(pending, outcomes):
        member.outcome = outcome

    known = state.known_types()
    for member in pop.members:
        if member.fitness is None:
            member.fitness = score_individual(member, pop, cfg.fitness, target, known)

    for outcome in outcomes:
        state.absorb(outcome, pop.generation)
        if clock is not None:
            clock.charge_execution(outcome)


def _spent(clock: BudgetClock | None, child: Individual) -> bool:
    """Charge a freshly built child and report whether the budget ran out."""
    if clock is None:
        return False
    if child.outcome is None:
        clock.charge_nodes(child.size)
    return clock.stop_reason() is not None


def _offspring(pop: Population, cfg: ExperimentConfig, ops: GeneticOperators,
               rng: np.random.Generator, count: int,
               clock: BudgetClock | None = None) -> list[Individual]:
    k = min(cfg.tournament_k, len(pop))
    children: list[Individual] = []
    spent = False
    while len(children) < count and not spent:
        a = tournament_select(pop, k, rng)
        b = tournament_select(pop, k, rng)
        if cfg.crossover_enabled and rng.random() < cfg.crossover_prob:
            try:
                c1, c2 = ops.one_point_crossover(a, b, rng)
            except CrossoverInfeasible:
                c1, c2 = a.clone(), b.clone()
        else:
            c1, c2 = a.clone(), b.clone()

        for child, parent in ((c1, a), (c2, b)):
            if cfg.mutation_mode is MutationMode.REORDER and rng.random() < cfg.mutation_prob:
                mutated = ops.reorder_mutation(child, rng)
                if mutated.tree is not child.tree:
                    child = mutated
            if child.size > cfg.max_nodes:
                child = parent.clone()
            if len(children) < count and not spent:
                children.append(child)
                spent = _spent(clock, child)
    return children


def _resampled(pop: Population, cfg: ExperimentConfig, ops: GeneticOperators,
               state: CampaignState, rng: np.random.Generator, count: int,
               clock: BudgetClock | None = None) -> list[Individual]:
    k = min(cfg.tournament_k, len(pop))
    parents = [tournament_select(pop, k, rng) for _ in range(count)]
    learned = learn_from_trees(ops.grammar, (p.tree for p in parents))
    state.weights = mutate_probabilities(learned, cfg.probability_mutation_rate, rng)
    fresh: list[Individual] = []
    while len(fresh) < count:
        child = Individual.from_tree(sample_weighted(state.weights, cfg.max_depth, rng, cfg.max_nodes))
        fresh.append(child)
        if _spent(clock, child):
            break
    return fresh


def step_generation(pop: Population, cfg: ExperimentConfig, ops: GeneticOperators,
                    target: TargetInfo, state: CampaignState, rng: np.random.Generator,
                    clock: BudgetClock | None = None, pool: Executor | None = None) -> Population:
    """Build and evaluate generation n + 1 from the evaluated generation n."""
    members = pop.members
    order   = ranked_indexes(members)
    elites  = [members[i].clone() for i in order[:min(cfg.elitism_count, len(members))]]
    missing = len(members) - len(elites)

    if not missing:
        fresh: list[Individual] = []
    elif cfg.mutation_mode is MutationMode.GRAMMAR_PROBABILITY:
        fresh = _resampled(pop, cfg, ops, state, rng, missing, clock)
    else:
        fresh = _offspring(pop, cfg, ops, rng, missing, clock)

    # budget ran out while building: the rest are carried over already evaluated
    ranks = order[len(elites):] or order
    fresh += [members[ranks[i % len(ranks)]].clone() for i in range(missing - len(fresh))]
    nxt = Population(elites + fresh, generation=pop.generation + 1)
    evaluate_population(nxt, cfg, target, state, clock, pool)
    return nxt


# ── Campaign ──────────────────────────────────────────────────────────────────

def _percent(covered: int, total: int) -> float:
    return covered / total * 100 if total else 0.0


def _metric(values: list[float], cumulative: float) -> MetricSummary:
    arr  = np.asarray(values, dtype=float)
    peak = float(arr.max())
    return MetricSummary(
        max=peak,
        mean=min(float(arr.mean()), peak),
        sd=float(arr.std()),
        cumulative=cumulative,
    )


def summarize_population(pop: Population, state: CampaignState, target: TargetInfo) -> dict[str, MetricSummary]:
    """Per-input branch/line/function percentages over the final population."""
    outcomes = [m.outcome for m in pop.members if m.outcome is not None]
    return {
        "branch": _metric(
            [_percent(len(o.covered_branches), target.b_total) for o in outcomes],
            _percent(len(state.branches), target.b_total),
        ),
        "line": _metric(
            [_percent(len(o.covered_lines), target.line_total) for o in outcomes],
            _percent(len(state.lines), target.line_total),
        ),
        "function": _metric(
            [_percent(len(o.covered_functions), target.function_total) for o in outcomes],
            _percent(len(state.functions), target.function_total),
        ),
    }


def persist_inputs(pop: Population, out_dir: str, run_id: int, target: str) -> str:
    """Write the final population as <out>/run-<r>/inputs/<target>/NNNN.json."""
    folder = os.path.join(out_dir, f"run-{run_id}", "inputs", target)
    os.makedirs(folder, exist_ok=True)
    for i, member in enumerate(pop.members):
        with open(os.path.join(folder, f"{i:04d}.json"), "w", encoding="utf-8", newline="") as f:
            f.write(member.text)
    return folder


def _write_checkpoint(state: CampaignState, out_dir: str, run_id: int, target: str) -> None:
    path = os.path.join(out_dir, f"run-{run_id}", f"state-{target}.json")
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(state.to_checkpoint(), f, indent=2)


def run_target(cfg: ExperimentConfig, grammar: Grammar, samples: Sequence[str] | None,
               target: TargetInfo, ops: GeneticOperators, run_id: int, target_index: int,
               budget: float, clock_factory: ClockFactory = BudgetClock,
               pool: Executor | None = None,
               sample_names: Sequence[str] | None = None) -> tuple[RunRecord, Population, CampaignState]:
    """One run against one target, until its share of the budget is spent."""
    seed  = cfg.master_seed + run_id
    rng   = np.random.default_rng([seed, target_index])
    state = CampaignState()
    clock = clock_factory(budget, cfg.budget_clock)

    pop = init_population(cfg, grammar, samples, rng, state, sample_names)
    clock.charge_nodes(sum(m.size for m in pop.members))
    evaluate_population(pop, cfg, target, state, clock, pool)
    while not clock.exhausted():
        pop = step_generation(pop, cfg, ops, target, state, rng, clock, pool)
        log.debug("run %d %s gen %d: best %.2f, cumulative branches %d/%d",
                  run_id, target.name, pop.generation, pop.best().fitness,
                  len(state.branches), target.b_total)

    record = RunRecord(
        run_id=run_id,
        target=target.name,
        seed=seed,
        generations=pop.generation,
        executions=state.executions,
        metrics=summarize_population(pop, state, target),
        exceptions=[
            ExceptionHit(type=t, location=loc, first_generation=g)
            for (t, loc), g in sorted(state.exception_sites.items())
        ],
        stop_reason=clock.stop_reason() or "budget",
        wall_time=clock.wall(),
    )
    log.info("run %d %-16s %4d generations, %6d executions, cumulative branch %.2f%%, %d exception sites",
             run_id, target.name, record.generations, record.executions,
             record.metrics["branch"].cumulative, len(record.exceptions))
    return record, pop, state


def run_campaign(cfg: ExperimentConfig, grammar: Grammar, samples: Sequence[str] | None,
                 targets: Sequence[TargetInfo | str], out_dir: str | None = None,
                 ops: GeneticOperators | None = None, clock_factory: ClockFactory = BudgetClock,
                 sample_names: Sequence[str] | None = None) -> CampaignReport:
    """Run cfg.runs independent runs over every target.

    Args:
        cfg:           Experiment configuration.
        grammar:       Input grammar.
        samples:       Sample inputs (required by probabilistic initialisation).
        targets:       Registered targets, by name or TargetInfo.
        out_dir:       When given, final populations (and checkpoints) are written here.
        ops:           Genetic operators; defaults to the JSON container shapes.
        clock_factory: Builds the per-(run, target) budget clock.

    Returns:
        CampaignReport with one RunRecord per (run, target).
    """
    if not targets:
        raise ValueError("run_campaign needs at least one target")
    infos  = [get_target(t) if isinstance(t, str) else t for t in targets]
    ops    = ops or GeneticOperators(grammar, [ContainerShape(*s) for s in CONTAINER_SHAPES])
    budget = cfg.time_budget / len(infos)
    if cfg.initial_input is InitialInput.PROBABILISTIC and not samples:
        raise SamplesRequiredError(f"{cfg.label} learns from samples but none were given")

    started = time.perf_counter()
    records: list[RunRecord] = []
    pool = ThreadPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
    try:
        for run_id in range(1, cfg.runs + 1):
            for index, info in enumerate(infos):
                record, pop, state = run_target(
                    cfg, grammar, samples, info, ops, run_id, index, budget,
                    clock_factory, pool, sample_names,
                )
                records.append(record)
                if out_dir:
                    persist_inputs(pop, out_dir, run_id, info.name)
                    if cfg.checkpoint:
                        _write_checkpoint(state, out_dir, run_id, info.name)
    finally:
        if pool is not None:
            pool.shutdown()

    return CampaignReport(
        config=cfg,
        targets=[i.name for i in infos],
        runs=records,
        wall_time=time.perf_counter() - started,
    )
