"""Monte Carlo execution of the sequential activation model.

A population of n agents holds opinions in {0, ..., k}; z source agents
permanently hold the correct opinion. Each round activates one uniformly
random agent, which updates per the chosen dynamics unless it is a source.
A trial runs until every agent holds the correct opinion or a round cap is
hit. Two engines produce trials: a compiled kernel path (default) and a pure
Python reference path used to validate semantics at small scale.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from .dynamics import (
    DynamicsKind,
    Majority,
    Mean,
    MemorylessRule,
    Table,
    Trend,
    TrendMemory,
    Voter,
    apply_memoryless,
    default_trend_ell,
    memoryless_tables,
    trend_step,
    voter_rule,
)

__all__ = [
    "InitKind",
    "Engine",
    "TrendMemories",
    "Population",
    "TrialResult",
    "TrialConfig",
    "init_uniform",
    "init_adversarial",
    "attach_trend_memories",
    "draw_sample_ones",
    "activation_step",
    "run_trial",
    "run_trials",
    "trial_seed",
    "collapse_opinions",
    "resolve_trend_ell",
]

RECOUNT_INTERVAL = 1_000_000
BINOMIAL_CUTOFF = 8

Engine = Literal["numba", "python"]


class InitKind(enum.Enum):
    UNIFORM = "uniform"
    ADVERSARIAL = "adversarial"
    CUSTOM = "custom"


class TrendMemories:
    """Per-agent trend state: last busy-activation sample count and countdown.

    Stored as two integer arrays; indexing yields TrendMemory views.
    """

    __slots__ = ("previous_sample", "countdown", "ell")

    def __init__(
        self, previous_sample: np.ndarray, countdown: np.ndarray, ell: int
    ) -> None:
        previous_sample = np.asarray(previous_sample, dtype=np.int64)
        countdown = np.asarray(countdown, dtype=np.int64)
        if previous_sample.shape != countdown.shape or previous_sample.ndim != 1:
            raise ValueError("memory arrays must be 1-d and equally sized")
        if ell < 1:
            raise ValueError("need ell >= 1")
        for name, arr in (("previous_sample", previous_sample), ("countdown", countdown)):
            if arr.size and (arr.min() < 0 or arr.max() > ell):
                raise ValueError(f"{name} entries outside {{0, ..., {ell}}}")
        self.previous_sample = previous_sample
        self.countdown = countdown
        self.ell = ell

    def __len__(self) -> int:
        return len(self.previous_sample)

    def __getitem__(self, agent: int) -> TrendMemory:
        return TrendMemory(
            int(self.previous_sample[agent]), int(self.countdown[agent])
        )

    def set(self, agent: int, memory: TrendMemory) -> None:
        self.previous_sample[agent] = memory.previous_sample
        self.countdown[agent] = memory.countdown

    def copy(self) -> "TrendMemories":
        return TrendMemories(
            self.previous_sample.copy(), self.countdown.copy(), self.ell
        )


@dataclass
class Population:
    """Opinion configuration plus the immutable-source bookkeeping.

    opinions holds labels in {0, ..., k}; every agent in sources holds
    `correct` and never updates. memories is present only for trend runs.
    """

    opinions: np.ndarray
    sources: frozenset[int]
    correct: int
    k: int = 1
    memories: TrendMemories | None = None

    def __post_init__(self) -> None:
        self.opinions = np.asarray(self.opinions, dtype=np.int64)
        self.sources = frozenset(self.sources)
        n, z = len(self.opinions), len(self.sources)
        if not 1 <= z < n:
            raise ValueError(f"need 1 <= z < n, got z = {z}, n = {n}")
        if any(not 0 <= u < n for u in self.sources):
            raise ValueError("source index out of range")
        if not 0 <= self.correct <= self.k:
            raise ValueError("correct label outside {0, ..., k}")
        if self.opinions.min() < 0 or self.opinions.max() > self.k:
            raise ValueError("opinion label outside {0, ..., k}")
        for u in self.sources:
            if self.opinions[u] != self.correct:
                raise ValueError(f"source {u} does not hold the correct opinion")
        if self.memories is not None and len(self.memories) != n:
            raise ValueError("memory arrays must cover every agent")

    @property
    def n(self) -> int:
        return len(self.opinions)

    @property
    def z(self) -> int:
        return len(self.sources)

    def correct_count(self) -> int:
        return int(np.count_nonzero(self.opinions == self.correct))

    def source_mask(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=np.bool_)
        mask[list(self.sources)] = True
        return mask

    def copy(self) -> "Population":
        return Population(
            self.opinions.copy(),
            self.sources,
            self.correct,
            self.k,
            self.memories.copy() if self.memories is not None else None,
        )


@dataclass(frozen=True)
class TrialResult:
    converged: bool
    rounds: int
    parallel_rounds: float
    seed: int
    init_kind: InitKind

    def __post_init__(self) -> None:
        if not self.rounds >= 0:
            raise ValueError("rounds must be nonnegative")


@dataclass(frozen=True)
class TrialConfig:
    """One experiment cell: everything but the per-trial seeds."""

    n: int
    z: int
    dynamics: DynamicsKind
    init: InitKind = InitKind.UNIFORM
    k: int = 1
    max_rounds: int | None = None
    engine: Engine = "numba"


def init_uniform(
    n: int, z: int, k: int, rng: np.random.Generator
) -> Population:
    """Every opinion i.i.d. uniform over {0, ..., k}; sources share one draw,
    which becomes the correct opinion."""
    if not n > z >= 1:
        raise ValueError(f"need n > z >= 1, got n = {n}, z = {z}")
    if k < 1:
        raise ValueError("need k >= 1")
    opinions = rng.integers(0, k + 1, size=n)
    opinions[:z] = opinions[0]
    return Population(opinions, frozenset(range(z)), int(opinions[0]), k)


def init_adversarial(n: int, z: int, k: int = 1) -> Population:
    """Sources hold correct opinion 0; everyone else holds a wrong opinion,
    split as evenly as possible over the labels {1, ..., k}."""
    if not n > z >= 1:
        raise ValueError(f"need n > z >= 1, got n = {n}, z = {z}")
    if k < 1:
        raise ValueError("need k >= 1")
    opinions = np.zeros(n, dtype=np.int64)
    for j in range(n - z):
        opinions[z + j] = 1 + j % k
    return Population(opinions, frozenset(range(z)), 0, k)


def resolve_trend_ell(kind: Trend, n: int) -> int:
    return kind.ell if kind.ell is not None else default_trend_ell(n)


def attach_trend_memories(
    pop: Population, ell: int, rng: np.random.Generator
) -> Population:
    """Population with fresh per-agent memories, each field independently
    uniform over {0, ..., ell}."""
    n = pop.n
    previous = rng.integers(0, ell + 1, size=n)
    countdown = rng.integers(0, ell + 1, size=n)
    return replace(pop, memories=TrendMemories(previous, countdown, ell))


def draw_sample_ones(
    pop: Population, ell: int, target_opinion: int, rng: np.random.Generator
) -> int:
    """Holders of target_opinion among ell with-replacement uniform draws
    over the whole population (sources and the drawing agent included)."""
    if ell < 1:
        raise ValueError("need ell >= 1")
    if ell > BINOMIAL_CUTOFF:
        count = int(np.count_nonzero(pop.opinions == target_opinion))
        return int(rng.binomial(ell, count / pop.n))
    idx = rng.integers(0, pop.n, size=ell)
    return int(np.count_nonzero(pop.opinions[idx] == target_opinion))


def _binary_rule_or_raise(pop: Population, rule: MemorylessRule | None) -> MemorylessRule:
    if rule is None:
        raise ValueError("dynamics has no memoryless tables")
    if pop.k != 1:
        raise ValueError("memoryless table dynamics need binary opinions")
    return rule


def _activate(
    pop: Population, dynamics: DynamicsKind, rng: np.random.Generator
) -> tuple[int, int, int]:
    """One activation; returns (agent, old opinion, new opinion)."""
    n = pop.n
    u = int(rng.integers(0, n))
    old = int(pop.opinions[u])
    if u in pop.sources:
        return u, old, old
    if isinstance(dynamics, Voter):
        if pop.k == 1:
            # table path, so Voter and Table(voter tables) share one stream
            dynamics = Table(voter_rule())
        else:
            v = int(rng.integers(0, n))
            new = int(pop.opinions[v])
            pop.opinions[u] = new
            return u, old, new
    if isinstance(dynamics, Trend):
        if pop.memories is None:
            raise ValueError("trend dynamics need attached memories")
        if pop.k != 1:
            raise ValueError("trend dynamics need binary opinions")
        ell = pop.memories.ell
        memory = pop.memories[u]
        sample = draw_sample_ones(pop, ell, 1, rng) if memory.countdown == 0 else 0
        new, updated = trend_step(memory, old, sample, ell)
        pop.memories.set(u, updated)
        pop.opinions[u] = new
        return u, old, new
    rule = _binary_rule_or_raise(pop, memoryless_tables(dynamics))
    sample = draw_sample_ones(pop, rule.ell, 1, rng)
    new = apply_memoryless(rule, old, sample, float(rng.random()))
    pop.opinions[u] = new
    return u, old, new


def activation_step(
    pop: Population, dynamics: DynamicsKind, rng: np.random.Generator
) -> Population:
    """Activate one uniformly random agent in place; sources never change."""
    _activate(pop, dynamics, rng)
    return pop


def _run_python(
    pop: Population, dynamics: DynamicsKind, seed: int, max_rounds: int
) -> tuple[int, bool]:
    rng = np.random.Generator(np.random.PCG64(seed))
    n = pop.n
    count = pop.correct_count()
    if count == n:
        return 0, True
    rounds = 0
    until_recount = RECOUNT_INTERVAL
    while rounds < max_rounds:
        rounds += 1
        _, old, new = _activate(pop, dynamics, rng)
        if new == pop.correct and old != pop.correct:
            count += 1
        elif old == pop.correct and new != pop.correct:
            count -= 1
        until_recount -= 1
        if until_recount == 0:
            until_recount = RECOUNT_INTERVAL
            if pop.correct_count() != count:
                return -1, False
        if count == n:
            return rounds, True
    return rounds, False


def _run_numba(
    pop: Population, dynamics: DynamicsKind, seed: int, max_rounds: int
) -> tuple[int, bool]:
    from . import _kernels

    mask = pop.source_mask()
    seed = np.uint64(seed)
    if isinstance(dynamics, Voter) and pop.k == 1:
        # table path, so Voter and Table(voter tables) share one stream
        dynamics = Table(voter_rule())
    if isinstance(dynamics, Voter):
        rounds, converged = _kernels.copy_kernel(
            pop.opinions, mask, pop.correct, seed, max_rounds
        )
    elif isinstance(dynamics, Trend):
        if pop.memories is None:
            raise ValueError("trend dynamics need attached memories")
        if pop.k != 1:
            raise ValueError("trend dynamics need binary opinions")
        opinions = pop.opinions.astype(np.uint8)
        rounds, converged = _kernels.trend_kernel(
            opinions,
            pop.memories.previous_sample,
            pop.memories.countdown,
            mask,
            pop.memories.ell,
            pop.correct,
            seed,
            max_rounds,
        )
        pop.opinions[:] = opinions
    else:
        rule = _binary_rule_or_raise(pop, memoryless_tables(dynamics))
        opinions = pop.opinions.astype(np.uint8)
        rounds, converged = _kernels.table_kernel(
            opinions,
            mask,
            np.asarray(rule.g0, dtype=np.float64),
            np.asarray(rule.g1, dtype=np.float64),
            rule.ell,
            pop.correct,
            seed,
            max_rounds,
        )
        pop.opinions[:] = opinions
    return int(rounds), bool(converged)


def run_trial(
    init: Population,
    dynamics: DynamicsKind,
    seed: int,
    max_rounds: int | None = None,
    *,
    engine: Engine = "numba",
    init_kind: InitKind = InitKind.CUSTOM,
) -> TrialResult:
    """One trial from a fixed initial configuration.

    Runs activations until all agents hold the correct opinion or max_rounds
    (default 10^4 n^2) is reached; the input population is not modified.
    """
    n = init.n
    if max_rounds is None:
        max_rounds = 10_000 * n * n
    if max_rounds < 1:
        raise ValueError("need max_rounds >= 1")
    if isinstance(dynamics, Trend) and init.memories is not None:
        expected = resolve_trend_ell(dynamics, n)
        if init.memories.ell != expected:
            raise ValueError(
                f"memories sized for ell = {init.memories.ell}, dynamics wants {expected}"
            )
    pop = init.copy()
    if engine == "numba":
        rounds, converged = _run_numba(pop, dynamics, seed, max_rounds)
    elif engine == "python":
        rounds, converged = _run_python(pop, dynamics, seed, max_rounds)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    if rounds < 0:
        raise RuntimeError("maintained opinion count diverged from recount")
    return TrialResult(
        converged=converged,
        rounds=rounds,
        parallel_rounds=rounds / n,
        seed=int(seed),
        init_kind=init_kind,
    )


def trial_seed(master_seed: int, trial: int) -> int:
    """Seed for trial t: the first 64-bit word of SeedSequence((master, t))."""
    return int(
        np.random.SeedSequence((master_seed, trial)).generate_state(1, np.uint64)[0]
    )


def _build_population(config: TrialConfig, rng: np.random.Generator) -> Population:
    if config.init is InitKind.UNIFORM:
        pop = init_uniform(config.n, config.z, config.k, rng)
    elif config.init is InitKind.ADVERSARIAL:
        pop = init_adversarial(config.n, config.z, config.k)
    else:
        raise ValueError("run_trials builds only uniform or adversarial inits")
    if isinstance(config.dynamics, Trend):
        ell = resolve_trend_ell(config.dynamics, config.n)
        pop = attach_trend_memories(pop, ell, rng)
    return pop


def run_trials(
    config: TrialConfig, trial_count: int, master_seed: int
) -> list[TrialResult]:
    """Independent trials; trial t is fully determined by (master_seed, t),
    so results do not depend on execution order."""
    if trial_count < 1:
        raise ValueError("need trial_count >= 1")
    results = []
    for t in range(trial_count):
        t_seed = trial_seed(master_seed, t)
        init_rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence((t_seed, 0)))
        )
        run_seed = int(
            np.random.SeedSequence((t_seed, 1)).generate_state(1, np.uint64)[0]
        )
        pop = _build_population(config, init_rng)
        results.append(
            run_trial(
                pop,
                config.dynamics,
                run_seed,
                config.max_rounds,
                engine=config.engine,
                init_kind=config.init,
            )
        )
    return results


def collapse_opinions(pop: Population) -> Population:
    """Binary view: correct holders map to 1, all other labels to 0."""
    opinions = (pop.opinions == pop.correct).astype(np.int64)
    return Population(opinions, pop.sources, 1, 1)
