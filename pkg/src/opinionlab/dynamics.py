"""Update rules an activated agent can execute.

Memoryless rules act through adoption tables on a sample's ones-count; the
trend rule keeps two small integers of state and compares consecutive busy
samples.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .chains import MemorylessRule

__all__ = [
    "TrendMemory",
    "Voter",
    "Majority",
    "Mean",
    "Table",
    "Trend",
    "DynamicsKind",
    "voter_rule",
    "majority_rule",
    "mean_rule",
    "apply_memoryless",
    "trend_step",
    "default_trend_ell",
    "memoryless_tables",
    "parse_dynamics",
]


@dataclass(frozen=True)
class TrendMemory:
    """Per-agent trend state: both fields stay within {0, ..., ell}."""

    previous_sample: int
    countdown: int


@dataclass(frozen=True)
class Voter:
    """Copy the sampled opinion (sample size 1)."""

    def label(self) -> str:
        return "voter"


@dataclass(frozen=True)
class Majority:
    """Adopt the majority of a size-ell sample; ties keep the current opinion."""

    ell: int

    def __post_init__(self) -> None:
        if self.ell < 1:
            raise ValueError("sample size must be >= 1")

    def label(self) -> str:
        return f"majority:{self.ell}"


@dataclass(frozen=True)
class Mean:
    """Adopt 1 with probability ones/ell."""

    ell: int

    def __post_init__(self) -> None:
        if self.ell < 1:
            raise ValueError("sample size must be >= 1")

    def label(self) -> str:
        return f"mean:{self.ell}"


@dataclass(frozen=True)
class Table:
    """Arbitrary memoryless rule given by explicit tables."""

    rule: MemorylessRule

    def label(self) -> str:
        return f"table:{self.rule.ell}"


@dataclass(frozen=True)
class Trend:
    """Follow the Trend; ell = None means ceil(10 log2 n) at run time."""

    ell: int | None = None

    def __post_init__(self) -> None:
        if self.ell is not None and self.ell < 1:
            raise ValueError("sample size must be >= 1")

    def label(self) -> str:
        return "trend" if self.ell is None else f"trend:{self.ell}"


DynamicsKind = Voter | Majority | Mean | Table | Trend


def voter_rule() -> MemorylessRule:
    return MemorylessRule(1, np.array([0.0, 1.0]), np.array([0.0, 1.0]))


def majority_rule(ell: int) -> MemorylessRule:
    """Strict majority adopts 1; at even ell a tie keeps the current opinion."""
    if ell < 1:
        raise ValueError("sample size must be >= 1")
    s = np.arange(ell + 1)
    g0 = (s > ell / 2).astype(np.float64)
    g1 = (s >= ell / 2).astype(np.float64)
    return MemorylessRule(ell, g0, g1)


def mean_rule(ell: int) -> MemorylessRule:
    if ell < 1:
        raise ValueError("sample size must be >= 1")
    g = np.arange(ell + 1, dtype=np.float64) / ell
    return MemorylessRule(ell, g, g.copy())


def apply_memoryless(
    rule: MemorylessRule, current: int, ones_in_sample: int, rand: float
) -> int:
    """New opinion bit: 1 iff rand < g_current(ones_in_sample)."""
    if not 0 <= ones_in_sample <= rule.ell:
        raise ValueError(f"ones count {ones_in_sample} outside {{0, ..., {rule.ell}}}")
    table = rule.g1 if current == 1 else rule.g0
    return 1 if rand < table[ones_in_sample] else 0


def trend_step(
    memory: TrendMemory, current: int, ones_in_sample: int, ell: int
) -> tuple[int, TrendMemory]:
    """One activation of the trend rule.

    Non-busy activations (countdown > 0) only decrement the countdown and
    ignore the sample. A busy activation adopts 1 if the count rose since the
    last busy one, 0 if it fell, keeps the opinion on a tie, then stores the
    count and resets the countdown to ell.
    """
    if not 0 <= ones_in_sample <= ell:
        raise ValueError(f"ones count {ones_in_sample} outside {{0, ..., {ell}}}")
    if not (0 <= memory.countdown <= ell and 0 <= memory.previous_sample <= ell):
        raise ValueError("trend memory out of bounds")
    if memory.countdown > 0:
        return current, TrendMemory(memory.previous_sample, memory.countdown - 1)
    if ones_in_sample > memory.previous_sample:
        opinion = 1
    elif ones_in_sample < memory.previous_sample:
        opinion = 0
    else:
        opinion = current
    return opinion, TrendMemory(ones_in_sample, ell)


def default_trend_ell(n: int) -> int:
    """Sample size ceil(10 log2 n); exactly 10 i on the n = 2^i grids."""
    if n < 2:
        raise ValueError("need n >= 2")
    return math.ceil(10 * math.log2(n))


def memoryless_tables(kind: DynamicsKind) -> MemorylessRule | None:
    """The rule tables behind a memoryless kind, or None for the trend rule."""
    if isinstance(kind, Voter):
        return voter_rule()
    if isinstance(kind, Majority):
        return majority_rule(kind.ell)
    if isinstance(kind, Mean):
        return mean_rule(kind.ell)
    if isinstance(kind, Table):
        return kind.rule
    return None


def _parse_ell(text: str, spec: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise ValueError(f"invalid dynamics {spec!r}: sample size must be an integer")
    if value < 1:
        raise ValueError(f"invalid dynamics {spec!r}: sample size must be >= 1")
    return value


def parse_dynamics(spec: str) -> DynamicsKind:
    """Parse a CLI dynamics string.

    Accepted forms: "voter", "majority:<ell>", "mean:<ell>", "trend",
    "trend:<ell>", "table:<path>" (JSON file with fields ell, g0, g1).
    """
    if spec == "voter":
        return Voter()
    if spec == "trend":
        return Trend()
    head, sep, tail = spec.partition(":")
    if sep:
        if head == "majority":
            return Majority(_parse_ell(tail, spec))
        if head == "mean":
            return Mean(_parse_ell(tail, spec))
        if head == "trend":
            return Trend(_parse_ell(tail, spec))
        if head == "table":
            data = json.loads(Path(tail).read_text())
            try:
                rule = MemorylessRule(
                    int(data["ell"]),
                    np.asarray(data["g0"], dtype=np.float64),
                    np.asarray(data["g1"], dtype=np.float64),
                )
            except KeyError as exc:
                raise ValueError(f"table file {tail!r} is missing field {exc}")
            return Table(rule)
    raise ValueError(
        f"unknown dynamics {spec!r}; expected voter, majority:<ell>, mean:<ell>, "
        "trend, trend:<ell> or table:<path>"
    )
