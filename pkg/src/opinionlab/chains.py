"""Birth-death chains induced by opinion dynamics with source agents.

States count the agents holding a distinguished opinion. A population of n
agents with z immutable sources induces a chain on {z, ..., n} whose up/down
probabilities come from the update rule's adoption tables.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Boundary",
    "BirthDeathChain",
    "MemorylessRule",
    "FullKnowledgeRule",
    "binomial_expectation",
    "sample_chain_from_rule",
    "voter_chain",
    "full_knowledge_chain",
    "mirror_chain",
    "chi_window",
]

# Slack for p + q <= 1 checks; formula values can exceed 1 by rounding only.
_PROB_TOL = 1e-12


class Boundary(enum.Enum):
    """Behavior at the top state.

    ABSORBING: q_top = 0 (consensus is absorbing).
    REFLECTING: q_top = 1 (reversible variant used by weight formulas).
    TRUNCATED: p_top = 0 but q_top keeps its formula value (window chains).
    """

    ABSORBING = "absorbing"
    REFLECTING = "reflecting"
    TRUNCATED = "truncated"


@dataclass(frozen=True)
class BirthDeathChain:
    """Chain on states {low, ..., high} with per-state up/down probabilities.

    Arrays are indexed by state - low. The lazy probability r_i is derived,
    never stored.
    """

    low: int
    high: int
    up: np.ndarray
    down: np.ndarray
    boundary: Boundary

    def __post_init__(self) -> None:
        if self.low < 1:
            raise ValueError("low state must be >= 1")
        if self.high <= self.low:
            raise ValueError("high state must exceed low state")
        size = self.high - self.low + 1
        up = np.asarray(self.up, dtype=np.float64).copy()
        down = np.asarray(self.down, dtype=np.float64).copy()
        if up.shape != (size,) or down.shape != (size,):
            raise ValueError(f"probability arrays must have length {size}")
        if np.any(up < 0.0) or np.any(down < 0.0):
            raise ValueError("probabilities must be nonnegative")
        if np.any(up + down > 1.0 + _PROB_TOL):
            raise ValueError("p_i + q_i must not exceed 1")
        if up[-1] != 0.0:
            raise ValueError("p at the top state must be 0")
        if down[0] != 0.0:
            raise ValueError("q at the bottom state must be 0")
        if self.boundary is Boundary.ABSORBING and down[-1] != 0.0:
            raise ValueError("absorbing chains need q = 0 at the top state")
        if self.boundary is Boundary.REFLECTING and down[-1] != 1.0:
            raise ValueError("reflecting chains need q = 1 at the top state")
        up.setflags(write=False)
        down.setflags(write=False)
        object.__setattr__(self, "up", up)
        object.__setattr__(self, "down", down)

    @property
    def states(self) -> range:
        return range(self.low, self.high + 1)

    def p(self, i: int) -> float:
        return float(self.up[i - self.low])

    def q(self, i: int) -> float:
        return float(self.down[i - self.low])

    def r(self, i: int) -> float:
        return 1.0 - self.p(i) - self.q(i)


def _validate_tables(g0: np.ndarray, g1: np.ndarray, top: int) -> None:
    for name, g in (("g0", g0), ("g1", g1)):
        if g.shape != (top + 1,):
            raise ValueError(f"{name} must have length {top + 1}")
        if np.any(g < 0.0) or np.any(g > 1.0):
            raise ValueError(f"{name} entries must lie in [0, 1]")
        if g[0] != 0.0:
            raise ValueError(f"{name}(0) must be 0 (no support, no adoption)")
        if g[top] != 1.0:
            raise ValueError(f"{name}({top}) must be 1 (full support)")


@dataclass(frozen=True)
class MemorylessRule:
    """Adoption tables over sample ones-counts {0, ..., ell}.

    g0 applies when the activated agent holds 0, g1 when it holds 1; entry s
    is the probability of adopting opinion 1 after seeing s ones.
    """

    ell: int
    g0: np.ndarray = field(repr=False)
    g1: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.ell < 1:
            raise ValueError("sample size must be >= 1")
        g0 = np.asarray(self.g0, dtype=np.float64).copy()
        g1 = np.asarray(self.g1, dtype=np.float64).copy()
        _validate_tables(g0, g1, self.ell)
        g0.setflags(write=False)
        g1.setflags(write=False)
        object.__setattr__(self, "g0", g0)
        object.__setattr__(self, "g1", g1)


@dataclass(frozen=True)
class FullKnowledgeRule:
    """Adoption tables over the exact population ones-count {0, ..., n}."""

    n: int
    g0: np.ndarray = field(repr=False)
    g1: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError("population size must be >= 2")
        g0 = np.asarray(self.g0, dtype=np.float64).copy()
        g1 = np.asarray(self.g1, dtype=np.float64).copy()
        _validate_tables(g0, g1, self.n)
        g0.setflags(write=False)
        g1.setflags(write=False)
        object.__setattr__(self, "g0", g0)
        object.__setattr__(self, "g1", g1)


def binomial_expectation(g: np.ndarray, ell: int, prob: float) -> float:
    """E[g(S)] for S ~ Binomial(ell, prob), by direct pmf summation.

    The pmf is built multiplicatively outward from the mode so no factorial
    overflows and no (1-p)^ell underflow for large ell.
    """
    g = np.asarray(g, dtype=np.float64)
    if g.shape != (ell + 1,):
        raise ValueError(f"table must have length {ell + 1}")
    if not 0.0 <= prob <= 1.0:
        raise ValueError("prob must lie in [0, 1]")
    if prob == 0.0:
        return float(g[0])
    if prob == 1.0:
        return float(g[ell])
    mode = min(int((ell + 1) * prob), ell)
    log_anchor = (
        math.lgamma(ell + 1)
        - math.lgamma(mode + 1)
        - math.lgamma(ell - mode + 1)
        + mode * math.log(prob)
        + (ell - mode) * math.log1p(-prob)
    )
    anchor = math.exp(log_anchor)
    total = anchor * float(g[mode])
    ratio = prob / (1.0 - prob)
    pmf = anchor
    for s in range(mode + 1, ell + 1):
        pmf *= ratio * (ell - s + 1) / s
        total += pmf * float(g[s])
    pmf = anchor
    for s in range(mode - 1, -1, -1):
        pmf *= (s + 1) / (ratio * (ell - s))
        total += pmf * float(g[s])
    return total


def sample_chain_from_rule(
    rule: MemorylessRule, n: int, z: int, boundary: Boundary
) -> BirthDeathChain:
    """Chain on {z, ..., n} for a rule acting on size-ell random samples.

    p_i = ((n-i)/n) E[g0(S)] and q_i = ((i-z)/n) (1 - E[g1(S)]) with
    S ~ Binomial(ell, i/n).
    """
    if not n > z >= 1:
        raise ValueError("need n > z >= 1")
    if boundary is Boundary.TRUNCATED:
        raise ValueError("sample chains are full chains; use ABSORBING or REFLECTING")
    size = n - z + 1
    up = np.zeros(size)
    down = np.zeros(size)
    for i in range(z, n):
        up[i - z] = (n - i) / n * binomial_expectation(rule.g0, rule.ell, i / n)
    for i in range(z + 1, n):
        down[i - z] = (i - z) / n * (1.0 - binomial_expectation(rule.g1, rule.ell, i / n))
    down[n - z] = 0.0 if boundary is Boundary.ABSORBING else 1.0
    return BirthDeathChain(z, n, up, down, boundary)


def voter_chain(n: int, z: int, boundary: Boundary = Boundary.ABSORBING) -> BirthDeathChain:
    """Chain of the voter rule: p_i = (n-i) i / n^2, q_i = (n-i)(i-z) / n^2."""
    if not n > z >= 1:
        raise ValueError("need n > z >= 1")
    if boundary is Boundary.TRUNCATED:
        raise ValueError("the voter chain is a full chain; use ABSORBING or REFLECTING")
    states = np.arange(z, n + 1, dtype=np.float64)
    up = (n - states) * states / n**2
    down = (n - states) * (states - z) / n**2
    down[0] = 0.0
    down[-1] = 0.0 if boundary is Boundary.ABSORBING else 1.0
    return BirthDeathChain(z, n, up, down, boundary)


def chi_window(n: int) -> tuple[int, int]:
    """The middle window {n/4, ..., 3n/4}; requires 4 | n."""
    if n % 4 != 0:
        raise ValueError("the middle window needs n divisible by 4")
    return n // 4, 3 * n // 4


def _window_chain(
    n: int,
    z: int,
    window: tuple[int, int],
    p_of: "callable",
    q_of: "callable",
) -> BirthDeathChain:
    lo, hi = window
    if not (z <= lo < hi <= n):
        raise ValueError("window must lie within {z, ..., n}")
    size = hi - lo + 1
    up = np.zeros(size)
    down = np.zeros(size)
    for i in range(lo, hi):
        up[i - lo] = p_of(i)
    for i in range(lo + 1, hi + 1):
        down[i - lo] = q_of(i)
    # Bottom reflects (down-probability folded into the self-loop); the top
    # cannot ascend but keeps its formula down-probability.
    down[0] = 0.0
    up[-1] = 0.0
    return BirthDeathChain(lo, hi, up, down, Boundary.TRUNCATED)


def full_knowledge_chain(
    rule: FullKnowledgeRule, z: int, window: tuple[int, int] | None = None
) -> BirthDeathChain:
    """Window chain whose states count opinion-1 holders, sources holding 1.

    p_i = ((n-i)/n) g0(i) and q_i = ((i-z)/n) (1 - g1(i)); expectations vanish
    because each sample is the exact configuration.
    """
    n = rule.n
    if window is None:
        window = chi_window(n)
    return _window_chain(
        n,
        z,
        window,
        lambda i: (n - i) / n * rule.g0[i],
        lambda i: (i - z) / n * (1.0 - rule.g1[i]),
    )


def mirror_chain(
    rule: FullKnowledgeRule, z: int, window: tuple[int, int] | None = None
) -> BirthDeathChain:
    """Window chain whose states count opinion-0 holders, sources holding 0.

    p'_i = ((n-i)/n) (1 - g1(n-i)) and q'_i = ((i-z)/n) g0(n-i).
    """
    n = rule.n
    if window is None:
        window = chi_window(n)
    return _window_chain(
        n,
        z,
        window,
        lambda i: (n - i) / n * (1.0 - rule.g1[n - i]),
        lambda i: (i - z) / n * rule.g0[n - i],
    )
