"""Expected hitting times of the top state, by three independent methods.

The recurrence method is normative; the detailed-balance weight method and
the tridiagonal linear solve are cross-checks with different failure modes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .chains import BirthDeathChain

__all__ = [
    "Method",
    "HittingReport",
    "UnreachableConsensusError",
    "step_expectations_recurrence",
    "step_expectations_detailed_balance",
    "hitting_time_oracle",
    "rational_hitting_time",
    "voter_main_sum",
    "double_harmonic_sum",
    "harmonic",
]

_RATIONAL_MAX_STATE = 64
_DENSE_MAX_STATES = 4096


class Method(enum.Enum):
    RECURRENCE = "recurrence"
    DETAILED_BALANCE = "detailed-balance"
    LINEAR_SOLVE = "linear-solve"


class UnreachableConsensusError(ValueError):
    """Some state cannot ascend, so the top state is unreachable."""

    def __init__(self, state: int) -> None:
        super().__init__(f"unreachable consensus: p = 0 at state {state}")
        self.state = state


@dataclass(frozen=True)
class HittingReport:
    """Per-step expectations h_k = E_{k-1}[tau_k] for k in {low+1, ..., high}.

    total is the expectation starting from the bottom state. fallback_steps
    lists states whose h_k came from the recurrence because the weight
    formula degenerated (a zero down-probability at or below them).
    """

    low: int
    high: int
    per_step: np.ndarray
    total: float
    method: Method
    fallback_steps: tuple[int, ...] = ()
    log_weights: np.ndarray | None = None

    def __post_init__(self) -> None:
        per_step = np.asarray(self.per_step, dtype=np.float64).copy()
        per_step.setflags(write=False)
        object.__setattr__(self, "per_step", per_step)

    def step(self, k: int) -> float:
        """h_k for k in {low+1, ..., high}."""
        if not self.low < k <= self.high:
            raise ValueError(f"step index {k} outside ({self.low}, {self.high}]")
        return float(self.per_step[k - self.low - 1])

    def total_from(self, start: int) -> float:
        """Expected hitting time of the top state from `start`."""
        if not self.low <= start <= self.high:
            raise ValueError(f"start {start} outside [{self.low}, {self.high}]")
        return float(np.sum(self.per_step[start - self.low:]))


def _require_ascent(chain: BirthDeathChain) -> None:
    for i in range(chain.low, chain.high):
        if chain.up[i - chain.low] == 0.0:
            raise UnreachableConsensusError(i)


def _recurrence_steps(chain: BirthDeathChain) -> np.ndarray:
    low, high = chain.low, chain.high
    h = np.empty(high - low)
    prev = 0.0
    for k in range(low + 1, high + 1):
        i = k - 1
        prev = (1.0 + chain.q(i) * prev) / chain.p(i)
        h[k - low - 1] = prev
    return h


def step_expectations_recurrence(chain: BirthDeathChain) -> HittingReport:
    """One-step conditioning: h_{low+1} = 1/p_low, h_k = (1 + q_{k-1} h_{k-1}) / p_{k-1}."""
    _require_ascent(chain)
    per_step = _recurrence_steps(chain)
    return HittingReport(
        low=chain.low,
        high=chain.high,
        per_step=per_step,
        total=float(np.sum(per_step)),
        method=Method.RECURRENCE,
    )


def step_expectations_detailed_balance(chain: BirthDeathChain) -> HittingReport:
    """Weight method: w_low = 1, w_k = prod p_{i-1}/q_i, h_k = (sum_{j<k} w_j) / (q_k w_k).

    Products and prefix sums run in log space. Steps at or beyond a state
    with q = 0 fall back to the recurrence and are flagged.
    """
    _require_ascent(chain)
    low, high = chain.low, chain.high
    size = high - low + 1
    log_w = np.empty(size)
    log_w[0] = 0.0
    first_zero_q: int | None = None
    for k in range(low + 1, high + 1):
        q = chain.q(k)
        if q == 0.0:
            if first_zero_q is None:
                first_zero_q = k
            log_w[k - low] = math.inf
            continue
        log_w[k - low] = log_w[k - low - 1] + math.log(chain.p(k - 1)) - math.log(q)

    per_step = np.empty(high - low)
    fallback: tuple[int, ...] = ()
    if first_zero_q is not None:
        fallback = tuple(range(first_zero_q, high + 1))
        recurrence = _recurrence_steps(chain)
    log_prefix = -math.inf  # log sum of w_j for j < k, accumulated as k grows
    for k in range(low + 1, high + 1):
        log_prefix = np.logaddexp(log_prefix, log_w[k - low - 1])
        if first_zero_q is not None and k >= first_zero_q:
            per_step[k - low - 1] = recurrence[k - low - 1]
        else:
            log_h = log_prefix - math.log(chain.q(k)) - log_w[k - low]
            per_step[k - low - 1] = math.exp(log_h)
    return HittingReport(
        low=low,
        high=high,
        per_step=per_step,
        total=float(np.sum(per_step)),
        method=Method.DETAILED_BALANCE,
        fallback_steps=fallback,
        log_weights=log_w,
    )


def rational_hitting_time(chain: BirthDeathChain, start: int) -> Fraction:
    """Exact expected hitting time of the top state, as a Fraction.

    Solves the tridiagonal system (I - P) E = 1 over transient states with
    exact rational arithmetic; float probabilities convert losslessly.
    Limited to chains whose top state is <= 64.
    """
    if chain.high > _RATIONAL_MAX_STATE:
        raise ValueError(f"rational mode limited to top state <= {_RATIONAL_MAX_STATE}")
    if not chain.low <= start <= chain.high:
        raise ValueError(f"start {start} outside [{chain.low}, {chain.high}]")
    if start == chain.high:
        return Fraction(0)
    _require_ascent(chain)
    m = chain.high - chain.low  # transient states low .. high-1
    p = [Fraction(chain.p(chain.low + i)) for i in range(m)]
    q = [Fraction(chain.q(chain.low + i)) for i in range(m)]
    # Thomas elimination on diag (p+q), upper -p, lower -q, rhs 1.
    upper_ratio = [Fraction(0)] * m
    rhs = [Fraction(0)] * m
    denom = p[0] + q[0]
    upper_ratio[0] = -p[0] / denom
    rhs[0] = Fraction(1) / denom
    for i in range(1, m):
        denom = (p[i] + q[i]) + q[i] * upper_ratio[i - 1]
        if i < m - 1:
            upper_ratio[i] = -p[i] / denom
        rhs[i] = (1 + q[i] * rhs[i - 1]) / denom
    value = rhs[m - 1]  # E at state high-1; E_high = 0
    for i in range(m - 2, start - chain.low - 1, -1):
        value = rhs[i] - upper_ratio[i] * value
    return value


def _longdouble_hitting_time(chain: BirthDeathChain, start: int) -> float:
    m = chain.high - chain.low
    one = np.longdouble(1)
    p = [np.longdouble(chain.p(chain.low + i)) for i in range(m)]
    q = [np.longdouble(chain.q(chain.low + i)) for i in range(m)]
    upper_ratio = [np.longdouble(0)] * m
    rhs = [np.longdouble(0)] * m
    denom = p[0] + q[0]
    upper_ratio[0] = -p[0] / denom
    rhs[0] = one / denom
    for i in range(1, m):
        denom = (p[i] + q[i]) + q[i] * upper_ratio[i - 1]
        if i < m - 1:
            upper_ratio[i] = -p[i] / denom
        rhs[i] = (one + q[i] * rhs[i - 1]) / denom
    value = rhs[m - 1]
    for i in range(m - 2, start - chain.low - 1, -1):
        value = rhs[i] - upper_ratio[i] * value
    return float(value)


def hitting_time_oracle(chain: BirthDeathChain, start: int) -> float:
    """Independent check: direct tridiagonal solve of (I - P) E = 1.

    Exact rationals when the top state is <= 64, 80-bit extended precision
    otherwise. Independent of the recurrence and weight methods.
    """
    if chain.high - chain.low > _DENSE_MAX_STATES:
        raise ValueError(f"dense solve budget limited to {_DENSE_MAX_STATES} states")
    if not chain.low <= start <= chain.high:
        raise ValueError(f"start {start} outside [{chain.low}, {chain.high}]")
    if start == chain.high:
        return 0.0
    if chain.high <= _RATIONAL_MAX_STATE:
        return float(rational_hitting_time(chain, start))
    _require_ascent(chain)
    return _longdouble_hitting_time(chain, start)


def harmonic(k: int) -> float:
    """k-th harmonic number, summed smallest terms first."""
    if k < 1:
        raise ValueError("harmonic numbers are defined for k >= 1")
    return float(np.sum(1.0 / np.arange(k, 0, -1, dtype=np.float64)))


def double_harmonic_sum(n: int) -> float:
    """sum_{k=2}^{n-1} (1/(k-1)) sum_{j=1}^{k-1} 1/(n-j), the bare double sum."""
    if n < 3:
        raise ValueError("need n >= 3")
    inv = 1.0 / np.arange(1, n, dtype=np.float64)
    h = np.concatenate(([0.0], np.cumsum(inv)))  # h[m] = H_m for m <= n-1
    k = np.arange(2, n)
    inner = h[n - 1] - h[n - k]
    return float(np.sum(inner / (k - 1)))


def voter_main_sum(n: int) -> float:
    """n^2 times the double harmonic sum: the ascent cost below the top step
    for the voter with a single source."""
    return n**2 * double_harmonic_sum(n)
