"""Compiled inner loops for the activation model.

Each kernel runs one full trial: uniform agent activation, source skipping,
opinion updates, O(1) consensus detection via a maintained count, and a
periodic recount that cross-checks the count against the opinion array.
All randomness comes from an inlined splitmix64 stream so a trial is fully
determined by its 64-bit seed. Kernels return (rounds, converged); rounds is
-1 if a recount ever disagrees with the maintained count.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64
_GOLDEN = U64(0x9E3779B97F4A7C15)
_MIX1 = U64(0xBF58476D1CE4E5B9)
_MIX2 = U64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53
RECOUNT_INTERVAL = 1_000_000
# explicit index draws below this sample size, one binomial draw above
BINOMIAL_CUTOFF = 8


@njit(cache=True, nogil=True, inline="always")
def _mix(state):
    state = state + _GOLDEN
    z = state
    z = (z ^ (z >> U64(30))) * _MIX1
    z = (z ^ (z >> U64(27))) * _MIX2
    return state, z ^ (z >> U64(31))


@njit(cache=True, nogil=True, inline="always")
def _u01(word):
    return np.float64(word >> U64(11)) * _INV53


@njit(cache=True, nogil=True, inline="always")
def _index(word, n):
    i = int(_u01(word) * n)
    return n - 1 if i >= n else i


@njit(cache=True, nogil=True)
def copy_kernel(opinions, is_source, correct, seed, max_rounds):
    """Voter over arbitrary labels: the activated agent copies one uniformly
    sampled agent's opinion. Runs until all agents hold `correct`."""
    n = opinions.shape[0]
    state = U64(seed)
    count = 0
    for i in range(n):
        if opinions[i] == correct:
            count += 1
    if count == n:
        return 0, True
    rounds = 0
    until_recount = RECOUNT_INTERVAL
    while rounds < max_rounds:
        rounds += 1
        state, word = _mix(state)
        u = _index(word, n)
        if not is_source[u]:
            state, word = _mix(state)
            v = _index(word, n)
            old = opinions[u]
            new = opinions[v]
            if old != new:
                opinions[u] = new
                if new == correct:
                    count += 1
                elif old == correct:
                    count -= 1
        until_recount -= 1
        if until_recount == 0:
            until_recount = RECOUNT_INTERVAL
            check = 0
            for i in range(n):
                if opinions[i] == correct:
                    check += 1
            if check != count:
                return -1, False
        if count == n:
            return rounds, True
    return rounds, False


@njit(cache=True, nogil=True, inline="always")
def _sample_ones(state, opinions, n, ones, ell):
    """Number of 1-holders among ell with-replacement draws; a Binomial
    (ell, ones/n) draw via Bernoulli trials when ell is large enough that
    per-index lookups stop paying for themselves."""
    s = 0
    if ell > BINOMIAL_CUTOFF:
        frac = ones / n
        for _ in range(ell):
            state, word = _mix(state)
            if _u01(word) < frac:
                s += 1
    else:
        for _ in range(ell):
            state, word = _mix(state)
            s += opinions[_index(word, n)]
    return state, s


@njit(cache=True, nogil=True)
def table_kernel(opinions, is_source, g0, g1, ell, correct, seed, max_rounds):
    """Binary memoryless dynamics driven by lookup tables g0, g1: the
    activated agent counts 1s in a fresh sample and adopts 1 with the tabled
    probability for its current opinion."""
    n = opinions.shape[0]
    state = U64(seed)
    ones = 0
    for i in range(n):
        ones += opinions[i]
    target = n if correct == 1 else 0
    if ones == target:
        return 0, True
    rounds = 0
    until_recount = RECOUNT_INTERVAL
    while rounds < max_rounds:
        rounds += 1
        state, word = _mix(state)
        u = _index(word, n)
        if not is_source[u]:
            state, s = _sample_ones(state, opinions, n, ones, ell)
            state, word = _mix(state)
            r = _u01(word)
            cur = opinions[u]
            g = g1[s] if cur == 1 else g0[s]
            new = 1 if r < g else 0
            if new != cur:
                opinions[u] = new
                ones += 1 if new == 1 else -1
        until_recount -= 1
        if until_recount == 0:
            until_recount = RECOUNT_INTERVAL
            check = 0
            for i in range(n):
                check += opinions[i]
            if check != ones:
                return -1, False
        if ones == target:
            return rounds, True
    return rounds, False


@njit(cache=True, nogil=True)
def trend_kernel(
    opinions, previous_sample, countdown, is_source, ell, correct, seed, max_rounds
):
    """Binary trend dynamics: non-busy activations decrement the countdown;
    a busy activation (countdown hit 0) samples, moves toward the opinion
    whose count rose since the last busy sample, and resets the countdown."""
    n = opinions.shape[0]
    state = U64(seed)
    ones = 0
    for i in range(n):
        ones += opinions[i]
    target = n if correct == 1 else 0
    if ones == target:
        return 0, True
    rounds = 0
    until_recount = RECOUNT_INTERVAL
    while rounds < max_rounds:
        rounds += 1
        state, word = _mix(state)
        u = _index(word, n)
        if not is_source[u]:
            cd = countdown[u]
            if cd > 0:
                countdown[u] = cd - 1
            else:
                state, s = _sample_ones(state, opinions, n, ones, ell)
                cur = opinions[u]
                if s > previous_sample[u]:
                    if cur == 0:
                        opinions[u] = 1
                        ones += 1
                elif s < previous_sample[u]:
                    if cur == 1:
                        opinions[u] = 0
                        ones -= 1
                previous_sample[u] = s
                countdown[u] = ell
        until_recount -= 1
        if until_recount == 0:
            until_recount = RECOUNT_INTERVAL
            check = 0
            for i in range(n):
                check += opinions[i]
            if check != ones:
                return -1, False
        if ones == target:
            return rounds, True
    return rounds, False
