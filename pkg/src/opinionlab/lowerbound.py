"""Lower-bound machinery for full-knowledge dynamics.

Interval products of descent/ascent ratios bound hitting times from below;
an arithmetic-geometric mean dichotomy turns them into a certificate that no
memoryless rule crosses the middle window quickly in both directions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .chains import (
    BirthDeathChain,
    FullKnowledgeRule,
    chi_window,
    full_knowledge_chain,
    mirror_chain,
)
from .hitting import UnreachableConsensusError, step_expectations_recurrence

__all__ = [
    "Dichotomy",
    "Branch",
    "LowerBoundCertificate",
    "CertificatePreconditionError",
    "CertificateFailureError",
    "a_coefficients",
    "interval_product_sum",
    "hitting_lower_bound",
    "amgm_dichotomy",
    "full_knowledge_certificate",
    "pair_products",
    "random_full_knowledge_rule",
    "CERTIFICATE_CSV_HEADER",
    "certificate_csv_row",
]


class Dichotomy(enum.Enum):
    SUM_LARGE = "sum-large"
    INVERSE_SUM_LARGE = "inverse-sum-large"


class Branch(enum.Enum):
    """Which window chain the certificate proves slow."""

    C_SLOW = "CSlow"
    C_PRIME_SLOW = "CPrimeSlow"


class CertificatePreconditionError(ValueError):
    """The population size does not meet the certificate's requirements."""


class CertificateFailureError(RuntimeError):
    """The guaranteed branch inequality failed (a construction bug)."""


def a_coefficients(chain: BirthDeathChain) -> np.ndarray:
    """a_i = q_i / p_{i-1} for i in {low+1, ..., high}."""
    low, high = chain.low, chain.high
    for i in range(low, high):
        if chain.up[i - low] == 0.0:
            raise ZeroDivisionError(f"p = 0 at state {i}; descent ratios undefined")
    return chain.down[1:] / chain.up[:-1]


def interval_product_sum(
    a: np.ndarray,
    *,
    include_singletons: bool = False,
    allow_zero: bool = False,
) -> float:
    """Sum of prod_{k=i}^{j} a_k over index pairs i < j (or i <= j).

    Evaluated in log space via the running inner sums S_j = a_j (1 + S_{j-1}),
    so products spanning hundreds of orders of magnitude stay stable.
    """
    a = np.asarray(a, dtype=np.float64)
    bad = a <= 0.0 if not allow_zero else a < 0.0
    if np.any(bad):
        k = int(np.argmax(bad))
        raise ValueError(f"coefficient at index {k} is not positive: {a[k]}")
    with np.errstate(divide="ignore"):
        log_a = np.log(a)
    log_inner = -math.inf  # log S_{j-1}
    total = -math.inf
    for la in log_a:
        contribution = la + log_inner if not include_singletons else None
        log_inner_next = la + np.logaddexp(0.0, log_inner)
        if include_singletons:
            contribution = log_inner_next
        total = np.logaddexp(total, contribution)
        log_inner = log_inner_next
    return float(np.exp(total))


def hitting_lower_bound(chain: BirthDeathChain) -> float:
    """A certified lower bound on the expected hitting time of the top state
    from the bottom state: the strict-pair interval product sum."""
    return interval_product_sum(a_coefficients(chain), allow_zero=True)


def amgm_dichotomy(xs: np.ndarray, n_threshold: float) -> Dichotomy:
    """Either the sum or the sum of inverses reaches the threshold.

    With n_threshold = len(xs) the guarantee is unconditional: if the mean is
    below 1 the geometric mean is too, so the inverses average above 1.
    """
    xs = np.asarray(xs, dtype=np.float64)
    if np.any(xs <= 0.0):
        k = int(np.argmax(xs <= 0.0))
        raise ValueError(f"entry at index {k} is not positive: {xs[k]}")
    return Dichotomy.SUM_LARGE if float(np.sum(xs)) >= n_threshold else Dichotomy.INVERSE_SUM_LARGE


@dataclass(frozen=True)
class LowerBoundCertificate:
    """Outcome of the two-chain slowness certificate at the middle window.

    sum_a / sum_a_prime are interval product sums over non-strict descent
    ratio pairs (exactly pair_count terms each); hit_C / hit_Cprime the exact
    expected window crossing times. Whichever branch holds certifies
    max(hit_C, hit_Cprime) >= c * pair_count.
    """

    n: int
    z: int
    seed: int
    chi: tuple[int, int]
    sum_a: float
    sum_a_prime: float
    pair_count: int
    c: float
    hit_c: float
    hit_c_prime: float
    branch: Branch


def _log_a_values(chain: BirthDeathChain) -> np.ndarray | None:
    """Log descent ratios, or None when some ascent probability is zero
    (the top of the window is then unreachable)."""
    if np.any(chain.up[:-1] == 0.0):
        return None
    with np.errstate(divide="ignore"):
        return np.log(chain.down[1:]) - np.log(chain.up[:-1])


def _nonstrict_sum_from_logs(log_a: np.ndarray) -> float:
    log_inner = -math.inf
    total = -math.inf
    for la in log_a:
        log_inner = la + np.logaddexp(0.0, log_inner)
        total = np.logaddexp(total, log_inner)
    return float(np.exp(total))


def _window_hit(chain: BirthDeathChain) -> float:
    try:
        return step_expectations_recurrence(chain).total
    except UnreachableConsensusError:
        return math.inf


def size_requirement_holds(n: int, z: int) -> bool:
    """(1 - 4z/n)^n >= exp(-4z)/2, the explicit largeness condition."""
    return n > 4 * z and (1.0 - 4.0 * z / n) ** n >= math.exp(-4.0 * z) / 2.0


def full_knowledge_certificate(
    rule: FullKnowledgeRule, z: int, seed: int = -1
) -> LowerBoundCertificate:
    """Certify that some direction crosses the middle window slowly.

    Builds the window chain counting 1-holders and its mirror counting
    0-holders, sums their interval products over all non-strict ratio pairs,
    and resolves the dichotomy: either sum_a >= pair_count, or the reflection
    identity forces sum_a_prime >= c * pair_count. Both sums bound the
    respective exact crossing times from below.
    """
    n = rule.n
    if n % 4 != 0:
        raise CertificatePreconditionError(f"certificate needs 4 | n, got n = {n}")
    if z < 1:
        raise CertificatePreconditionError("need z >= 1")
    if not size_requirement_holds(n, z):
        raise CertificatePreconditionError(
            f"n too small for certificate: (1 - 4z/n)^n < exp(-4z)/2 at n = {n}, z = {z}"
        )
    window = chi_window(n)
    forward = full_knowledge_chain(rule, z, window)
    mirror = mirror_chain(rule, z, window)

    ratio_count = n // 2
    pair_count = n * n // 8 + n // 4
    if pair_count != ratio_count * (ratio_count + 1) // 2:
        raise CertificateFailureError("pair count mismatch against the window size")

    log_a = _log_a_values(forward)
    log_a_prime = _log_a_values(mirror)
    sum_a = _nonstrict_sum_from_logs(log_a) if log_a is not None else math.inf
    sum_a_prime = (
        _nonstrict_sum_from_logs(log_a_prime) if log_a_prime is not None else math.inf
    )
    hit_c = _window_hit(forward)
    hit_c_prime = _window_hit(mirror)
    c = math.exp(-4.0 * z) / 2.0

    if sum_a >= pair_count:
        branch = Branch.C_SLOW
    else:
        branch = Branch.C_PRIME_SLOW
        if not sum_a_prime >= c * pair_count:
            raise CertificateFailureError(
                f"guaranteed inequality failed: sum_a_prime = {sum_a_prime} "
                f"< c * pair_count = {c * pair_count}"
            )
    return LowerBoundCertificate(
        n=n,
        z=z,
        seed=seed,
        chi=window,
        sum_a=sum_a,
        sum_a_prime=sum_a_prime,
        pair_count=pair_count,
        c=c,
        hit_c=hit_c,
        hit_c_prime=hit_c_prime,
        branch=branch,
    )


def pair_products(rule: FullKnowledgeRule, z: int) -> tuple[np.ndarray, np.ndarray]:
    """Reflection pairing of descent ratios across the two window chains.

    For each i in {lo+1, ..., hi} returns a_{n-i+1} * a'_i and its
    rule-independent closed form ((i-z)/i) ((n-i+1-z)/(n-i+1)); the rule's
    table factors cancel in the product.
    """
    n = rule.n
    lo, hi = chi_window(n)
    forward = a_coefficients(full_knowledge_chain(rule, z))
    mirror = a_coefficients(mirror_chain(rule, z))
    idx = np.arange(lo + 1, hi + 1)
    products = forward[n - idx + 1 - (lo + 1)] * mirror[idx - (lo + 1)]
    targets = (idx - z) / idx * (n - idx + 1 - z) / (n - idx + 1)
    return products, targets


def random_full_knowledge_rule(n: int, rng: np.random.Generator) -> FullKnowledgeRule:
    """Tables drawn i.i.d. uniform in [0, 1], endpoints forced to 0 and 1."""
    g0 = rng.uniform(0.0, 1.0, n + 1)
    g1 = rng.uniform(0.0, 1.0, n + 1)
    g0[0] = g1[0] = 0.0
    g0[n] = g1[n] = 1.0
    return FullKnowledgeRule(n, g0, g1)


CERTIFICATE_CSV_HEADER = "n,z,seed,sum_a,sum_a_prime,N,c,hit_C,hit_Cprime,branch"


def certificate_csv_row(cert: LowerBoundCertificate) -> str:
    return ",".join(
        (
            str(cert.n),
            str(cert.z),
            str(cert.seed),
            f"{cert.sum_a:.9g}",
            f"{cert.sum_a_prime:.9g}",
            str(cert.pair_count),
            f"{cert.c:.9g}",
            f"{cert.hit_c:.9g}",
            f"{cert.hit_c_prime:.9g}",
            cert.branch.value,
        )
    )
