"""Search for the layer-count distribution that maximises decodability.

Optimal distributions satisfy p_i <= p_{i-1}, hence n_{i-1} >= 2 n_i, hence
n_i >= n_{i+1} + ... + n_d. The search only walks distributions with that
last (non-squashing) property: each layer keeps B - b of its budget B and
passes b <= B // 2 upward.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

from .combinatorics import (
    min_n_exact,
    replication_decode_fraction,
    uniform_decode_fraction,
)
from .errors import BudgetTooSmall, InvalidInput
from .nonuniform import SelectionDistribution, counts_to_probs, decode_prob_counts


@dataclass(frozen=True)
class SearchResult:
    best: SelectionDistribution
    q_star: float
    explored: int

    def to_dict(self) -> dict:
        return {"counts": list(self.best.counts), "q": self.q_star, "explored": self.explored}


def _q_prefix(counts: list[int], d: int) -> float:
    # layers beyond the prefix hold zero draws
    return decode_prob_counts(counts + [0] * (d - len(counts)))


def optimal_distribution(d: int, n: int) -> SearchResult:
    """Exhaustive search over non-squashing distributions of n draws.

    The top layer absorbs whatever budget reaches it, so every evaluated
    distribution spends exactly n. Ties keep the first distribution found.
    """
    k = 1 << (d - 1)
    if d < 1:
        raise InvalidInput("d must be >= 1")
    if n < k:
        raise BudgetTooSmall(f"n={n} is below k={k}; nothing can decode")
    best: list[int] = []
    q_star = -1.0
    explored = 0
    counts = [0] * d

    def distribute(j: int, budget: int) -> None:
        nonlocal best, q_star, explored
        if budget == 0 or j == d - 1:
            counts[j] = budget
            explored += 1
            q = decode_prob_counts(counts)
            if q > q_star:
                q_star, best = q, counts.copy()
            counts[j] = 0
            return
        for b in range(budget // 2 + 1):
            counts[j] = budget - b
            distribute(j + 1, b)
        counts[j] = 0

    distribute(0, n)
    return SearchResult(SelectionDistribution(tuple(best)), q_star, explored)


def brute_force_optimum(d: int, n: int) -> tuple[tuple[int, ...], float]:
    """Best Q over every composition of n into d non-negative parts."""
    best, q_best = None, -1.0
    for head in product(range(n + 1), repeat=d - 1):
        rest = n - sum(head)
        if rest < 0:
            continue
        counts = head + (rest,)
        q = decode_prob_counts(counts)
        if q > q_best:
            best, q_best = counts, q
    return best, q_best


def composition_count(n: int, d: int) -> int:
    from math import comb

    return comb(n + d - 1, d - 1)


def verify_optimality_properties(counts: Sequence[int] | SelectionDistribution) -> bool:
    """Check p non-increasing upward, n_{i-1} >= 2 n_i and the non-squashing bound."""
    if isinstance(counts, SelectionDistribution):
        counts = counts.counts
    counts = list(counts)
    p = counts_to_probs(counts)
    d = len(counts)
    for i in range(1, d):
        if p[i] > p[i - 1]:
            return False
        if counts[i - 1] < 2 * counts[i]:
            return False
    return all(counts[i] >= sum(counts[i + 1:]) for i in range(d - 1))


SCHEMES = ("uniform", "nonuniform", "replication")


def min_n_for_target(d: int, target: float, scheme: str) -> int:
    """Smallest n reaching ``target`` decoding probability, scanning up from k."""
    if not 0 < target < 1:
        raise InvalidInput("target must lie strictly between 0 and 1")
    k = 1 << (d - 1)
    if scheme == "uniform":
        exact = Fraction(str(target))
        return min_n_exact(lambda n: uniform_decode_fraction(d, n), k, exact)
    if scheme == "replication":
        exact = Fraction(str(target))
        return min_n_exact(lambda n: replication_decode_fraction(k, n), k, exact)
    if scheme == "nonuniform":
        return min_n_exact(lambda n: optimal_distribution(d, n).q_star, k, target)
    raise InvalidInput(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
