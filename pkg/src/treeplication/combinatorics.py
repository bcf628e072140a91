"""Exact counting of decodable subsets and uniform-selection probabilities.

All counts are Python ints; probabilities are formed as exact Fractions and
only converted to float at the very end.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

from .errors import InvalidInput

_stirling_lock = threading.Lock()
_stirling_rows: list[list[int]] = [[1]]


def _stirling_row(a: int) -> list[int]:
    """Row a of the Stirling triangle, S(a, 0..a)."""
    with _stirling_lock:
        rows = _stirling_rows
        while len(rows) <= a:
            prev = rows[-1]
            m = len(prev)
            row = [0] * (m + 1)
            for b in range(1, m + 1):
                row[b] = (b * prev[b] if b < m else 0) + prev[b - 1]
            rows.append(row)
        return rows[a]


def stirling2(a: int, b: int) -> int:
    """Stirling number of the second kind: partitions of an a-set into b blocks."""
    if a < 0 or b < 0:
        raise InvalidInput("Stirling arguments must be non-negative")
    if b > a:
        return 0
    return _stirling_row(a)[b]


@dataclass(frozen=True)
class DecodableCounts:
    """Per-size counts of decodable subsets of a d-layer tree.

    Index j refers to subsets of exactly k + j distinct vertices. ``t`` counts
    subsets holding the root that stop decoding without it, ``r`` the rest.
    """

    d: int
    D: tuple[int, ...]
    t: tuple[int, ...]
    r: tuple[int, ...]

    def __getitem__(self, j: int) -> int:
        return self.D[j] if 0 <= j < len(self.D) else 0

    def by_size(self) -> dict[int, int]:
        k = 1 << (self.d - 1)
        return {k + j: v for j, v in enumerate(self.D)}


@lru_cache(maxsize=None)
def count_decodable(d: int) -> DecodableCounts:
    if d < 1:
        raise InvalidInput(f"d must be >= 1, got {d}")
    if d == 1:
        return DecodableCounts(1, (1,), (1,), (0,))
    sub = count_decodable(d - 1)
    half = len(sub.D)
    size = 2 * half

    def D(j):
        return sub.D[j] if 0 <= j < half else 0

    def t_prev(j):
        return sub.t[j] if 0 <= j < half else 0

    r, t = [], []
    for j in range(size):
        without_root = sum(D(l) * D(j - l) for l in range(j + 1))
        with_root = sum(D(l) * D(j - l - 1) for l in range(j + 1))
        r.append(without_root + with_root)
        t.append(2 * sum(D(l) * t_prev(j - l) for l in range(j + 1)))
    return DecodableCounts(d, tuple(a + b for a, b in zip(t, r)), tuple(t), tuple(r))


def uniform_decode_fraction(d: int, n: int) -> Fraction:
    """Exact probability that n uniform draws from all 2^d - 1 vertices decode."""
    if n < 0:
        raise InvalidInput("n must be non-negative")
    counts = count_decodable(d)
    k = 1 << (d - 1)
    m = 2 * k - 1
    total = 0
    for j in range(0, min(n - k, k - 1) + 1):
        distinct = k + j
        total += counts.D[j] * stirling2(n, distinct) * factorial(distinct)
    return Fraction(total, m**n)


def uniform_decode_prob(d: int, n: int) -> float:
    return float(uniform_decode_fraction(d, n))


def replication_decode_fraction(k: int, n: int) -> Fraction:
    """Coupon-collector success: n uniform draws over k fragments hit them all."""
    if n < 0 or k < 1:
        raise InvalidInput("need k >= 1 and n >= 0")
    return Fraction(stirling2(n, k) * factorial(k), k**n)


def replication_decode_prob(k: int, n: int) -> float:
    return float(replication_decode_fraction(k, n))


def min_n_exact(prob, start: int, target: float, limit: int = 100_000) -> int:
    """Smallest n >= start with prob(n) >= target, scanning upward."""
    n = start
    while prob(n) < target:
        n += 1
        if n > limit:
            raise RuntimeError(f"no n <= {limit} reaches target {target}")
    return n
