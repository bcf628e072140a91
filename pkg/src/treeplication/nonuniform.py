"""Decodability under per-layer independent vertex inclusion.

Each vertex of layer i is present with probability p_i, independently of all
others. Layer counts n_i drawn with replacement map to p_i through the
probability that a fixed vertex is hit at least once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidInput
from .tree import TreeShape


def n_to_p(n_i: int, layer: int, d: int) -> float:
    if n_i < 0:
        raise InvalidInput("layer count must be non-negative")
    if not 1 <= layer <= d:
        raise InvalidInput(f"layer {layer} out of range [1, {d}]")
    if n_i == 0:
        return 0.0
    size = 1 << (d - layer)
    return 1.0 - (1.0 - 1.0 / size) ** n_i


def counts_to_probs(counts: Sequence[int]) -> tuple[float, ...]:
    d = len(counts)
    return tuple(n_to_p(int(c), i + 1, d) for i, c in enumerate(counts))


def _check_probs(p: Sequence[float]) -> tuple[float, ...]:
    p = tuple(float(x) for x in p)
    if not p:
        raise InvalidInput("need at least one layer probability")
    if any(not 0.0 <= x <= 1.0 for x in p):
        raise InvalidInput(f"layer probabilities must lie in [0, 1]: {p}")
    return p


@dataclass(frozen=True)
class SelectionDistribution:
    """Per-layer draw counts, bottom layer first, with their inclusion probabilities."""

    counts: tuple[int, ...]
    probs: tuple[float, ...] = field(init=False)

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if not counts or any(c < 0 for c in counts):
            raise InvalidInput(f"invalid layer counts {self.counts}")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "probs", counts_to_probs(counts))

    @property
    def shape(self) -> TreeShape:
        return TreeShape(len(self.counts))

    @property
    def n(self) -> int:
        return sum(self.counts)


def q_table(p: Sequence[float]) -> np.ndarray:
    """Q_1..Q_d for subtrees with layers 1..i; entry 0 holds Q_0 = 1 by convention.

    Q_i = Q_{i-1}^2 + 2^(i-1) p_i prod_{j<i} (1 - p_j) Q_j, Q_1 = p_1.
    """
    p = _check_probs(p)
    d = len(p)
    q = np.empty(d + 1)
    q[0] = 1.0
    q[1] = p[0]
    running = 1.0  # prod_{j<i} (1 - p_j) Q_j
    for i in range(2, d + 1):
        running *= (1.0 - p[i - 2]) * q[i - 1]
        q[i] = q[i - 1] ** 2 + 2.0 ** (i - 1) * p[i - 1] * running
    return q


def b_table(p: Sequence[float]) -> np.ndarray:
    """B_1..B_d: probability a subtree decodes if and only if its root is supplied.

    B_1 = 1 - p_1, B_i = 2 (1 - p_i) Q_{i-1} B_{i-1}. Entry 0 is unused.
    """
    p = _check_probs(p)
    q = q_table(p)
    b = np.zeros(len(p) + 1)
    b[1] = 1.0 - p[0]
    for i in range(2, len(p) + 1):
        b[i] = 2.0 * (1.0 - p[i - 1]) * q[i - 1] * b[i - 1]
    return b


def decode_prob_Q(p: Sequence[float]) -> float:
    return float(q_table(p)[-1])


def decode_prob_counts(counts: Sequence[int]) -> float:
    return decode_prob_Q(counts_to_probs(counts))
