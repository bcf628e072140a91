"""Exact distribution of per-fragment recovery cost under i.i.d. layer inclusion.

Tables, all indexed by subtree layer count i (1..d) and transfer count N:

F[i][N]  subtree decodable with exactly N present vertices that have no
         present ancestor (the fragments a parent would receive);
A[i][N]  decodable and the target leaf costs N, conditioned on a present
         root and an all-missing path from one of its children to the leaf;
P[i][N]  decodable and the target leaf costs N (joint probability).

Cost for the whole data unit is k times the per-leaf expectation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateModel
from .nonuniform import _check_probs, q_table


@dataclass(frozen=True)
class CostTables:
    d: int
    p: tuple[float, ...]
    Q: np.ndarray  # Q[i], i = 0..d
    F: np.ndarray  # F[i, N], N = 0..k
    A: np.ndarray  # A[i, N], N = 0..k-1
    P: np.ndarray  # P[i, N], N = 0..k-1

    @property
    def k(self) -> int:
        return 1 << (self.d - 1)

    def cost_distribution(self) -> np.ndarray:
        """C_d(N) = P_d(N) / Q_d, the per-leaf cost law given decodability."""
        qd = self.Q[self.d]
        if qd <= 0.0:
            raise DegenerateModel("decoding probability is zero")
        return self.P[self.d] / qd

    def expected_cost(self) -> float:
        c = self.cost_distribution()
        return float(self.k * np.dot(np.arange(len(c)), c))


def compute_F(d: int, p: Sequence[float], Q: np.ndarray | None = None) -> np.ndarray:
    p = _check_probs(p)
    if Q is None:
        Q = q_table(p)
    k = 1 << (d - 1)
    F = np.zeros((d + 1, k + 1))
    F[1, 1] = p[0]
    running = 1.0  # prod_{j<i} (1 - p_j) Q_j
    for i in range(2, d + 1):
        running *= (1.0 - p[i - 2]) * Q[i - 1]
        F[i, 1] = p[i - 1] * (Q[i - 1] ** 2 + 2.0 ** (i - 1) * running)
        top = 1 << (i - 1)
        half = 1 << (i - 2)
        prev = F[i - 1, : half + 1]
        # convolution of the two child subtrees, root absent
        conv = np.convolve(prev, prev)
        F[i, 2 : top + 1] = (1.0 - p[i - 1]) * conv[2 : top + 1]
    return F


def compute_A(d: int, p: Sequence[float], F: np.ndarray) -> np.ndarray:
    p = _check_probs(p)
    k = 1 << (d - 1)
    A = np.zeros((d + 1, k))
    if d >= 2:
        A[2, 1] = p[0]
    for i in range(3, d + 1):
        for N in range(k):
            total = 0.0
            for l in range(1, min(1 << (i - 2), N) + 1):
                total += F[i - 1, l] * A[i - 1, N - l]
            A[i, N] = total
    return A


def compute_P(d: int, p: Sequence[float], A: np.ndarray, Q: np.ndarray) -> np.ndarray:
    p = _check_probs(p)
    k = 1 << (d - 1)
    P = np.zeros((d + 1, k))
    P[1, 0] = p[0]
    for i in range(2, d + 1):
        path_missing = np.prod([1.0 - p[l] for l in range(i - 1)])
        root_and_path = p[i - 1] * path_missing
        # both subtrees decode on their own
        both = Q[i - 1] * P[i - 1]
        # root recovers the target leaf
        by_root = A[i] * root_and_path
        # root recovers some other leaf; the target sits in a decodable j-layer piece
        other = np.zeros(k)
        for j in range(1, i):
            rest = np.prod([Q[l] for l in range(1, i) if l != j])
            other += 2.0 ** (j - 1) * P[j] * rest
        P[i] = both + by_root + root_and_path * other
    return P


def cost_tables(p: Sequence[float]) -> CostTables:
    p = _check_probs(p)
    d = len(p)
    Q = q_table(p)
    F = compute_F(d, p, Q)
    A = compute_A(d, p, F)
    P = compute_P(d, p, A, Q)
    return CostTables(d, p, Q, F, A, P)


def expected_cost(p: Sequence[float]) -> float:
    """Expected total transfers per decodable instance, E = k sum N P_d(N) / Q_d."""
    return cost_tables(p).expected_cost()
