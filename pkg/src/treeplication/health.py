"""Diagonal covers and the principal l-health of a multiset.

A diagonal is a downward path ending at a leaf. A cover splits the whole
tree into k disjoint diagonals; a subset decodes iff some cover has a
present vertex on every diagonal. The principal cover is grown upward from
the leaves, each parent joining the lighter of its children's diagonals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, perm
from typing import Sequence

import numpy as np

from .errors import InvalidLoss
from .tree import Multiset, TreeShape, VertexId


@dataclass(frozen=True)
class Diagonal:
    vertices: tuple[VertexId, ...]  # top first, leaf last
    weight: int

    @property
    def leaf(self) -> VertexId:
        return self.vertices[-1]


@dataclass(frozen=True)
class DiagonalCover:
    shape: TreeShape
    diagonals: tuple[Diagonal, ...]  # ordered by leaf index

    @property
    def weight_profile(self) -> tuple[int, ...]:
        return tuple(g.weight for g in self.diagonals)

    def sizes(self) -> list[int]:
        return sorted(len(g.vertices) for g in self.diagonals)

    def to_dict(self) -> dict:
        return {
            "cover": [[list(v) for v in g.vertices] for g in self.diagonals],
            "weights": list(self.weight_profile),
        }


def expected_cover_sizes(d: int) -> list[int]:
    """Sorted diagonal sizes every cover of T_d must have."""
    sizes = [d]
    for i in range(1, d):
        sizes += [i] * (1 << (d - i - 1))
    return sorted(sizes)


def _owner_to_cover(shape: TreeShape, owner: np.ndarray, weights: np.ndarray) -> DiagonalCover:
    k = shape.k
    members: list[list[int]] = [[] for _ in range(k)]
    for h in range(1, 2 * k):
        members[owner[h]].append(h)
    diags = []
    for j in range(k):
        ids = sorted(members[j])  # heap ids grow downward along a path
        diags.append(Diagonal(tuple(shape.vertex(h) for h in ids), int(weights[ids].sum())))
    return DiagonalCover(shape, tuple(diags))


def principal_cover(multiset: Multiset) -> DiagonalCover:
    """Grow diagonals upward, giving each parent to the lighter child diagonal.

    A strictly lighter left diagonal takes the parent; ties go right.
    """
    shape = multiset.shape
    w = multiset.weights
    k = shape.k
    owner = np.zeros(2 * k, dtype=np.int64)  # heap id -> diagonal (leaf offset)
    diag_w = np.zeros(k, dtype=np.int64)
    for j in range(k):
        owner[k + j] = j
        diag_w[j] = w[k + j]
    for h in range(k - 1, 0, -1):
        y, z = owner[2 * h], owner[2 * h + 1]
        target = y if diag_w[y] < diag_w[z] else z
        owner[h] = target
        diag_w[target] += w[h]
    return _owner_to_cover(shape, owner, w)


def all_covers(multiset: Multiset):
    """Every diagonal cover: each internal vertex continues one child's diagonal."""
    shape = multiset.shape
    k = shape.k
    w = multiset.weights
    internal = list(range(k - 1, 0, -1))
    for choice in range(1 << (k - 1)):
        owner = np.zeros(2 * k, dtype=np.int64)
        owner[k:] = np.arange(k)
        for pos, h in enumerate(internal):
            owner[h] = owner[2 * h + (choice >> pos & 1)]
        yield _owner_to_cover(shape, owner, w)


def _empty_ways(n: int, w: int, l: int) -> int:
    # C(n - w, l - w), zero when the diagonal holds more than l elements
    if l < w:
        return 0
    return comb(n - w, l - w)


def cover_survival_fraction(profile: Sequence[int], n: int, l: int) -> Fraction:
    """Exact mean probability that a diagonal keeps weight after l random losses."""
    if not 0 <= l <= n:
        raise InvalidLoss(f"cannot lose {l} of {n} elements")
    k = len(profile)
    total = perm(n, l)
    emptied = sum(Fraction(_empty_ways(n, int(w), l) * perm(l, l), total) for w in profile)
    return 1 - emptied / k


def cover_survival_prob(cover: DiagonalCover | Sequence[int], n: int, l: int) -> float:
    profile = cover.weight_profile if isinstance(cover, DiagonalCover) else cover
    return float(cover_survival_fraction(profile, n, l))


def principal_l_health(multiset: Multiset, l: int) -> float:
    cover = principal_cover(multiset)
    return cover_survival_prob(cover, multiset.n, l)


def decodable_via_cover(subset, shape: TreeShape) -> bool:
    """Decodability by building each leaf's diagonal up to its lowest present vertex.

    The subset decodes iff every leaf meets a present vertex on the way up
    and no two leaves stop at the same one.
    """
    if isinstance(subset, Multiset):
        present = subset.present()
    else:
        present = shape.mask(subset)
    k = shape.k
    claimed = np.zeros(2 * k, dtype=np.bool_)
    for leaf in range(k, 2 * k):
        h = leaf
        while h >= 1 and not present[h]:
            if claimed[h]:
                return False  # two diagonals would overlap below any present vertex
            claimed[h] = True
            h //= 2
        if h == 0 or claimed[h]:
            return False
        claimed[h] = True
    return True


def health_histogram(values: Sequence[float], bins: int = 20) -> list[dict]:
    counts, edges = np.histogram(np.asarray(values, dtype=float), bins=bins, range=(0.0, 1.0))
    return [
        {"lo": float(edges[i]), "hi": float(edges[i + 1]), "count": int(counts[i])}
        for i in range(bins)
    ]
