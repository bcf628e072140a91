"""Brute-force reference implementations used to cross-check the fast paths.

Nothing in here is on a production path. Each oracle takes the direct route
(linear algebra, exhaustive search) and shares no logic with the recursive
and scheduling code it is compared against.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations

from .errors import NonDecodable
from .tree import TreeShape, VertexId, generator_rows


def gf2_rank(rows: list[int]) -> int:
    """Rank over GF(2) of integer bitmask rows."""
    basis: dict[int, int] = {}  # leading bit -> row
    for r in rows:
        while r:
            top = r.bit_length() - 1
            if top not in basis:
                basis[top] = r
                break
            r ^= basis[top]
    return len(basis)


def in_span(target: int, rows: list[int]) -> bool:
    basis: dict[int, int] = {}
    for r in rows:
        while r:
            top = r.bit_length() - 1
            if top not in basis:
                basis[top] = r
                break
            r ^= basis[top]
    while target:
        top = target.bit_length() - 1
        if top not in basis:
            return False
        target ^= basis[top]
    return True


def rank_oracle_decodable(subset, shape: TreeShape) -> bool:
    """True iff the generator rows of the subset span all k data coordinates."""
    rows = generator_rows(shape)
    return gf2_rank([rows[shape.heap_id(v)] for v in subset]) == shape.k


def all_subsets(shape: TreeShape):
    """Every subset of vertices, as (bitmask over heap ids 1..M, vertex list)."""
    verts = list(shape.vertices())
    ids = [shape.heap_id(v) for v in verts]
    for bits in range(1 << len(verts)):
        yield bits, [verts[i] for i in range(len(verts)) if bits >> i & 1], ids


def _pair_costs(shape: TreeShape, present_ids: tuple[int, ...]) -> dict[tuple[int, int], int]:
    """Cheapest fragment count each present vertex needs for each leaf.

    cost(x, leaf) = min |R| over sets R of other present vertices with the
    leaf's unit vector in span(row(x), rows(R)). Pairs that cannot work at all
    are omitted.
    """
    rows = generator_rows(shape)
    out: dict[tuple[int, int], int] = {}
    for x in present_ids:
        others = [h for h in present_ids if h != x]
        pending = set(range(shape.k))
        for size in range(len(others) + 1):
            if not pending:
                break
            for combo in combinations(others, size):
                base = [rows[x]] + [rows[h] for h in combo]
                for leaf in list(pending):
                    if in_span(1 << leaf, base):
                        out[(x, leaf)] = size
                        pending.discard(leaf)
                if not pending:
                    break
    return out


def min_cost_bruteforce(subset, shape: TreeShape) -> int:
    """True minimum total transfers over all distributed recovery strategies.

    Each of the k leaves is assigned a distinct present vertex which recovers
    it from its own fragment plus received stored fragments. The assignment
    minimising the summed per-pair cost is found by DP over leaf bitmasks.
    """
    if shape.d > 4:
        raise ValueError("brute-force cost oracle is limited to d <= 4")
    present_ids = tuple(sorted(shape.heap_id(v) for v in set(subset)))
    cost = _pair_costs(shape, present_ids)
    k = shape.k
    inf = float("inf")

    @lru_cache(maxsize=None)
    def best(i: int, used: int) -> float:
        # leaves i.. still to assign; ``used`` marks vertices already taken
        if i == k:
            return 0
        result = inf
        for pos, x in enumerate(present_ids):
            if used >> pos & 1:
                continue
            c = cost.get((x, i))
            if c is None:
                continue
            result = min(result, c + best(i + 1, used | 1 << pos))
        return result

    total = best(0, 0)
    if total == inf:
        raise NonDecodable("no valid recovery strategy exists")
    return int(total)


def enumerate_patterns(d: int):
    """All inclusion patterns of T_d as (heap-indexed presence list, layer counts).

    ``layer_counts[i]`` is how many vertices of layer ``i + 1`` are present,
    so a pattern's Bernoulli probability is prod p_i^c (1 - p_i)^(size - c).
    """
    shape = TreeShape(d)
    m = shape.total_vertices
    layer = [0] + [shape.layer_of(h) for h in range(1, m + 1)]
    for bits in range(1 << m):
        present = [False] + [bool(bits >> (h - 1) & 1) for h in range(1, m + 1)]
        counts = [0] * d
        for h in range(1, m + 1):
            if present[h]:
                counts[layer[h] - 1] += 1
        yield present, counts


def pattern_prob(counts: list[int], p, d: int) -> float:
    prob = 1.0
    for i in range(d):
        size = 1 << (d - 1 - i)
        prob *= p[i] ** counts[i] * (1 - p[i]) ** (size - counts[i])
    return prob


__all__ = [
    "gf2_rank",
    "in_span",
    "rank_oracle_decodable",
    "all_subsets",
    "min_cost_bruteforce",
    "enumerate_patterns",
    "pattern_prob",
    "VertexId",
]
