"""Augmentation policies: which fragment a newly joining node should store.

The sibling policy looks only at the nodes holding the picked vertex, its
parent and its sibling, and strengthens the weaker of the two siblings.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, prod

import numpy as np

from .errors import InvalidInput, InvalidLoss
from .tree import FULL, Multiset, TreeShape, VertexId, subtree_states

REPLICATE = "replicate"
GENERATE = "generate-from-parent"


@dataclass(frozen=True)
class AugmentationDecision:
    new_vertex: VertexId
    method: str
    accessible: dict[VertexId, int]  # consulted vertex -> number of holders
    picked: VertexId
    note: str = ""

    def apply(self, multiset: Multiset) -> Multiset:
        return multiset.added(self.new_vertex)

    def to_dict(self) -> dict:
        out = {
            "picked": list(self.picked),
            "new_vertex": list(self.new_vertex),
            "method": self.method,
            "accessible": [{"vertex": list(v), "holders": c} for v, c in self.accessible.items()],
        }
        if self.note:
            out["note"] = self.note
        return out


def _check_pick(multiset: Multiset, z: VertexId) -> VertexId:
    z = VertexId(*z)
    if multiset.weight(z) <= 0:
        raise InvalidInput(f"no node holds vertex {z}")
    return z


def augment_replicate(multiset: Multiset, z: VertexId) -> AugmentationDecision:
    z = _check_pick(multiset, z)
    return AugmentationDecision(z, REPLICATE, {z: multiset.weight(z)}, z)


def augment_sibling(multiset: Multiset, z: VertexId) -> AugmentationDecision:
    """Strengthen the lighter of the picked vertex and its sibling.

    Equal weights favour the left sibling. A picked root has no sibling or
    parent and is simply replicated.
    """
    z = _check_pick(multiset, z)
    shape = multiset.shape
    if z.layer == shape.d:
        return AugmentationDecision(
            z, REPLICATE, {z: multiset.weight(z)}, z, note="root picked; replicated"
        )
    sib = shape.sibling(z)
    par = shape.parent(z)
    w_z, w_sib, w_par = multiset.weight(z), multiset.weight(sib), multiset.weight(par)
    accessible = {z: w_z, sib: w_sib, par: w_par}
    if w_sib == 0 and w_par == 0:
        return AugmentationDecision(z, REPLICATE, accessible, z)
    left, right = (z, sib) if z.index < sib.index else (sib, z)
    lighter = right if multiset.weight(right) < multiset.weight(left) else left
    if multiset.weight(lighter) > 0:
        return AugmentationDecision(lighter, REPLICATE, accessible, z)
    # lighter is the absent sibling; the parent is present here
    return AugmentationDecision(lighter, GENERATE, accessible, z)


def _loss_vectors(weights: list[int], l: int):
    """All ways to split l losses across vertices with the given weights."""
    if not weights:
        if l == 0:
            yield ()
        return
    head, rest = weights[0], weights[1:]
    room = sum(rest)
    for c in range(max(0, l - room), min(head, l) + 1):
        for tail in _loss_vectors(rest, l - c):
            yield (c,) + tail


def _loss_vector_count(weights: list[int], l: int, cap: int) -> int:
    """Number of loss vectors, stopping early once it passes ``cap``."""
    ways = np.zeros(l + 1, dtype=object)
    ways[0] = 1
    for w in weights:
        nxt = np.zeros(l + 1, dtype=object)
        for c in range(min(w, l) + 1):
            nxt[c:] += ways[: l + 1 - c]
        ways = nxt
        if ways[l] > cap:
            return int(ways[l])
    return int(ways[l])


@dataclass(frozen=True)
class SurvivalEstimate:
    prob: float
    stderr: float
    exact: bool


def survival_after_losses(multiset: Multiset, l: int, *, max_vectors: int = 10**6,
                          trials: int = 100_000, seed: int = 0) -> SurvivalEstimate:
    """Probability the support stays decodable after l uniform losses without replacement."""
    n = multiset.n
    if not 0 <= l <= n:
        raise InvalidLoss(f"cannot lose {l} of {n} elements")
    shape = multiset.shape
    ids = [h for h in range(1, shape.total_vertices + 1) if multiset.weights[h] > 0]
    weights = [int(multiset.weights[h]) for h in ids]
    if _loss_vector_count(weights, l, max_vectors) <= max_vectors:
        return SurvivalEstimate(float(_exact_survival(shape, ids, weights, n, l)), 0.0, True)
    return _mc_survival(multiset, l, trials, seed)


def _exact_survival(shape: TreeShape, ids: list[int], weights: list[int], n: int, l: int) -> Fraction:
    total = comb(n, l)
    good = 0
    present = np.zeros(1 << shape.d, dtype=np.bool_)
    for vec in _loss_vectors(weights, l):
        present[:] = False
        for h, w, c in zip(ids, weights, vec):
            present[h] = c < w
        if subtree_states(present, shape.d)[1] == FULL:
            good += prod(comb(w, c) for w, c in zip(weights, vec))
    return Fraction(good, total)


def _mc_survival(multiset: Multiset, l: int, trials: int, seed: int) -> SurvivalEstimate:
    from ._kernels import batch_eval

    rng = np.random.default_rng(seed)
    width = 1 << multiset.shape.d
    elems = np.repeat(np.arange(width), multiset.weights)
    hits = 0
    for start in range(0, trials, 8192):
        size = min(8192, trials - start)
        kept = rng.permuted(np.broadcast_to(elems, (size, elems.size)), axis=1)[:, l:]
        present = np.zeros((size, width), dtype=np.bool_)
        present[np.arange(size)[:, None], kept] = True
        hits += int(batch_eval(present)[0].sum())
    p = hits / trials
    return SurvivalEstimate(p, float(np.sqrt(p * (1 - p) / trials)), False)


def survival_mc(multiset: Multiset, l: int, trials: int, seed: int = 0) -> SurvivalEstimate:
    """Sampling estimate regardless of instance size (cross-check for the exact path)."""
    if not 0 <= l <= multiset.n:
        raise InvalidLoss(f"cannot lose {l} of {multiset.n} elements")
    return _mc_survival(multiset, l, trials, seed)


__all__ = [
    "AugmentationDecision",
    "augment_sibling",
    "augment_replicate",
    "survival_after_losses",
    "survival_mc",
    "SurvivalEstimate",
    "REPLICATE",
    "GENERATE",
]
