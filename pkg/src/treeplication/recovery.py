"""Minimal-communication distributed recovery schedules.

Every present vertex x looks down each path from its children, stopping at
the first present vertex or at a missing leaf. The present vertices it stops
at are the fragments x must receive; if it stops at a missing leaf, x is the
(unique, lowest) vertex able to recover that leaf. Present vertices that
reach no missing leaf are redundant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonDecodable
from .tree import Multiset, TreeShape, VertexId


@dataclass(frozen=True)
class RecoverySchedule:
    shape: TreeShape
    assignments: dict[VertexId, VertexId]  # missing leaf -> recovering vertex
    transfers: tuple[tuple[VertexId, VertexId], ...]  # (source, destination)
    discarded: tuple[VertexId, ...] = field(default=())

    @property
    def total_cost(self) -> int:
        return len(self.transfers)

    def sources_for(self, x: VertexId) -> list[VertexId]:
        return [src for src, dst in self.transfers if dst == x]

    def to_dict(self) -> dict:
        return {
            "assignments": [
                {"leaf": list(leaf), "recovered_by": list(x)}
                for leaf, x in sorted(self.assignments.items())
            ],
            "transfers": [{"from": list(s), "to": list(t)} for s, t in self.transfers],
            "discarded": [list(v) for v in self.discarded],
            "cost": self.total_cost,
        }


def _frontier(present: np.ndarray, k: int, start: int) -> tuple[list[int], list[int]]:
    """Present vertices and missing leaves first met walking down from ``start``."""
    hits, missing = [], []
    stack = [start]
    while stack:
        h = stack.pop()
        if present[h]:
            hits.append(h)
        elif h >= k:
            missing.append(h)
        else:
            # right pushed first so the left path is walked first
            stack.append(2 * h + 1)
            stack.append(2 * h)
    return hits, missing


def plan_recovery(subset, shape: TreeShape) -> RecoverySchedule:
    """Build the recovery schedule, raising NonDecodable when one cannot exist."""
    if isinstance(subset, Multiset):
        present = subset.present()
    elif isinstance(subset, np.ndarray):
        present = subset.astype(np.bool_, copy=False)
    else:
        present = shape.mask(subset)
    k = shape.k
    assignments: dict[VertexId, VertexId] = {}
    transfers: list[tuple[VertexId, VertexId]] = []
    discarded: list[VertexId] = []
    for h in shape.heap_order():
        if not present[h] or h >= k:
            continue
        hits, missing = [], []
        for child in (2 * h, 2 * h + 1):
            ch, cm = _frontier(present, k, child)
            hits += ch
            missing += cm
        x = shape.vertex(h)
        if not missing:
            discarded.append(x)
            continue
        if len(missing) > 1:
            raise NonDecodable(
                f"vertex {x} is the only candidate for {len(missing)} missing leaves"
            )
        assignments[shape.vertex(missing[0])] = x
        transfers.extend((shape.vertex(s), x) for s in hits)
    n_missing = int(k - present[k : 2 * k].sum())
    if len(assignments) < n_missing:
        raise NonDecodable(
            f"only {len(assignments)} recovering vertices for {n_missing} missing leaves"
        )
    return RecoverySchedule(shape, assignments, tuple(transfers), tuple(discarded))


def recovery_cost(subset, shape: TreeShape) -> int:
    return plan_recovery(subset, shape).total_cost
