"""Binary tree structure of the code: addressing, multisets and decodability.

Vertices are addressed two ways. ``VertexId(layer, index)`` counts layers
bottom-up from 1 (leaves) to ``d`` (root) and indices left to right from 1.
Internally every vertex also has a heap id with the root at 1 and the
children of ``h`` at ``2h`` and ``2h + 1``; arrays indexed by heap id have
length ``2**d`` with slot 0 unused.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, NamedTuple

import numpy as np

from .errors import InvalidInput

# per-subtree decoding states
FULL = 0  # leaves recoverable from the subtree alone
NEED_ROOT = 1  # recoverable iff the subtree root value arrives from outside
DEAD = 2  # not recoverable whatever the rest of the tree holds


class VertexId(NamedTuple):
    layer: int
    index: int

    def __str__(self) -> str:
        return f"({self.layer},{self.index})"


@dataclass(frozen=True)
class TreeShape:
    d: int

    def __post_init__(self):
        if not isinstance(self.d, (int, np.integer)) or self.d < 1:
            raise InvalidInput(f"layer count must be a positive integer, got {self.d!r}")
        if self.d > 24:
            raise InvalidInput(f"layer count {self.d} is unreasonably large")

    @classmethod
    def from_k(cls, k: int) -> "TreeShape":
        if k < 1 or k & (k - 1):
            raise InvalidInput(f"k must be a power of two, got {k}")
        return cls(k.bit_length())

    @property
    def k(self) -> int:
        return 1 << (self.d - 1)

    @property
    def total_vertices(self) -> int:
        return (1 << self.d) - 1

    def layer_size(self, layer: int) -> int:
        self._check_layer(layer)
        return 1 << (self.d - layer)

    def layer_heap_ids(self, layer: int) -> range:
        self._check_layer(layer)
        start = 1 << (self.d - layer)
        return range(start, 2 * start)

    def heap_id(self, v: VertexId | tuple[int, int]) -> int:
        layer, index = v
        self._check_layer(layer)
        size = 1 << (self.d - layer)
        if not 1 <= index <= size:
            raise InvalidInput(f"vertex index {index} out of range for layer {layer}")
        return size + index - 1

    def vertex(self, h: int) -> VertexId:
        if not 1 <= h <= self.total_vertices:
            raise InvalidInput(f"heap id {h} out of range")
        top = h.bit_length() - 1
        return VertexId(self.d - top, h - (1 << top) + 1)

    def layer_of(self, h: int) -> int:
        return self.d - (int(h).bit_length() - 1)

    def is_leaf(self, h: int) -> bool:
        return h >= self.k

    def parent(self, v: VertexId) -> VertexId:
        if v.layer == self.d:
            raise InvalidInput("the root has no parent")
        return VertexId(v.layer + 1, (v.index + 1) // 2)

    def children(self, v: VertexId) -> tuple[VertexId, VertexId]:
        if v.layer == 1:
            raise InvalidInput("leaves have no children")
        return VertexId(v.layer - 1, 2 * v.index - 1), VertexId(v.layer - 1, 2 * v.index)

    def sibling(self, v: VertexId) -> VertexId:
        if v.layer == self.d:
            raise InvalidInput("the root has no sibling")
        return VertexId(v.layer, ((v.index - 1) ^ 1) + 1)

    def vertices(self) -> Iterator[VertexId]:
        """All vertices, layer ascending then index ascending."""
        for layer in range(1, self.d + 1):
            for index in range(1, self.layer_size(layer) + 1):
                yield VertexId(layer, index)

    def heap_order(self) -> list[int]:
        """Heap ids in (layer ascending, index ascending) order."""
        return [h for layer in range(1, self.d + 1) for h in self.layer_heap_ids(layer)]

    def leaves(self) -> list[VertexId]:
        return [VertexId(1, j) for j in range(1, self.k + 1)]

    def mask(self, subset: Iterable[VertexId | tuple[int, int]]) -> np.ndarray:
        """Boolean presence array indexed by heap id."""
        present = np.zeros(1 << self.d, dtype=np.bool_)
        for v in subset:
            present[self.heap_id(v)] = True
        return present

    def subset_from_mask(self, present: np.ndarray) -> frozenset[VertexId]:
        return frozenset(self.vertex(int(h)) for h in np.flatnonzero(present[1:]) + 1)

    def _check_layer(self, layer: int) -> None:
        if not 1 <= layer <= self.d:
            raise InvalidInput(f"layer {layer} out of range [1, {self.d}]")


@dataclass(frozen=True, eq=False)
class Multiset:
    """Vertex multiplicities; ``weights[h]`` is the count of heap id ``h``."""

    shape: TreeShape
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.int64)
        if w.shape != (1 << self.shape.d,):
            raise InvalidInput(f"weights must have length {1 << self.shape.d}, got {w.shape}")
        if w[0] != 0 or (w < 0).any():
            raise InvalidInput("weights must be non-negative with slot 0 unused")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def empty(cls, shape: TreeShape) -> "Multiset":
        return cls(shape, np.zeros(1 << shape.d, dtype=np.int64))

    @classmethod
    def from_counts(cls, shape: TreeShape, counts: Mapping[VertexId | tuple[int, int], int]) -> "Multiset":
        w = np.zeros(1 << shape.d, dtype=np.int64)
        for v, c in counts.items():
            w[shape.heap_id(v)] += int(c)
        return cls(shape, w)

    @classmethod
    def from_layers(cls, shape: TreeShape, layers: list[list[int]]) -> "Multiset":
        """Build from per-layer weight lists, bottom layer first."""
        if len(layers) != shape.d:
            raise InvalidInput(f"expected {shape.d} layers, got {len(layers)}")
        w = np.zeros(1 << shape.d, dtype=np.int64)
        for layer, row in enumerate(layers, start=1):
            ids = shape.layer_heap_ids(layer)
            if len(row) != len(ids):
                raise InvalidInput(f"layer {layer} needs {len(ids)} weights, got {len(row)}")
            w[ids.start:ids.stop] = row
        return cls(shape, w)

    def to_layers(self) -> list[list[int]]:
        return [
            [int(x) for x in self.weights[r.start:r.stop]]
            for r in (self.shape.layer_heap_ids(i) for i in range(1, self.shape.d + 1))
        ]

    @property
    def n(self) -> int:
        return int(self.weights.sum())

    def weight(self, v: VertexId | tuple[int, int]) -> int:
        return int(self.weights[self.shape.heap_id(v)])

    def support(self) -> frozenset[VertexId]:
        return self.shape.subset_from_mask(self.weights > 0)

    def present(self) -> np.ndarray:
        return self.weights > 0

    def added(self, v: VertexId, count: int = 1) -> "Multiset":
        w = self.weights.copy()
        w[self.shape.heap_id(v)] += count
        return Multiset(self.shape, w)

    def __eq__(self, other):
        if not isinstance(other, Multiset):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash((self.shape, self.weights.tobytes()))

    def __repr__(self):
        return f"Multiset(d={self.shape.d}, layers={self.to_layers()})"


def subtree_states(present: np.ndarray, d: int) -> np.ndarray:
    """Decoding state of every subtree, bottom-up over a heap-indexed mask.

    A subtree is FULL when internally decodable. With both children FULL it
    is FULL; a present root also rescues one NEED_ROOT child next to a FULL
    one. Without the root that same combination is NEED_ROOT. Anything else
    leaves two unknowns below one equation and is DEAD.
    """
    k = 1 << (d - 1)
    state = np.empty(2 * k, dtype=np.int8)
    for h in range(2 * k - 1, k - 1, -1):
        state[h] = FULL if present[h] else NEED_ROOT
    for h in range(k - 1, 0, -1):
        a, b = state[2 * h], state[2 * h + 1]
        if a == FULL and b == FULL:
            state[h] = FULL
        elif (a == FULL and b == NEED_ROOT) or (a == NEED_ROOT and b == FULL):
            state[h] = FULL if present[h] else NEED_ROOT
        else:
            state[h] = DEAD
    return state


def _as_mask(subset, shape: TreeShape) -> np.ndarray:
    if isinstance(subset, np.ndarray):
        return subset.astype(np.bool_, copy=False)
    if isinstance(subset, Multiset):
        return subset.present()
    return shape.mask(subset)


def is_decodable(subset, shape: TreeShape) -> bool:
    """True iff the subset's fragments determine all k data fragments.

    ``subset`` may be an iterable of vertices, a heap-indexed mask, or a
    Multiset (only its support matters).
    """
    return bool(subtree_states(_as_mask(subset, shape), shape.d)[1] == FULL)


def subtree_decodable(subset, shape: TreeShape, root: VertexId) -> bool:
    """Whether the subtree under ``root`` decodes using only its own vertices."""
    states = subtree_states(_as_mask(subset, shape), shape.d)
    return bool(states[shape.heap_id(root)] == FULL)


def generator_rows(shape: TreeShape) -> list[int]:
    """Each vertex's fragment as a bitmask over data fragments, by heap id.

    Bit ``j`` stands for leaf ``j + 1``. Slot 0 is a zero placeholder.
    """
    k = shape.k
    rows = [0] * (2 * k)
    for j in range(k):
        rows[k + j] = 1 << j
    for h in range(k - 1, 0, -1):
        rows[h] = rows[2 * h] ^ rows[2 * h + 1]
    return rows
