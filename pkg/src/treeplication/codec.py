"""XOR tree encoding, schedule-driven decoding and the codeword file format.

File layout (little-endian)::

    b"TRPL" | version u8 | d u8 | fragment_len u32 | original_len u64
    fragments, layer ascending then index ascending (leaves first)
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import BadHeader, InvalidInput, NonDecodable
from .recovery import plan_recovery
from .tree import Multiset, TreeShape, VertexId

MAGIC = b"TRPL"
VERSION = 1
_HEADER = struct.Struct("<4sBBIQ")


def _xor(a: bytes, b: bytes) -> bytes:
    return np.bitwise_xor(np.frombuffer(a, np.uint8), np.frombuffer(b, np.uint8)).tobytes()


@dataclass(frozen=True)
class Codeword:
    shape: TreeShape
    fragments: tuple[bytes, ...]  # by heap id; slot 0 is b""
    original_len: int

    @property
    def fragment_len(self) -> int:
        return len(self.fragments[1])

    def __getitem__(self, v: VertexId | tuple[int, int]) -> bytes:
        return self.fragments[self.shape.heap_id(v)]

    def leaves(self) -> list[bytes]:
        k = self.shape.k
        return list(self.fragments[k : 2 * k])

    def restrict(self, subset) -> dict[VertexId, bytes]:
        return {VertexId(*v): self[v] for v in subset}

    def to_bytes(self) -> bytes:
        head = _HEADER.pack(MAGIC, VERSION, self.shape.d, self.fragment_len, self.original_len)
        return head + b"".join(self.fragments[h] for h in self.shape.heap_order())

    @classmethod
    def from_bytes(cls, blob: bytes) -> "Codeword":
        if len(blob) < _HEADER.size:
            raise BadHeader("file shorter than the codeword header")
        magic, version, d, frag_len, original_len = _HEADER.unpack_from(blob)
        if magic != MAGIC:
            raise BadHeader(f"bad magic {magic!r}")
        if version != VERSION:
            raise BadHeader(f"unsupported codeword version {version}")
        if d < 1:
            raise BadHeader("layer count must be positive")
        shape = TreeShape(d)
        body = blob[_HEADER.size :]
        if len(body) != frag_len * shape.total_vertices:
            raise BadHeader(
                f"expected {frag_len * shape.total_vertices} payload bytes, found {len(body)}"
            )
        if original_len > frag_len * shape.k:
            raise BadHeader("original length exceeds the data capacity")
        frags = [b""] * (shape.total_vertices + 1)
        for pos, h in enumerate(shape.heap_order()):
            frags[h] = body[pos * frag_len : (pos + 1) * frag_len]
        return cls(shape, tuple(frags), original_len)


def encode(data: Sequence[bytes], shape: TreeShape, original_len: int | None = None) -> Codeword:
    """Encode k equal-length data fragments; internal vertices XOR their children."""
    k = shape.k
    if len(data) != k:
        raise InvalidInput(f"expected {k} data fragments, got {len(data)}")
    lengths = {len(x) for x in data}
    if len(lengths) != 1:
        raise InvalidInput(f"data fragments have unequal lengths {sorted(lengths)}")
    frags: list[bytes] = [b""] * (2 * k)
    for j, x in enumerate(data):
        frags[k + j] = bytes(x)
    for h in range(k - 1, 0, -1):
        frags[h] = _xor(frags[2 * h], frags[2 * h + 1])
    if original_len is None:
        original_len = k * lengths.pop()
    return Codeword(shape, tuple(frags), original_len)


def split(payload: bytes, k: int) -> list[bytes]:
    """Zero-pad ``payload`` to a multiple of k and cut it into k fragments."""
    frag_len = max(1, -(-len(payload) // k))
    padded = payload.ljust(frag_len * k, b"\0")
    return [padded[j * frag_len : (j + 1) * frag_len] for j in range(k)]


def encode_bytes(payload: bytes, shape: TreeShape) -> Codeword:
    return encode(split(payload, shape.k), shape, original_len=len(payload))


def decode(available: Mapping[VertexId | tuple[int, int], bytes] | Multiset, shape: TreeShape,
           fragments: Mapping[VertexId | tuple[int, int], bytes] | None = None) -> list[bytes]:
    """Recover the k data fragments from the available vertices.

    Either pass a vertex -> fragment mapping, or a Multiset together with the
    fragment values for its support. Each missing leaf is rebuilt by its
    recovering vertex XORing its own fragment with the fragments it receives.
    """
    if isinstance(available, Multiset):
        if fragments is None:
            raise InvalidInput("a Multiset needs the fragment values of its support")
        subset = available.support()
        values = {VertexId(*v): fragments[v] for v in subset}
    else:
        values = {VertexId(*v): f for v, f in available.items()}
        subset = frozenset(values)
    if not subset:
        raise NonDecodable("no fragments available")
    lengths = {len(f) for f in values.values()}
    if len(lengths) != 1:
        raise InvalidInput("available fragments have unequal lengths")
    schedule = plan_recovery(subset, shape)
    out = []
    for leaf in shape.leaves():
        if leaf in values:
            out.append(values[leaf])
            continue
        x = schedule.assignments[leaf]
        acc = values[x]
        for src in schedule.sources_for(x):
            acc = _xor(acc, values[src])
        out.append(acc)
    return out


def decode_codeword(codeword: Codeword, subset=None) -> bytes:
    """Rebuild the original payload, optionally from a subset of vertices only."""
    shape = codeword.shape
    if subset is None:
        subset = shape.leaves()
    data = decode(codeword.restrict(subset), shape)
    return b"".join(data)[: codeword.original_len]
