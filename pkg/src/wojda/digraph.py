"""Digraphs, injections between them, and collision accounting.

Vertices are the integers ``0 .. order-1``.  Adjacency is kept in both
directions, as sorted tuples for iteration and as Python-int bitsets for
set algebra, so arc queries stay cheap in every inner loop.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    InjectivityError,
    InvalidDigraph,
    OverlapError,
    PartialMapError,
    ShapeError,
)

Arc = tuple[int, int]


class Digraph:
    """Immutable simple digraph (no loops, no parallel arcs)."""

    def __init__(self, order: int, arcs: Iterable[Arc] = ()):
        if order < 0:
            raise InvalidDigraph(f"negative order {order}")
        out: list[list[int]] = [[] for _ in range(order)]
        inn: list[list[int]] = [[] for _ in range(order)]
        seen: set[Arc] = set()
        for u, v in arcs:
            u, v = int(u), int(v)
            if not (0 <= u < order and 0 <= v < order):
                raise InvalidDigraph(f"arc ({u}, {v}) out of range for order {order}")
            if u == v:
                raise InvalidDigraph(f"self-loop at {u}")
            if (u, v) in seen:
                raise InvalidDigraph(f"duplicate arc ({u}, {v})")
            seen.add((u, v))
            out[u].append(v)
            inn[v].append(u)
        self.order = order
        self.arcs: frozenset[Arc] = frozenset(seen)
        self._out = tuple(tuple(sorted(x)) for x in out)
        self._in = tuple(tuple(sorted(x)) for x in inn)

    # -- basic queries -------------------------------------------------

    @property
    def size(self) -> int:
        """Number of arcs."""
        return len(self.arcs)

    def has_arc(self, u: int, v: int) -> bool:
        return (u, v) in self.arcs

    def out_neighbors(self, v: int) -> tuple[int, ...]:
        return self._out[v]

    def in_neighbors(self, v: int) -> tuple[int, ...]:
        return self._in[v]

    def neighbors(self, v: int) -> frozenset[int]:
        return frozenset(self._out[v]) | frozenset(self._in[v])

    def out_degree(self, v: int) -> int:
        return len(self._out[v])

    def in_degree(self, v: int) -> int:
        return len(self._in[v])

    def degree(self, v: int) -> int:
        return len(self._out[v]) + len(self._in[v])

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(o) + len(i) for o, i in zip(self._out, self._in))

    def vertices(self) -> range:
        return range(self.order)

    def sorted_arcs(self) -> list[Arc]:
        return sorted(self.arcs)

    # -- bitsets ---------------------------------------------------------

    @cached_property
    def _out_bits(self) -> tuple[int, ...]:
        return tuple(_bits(x) for x in self._out)

    @cached_property
    def _in_bits(self) -> tuple[int, ...]:
        return tuple(_bits(x) for x in self._in)

    def out_bits(self, v: int) -> int:
        return self._out_bits[v]

    def in_bits(self, v: int) -> int:
        return self._in_bits[v]

    def neighbor_bits(self, v: int) -> int:
        return self._out_bits[v] | self._in_bits[v]

    # -- numpy views -----------------------------------------------------

    @cached_property
    def arc_array(self) -> np.ndarray:
        """Arcs as an ``(size, 2)`` int64 array in sorted order."""
        if not self.arcs:
            return np.zeros((0, 2), dtype=np.int64)
        return np.array(self.sorted_arcs(), dtype=np.int64)

    @cached_property
    def out_arrays(self) -> tuple[np.ndarray, ...]:
        return tuple(np.array(x, dtype=np.int64) for x in self._out)

    @cached_property
    def in_arrays(self) -> tuple[np.ndarray, ...]:
        return tuple(np.array(x, dtype=np.int64) for x in self._in)

    # -- derived digraphs --------------------------------------------------

    def reverse(self) -> "Digraph":
        return Digraph(self.order, ((v, u) for u, v in self.arcs))

    def induced(self, vertices: Sequence[int]) -> "Digraph":
        """Sub-digraph induced by ``vertices``; vertex ``vertices[i]`` becomes ``i``."""
        index = {v: i for i, v in enumerate(vertices)}
        if len(index) != len(vertices):
            raise InvalidDigraph("repeated vertex in induced()")
        arcs = []
        for v in vertices:
            iv = index[v]
            for w in self._out[v]:
                j = index.get(w)
                if j is not None:
                    arcs.append((iv, j))
        return Digraph(len(vertices), arcs)

    def remove(self, vertices: Iterable[int]) -> tuple["Digraph", list[int]]:
        """Delete ``vertices``; returns the remainder and its label list."""
        drop = set(vertices)
        keep = [v for v in range(self.order) if v not in drop]
        return self.induced(keep), keep

    # -- value semantics ---------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Digraph):
            return NotImplemented
        return self.order == other.order and self.arcs == other.arcs

    def __hash__(self) -> int:
        return hash((self.order, self.arcs))

    def __repr__(self) -> str:
        return f"Digraph(order={self.order}, size={self.size})"


def _bits(vs: Iterable[int]) -> int:
    b = 0
    for v in vs:
        b |= 1 << v
    return b


def lowest_bit(x: int) -> int:
    """Index of the least significant set bit of ``x`` (``x`` must be > 0)."""
    return (x & -x).bit_length() - 1


def weak_components(D: Digraph) -> list[list[int]]:
    """Weak components, each sorted, listed by smallest vertex."""
    seen = [False] * D.order
    comps = []
    for s in range(D.order):
        if seen[s]:
            continue
        seen[s] = True
        stack, comp = [s], []
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in D.out_neighbors(v) + D.in_neighbors(v):
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        comps.append(sorted(comp))
    return comps


class Injection:
    """Partial injective map from ``range(source_order)`` into ``range(target_order)``."""

    def __init__(self, source_order: int, target_order: int, assignment: Mapping[int, int] | None = None):
        if target_order < source_order:
            raise ShapeError(f"target order {target_order} < source order {source_order}")
        self.source_order = source_order
        self.target_order = target_order
        self._fwd: dict[int, int] = {}
        self._inv: dict[int, int] = {}
        for u, v in (assignment or {}).items():
            self.assign(u, v)

    @classmethod
    def identity(cls, n: int, target_order: int | None = None) -> "Injection":
        return cls(n, n if target_order is None else target_order, {v: v for v in range(n)})

    @classmethod
    def from_sequence(cls, images: Sequence[int], target_order: int | None = None) -> "Injection":
        n = len(images)
        return cls(n, n if target_order is None else target_order, dict(enumerate(int(y) for y in images)))

    def assign(self, u: int, v: int) -> None:
        if not 0 <= u < self.source_order:
            raise ShapeError(f"source vertex {u} out of range")
        if not 0 <= v < self.target_order:
            raise ShapeError(f"target vertex {v} out of range")
        if u in self._fwd:
            raise OverlapError(f"source vertex {u} already assigned")
        if v in self._inv:
            raise InjectivityError(f"target vertex {v} already used by {self._inv[v]}")
        self._fwd[u] = v
        self._inv[v] = u

    def __getitem__(self, u: int) -> int:
        return self._fwd[u]

    def get(self, u: int, default=None):
        return self._fwd.get(u, default)

    def __contains__(self, u: object) -> bool:
        return u in self._fwd

    def __len__(self) -> int:
        return len(self._fwd)

    def items(self):
        return sorted(self._fwd.items())

    def preimage(self, v: int) -> int | None:
        return self._inv.get(v)

    def image(self) -> frozenset[int]:
        return frozenset(self._inv)

    def domain(self) -> frozenset[int]:
        return frozenset(self._fwd)

    @property
    def is_total(self) -> bool:
        return len(self._fwd) == self.source_order

    def as_list(self) -> list[int]:
        if not self.is_total:
            raise PartialMapError("injection is partial")
        return [self._fwd[u] for u in range(self.source_order)]

    def copy(self) -> "Injection":
        return Injection(self.source_order, self.target_order, self._fwd)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Injection):
            return NotImplemented
        return (self.source_order, self.target_order, self._fwd) == (
            other.source_order,
            other.target_order,
            other._fwd,
        )

    def __repr__(self) -> str:
        return f"Injection({self.source_order}->{self.target_order}, {len(self)} assigned)"


def collision_arcs(f: Injection, source: Digraph, target: Digraph) -> list[Arc]:
    """Target arcs that are images of source arcs under the total map ``f``, sorted."""
    if f.source_order != source.order or f.target_order != target.order:
        raise ShapeError(
            f"map is {f.source_order}->{f.target_order}, digraphs are {source.order}->{target.order}"
        )
    if not f.is_total:
        raise PartialMapError(f"{f.source_order - len(f)} source vertices unassigned")
    hits = []
    tarcs = target.arcs
    for u, v in source.arcs:
        a = (f[u], f[v])
        if a in tarcs:
            hits.append(a)
    return sorted(hits)


@dataclass(frozen=True)
class PackingCertificate:
    """A total injection with its collision list; ``len(collisions) <= q_bound``."""

    map: Injection
    collisions: tuple[Arc, ...]
    q_bound: int = 0
    seed: int | None = None
    method: str = ""

    def __post_init__(self):
        if len(self.collisions) > self.q_bound:
            raise ValueError(f"{len(self.collisions)} collisions exceed bound {self.q_bound}")

    @property
    def is_packing(self) -> bool:
        return not self.collisions

    def verify(self, source: Digraph, target: Digraph) -> bool:
        """Recompute the collisions from scratch and compare."""
        return tuple(collision_arcs(self.map, source, target)) == tuple(sorted(self.collisions)) and (
            len(self.collisions) <= self.q_bound
        )


def certify(f: Injection, source: Digraph, target: Digraph, q: int = 0, **meta) -> PackingCertificate:
    from .errors import InternalInvariantError

    hits = collision_arcs(f, source, target)
    if len(hits) > q:
        raise InternalInvariantError(f"{len(hits)} collisions exceed bound {q}: {hits[:5]}")
    return PackingCertificate(f, tuple(hits), q, **meta)


@dataclass(frozen=True)
class DegreeOrder:
    """Vertices by non-increasing total degree, ties by ascending label.

    ``ordering[0]`` is the vertex the usual 1-based notation calls v'_1.
    """

    ordering: tuple[int, ...]
    rank: dict[int, int] = field(compare=False, repr=False, default_factory=dict)

    def __post_init__(self):
        if not self.rank:
            object.__setattr__(self, "rank", {v: i for i, v in enumerate(self.ordering)})

    def __getitem__(self, i: int) -> int:
        return self.ordering[i]

    def __len__(self) -> int:
        return len(self.ordering)

    def __iter__(self) -> Iterator[int]:
        return iter(self.ordering)

    def top(self, s: int) -> tuple[int, ...]:
        return self.ordering[:s]


def degree_order(target: Digraph) -> DegreeOrder:
    deg = target.degrees
    return DegreeOrder(tuple(sorted(range(target.order), key=lambda v: (-deg[v], v))))


def check_prop_deg(target: Digraph, order: DegreeOrder) -> bool:
    """``d(v'_j) <= (|A| + j(j-1)) / j`` for every 1-based position ``j >= 2``."""
    if sorted(order.ordering) != list(range(target.order)):
        raise ValueError("ordering is not a permutation of the vertices")
    deg = target.degrees
    seq = [deg[v] for v in order.ordering]
    if any(a < b for a, b in zip(seq, seq[1:])):
        raise ValueError("ordering is not degree non-increasing")
    a = target.size
    return all(j * seq[j - 1] <= a + j * (j - 1) for j in range(2, target.order + 1))


def union_injections(
    parts: Sequence[Injection],
    overrides: Mapping[int, int] | None = None,
    *,
    require_total: bool = True,
) -> Injection:
    """Merge injections with disjoint domains, then apply ``overrides`` on top."""
    if not parts:
        raise ValueError("need at least one part to fix the orders")
    so, to = parts[0].source_order, parts[0].target_order
    merged: dict[int, int] = {}
    for p in parts:
        if (p.source_order, p.target_order) != (so, to):
            raise ShapeError("parts disagree on orders")
        for u, v in p.items():
            if u in merged:
                raise OverlapError(f"source vertex {u} appears in two parts")
            merged[u] = v
    merged.update(overrides or {})
    seen: dict[int, int] = {}
    for u, v in merged.items():
        if v in seen:
            raise InjectivityError(f"target {v} hit by {seen[v]} and {u}")
        seen[v] = u
    out = Injection(so, to, merged)
    if require_total and not out.is_total:
        raise PartialMapError(f"{so - len(out)} source vertices unassigned after union")
    return out
