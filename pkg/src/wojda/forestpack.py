"""Greedy three-stage packing of an oriented forest into a host digraph.

Stage 1 pins one leaf per component on each of the ``s`` highest-degree
host vertices (mode ``"a"``), or a source vertex of the forest on the top
host vertex (mode ``"b"``), and places the pinned vertices' neighbours.
Stage 2 starts every other component on a required host vertex while any
remain, and stage 3 grows components one vertex at a time, always next to
exactly one placed neighbour.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import NamedTuple

from .digraph import Digraph, DegreeOrder, Injection, PackingCertificate, certify, degree_order, lowest_bit, weak_components
from .errors import HypothesisError, InternalInvariantError, RangeError, StageExhausted

MODES = ("a", "b")


@dataclass(frozen=True)
class ForestPackRequest:
    forest: Digraph
    target: Digraph
    required: frozenset[int] = frozenset()
    s: int = 1
    mode: str = "a"

    def __post_init__(self):
        object.__setattr__(self, "required", frozenset(self.required))
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.mode == "b" and self.s != 1:
            raise ValueError("mode b pins exactly one host vertex (s = 1)")
        if self.s < 0:
            raise RangeError("s must be nonnegative")
        if self.forest.order > self.target.order:
            raise RangeError("forest has more vertices than the host")
        if any(not 0 <= v < self.target.order for v in self.required):
            raise RangeError("required vertex outside the host")


class Conditions(NamedTuple):
    a: bool
    b: bool

    @property
    def verdict(self) -> str:
        if self.a:
            return "a-holds"
        return "b-holds" if self.b else "neither"


def is_oriented_forest(F: Digraph) -> bool:
    if any(F.has_arc(v, u) for u, v in F.arcs):
        return False
    return F.size == F.order - len(weak_components(F))


def _outside_top(T: Digraph, v: int, top_bits: int) -> int:
    return (T.neighbor_bits(v) & ~top_bits).bit_count()


def check_conditions(request: ForestPackRequest, order: DegreeOrder | None = None) -> Conditions:
    T, s = request.target, request.s
    n, nf = T.order, request.forest.order
    order = order or degree_order(T)
    slack = n - nf
    a = s <= n
    if a:
        for i in range(1, s + 1):
            v = order[i - 1]
            if max(T.in_degree(v), T.out_degree(v)) > n - i - s:
                a = False
                break
    if a and s + 1 <= n:
        top = 0
        for v in order.top(s):
            top |= 1 << v
        a = _outside_top(T, order[s], top) <= slack
    b = n >= 1
    if b:
        v1 = order[0]
        b = min(T.in_degree(v1), T.out_degree(v1)) <= slack
        if b and n >= 2:
            b = _outside_top(T, order[1], 1 << v1) <= slack
    return Conditions(a, b)


def stage3_slack(request: ForestPackRequest, order: DegreeOrder | None = None) -> tuple[int, int]:
    """(max over ranks > s of |N(v'_i) minus the pinned top|, |V(T)| - |V(F)|).

    When the first value does not exceed the second, stage 3 cannot get stuck.
    """
    T = request.target
    order = order or degree_order(T)
    s = request.s
    top = 0
    for v in order.top(s):
        top |= 1 << v
    worst = max((_outside_top(T, v, top) for v in order.ordering[s:]), default=0)
    return worst, T.order - request.forest.order


def forest_pack(request: ForestPackRequest) -> PackingCertificate:
    """Collision-free injection whose image contains ``required`` and the top ``s`` host vertices."""
    F, T = request.forest, request.target
    if not is_oriented_forest(F):
        raise HypothesisError("forest is not an oriented forest")
    comps = weak_components(F)
    k = len(request.required)
    if len(comps) < k + request.s:
        raise HypothesisError(f"forest has {len(comps)} components, needs {k + request.s}")
    order = degree_order(T)
    cond = check_conditions(request, order)
    if not getattr(cond, request.mode):
        raise HypothesisError(f"condition {request.mode}) does not hold ({cond.verdict})")
    if request.mode == "b" and T.out_degree(order[0]) > T.order - F.order:
        # the small side of the head is its in-degree: run on reversed orientations
        f = _pack(F.reverse(), T.reverse(), request, order, comps)
    else:
        f = _pack(F, T, request, order, comps)
    cert = certify(f, F, T, 0, method=f"forest-{request.mode}")
    needed = set(request.required) | set(order.top(request.s))
    if not needed <= f.image():
        raise InternalInvariantError(f"image misses required vertices {sorted(needed - f.image())}")
    return cert


def _pack(F: Digraph, T: Digraph, request: ForestPackRequest, order: DegreeOrder, comps: list[list[int]]) -> Injection:
    n = T.order
    s = request.s
    f: dict[int, int] = {}
    matched = 0  # bitset of used host vertices
    full = (1 << n) - 1

    def put(u: int, y: int) -> None:
        nonlocal matched
        f[u] = y
        matched |= 1 << y

    comps = sorted(comps, key=lambda c: (len(c), c[0]))
    comp_of = {v: i for i, c in enumerate(comps) for v in c}
    leaves = [next(v for v in c if F.degree(v) <= 1) for c in comps]
    started = [False] * len(comps)

    top = order.top(s) if request.mode == "a" else order.top(1)
    top_bits = 0
    for v in top:
        top_bits |= 1 << v

    # stage 1
    if request.mode == "a":
        for i, head in enumerate(top):
            leaf = leaves[i]
            started[i] = True
            outside = (matched & ~top_bits).bit_count()
            if outside > i:
                raise InternalInvariantError(f"stage 1 step {i + 1}: {outside} placed outside the top")
            put(leaf, head)
            if F.degree(leaf) == 0:
                continue
            if F.out_degree(leaf):
                u, forbidden = F.out_neighbors(leaf)[0], T.out_bits(head)
            else:
                u, forbidden = F.in_neighbors(leaf)[0], T.in_bits(head)
            avail = full & ~matched & ~forbidden & ~top_bits
            if not avail:
                raise StageExhausted(1, u)
            put(u, lowest_bit(avail))
    else:
        head = order[0]
        root = next(v for v in range(F.order) if F.in_degree(v) == 0)
        started[comp_of[root]] = True
        put(root, head)
        for w in F.out_neighbors(root):
            avail = full & ~matched & ~T.out_bits(head)
            if not avail:
                raise StageExhausted(1, w)
            put(w, lowest_bit(avail))

    # stage 2: start the remaining components, required vertices first
    pending = sorted((set(request.required) | set(top)) - {f[v] for v in f})
    for i, leaf in enumerate(leaves):
        if started[i]:
            continue
        started[i] = True
        if pending:
            put(leaf, pending.pop(0))
        else:
            avail = full & ~matched
            if not avail:
                raise StageExhausted(2, leaf)
            put(leaf, lowest_bit(avail))

    # stage 3
    frontier: list[int] = []
    queued = set()
    for v in list(f):
        for w in F.out_neighbors(v) + F.in_neighbors(v):
            if w not in f and w not in queued:
                queued.add(w)
                heapq.heappush(frontier, w)
    while frontier:
        u = heapq.heappop(frontier)
        placed = [w for w in F.out_neighbors(u) + F.in_neighbors(u) if w in f]
        if len(placed) != 1:
            raise InternalInvariantError(f"stage 3: vertex {u} has {len(placed)} placed neighbours")
        avail = full & ~matched & ~T.neighbor_bits(f[placed[0]])
        if not avail:
            raise StageExhausted(3, u)
        put(u, lowest_bit(avail))
        for w in F.out_neighbors(u) + F.in_neighbors(u):
            if w not in f and w not in queued:
                queued.add(w)
                heapq.heappush(frontier, w)
    if len(f) != F.order:
        raise InternalInvariantError("some forest vertices were never reached")
    return Injection(F.order, n, f)
