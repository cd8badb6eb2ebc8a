"""Exhaustive packing search and the mu(n, k) table for tiny n.

Verdicts are exact: ``None`` from :func:`exhaustive_pack` means the whole
search tree was explored and no map with at most ``q`` collisions exists.
Running out of budget raises :class:`BudgetExceeded` instead.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .digraph import Digraph, Injection, PackingCertificate, certify
from .errors import BudgetExceeded, InternalInvariantError, RangeError, ScaleError, ShapeError


@dataclass(frozen=True)
class SearchBudget:
    max_nodes: int = 50_000_000
    time_limit: float = 3600.0

    def __post_init__(self):
        if self.max_nodes <= 0 or self.time_limit <= 0:
            raise ValueError("budget must be positive")


def search_order(source: Digraph) -> list[int]:
    deg = source.degrees
    return sorted(range(source.order), key=lambda v: (-deg[v], v))


def exhaustive_pack(
    source: Digraph,
    target: Digraph,
    q: int = 0,
    budget: SearchBudget | None = None,
    *,
    required_image: frozenset[int] | set[int] = frozenset(),
) -> PackingCertificate | None:
    """Smallest map (lexicographic along the search order) with at most ``q`` collisions.

    Source vertices are assigned in descending degree, each trying targets in
    ascending label; a branch dies as soon as its collisions exceed ``q`` or
    too few source vertices remain to cover ``required_image``.
    """
    if source.order > target.order:
        raise ShapeError("source has more vertices than target")
    budget = budget or SearchBudget()
    n, N = source.order, target.order
    order = search_order(source)
    pos = {v: i for i, v in enumerate(order)}
    # earlier out-/in-neighbours of each vertex in the search order
    back_out = [[pos[w] for w in source.out_neighbors(v) if pos[w] < i] for i, v in enumerate(order)]
    back_in = [[pos[w] for w in source.in_neighbors(v) if pos[w] < i] for i, v in enumerate(order)]
    t_out = [target.out_bits(y) for y in range(N)]
    t_in = [target.in_bits(y) for y in range(N)]
    need = 0
    for y in required_image:
        need |= 1 << y
    img = [0] * n
    nodes = 0
    deadline = time.monotonic() + budget.time_limit

    def rec(i: int, free: int, hits: int) -> bool:
        nonlocal nodes
        if i == n:
            return True
        out_mask = 0
        for j in back_out[i]:
            out_mask |= 1 << img[j]
        in_mask = 0
        for j in back_in[i]:
            in_mask |= 1 << img[j]
        left = n - i
        cand = free
        while cand:
            low = cand & -cand
            y = low.bit_length() - 1
            cand ^= low
            nodes += 1
            if nodes > budget.max_nodes or (nodes & 0xFFF == 0 and time.monotonic() > deadline):
                raise BudgetExceeded(f"gave up after {nodes} nodes")
            h = hits + (t_out[y] & out_mask).bit_count() + (t_in[y] & in_mask).bit_count()
            if h > q:
                continue
            nfree = free ^ low
            if ((nfree & need).bit_count()) > left - 1:
                continue
            img[i] = y
            if rec(i + 1, nfree, h):
                return True
        return False

    if (need.bit_count()) > n:
        return None
    if not rec(0, (1 << N) - 1, 0):
        return None
    f = Injection(n, N, {order[i]: img[i] for i in range(n)})
    return certify(f, source, target, q, method="exhaustive")


def packs(source: Digraph, target: Digraph, q: int = 0, budget: SearchBudget | None = None) -> bool:
    return exhaustive_pack(source, target, q, budget) is not None


# -- enumeration up to isomorphism ---------------------------------------------


MAX_MU_ORDER = 5


@lru_cache(maxsize=None)
def _perm_tables(n: int) -> np.ndarray:
    """``table[p, u*n+v] = 1 << (p(u)*n + p(v))`` for each vertex permutation p."""
    perms = list(itertools.permutations(range(n)))
    table = np.zeros((len(perms), n * n), dtype=np.int64)
    for i, p in enumerate(perms):
        for u in range(n):
            for v in range(n):
                table[i, u * n + v] = 1 << (p[u] * n + p[v])
    return table


def _mask(D: Digraph) -> int:
    n = D.order
    return sum(1 << (u * n + v) for u, v in D.arcs)


def _from_mask(n: int, mask: int) -> Digraph:
    return Digraph(n, [(i // n, i % n) for i in range(n * n) if mask >> i & 1])


def canonical_mask(D: Digraph) -> int:
    """Minimum arc bitmask over all relabellings (n <= 7)."""
    n = D.order
    if n > 7:
        raise ScaleError("canonical form by permutation is limited to n <= 7")
    if not D.arcs:
        return 0
    pos = [u * n + v for u, v in D.arcs]
    return int(_perm_tables(n)[:, pos].sum(axis=1).min())


def automorphism_count(D: Digraph) -> int:
    n = D.order
    pos = [u * n + v for u, v in D.arcs]
    images = _perm_tables(n)[:, pos].sum(axis=1)
    return int((images == _mask(D)).sum())


@lru_cache(maxsize=None)
def _classes(n: int, k: int) -> tuple[int, ...]:
    if k == 0:
        return (0,)
    prev = _classes(n, k - 1)
    slots = [u * n + v for u in range(n) for v in range(n) if u != v]
    found = set()
    for mask in prev:
        for p in slots:
            if mask >> p & 1:
                continue
            m2 = mask | 1 << p
            found.add(canonical_mask(_from_mask(n, m2)))
    return tuple(sorted(found))


def digraph_classes(n: int, k: int) -> list[Digraph]:
    """One canonical representative per isomorphism class of k-arc digraphs on n vertices."""
    if n > 7:
        raise ScaleError("enumeration is limited to n <= 7")
    if not 0 <= k <= n * (n - 1):
        raise RangeError(f"k = {k} outside 0..{n * (n - 1)}")
    return [_from_mask(n, m) for m in _classes(n, k)]


@dataclass(frozen=True)
class MuResult:
    n: int
    k: int
    mu: int
    witness: tuple[Digraph, Digraph]
    pairs_checked: dict[int, int] = field(default_factory=dict)

    @property
    def lower_bound_statement(self) -> str:
        below = sum(c for M, c in self.pairs_checked.items() if M < self.mu)
        return (
            f"every pair of a {self.k}-arc and an M-arc digraph on {self.n} vertices packs "
            f"for M < {self.mu} ({below} isomorphism-class pairs checked exhaustively)"
        )


def _first_non_packing(args):
    n, k, M, chunk, budget = args
    small = digraph_classes(n, k)
    big = digraph_classes(n, M)
    for i, j in chunk:
        if exhaustive_pack(small[i], big[j], 0, budget) is None:
            return i, j
    return None


def mu_search(n: int, k: int, budget: SearchBudget | None = None, workers: int = 1) -> MuResult:
    """Smallest M such that some k-arc and some M-arc digraph on n vertices fail to pack."""
    if n > MAX_MU_ORDER:
        raise ScaleError(f"mu_search supports n <= {MAX_MU_ORDER}")
    if not 1 <= k <= n * (n - 1):
        raise RangeError(f"k = {k} outside 1..{n * (n - 1)}")
    budget = budget or SearchBudget()
    start = time.monotonic()
    checked: dict[int, int] = {}
    small = digraph_classes(n, k)
    for M in range(1, n * (n - 1) + 1):
        big = digraph_classes(n, M)
        pairs = [(i, j) for i in range(len(small)) for j in range(len(big))]
        checked[M] = len(pairs)
        hit = None
        if workers > 1 and len(pairs) > 64:
            from concurrent.futures import ProcessPoolExecutor

            size = -(-len(pairs) // workers)
            chunks = [pairs[c : c + size] for c in range(0, len(pairs), size)]
            with ProcessPoolExecutor(workers) as ex:
                results = list(ex.map(_first_non_packing, [(n, k, M, ch, budget) for ch in chunks]))
            hits = [r for r in results if r is not None]
            hit = min(hits) if hits else None
        else:
            hit = _first_non_packing((n, k, M, pairs, budget))
        if time.monotonic() - start > budget.time_limit:
            raise BudgetExceeded(f"mu({n},{k}) search exceeded {budget.time_limit}s")
        if hit is not None:
            D, Dp = small[hit[0]], big[hit[1]]
            if exhaustive_pack(D, Dp, 0) is not None:
                raise InternalInvariantError("mu witness packs on recheck")
            return MuResult(n, k, M, (D, Dp), checked)
    raise InternalInvariantError("complete digraph always blocks a packing; unreachable")
