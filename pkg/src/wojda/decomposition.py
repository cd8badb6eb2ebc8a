"""Split a sparse digraph into its m smallest tree components plus a remainder."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .digraph import Digraph, weak_components
from .errors import DecompositionError, RangeError


@dataclass(frozen=True)
class ForestDecomposition:
    digraph: Digraph
    m: int
    trees: tuple[tuple[int, ...], ...]
    remainder: tuple[int, ...]

    def tree(self, i: int) -> tuple[int, ...]:
        """Vertices of T_i, 1-based as in the usual notation."""
        if not 1 <= i <= self.m:
            raise RangeError(f"tree index {i} outside 1..{self.m}")
        return self.trees[i - 1]

    def prefix_vertices(self, k: int) -> list[int]:
        if not 1 <= k <= self.m:
            raise RangeError(f"k = {k} outside 1..{self.m}")
        return [v for t in self.trees[:k] for v in t]

    def sizes(self) -> list[int]:
        return [len(t) for t in self.trees]


def decompose(D: Digraph, m: int) -> ForestDecomposition:
    """T_1..T_m are the m smallest tree components (ties by smallest label), ascending."""
    if m < 1:
        raise RangeError("m must be positive")
    if D.size != D.order - m:
        raise DecompositionError(f"expected {D.order - m} arcs for m = {m}, digraph has {D.size}")
    trees, rest = [], []
    for comp in weak_components(D):
        arcs = sum(D.out_degree(v) for v in comp)
        (trees if arcs == len(comp) - 1 else rest).append(comp)
    if len(trees) < m:
        raise DecompositionError(f"only {len(trees)} tree components, need {m}")
    trees.sort(key=lambda c: (len(c), c[0]))
    remainder = sorted(v for c in rest + trees[m:] for v in c)
    return ForestDecomposition(D, m, tuple(tuple(t) for t in trees[:m]), tuple(remainder))


def prefix_forest(dec: ForestDecomposition, k: int) -> Digraph:
    """F_k = T_1 u ... u T_k, relabelled in the order of ``dec.prefix_vertices(k)``."""
    return dec.digraph.induced(dec.prefix_vertices(k))


def check_claim_cl1(dec: ForestDecomposition) -> bool:
    """|F_k| <= k (n - |R|) / m for every k."""
    n = dec.digraph.order
    bound = Fraction(n - len(dec.remainder), dec.m)
    total = 0
    for k, t in enumerate(dec.trees, start=1):
        total += len(t)
        if total > k * bound:
            return False
    return True
