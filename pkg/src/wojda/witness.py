"""The extremal pair: an (n - m)-arc and a (2n - floor(n/m))-arc digraph that do not pack.

``D`` is a disjoint union of m in-stars centred at ``w_1..w_m``; ``Dp`` has a
hub ``w'`` with out-arcs to every other vertex and in-arcs from all but
``floor(n/m) - 2`` of them.  The hub cannot host a star centre (too few
vertices outside its in-neighbourhood) nor a leaf (every leaf has an out-arc,
and the hub's out-arcs cover everything).
"""

from __future__ import annotations

from dataclasses import dataclass

from .digraph import Digraph
from .errors import RangeError, ScaleError, StructureError
from .search import SearchBudget, exhaustive_pack

MAX_EXHAUSTIVE_ORDER = 9


@dataclass(frozen=True)
class WitnessPair:
    D: Digraph
    Dp: Digraph
    n: int
    m: int
    a: int
    b: int
    W: tuple[int, ...]
    groups: tuple[tuple[int, ...], ...]
    hub: int = 0


def build_witness(n: int, m: int) -> WitnessPair:
    if not 2 <= m <= n // 2:
        raise RangeError(f"need 2 <= m <= n/2, got n={n}, m={m}")
    lo = n // m
    b = n % m
    a = m - b
    W = tuple(range(m))
    groups = []
    arcs = []
    nxt = m
    for i in range(m):
        size = (lo if i < a else lo + 1) - 1
        g = tuple(range(nxt, nxt + size))
        nxt += size
        groups.append(g)
        arcs.extend((v, W[i]) for v in g)
    D = Digraph(n, arcs)
    # label j-1 is v'_j for j = 2..n
    hub_arcs = [(0, j - 1) for j in range(2, n + 1)]
    hub_arcs += [(j - 1, 0) for j in range(lo, n + 1)]
    Dp = Digraph(n, hub_arcs)
    return WitnessPair(D, Dp, n, m, a, b, W, tuple(groups), 0)


def verify_witness_structural(pair: WitnessPair) -> list[dict]:
    """Check every inequality behind the non-packing argument; returns the report rows."""
    D, Dp, n, m = pair.D, pair.Dp, pair.n, pair.m
    lo = n // m
    rows = []

    def check(name, lhs, rhs, ok):
        rows.append({"name": name, "lhs": lhs, "rhs": rhs, "ok": bool(ok)})
        if not ok:
            raise StructureError(f"{name}: {lhs} vs {rhs}")

    check("a*floor(n/m) + b*ceil(n/m) = n", pair.a * lo + pair.b * (-(-n // m)), n, pair.a * lo + pair.b * (-(-n // m)) == n)
    check("|A(D)| = n - m", D.size, n - m, D.size == n - m)
    check("|A(Dp)| = 2n - floor(n/m)", Dp.size, 2 * n - lo, Dp.size == 2 * n - lo)
    hub = pair.hub
    closed_in = set(Dp.in_neighbors(hub)) | {hub}
    x_prime = n - len(closed_in)
    check("|X'| = floor(n/m) - 2", x_prime, lo - 2, x_prime == lo - 2)
    for i, w in enumerate(pair.W):
        check(f"d-_D(w_{i + 1}) > |X'|", D.in_degree(w), x_prime, D.in_degree(w) > x_prime)
    check("d+_Dp(w') = n - 1", Dp.out_degree(hub), n - 1, Dp.out_degree(hub) == n - 1)
    centres = set(pair.W)
    min_out = min((D.out_degree(v) for v in range(n) if v not in centres), default=1)
    check("min out-degree of group vertices >= 1", min_out, 1, min_out >= 1)
    covered = set(pair.W) | {v for g in pair.groups for v in g}
    check("W and the groups cover V(D)", len(covered), n, covered == set(range(n)))
    return rows


def verify_witness_exhaustive(pair: WitnessPair, budget: SearchBudget | None = None) -> bool:
    """True iff no bijection V(D) -> V(Dp) is collision-free."""
    if pair.n > MAX_EXHAUSTIVE_ORDER:
        raise ScaleError(f"exhaustive witness check limited to n <= {MAX_EXHAUSTIVE_ORDER}")
    return exhaustive_pack(pair.D, pair.Dp, 0, budget) is None


def witness_minus_arc(pair: WitnessPair, arc: tuple[int, int]) -> Digraph:
    if arc not in pair.Dp.arcs:
        raise ValueError(f"{arc} is not an arc of Dp")
    return Digraph(pair.n, pair.Dp.arcs - {arc})
