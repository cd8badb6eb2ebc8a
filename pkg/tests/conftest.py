"""Shared oracles and the acceptance summary printer."""

from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import strategies as st

from wojda.digraph import Digraph

_ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    _ACCEPTANCE[criterion] = (ok, detail)


@pytest.fixture
def acceptance():
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


# -- independent oracles ---------------------------------------------------------


def naive_collisions(images, source: Digraph, target: Digraph) -> int:
    """Double loop over arc pairs, no shared code with the library's counter."""
    hits = 0
    for u, v in source.arcs:
        for x, y in target.arcs:
            if images[u] == x and images[v] == y:
                hits += 1
    return hits


def brute_packs(source: Digraph, target: Digraph, q: int = 0, required=()) -> bool:
    """Try every injection; only for tiny orders."""
    need = set(required)
    for perm in itertools.permutations(range(target.order), source.order):
        if not need <= set(perm):
            continue
        if naive_collisions(perm, source, target) <= q:
            return True
    return False


def union_find_components(n: int, arcs) -> list[set[int]]:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in arcs:
        parent[find(u)] = find(v)
    groups: dict[int, set[int]] = {}
    for v in range(n):
        groups.setdefault(find(v), set()).add(v)
    return list(groups.values())


@st.composite
def digraphs(draw, min_order=1, max_order=8, max_arcs=None):
    n = draw(st.integers(min_order, max_order))
    slots = [(u, v) for u in range(n) for v in range(n) if u != v]
    if not slots:
        return Digraph(n)
    cap = len(slots) if max_arcs is None else min(max_arcs, len(slots))
    chosen = draw(st.lists(st.sampled_from(slots), unique=True, max_size=cap))
    return Digraph(n, chosen)


def random_pair_arcs(rng: np.random.Generator, n: int, k: int) -> list[tuple[int, int]]:
    slots = [(u, v) for u in range(n) for v in range(n) if u != v]
    idx = rng.choice(len(slots), size=k, replace=False)
    return [slots[i] for i in idx]
