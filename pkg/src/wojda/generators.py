"""Seeded instance generators for tests, acceptance runs and the ``gen`` command."""

from __future__ import annotations

import numpy as np

from .digraph import Digraph
from .errors import RangeError
from .forestpack import ForestPackRequest, check_conditions
from .witness import build_witness

KINDS = ("random-pair", "boundary-pair", "star-heavy", "witness-minus-arc", "forest-pair")
STAR_VARIANTS = ("sub-a", "sub-b", "sub-b-zero-outdeg", "sub-c", "sub-d")


def rng_for(seed: int, *path: int) -> np.random.Generator:
    """Independent stream for ``seed`` and a spawn path (splittable seeding)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(path)))


def random_arcs(n: int, k: int, rng: np.random.Generator, exclude=frozenset(), vertices=None) -> list[tuple[int, int]]:
    """``k`` distinct random arcs among ``vertices`` (default all), avoiding ``exclude``."""
    verts = np.arange(n) if vertices is None else np.asarray(sorted(vertices), dtype=np.int64)
    N = len(verts)
    vset = set(verts.tolist())
    room = N * (N - 1) - sum(1 for u, v in exclude if u in vset and v in vset)
    if k > room:
        raise RangeError(f"cannot place {k} arcs, only {room} slots")
    chosen: set[tuple[int, int]] = set()
    while len(chosen) < k:
        need = k - len(chosen)
        u = rng.integers(0, N, size=2 * need + 8)
        v = rng.integers(0, N, size=2 * need + 8)
        for a, b in zip(u.tolist(), v.tolist()):
            if a == b:
                continue
            arc = (int(verts[a]), int(verts[b]))
            if arc in exclude or arc in chosen:
                continue
            chosen.add(arc)
            if len(chosen) == k:
                break
    return sorted(chosen)


def random_digraph(n: int, k: int, rng: np.random.Generator) -> Digraph:
    return Digraph(n, random_arcs(n, k, rng))


def random_tree_arcs(vertices: list[int], rng: np.random.Generator) -> list[tuple[int, int]]:
    """Random recursive tree on ``vertices`` with random arc orientations."""
    arcs = []
    order = list(vertices)
    rng.shuffle(order)
    for i in range(1, len(order)):
        p = order[int(rng.integers(0, i))]
        c = order[i]
        arcs.append((p, c) if rng.random() < 0.5 else (c, p))
    return arcs


def random_forest(n: int, components: int, rng: np.random.Generator) -> Digraph:
    """Oriented forest on ``n`` vertices with exactly ``components`` trees."""
    if not 1 <= components <= n:
        raise RangeError("need 1 <= components <= n")
    labels = rng.permutation(n).tolist()
    cuts = sorted(rng.choice(np.arange(1, n), size=components - 1, replace=False).tolist()) if components > 1 else []
    arcs = []
    start = 0
    for end in cuts + [n]:
        arcs += random_tree_arcs(labels[start:end], rng)
        start = end
    return Digraph(n, arcs)


def boundary_arc_count(n: int, m: int) -> int:
    return 2 * n - n // m - 1


def _check_nm(n: int, m: int) -> None:
    if not (1 <= m <= n // 2):
        raise RangeError(f"need 1 <= m <= n/2, got n={n}, m={m}")


def star_heavy_target(n: int, m: int, rng: np.random.Generator, variant: str, mirror: bool = False) -> Digraph:
    """Boundary-size host whose top vertex has degree >= n - 13, shaped for one subcase."""
    if variant not in STAR_VARIANTS:
        raise ValueError(f"unknown variant {variant}")
    budget = boundary_arc_count(n, m)
    lo = n // m
    perm = rng.permutation(n).tolist()
    hub, others = perm[0], perm[1:]
    arcs: set[tuple[int, int]] = set()
    if variant == "sub-a":
        arcs |= {(v, hub) for v in others}
        t = int(rng.integers(0, min(10, budget - len(arcs)) + 1))
        arcs |= {(hub, v) for v in others[:t]}
    elif variant in ("sub-b", "sub-b-zero-outdeg"):
        skip = int(rng.integers(0, n - 1))
        arcs |= {(v, hub) for i, v in enumerate(others) if i != skip}
        if variant == "sub-b":
            t = int(rng.integers(1, 11))
            arcs |= {(hub, v) for v in others[:t]}
    elif variant == "sub-c":
        din = n - 3 - int(rng.integers(0, 6))
        dout = int(rng.integers(max(0, n - 13 - din), 11))
        arcs |= {(v, hub) for v in others[:din]}
        arcs |= {(hub, v) for v in others[-dout:]} if dout else set()
    else:  # sub-d
        t = int(rng.integers(0, 6))
        din = n - 13 - t
        arcs |= {(v, hub) for v in others[:din]}
        arcs |= {(hub, v) for v in others[din : din + t]}
        second, rest = others[-1], others[:-1]
        e = int(rng.integers(0, 4))
        arcs |= {(second, v) for v in rest[: n - lo + 1 + e]}
    if len(arcs) > budget:
        raise RangeError("star-heavy construction overflows the arc budget")
    # remaining arcs avoid the hub (and the second vertex in sub-d) so the shape survives
    avoid = {hub} | ({others[-1]} if variant == "sub-d" else set())
    free = [v for v in range(n) if v not in avoid]
    extra = random_arcs(n, budget - len(arcs), rng, exclude=frozenset(arcs), vertices=free)
    arcs |= set(extra)
    if mirror:
        arcs = {(v, u) for u, v in arcs}
    return Digraph(n, arcs)


def gen_instance(kind: str, n: int, m: int, seed: int = 0) -> tuple[Digraph, Digraph]:
    """(D, Dp) with ``|A(D)| = n - m``; see :data:`KINDS`."""
    _check_nm(n, m)
    rng = rng_for(seed, KINDS.index(kind) if kind in KINDS else 99)
    budget = boundary_arc_count(n, m)
    if kind == "random-pair":
        D = random_digraph(n, n - m, rng)
        Dp = random_digraph(n, int(rng.integers(0, budget + 1)), rng)
    elif kind == "boundary-pair":
        D = random_digraph(n, n - m, rng)
        Dp = random_digraph(n, budget, rng)
    elif kind == "forest-pair":
        D = random_forest(n, m, rng)
        Dp = random_digraph(n, budget, rng)
    elif kind == "star-heavy":
        variant = STAR_VARIANTS[seed % len(STAR_VARIANTS)]
        mirror = bool((seed // len(STAR_VARIANTS)) % 2)
        D = random_digraph(n, n - m, rng) if rng.random() < 0.5 else random_forest(n, m, rng)
        Dp = star_heavy_target(n, m, rng, variant, mirror)
    elif kind == "witness-minus-arc":
        if m < 2:
            raise RangeError("witness needs m >= 2")
        pair = build_witness(n, m)
        arcs = pair.Dp.sorted_arcs()
        drop = arcs[int(rng.integers(0, len(arcs)))]
        D = pair.D
        Dp = Digraph(n, pair.Dp.arcs - {drop})
    else:
        raise ValueError(f"unknown kind {kind!r}; expected one of {KINDS}")
    return D, Dp


def gen_forest_request(rng: np.random.Generator, n_min: int = 3, n_max: int = 40, max_tries: int = 1000) -> ForestPackRequest:
    """Random request satisfying condition a) or b), by rejection sampling."""
    for _ in range(max_tries):
        n = int(rng.integers(n_min, n_max + 1))
        nf = int(rng.integers(1, n + 1))
        comps = int(rng.integers(1, nf + 1))
        F = random_forest(nf, comps, rng)
        slack = n - nf
        style = rng.random()
        if style < 0.35:
            # head with large in-degree and small out-degree: aims at condition b)
            hub = int(rng.integers(0, n))
            others = [v for v in range(n) if v != hub]
            din = int(rng.integers(0, n))
            arcs = {(v, hub) for v in rng.permutation(others)[:din].tolist()}
            dout = int(rng.integers(0, slack + 1))
            arcs |= {(hub, v) for v in rng.permutation(others)[:dout].tolist()}
            k = int(rng.integers(0, max(1, slack)))
            rest = [v for v in range(n) if v != hub]
            room = len(rest) * (len(rest) - 1)
            arcs |= set(random_arcs(n, min(k, room), rng, exclude=frozenset(arcs), vertices=rest)) if len(rest) > 1 else set()
        else:
            dens = rng.random() * 0.5
            k = int(dens * max(1, slack) * n / 2)
            arcs = set(random_arcs(n, min(k, n * (n - 1)), rng))
        T = Digraph(n, arcs)
        for mode in (("b", "a") if style < 0.35 else ("a", "b")):
            s = 1 if mode == "b" else int(rng.integers(0, min(3, comps) + 1))
            kreq = int(rng.integers(0, comps - s + 1))
            req = rng.permutation(n)[:kreq].tolist()
            request = ForestPackRequest(F, T, frozenset(req), s, mode)
            if getattr(check_conditions(request), mode):
                return request
    raise RuntimeError("could not generate a request satisfying the conditions")
