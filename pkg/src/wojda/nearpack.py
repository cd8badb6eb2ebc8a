"""q-near-packings of equal-order digraphs.

If ``|A(D)| * |A(D')| < (q + 1) n (n - 1)`` then a uniformly random bijection
has fewer than ``q + 1`` expected collisions, so some bijection has at most
``q``.  :func:`near_pack` finds one: first by seeded sampling, then, if the
sample cap is hit, by the method of conditional expectations, which never
fails.  :func:`sum_pack` is the ``q = 0`` case for ``|A(D)| + |A(D')| <= 2n - 2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .digraph import Digraph, Injection, PackingCertificate, certify
from .errors import HypothesisError, InjectivityError, InternalInvariantError, RangeError, ShapeError

DEFAULT_CAP = 10_000


@dataclass(frozen=True)
class NearPackInstance:
    source: Digraph
    target: Digraph
    q: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.source.order != self.target.order:
            raise ShapeError("near-packing needs equal orders")
        if self.q < 0:
            raise RangeError("q must be nonnegative")
        product, bound = self.product, self.bound
        if not product < bound:
            raise HypothesisError(
                f"|A|*|A'| = {product} is not below (q+1) n (n-1) = {bound}", product, bound
            )

    @property
    def product(self) -> int:
        return self.source.size * self.target.size

    @property
    def bound(self) -> int:
        n = self.source.order
        return (self.q + 1) * n * (n - 1)


def expected_collisions(source: Digraph, target: Digraph) -> Fraction:
    """Mean collision count over uniformly random bijections."""
    if source.order != target.order:
        raise ShapeError("equal orders required")
    n = source.order
    if n < 2:
        raise RangeError("n >= 2 required")
    return Fraction(source.size * target.size, n * (n - 1))


def conditional_expected_collisions(source: Digraph, target: Digraph, partial: Injection) -> Fraction:
    """Expected collisions over uniform completions of ``partial`` to a bijection.

    Straight double loop over (source arc, target arc) pairs; this is the
    reference the incremental greedy is tested against.
    """
    if source.order != target.order or partial.source_order != source.order:
        raise ShapeError("equal orders required")
    if partial.target_order != target.order:
        raise ShapeError("partial map has the wrong target order")
    if len(partial.image()) != len(partial):
        raise InjectivityError("partial map is not injective")
    r = source.order - len(partial)
    used = partial.image()
    one = Fraction(1, r) if r >= 1 else Fraction(0)
    two = Fraction(1, r * (r - 1)) if r >= 2 else Fraction(0)
    total = Fraction(0)
    for u, v in source.arcs:
        fu, fv = partial.get(u), partial.get(v)
        for a, b in target.arcs:
            if fu is not None and fv is not None:
                if fu == a and fv == b:
                    total += 1
            elif fu is not None:
                if fu == a and b not in used:
                    total += one
            elif fv is not None:
                if fv == b and a not in used:
                    total += one
            elif a not in used and b not in used:
                total += two
    return total


def collision_counts(source: Digraph, target: Digraph, perms: np.ndarray) -> np.ndarray:
    """Collision count of each row of ``perms`` (shape ``(k, n)``, row = images)."""
    perms = np.atleast_2d(perms)
    if source.size == 0 or target.size == 0:
        return np.zeros(perms.shape[0], dtype=np.int64)
    n = target.order
    src = source.arc_array
    mat = np.zeros((n, n), dtype=bool)
    tarr = target.arc_array
    mat[tarr[:, 0], tarr[:, 1]] = True
    return mat[perms[:, src[:, 0]], perms[:, src[:, 1]]].sum(axis=1)


def sample_collision_counts(source: Digraph, target: Digraph, samples: int, seed: int = 0, batch: int = 4096) -> np.ndarray:
    """Collision counts of ``samples`` seeded uniform random bijections."""
    if source.order != target.order:
        raise ShapeError("equal orders required")
    n = source.order
    rng = np.random.default_rng(seed)
    out = np.empty(samples, dtype=np.int64)
    base = np.arange(n)
    for start in range(0, samples, batch):
        k = min(batch, samples - start)
        perms = rng.permuted(np.broadcast_to(base, (k, n)), axis=1)
        out[start : start + k] = collision_counts(source, target, perms)
    return out


class _TargetMembership:
    """Vectorised arc membership for a fixed target."""

    def __init__(self, target: Digraph):
        n = target.order
        self.n = n
        arcs = target.arc_array
        if n <= 6000:
            self.mat = np.zeros((n, n), dtype=bool)
            if len(arcs):
                self.mat[arcs[:, 0], arcs[:, 1]] = True
            self.codes = None
        else:
            self.mat = None
            self.codes = np.sort(arcs[:, 0] * n + arcs[:, 1]) if len(arcs) else np.zeros(0, np.int64)

    def count(self, a: np.ndarray, b: np.ndarray) -> int:
        if self.mat is not None:
            return int(self.mat[a, b].sum())
        c = a * self.n + b
        idx = np.searchsorted(self.codes, c)
        idx[idx == len(self.codes)] = 0
        return int((self.codes[idx] == c).sum()) if len(self.codes) else 0


def _sample_phase(source: Digraph, target: Digraph, q: int, seed: int, cap: int):
    n = source.order
    if cap <= 0:
        return None
    src = source.arc_array
    member = _TargetMembership(target)
    rng = np.random.default_rng(seed)
    for index in range(cap):
        perm = rng.permutation(n)
        if len(src) == 0 or member.count(perm[src[:, 0]], perm[src[:, 1]]) <= q:
            return index, perm
    return None


class ConditionalGreedy:
    """Incremental state for the conditional-expectation assignment.

    The conditional expectation of the collision count over uniform
    completions splits as ``C + P1/r + S0*T0/(r(r-1))`` where ``C`` counts
    collisions among fully assigned source arcs, ``P1`` counts (half-assigned
    source arc, compatible target arc) pairs, ``S0`` is the number of source
    arcs with both ends free and ``T0`` the number of target arcs with both
    ends unused.  Every term is kept as an integer and updated per assignment.
    """

    def __init__(self, source: Digraph, target: Digraph):
        if source.order != target.order:
            raise ShapeError("equal orders required")
        n = self.n = source.order
        self.source, self.target = source, target
        self.s_out, self.s_in = source.out_arrays, source.in_arrays
        self.t_out, self.t_in = target.out_arrays, target.in_arrays
        self.f = np.full(n, -1, dtype=np.int64)
        self.used = np.zeros(n, dtype=bool)
        self.r = n
        self.C = 0
        self.P1 = 0
        self.S0 = source.size
        self.T0 = target.size
        self.hout = np.zeros(n, dtype=np.int64)  # free out-neighbours of preimage(z)
        self.hin = np.zeros(n, dtype=np.int64)
        self.G = np.zeros(n, dtype=np.int64)  # sum of hout over N-(y) plus hin over N+(y)
        self.outU = np.array([len(x) for x in self.t_out], dtype=np.int64)
        self.inU = np.array([len(x) for x in self.t_in], dtype=np.int64)

    def expectation(self) -> Fraction:
        r = self.r
        e = Fraction(self.C)
        if r >= 1:
            e += Fraction(self.P1, r)
        if r >= 2:
            e += Fraction(self.S0 * self.T0, r * (r - 1))
        return e

    def _local(self, x: int):
        fo = self.f[self.s_out[x]]
        fi = self.f[self.s_in[x]]
        zo, zi = fo[fo >= 0], fi[fi >= 0]
        ox = int((fo < 0).sum())
        ix = int((fi < 0).sum())
        return zo, zi, ox, ix

    def _cvec(self, zo: np.ndarray, zi: np.ndarray) -> np.ndarray:
        parts = [self.t_in[z] for z in zo] + [self.t_out[z] for z in zi]
        if not parts:
            return np.zeros(self.n, dtype=np.int64)
        return np.bincount(np.concatenate(parts), minlength=self.n).astype(np.int64)

    def scores(self, x: int) -> tuple[np.ndarray, int, dict]:
        """Numerators over a common denominator of E[collisions | x -> y] for every y.

        Entries for used ``y`` are meaningless.
        """
        if self.f[x] >= 0:
            raise ValueError(f"source vertex {x} already assigned")
        zo, zi, ox, ix = self._local(x)
        cvec = self._cvec(zo, zi)
        c_new = self.C + cvec
        p1a = self.P1 - int(self.outU[zi].sum()) - int(self.inU[zo].sum())
        p1_new = p1a - self.G + cvec + ox * self.outU + ix * self.inU
        s0_new = self.S0 - ox - ix
        t0_new = self.T0 - self.outU - self.inU
        r1 = self.r - 1
        if r1 >= 2:
            den = r1 * (r1 - 1)
            num = c_new * den + p1_new * (r1 - 1) + s0_new * t0_new
        elif r1 == 1:
            den = 1
            num = c_new + p1_new
        else:
            den = 1
            num = c_new
        ctx = dict(zo=zo, zi=zi, ox=ox, ix=ix, cvec=cvec, p1_new=p1_new, s0_new=s0_new, t0_new=t0_new)
        return num, den, ctx

    def assign(self, x: int, y: int, ctx: dict | None = None) -> None:
        if ctx is None:
            _, _, ctx = self.scores(x)
        if self.used[y]:
            raise InjectivityError(f"target {y} already used")
        zo, zi, ox, ix, cvec = ctx["zo"], ctx["zi"], ctx["ox"], ctx["ix"], ctx["cvec"]
        self.C += int(cvec[y])
        self.P1 = int(ctx["p1_new"][y])
        self.S0 = int(ctx["s0_new"])
        self.T0 = int(ctx["t0_new"][y])
        np.subtract.at(self.hout, zi, 1)
        np.subtract.at(self.hin, zo, 1)
        self.hout[y] = ox
        self.hin[y] = ix
        self.G -= cvec
        if ox:
            self.G[self.t_out[y]] += ox
        if ix:
            self.G[self.t_in[y]] += ix
        self.outU[self.t_in[y]] -= 1
        self.inU[self.t_out[y]] -= 1
        self.f[x] = y
        self.used[y] = True
        self.r -= 1

    def choose(self, x: int) -> tuple[int, Fraction, dict]:
        """Best unused target for ``x`` (smallest label among ties)."""
        num, den, ctx = self.scores(x)
        masked = np.where(self.used, np.iinfo(np.int64).max, num)
        y = int(np.argmin(masked))
        return y, Fraction(int(num[y]), den), ctx


def derandomized_bijection(source: Digraph, target: Digraph) -> np.ndarray:
    """Bijection whose collision count is at most the initial expectation (floored)."""
    n = source.order
    g = ConditionalGreedy(source, target)
    deg = source.degrees
    current = g.expectation()
    for x in sorted(range(n), key=lambda v: (-deg[v], v)):
        y, value, ctx = g.choose(x)
        if value > current:
            raise InternalInvariantError(f"conditional expectation rose from {current} to {value}")
        g.assign(x, y, ctx)
        current = value
    if Fraction(g.C) != current:
        raise InternalInvariantError("final expectation differs from the collision count")
    return g.f.copy()


def near_pack(instance: NearPackInstance, cap: int = DEFAULT_CAP) -> PackingCertificate:
    """A certificate with at most ``instance.q`` collisions.

    ``cap`` random bijections are tried first (``cap=0`` disables sampling);
    the deterministic greedy runs only if none of them is good enough.
    """
    src, tgt, q = instance.source, instance.target, instance.q
    found = _sample_phase(src, tgt, q, instance.seed, cap)
    if found is not None:
        index, perm = found
        method = f"sample:{index}"
    else:
        perm = derandomized_bijection(src, tgt)
        method = "conditional-expectation"
    return certify(Injection.from_sequence(perm), src, tgt, q, seed=instance.seed, method=method)


def sum_pack(source: Digraph, target: Digraph, seed: int = 0, cap: int = DEFAULT_CAP) -> PackingCertificate:
    """Packing of two equal-order digraphs with at most ``2n - 2`` arcs in total."""
    if source.order != target.order:
        raise ShapeError("equal orders required")
    n = source.order
    total = source.size + target.size
    if total > 2 * n - 2:
        raise HypothesisError(f"|A|+|A'| = {total} exceeds 2n-2 = {2 * n - 2}", total, 2 * n - 2)
    if n <= 1 or source.size == 0 or target.size == 0:
        return certify(Injection.identity(n), source, target, 0, seed=seed, method="identity")
    return near_pack(NearPackInstance(source, target, 0, seed), cap=cap)
