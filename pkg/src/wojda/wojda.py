"""Constructive packing of an (n - m)-arc digraph with a (2n - floor(n/m) - 1)-arc digraph.

Valid for m >= 93 and n >= 31 m.  The host's top degree picks the route:

* ``low-head`` (d(v'_1) <= n - 14): set aside four independent low-degree
  host vertices, pack the 17 smallest trees greedily, 2-near-pack the rest
  and move the (at most two) collisions onto the reserved vertices.
* ``sub-a`` .. ``sub-d`` (d(v'_1) >= n - 13): pin v'_1 (and v'_2 in
  ``sub-d``) under one or two small trees, then pack what is left with the
  sum bound.

Every inequality the argument relies on is evaluated on the actual instance
and recorded in a :class:`CaseTrace`; a failing one raises
:class:`InternalInvariantError`.
"""

from __future__ import annotations

import json
import operator
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .decomposition import ForestDecomposition, check_claim_cl1, decompose
from .digraph import Digraph, Injection, PackingCertificate, certify, degree_order, union_injections
from .errors import InternalInvariantError, NotEnoughLowDegree, RegimeError
from .forestpack import ForestPackRequest, check_conditions, forest_pack, stage3_slack
from .nearpack import DEFAULT_CAP, NearPackInstance, near_pack, sum_pack

MIN_M = 93
MIN_RATIO = 31
BRANCHES = ("low-head", "sub-a", "sub-b", "sub-b-zero-outdeg", "sub-c", "sub-d")

_OPS = {"<=": operator.le, "<": operator.lt, ">=": operator.ge, ">": operator.gt, "==": operator.eq}


@dataclass(frozen=True)
class RegimeParams:
    n: int
    m: int

    @property
    def floor_nm(self) -> int:
        return self.n // self.m

    def validate(self) -> None:
        n, m = self.n, self.m
        if m < MIN_M or n < MIN_RATIO * m or not 2 <= m <= n // 2:
            raise RegimeError(f"(n, m) = ({n}, {m}) outside m >= {MIN_M}, n >= {MIN_RATIO} m", (n, m), None)


@dataclass
class Inequality:
    name: str
    lhs: Any
    op: str
    rhs: Any
    ok: bool

    def as_json(self) -> dict:
        return {"name": self.name, "lhs": _num(self.lhs), "op": self.op, "rhs": _num(self.rhs), "ok": self.ok}


def _num(x):
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else float(x)
    return x


@dataclass
class CaseTrace:
    n: int
    m: int
    branch: str = ""
    mirrored: bool = False
    gamma_prime: int = 0
    quad: tuple[int, ...] = ()
    aux: dict = field(default_factory=dict)
    certificates: dict = field(default_factory=dict)
    inequalities: list[Inequality] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def check(self, name: str, lhs, op: str, rhs) -> None:
        ok = bool(_OPS[op](lhs, rhs))
        self.inequalities.append(Inequality(name, lhs, op, rhs, ok))
        if not ok:
            raise InternalInvariantError(f"{name}: {lhs} {op} {rhs} fails")

    @property
    def all_ok(self) -> bool:
        return all(i.ok for i in self.inequalities)

    def json_lines(self) -> str:
        head = {
            "branch": self.branch,
            "mirrored": self.mirrored,
            "n": self.n,
            "m": self.m,
            "gamma_prime": self.gamma_prime,
            "quad": list(self.quad),
            "aux": {k: v for k, v in self.aux.items() if not k.startswith("_")},
            "notes": self.notes,
        }
        rows = [json.dumps(head, sort_keys=True)]
        rows += [json.dumps(i.as_json(), sort_keys=True) for i in self.inequalities]
        return "\n".join(rows) + "\n"


def find_low_degree_independent(target: Digraph, count: int, max_degree: int) -> list[int]:
    """``count`` pairwise non-adjacent vertices of degree <= ``max_degree``, greedily by label."""
    chosen: list[int] = []
    blocked = 0
    for v in range(target.order):
        if len(chosen) == count:
            break
        if target.degree(v) > max_degree or blocked >> v & 1:
            continue
        chosen.append(v)
        blocked |= target.neighbor_bits(v) | 1 << v
    if len(chosen) < count:
        raise NotEnoughLowDegree(f"found only {len(chosen)} of {count} independent vertices of degree <= {max_degree}")
    return chosen


def _leaf(D: Digraph, tree: tuple[int, ...]) -> tuple[int, int | None]:
    leaf = next(v for v in tree if D.degree(v) <= 1)
    nbrs = D.out_neighbors(leaf) + D.in_neighbors(leaf)
    return leaf, (nbrs[0] if nbrs else None)


def _lift(cert: PackingCertificate, src_labels: list[int], tgt_labels: list[int], n: int) -> Injection:
    return Injection(n, n, {src_labels[u]: tgt_labels[v] for u, v in cert.map.items()})


def wojda_pack(D: Digraph, Dp: Digraph, m: int, seed: int = 0, cap: int = DEFAULT_CAP) -> tuple[PackingCertificate, CaseTrace]:
    """Collision-free bijection V(D) -> V(Dp) together with the case trace."""
    n = D.order
    params = RegimeParams(n, m)
    params.validate()
    lo = params.floor_nm
    if Dp.order != n:
        raise RegimeError("D and Dp must have the same order")
    if D.size != n - m:
        raise RegimeError(f"|A(D)| = {D.size}, expected n - m = {n - m}", D.size, n - m)
    if Dp.size > 2 * n - lo - 1:
        raise RegimeError(f"|A(Dp)| = {Dp.size} exceeds 2n - floor(n/m) - 1 = {2 * n - lo - 1}", Dp.size, 2 * n - lo - 1)

    trace = CaseTrace(n, m)
    degsum = 2 * Dp.size
    gamma = sum(1 for d in Dp.degrees if d <= 3)
    trace.gamma_prime = gamma
    trace.check("4(n - gamma') <= sum of degrees", 4 * (n - gamma), "<=", degsum)
    trace.check("sum of degrees < 4n - 2n/m", Fraction(degsum), "<", 4 * n - Fraction(2 * n, m))
    trace.check("gamma' > n/(2m)", gamma, ">", Fraction(n, 2 * m))
    trace.check("n/(2m) > 15", Fraction(n, 2 * m), ">", 15)

    order = degree_order(Dp)
    v1 = order[0]
    if Dp.degree(v1) <= n - 14:
        trace.branch = "low-head"
        f = _low_head(D, Dp, params, trace, seed, cap)
    else:
        f = _high_head(D, Dp, params, trace, seed, cap)
    try:
        cert = certify(f, D, Dp, 0, seed=seed, method=f"wojda:{trace.branch}")
    except Exception as exc:  # noqa: BLE001 - any failure here is a construction bug
        raise InternalInvariantError(f"assembled map is not a packing: {exc}") from exc
    return cert, trace


def _claim_cl1(dec: ForestDecomposition, trace: CaseTrace, k: int) -> int:
    size = len(dec.prefix_vertices(k))
    n = dec.digraph.order
    trace.check(f"|F_{k}| <= {k}(n - |R|)/m", size, "<=", Fraction(k * (n - len(dec.remainder)), dec.m))
    return size


def _low_head(D: Digraph, Dp: Digraph, params: RegimeParams, trace: CaseTrace, seed: int, cap: int) -> Injection:
    n, m, lo = params.n, params.m, params.floor_nm
    dec = decompose(D, m)
    trace.check("claim cl1 holds for every k", check_claim_cl1(dec), "==", True)

    quad = find_low_degree_independent(Dp, 4, 3)
    trace.quad = tuple(quad)
    S = sorted(set().union(*(Dp.neighbors(u) for u in quad)) - set(quad))
    trace.check("|S'| <= 12", len(S), "<=", 12)
    trace.check("|T'| <= 16", len(S) + 4, "<=", 16)

    Dpp, labels = Dp.remove(quad)
    index = {v: i for i, v in enumerate(labels)}
    N2 = Dpp.order
    order2 = degree_order(Dpp)
    d1 = Dp.degree(degree_order(Dp)[0])
    trace.check("d(v'_1) <= n - 14 = |V(D'')| - 10", d1, "<=", N2 - 10)

    f17_vertices = dec.prefix_vertices(17)
    size17 = _claim_cl1(dec, trace, 17)
    trace.check("17(n - |R|)/m <= 17n/m", Fraction(17 * (n - len(dec.remainder)), m), "<=", Fraction(17 * n, m))
    F17 = D.induced(f17_vertices)
    for i in range(1, 6):
        v = order2[i - 1]
        trace.check(f"max(d-, d+)(v''_{i}) <= |V(D'')| - {i} - 5", max(Dpp.in_degree(v), Dpp.out_degree(v)), "<=", N2 - i - 5)
    d6 = Dpp.degree(order2[5])
    trace.check("d(v''_6) <= (|A(D'')| + 30)/6", Fraction(d6), "<=", Fraction(Dpp.size + 30, 6))
    trace.check(
        "(2n - floor(n/m) - 1 + 30)/6 <= n - 4 - 17n/m",
        Fraction(2 * n - lo - 1 + 30, 6),
        "<=",
        n - 4 - Fraction(17 * n, m),
    )
    trace.check("d(v''_6) <= |V(D'')| - |V(F_17)|", d6, "<=", N2 - size17)

    request = ForestPackRequest(F17, Dpp, frozenset(index[v] for v in S), 5, "a")
    trace.check("condition a) for F_17 into D''", check_conditions(request, order2).a, "==", True)
    worst, slack = stage3_slack(request, order2)
    trace.check("stage-3 slack in D''", worst, "<=", slack)
    phi_cert = forest_pack(request)
    phi = {f17_vertices[u]: labels[v] for u, v in phi_cert.map.items()}
    trace.certificates["phi"] = phi_cert

    l18, u18 = _leaf(D, dec.tree(18))
    l19, u19 = _leaf(D, dec.tree(19))
    trace.aux.update(l18=l18, l19=l19, u18=u18, u19=u19)
    if u18 is None or u19 is None:
        trace.notes.append("singleton T_18/T_19: reserved vertex left in H' instead of receiving u_18/u_19")

    reserved = [quad[0], quad[1]] + ([quad[2]] if u18 is not None else []) + ([quad[3]] if u19 is not None else [])
    drop_D = set(f17_vertices) | {l18, l19} | {u for u in (u18, u19) if u is not None}
    H_vertices = [v for v in range(n) if v not in drop_D]
    image = set(phi.values())
    Hp_vertices = [v for v in range(n) if v not in image and v not in reserved]
    H, Hp = D.induced(H_vertices), Dp.induced(Hp_vertices)
    NH = H.order
    trace.check("|V(H)| = |V(H')|", NH, "==", Hp.order)
    trace.check("|V(H)| >= n - 17n/m - 4", NH, ">=", n - Fraction(17 * n, m) - 4)
    trace.check("|A(H)||A(H')| < 3|V(H)|(|V(H)| - 1)", H.size * Hp.size, "<", 3 * NH * (NH - 1))
    trace.check(
        "n(2n - n/m) <= 3(n - 17n/m - 4)(n - 17n/m - 5)",
        n * (2 * n - Fraction(n, m)),
        "<=",
        3 * (n - Fraction(17 * n, m) - 4) * (n - Fraction(17 * n, m) - 5),
    )
    psi_cert = near_pack(NearPackInstance(H, Hp, 2, seed), cap=cap)
    trace.certificates["psi"] = psi_cert
    trace.aux["psi_collisions"] = len(psi_cert.collisions)
    trace.aux["_context"] = dict(
        phi=phi, H_vertices=H_vertices, Hp_vertices=Hp_vertices, H=H, quad=quad, l18=l18, l19=l19, u18=u18, u19=u19
    )
    return repair_two_near(psi_cert, trace, D, Dp)


def repair_two_near(psi: PackingCertificate, context: CaseTrace, D: Digraph, Dp: Digraph) -> Injection:
    """Move the preimages of a cover of psi's collisions onto two reserved vertices."""
    ctx = context.aux["_context"]
    Hv, Hpv, H = ctx["H_vertices"], ctx["Hp_vertices"], ctx["H"]
    quad, l18, l19, u18, u19 = ctx["quad"], ctx["l18"], ctx["l19"], ctx["u18"], ctx["u19"]
    if len(psi.collisions) > 2:
        raise InternalInvariantError(f"{len(psi.collisions)} collisions, at most 2 allowed")
    pre = {v: u for u, v in psi.map.items()}  # H' label -> H label

    def weight(x: int) -> tuple[int, int]:
        return (H.degree(pre[x]), -x)

    cols = [tuple(a) for a in psi.collisions]
    cover: list[int] = []
    if cols:
        common = set(cols[0]).intersection(*map(set, cols[1:]))
        if common:
            cover = [max(common, key=weight)]
        else:
            cover = [max(a, key=weight) for a in cols]
    for x in range(len(Hpv)):
        if len(cover) >= 2:
            break
        if x not in cover:
            cover.append(x)
    xp, yp = cover
    if not all(xp in a or yp in a for a in cols):
        raise InternalInvariantError("cover misses a collision")
    x_t, y_t = Hpv[xp], Hpv[yp]
    context.aux.update(x_prime=x_t, y_prime=y_t)
    psi_lift = Injection(D.order, D.order, {Hv[u]: Hpv[v] for u, v in psi.map.items()})
    phi_inj = Injection(D.order, D.order, ctx["phi"])
    overrides = {Hv[pre[xp]]: quad[0], Hv[pre[yp]]: quad[1], l18: x_t, l19: y_t}
    if u18 is not None:
        overrides[u18] = quad[2]
    if u19 is not None:
        overrides[u19] = quad[3]
    f = union_injections([phi_inj, psi_lift], overrides)
    try:
        certify(f, D, Dp, 0)
    except InternalInvariantError as exc:
        raise InternalInvariantError(f"repair left collisions: {exc}") from exc
    return f


def _high_head(D: Digraph, Dp: Digraph, params: RegimeParams, trace: CaseTrace, seed: int, cap: int) -> Injection:
    n, m, lo = params.n, params.m, params.floor_nm
    v1 = degree_order(Dp)[0]
    if Dp.in_degree(v1) < Dp.out_degree(v1):
        trace.mirrored = True
        D, Dp = D.reverse(), Dp.reverse()
    order = degree_order(Dp)
    v1, v2 = order[0], order[1]
    din, dout, d1 = Dp.in_degree(v1), Dp.out_degree(v1), Dp.degree(v1)
    A = Dp.size
    trace.check("d(v'_1) >= n - 13", d1, ">=", n - 13)
    trace.check("d-(v'_1) = max(d-, d+)(v'_1)", din, ">=", dout)
    nv2 = len(Dp.neighbors(v2) - {v1})
    trace.aux.update(v1=v1, v2=v2, d_in=din, d_out=dout, n_v2=nv2)
    dec = decompose(D, m)

    if din == n - 2 and dout == 0:
        trace.branch = "sub-b-zero-outdeg"
        u = next(v for v in range(n) if D.in_degree(v) == 0)
        trace.aux["u"] = u
        H, Hl = D.remove([u])
        Hp, Hpl = Dp.remove([v1])
        trace.check("|A(H)| + |A(H')| <= 2(n - 1) - 2", H.size + Hp.size, "<=", 2 * (n - 1) - 2)
        h = sum_pack(H, Hp, seed, cap)
        trace.certificates["h"] = h
        f = _lift(h, Hl, Hpl, n)
        f.assign(u, v1)
        return f

    if din == n - 1:
        trace.branch = "sub-a"
    elif din == n - 2:
        trace.branch = "sub-b"
    elif nv2 <= n - lo:
        trace.branch = "sub-c"
    else:
        trace.branch = "sub-d"
        return _sub_d(D, Dp, dec, params, trace, seed, cap)

    T1 = list(dec.tree(1))
    t1 = _claim_cl1(dec, trace, 1)
    trace.check("|V(T_1)| <= floor(n/m)", t1, "<=", lo)
    if trace.branch == "sub-a":
        trace.check("d+(v'_1) <= |A(D')| - (n - 1)", dout, "<=", A - (n - 1))
        trace.check("|A(D')| - (n - 1) <= n - floor(n/m)", A - (n - 1), "<=", n - lo)
        trace.check("|N(v'_2) - v'_1| <= |A(D')| - d(v'_1)", nv2, "<=", A - d1)
        trace.check("|N(v'_2) - v'_1| <= |V(D')| - |V(T_1)|", nv2, "<=", n - t1)
        mode = "b"
    else:
        if trace.branch == "sub-b":
            trace.check("d(v'_1) >= n - 1", d1, ">=", n - 1)
            trace.check("|N(v'_2) - v'_1| <= |A(D')| - d(v'_1)", nv2, "<=", A - d1)
            trace.check("|A(D')| - d(v'_1) <= n - floor(n/m)", A - d1, "<=", n - lo)
        else:
            trace.check("d-(v'_1) <= n - 3", din, "<=", n - 3)
            trace.check("|N(v'_2) - v'_1| <= n - floor(n/m)", nv2, "<=", n - lo)
        trace.check("max(d-, d+)(v'_1) <= |V(D')| - 2", din, "<=", n - 2)
        mode = "a"
    F = D.induced(T1)
    request = ForestPackRequest(F, Dp, frozenset(), 1, mode)
    trace.check(f"condition {mode}) for T_1 into D'", getattr(check_conditions(request, order), mode), "==", True)
    worst, slack = stage3_slack(request, order)
    trace.check("stage-3 slack in D'", worst, "<=", slack)
    phi_cert = forest_pack(request)
    trace.certificates["phi"] = phi_cert
    phi = {T1[u]: v for u, v in phi_cert.map.items()}
    trace.check("v'_1 in phi(V(T_1))", v1 in phi.values(), "==", True)

    H, Hl = D.remove(T1)
    Hp, Hpl = Dp.remove(phi.values())
    trace.check("|A(H)| <= n - m - |V(T_1)| + 1", H.size, "<=", n - m - t1 + 1)
    trace.check("|A(H')| <= n - floor(n/m) + 12", Hp.size, "<=", n - lo + 12)
    trace.check("|A(H)| + |A(H')| <= 2|V(H)| - 2", H.size + Hp.size, "<=", 2 * H.order - 2)
    h = sum_pack(H, Hp, seed, cap)
    trace.certificates["h"] = h
    return union_injections([Injection(n, n, phi), _lift(h, Hl, Hpl, n)])


def _sub_d(D: Digraph, Dp: Digraph, dec: ForestDecomposition, params: RegimeParams, trace: CaseTrace, seed: int, cap: int) -> Injection:
    n, m, lo = params.n, params.m, params.floor_nm
    order = degree_order(Dp)
    v1, v2, v3 = order[0], order[1], order[2]
    A, d1 = Dp.size, Dp.degree(v1)
    nv2 = trace.aux["n_v2"]
    trace.check("d-(v'_1) <= n - 3", Dp.in_degree(v1), "<=", n - 3)
    trace.check("|N(v'_2) - v'_1| > n - floor(n/m)", nv2, ">", n - lo)
    trace.check("|N(v'_2) - v'_1| <= |A(D')| - d(v'_1)", nv2, "<=", A - d1)
    trace.check("n - floor(n/m) + 12 <= |V(D')| - 4", n - lo + 12, "<=", n - 4)
    f2_vertices = dec.prefix_vertices(2)
    size2 = _claim_cl1(dec, trace, 2)
    d3 = Dp.degree(v3)
    trace.check("d(v'_3) <= (|A(D')| + 6)/3", Fraction(d3), "<=", Fraction(A + 6, 3))
    trace.check("(2n - n/m - 1 + 6)/3 <= n - 2n/m", (2 * n - Fraction(n, m) + 5) / 3, "<=", n - Fraction(2 * n, m))
    trace.check("d(v'_3) <= n - |V(F_2)|", d3, "<=", n - size2)
    F2 = D.induced(f2_vertices)
    request = ForestPackRequest(F2, Dp, frozenset(), 2, "a")
    for i, v in enumerate((v1, v2), start=1):
        trace.check(f"max(d-, d+)(v'_{i}) <= |V(D')| - {i} - 2", max(Dp.in_degree(v), Dp.out_degree(v)), "<=", n - i - 2)
    trace.check("condition a) for F_2 into D'", check_conditions(request, order).a, "==", True)
    worst, slack = stage3_slack(request, order)
    trace.check("stage-3 slack in D'", worst, "<=", slack)
    psi_cert = forest_pack(request)
    trace.certificates["psi"] = psi_cert
    psi = {f2_vertices[u]: v for u, v in psi_cert.map.items()}
    trace.check("{v'_1, v'_2} in psi(V(F_2))", {v1, v2} <= set(psi.values()), "==", True)
    H, Hl = D.remove(f2_vertices)
    Hp, Hpl = Dp.remove(psi.values())
    trace.check("|A(H')| <= 12", Hp.size, "<=", 12)
    trace.check("|A(H)| <= n - m - |V(F_2)| + 2", H.size, "<=", n - m - size2 + 2)
    trace.check("|A(H)| + |A(H')| <= 2|V(H)| - 2", H.size + Hp.size, "<=", 2 * H.order - 2)
    h = sum_pack(H, Hp, seed, cap)
    trace.certificates["h"] = h
    return union_injections([Injection(n, n, psi), _lift(h, Hl, Hpl, n)])
