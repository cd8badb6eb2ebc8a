"""Command-line front end.

Exit codes: 0 success / verified, 1 proven negative, 2 input or parse error,
3 hypothesis or regime error, 4 search budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .decomposition import decompose
from .digraph import PackingCertificate, collision_arcs
from .errors import (
    BudgetExceeded,
    HypothesisError,
    NotEnoughLowDegree,
    PackingError,
    ParseError,
    RangeError,
    StageExhausted,
)
from .formats import emit_digraph, emit_dot, emit_map, parse_digraph, parse_map
from .forestpack import ForestPackRequest, forest_pack
from .generators import KINDS, gen_instance
from .nearpack import DEFAULT_CAP, NearPackInstance, near_pack, sum_pack
from .search import SearchBudget, exhaustive_pack, mu_search
from .witness import build_witness, verify_witness_exhaustive, verify_witness_structural
from .wojda import wojda_pack

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_HYPOTHESIS, EXIT_BUDGET = 0, 1, 2, 3, 4


class _Out:
    def __init__(self, args):
        self.args = args
        self.fmt = args.format
        self.seed = args.seed

    def write(self, text: str) -> None:
        if self.args.output:
            Path(self.args.output).write_text(text)
        else:
            sys.stdout.write(text)

    def certificate(self, cert: PackingCertificate, extra: dict | None = None) -> None:
        if self.fmt == "json":
            doc = {
                "seed": self.seed,
                "map": [[u, v] for u, v in cert.map.items()],
                "collisions": [list(a) for a in cert.collisions],
                "q": cert.q_bound,
                "method": cert.method,
            }
            doc.update(extra or {})
            self.write(json.dumps(doc, sort_keys=True) + "\n")
        else:
            comments = [f"seed {self.seed}", f"method {cert.method}"]
            comments += [f"{k} {v}" for k, v in sorted((extra or {}).items())]
            self.write(emit_map(cert, comments))

    def verdict(self, line: str, extra: dict | None = None, detail: list[str] = ()) -> None:
        if self.fmt == "json":
            doc = {"seed": self.seed, "verdict": line}
            doc.update(extra or {})
            self.write(json.dumps(doc, sort_keys=True) + "\n")
        else:
            self.write("".join(f"{x}\n" for x in [f"# seed {self.seed}", line, *detail]))


def _read(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    return parse_digraph(text)


def cmd_verify(args, out: _Out) -> int:
    A, B = _read(args.source), _read(args.target)
    try:
        text = Path(args.map).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {args.map}: {exc}") from None
    f, declared = parse_map(text, A.order, B.order)
    hits = collision_arcs(f, A, B)
    ok = len(hits) <= args.q and (declared is None or sorted(declared) == hits)
    out.verdict(
        "VERIFIED" if ok else "REJECTED",
        {"collisions": [list(a) for a in hits]},
        [f"collision {u} {v}" for u, v in hits],
    )
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_nearpack(args, out: _Out) -> int:
    A, B = _read(args.source), _read(args.target)
    cert = near_pack(NearPackInstance(A, B, args.q, args.seed), cap=args.cap)
    out.certificate(cert)
    return EXIT_OK


def cmd_sumpack(args, out: _Out) -> int:
    A, B = _read(args.source), _read(args.target)
    out.certificate(sum_pack(A, B, args.seed, args.cap))
    return EXIT_OK


def cmd_forestpack(args, out: _Out) -> int:
    F, T = _read(args.forest), _read(args.target)
    try:
        required = frozenset(int(x) for x in args.required.split(",") if x.strip())
    except ValueError:
        raise ParseError(f"--required expects comma-separated vertices, got {args.required!r}") from None
    cert = forest_pack(ForestPackRequest(F, T, required, args.s, args.mode))
    out.certificate(cert)
    return EXIT_OK


def cmd_wojdapack(args, out: _Out) -> int:
    D, Dp = _read(args.D), _read(args.Dp)
    cert, trace = wojda_pack(D, Dp, args.m, seed=args.seed, cap=args.cap)
    if args.trace:
        Path(args.trace).write_text(trace.json_lines())
    out.certificate(cert, {"branch": trace.branch})
    return EXIT_OK


def cmd_witness(args, out: _Out) -> int:
    pair = build_witness(args.n, args.m)
    if args.emit:
        D = pair.D if args.emit == "D" else pair.Dp
        if args.dot:
            out.write(emit_dot(D, args.emit))
        else:
            out.write(emit_digraph(D, [f"seed {args.seed}", f"witness n={args.n} m={args.m} {args.emit}"]))
        if not args.verify:
            return EXIT_OK
    if not args.verify:
        out.verdict("BUILT", {"n": args.n, "m": args.m, "a": pair.a, "b": pair.b})
        return EXIT_OK
    report = verify_witness_structural(pair)
    rc = EXIT_OK
    if args.verify == "exhaustive" and not verify_witness_exhaustive(pair):
        rc = EXIT_NEGATIVE
    if not args.emit:
        rows = [f"{'ok' if r['ok'] else 'FAIL'} {r['name']}: {r['lhs']} vs {r['rhs']}" for r in report]
        out.verdict("NONPACKING" if rc == EXIT_OK else "PACKS", {"report": report}, rows)
    return rc


def cmd_packsearch(args, out: _Out) -> int:
    A, B = _read(args.source), _read(args.target)
    cert = exhaustive_pack(A, B, args.q, SearchBudget(args.max_nodes, args.time_limit))
    if cert is None:
        out.verdict("NOPACKING")
        return EXIT_NEGATIVE
    out.certificate(cert)
    return EXIT_OK


def cmd_mu(args, out: _Out) -> int:
    res = mu_search(args.n, args.k, SearchBudget(args.max_nodes, args.time_limit), workers=args.threads)
    doc = {
        "seed": args.seed,
        "n": res.n,
        "k": res.k,
        "mu": res.mu,
        "witness": {"D": emit_digraph(res.witness[0]), "Dp": emit_digraph(res.witness[1])},
        "lower_bound": res.lower_bound_statement,
    }
    out.write(json.dumps(doc, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_decompose(args, out: _Out) -> int:
    D = _read(args.D)
    dec = decompose(D, args.m)
    if out.fmt == "json":
        out.write(json.dumps({"seed": args.seed, "trees": [list(t) for t in dec.trees], "remainder": list(dec.remainder)}) + "\n")
        return EXIT_OK
    chunks = [f"# seed {args.seed}\n"]
    for i, t in enumerate(dec.trees, start=1):
        chunks.append(emit_digraph(D.induced(list(t)), [f"T_{i} vertices {' '.join(map(str, t))}"]))
    if dec.remainder:
        chunks.append(emit_digraph(D.induced(list(dec.remainder)), [f"R vertices {' '.join(map(str, dec.remainder))}"]))
    out.write("".join(chunks))
    return EXIT_OK


def cmd_gen(args, out: _Out) -> int:
    D, Dp = gen_instance(args.kind, args.n, args.m, args.seed)
    comments = [f"seed {args.seed}", f"gen {args.kind} n={args.n} m={args.m}"]
    if args.out_dir:
        d = Path(args.out_dir)
        d.mkdir(parents=True, exist_ok=True)
        (d / "D.dgr").write_text(emit_digraph(D, comments + ["D"]))
        (d / "Dp.dgr").write_text(emit_digraph(Dp, comments + ["Dp"]))
        return EXIT_OK
    G = D if args.emit == "D" else Dp
    out.write(emit_dot(G, args.emit) if args.dot else emit_digraph(G, comments + [args.emit]))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--output", "-o", default=None, help="write to this path instead of stdout")
    common.add_argument("--threads", type=int, default=1)

    p = argparse.ArgumentParser(prog="wojda", description="Digraph packing constructions and oracles.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("verify", parents=[common], help="recheck a MAP1 certificate")
    s.add_argument("source")
    s.add_argument("target")
    s.add_argument("map")
    s.add_argument("--q", type=int, default=0)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("nearpack", parents=[common], help="q-near-packing of equal-order digraphs")
    s.add_argument("source")
    s.add_argument("target")
    s.add_argument("--q", type=int, default=0)
    s.add_argument("--cap", type=int, default=DEFAULT_CAP)
    s.set_defaults(func=cmd_nearpack)

    s = sub.add_parser("sumpack", parents=[common], help="packing when |A|+|A'| <= 2n-2")
    s.add_argument("source")
    s.add_argument("target")
    s.add_argument("--cap", type=int, default=DEFAULT_CAP)
    s.set_defaults(func=cmd_sumpack)

    s = sub.add_parser("forestpack", parents=[common], help="greedy forest packing with a required image")
    s.add_argument("forest")
    s.add_argument("target")
    s.add_argument("--s", type=int, default=1)
    s.add_argument("--required", default="")
    s.add_argument("--mode", choices=("a", "b"), default="a")
    s.set_defaults(func=cmd_forestpack)

    s = sub.add_parser("wojdapack", parents=[common], help="pack (n-m)-arc D with (2n-floor(n/m)-1)-arc Dp")
    s.add_argument("D")
    s.add_argument("Dp")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--cap", type=int, default=DEFAULT_CAP)
    s.add_argument("--trace", default=None, help="write the case trace as JSON lines")
    s.set_defaults(func=cmd_wojdapack)

    s = sub.add_parser("witness", parents=[common], help="build and verify the extremal non-packing pair")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--emit", choices=("D", "Dp"), default=None)
    s.add_argument("--verify", choices=("structural", "exhaustive"), default=None)
    s.add_argument("--dot", action="store_true")
    s.set_defaults(func=cmd_witness)

    for name, fn in (("packsearch", cmd_packsearch), ("mu", cmd_mu)):
        s = sub.add_parser(name, parents=[common])
        if name == "packsearch":
            s.add_argument("source")
            s.add_argument("target")
            s.add_argument("--q", type=int, default=0)
        else:
            s.add_argument("--n", type=int, required=True)
            s.add_argument("--k", type=int, required=True)
        s.add_argument("--max-nodes", type=int, default=50_000_000)
        s.add_argument("--time-limit", type=float, default=3600.0)
        s.set_defaults(func=fn)

    s = sub.add_parser("decompose", parents=[common], help="tree components T_1..T_m and remainder R")
    s.add_argument("D")
    s.add_argument("--m", type=int, required=True)
    s.set_defaults(func=cmd_decompose)

    s = sub.add_parser("gen", parents=[common], help="generate a seeded instance pair")
    s.add_argument("--kind", choices=KINDS, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--out-dir", default=None)
    g.add_argument("--emit", choices=("D", "Dp"), default=None)
    s.add_argument("--dot", action="store_true")
    s.set_defaults(func=cmd_gen)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    out = _Out(args)
    try:
        return args.func(args, out)
    except (ParseError, RangeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (HypothesisError, NotEnoughLowDegree) as exc:
        print(f"hypothesis: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except BudgetExceeded as exc:
        print(f"budget: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except StageExhausted as exc:
        print(f"stage exhausted: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE
    except PackingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
