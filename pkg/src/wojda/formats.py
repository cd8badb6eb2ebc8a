"""DGR1 digraph files and MAP1 injection/certificate files.

DGR1::

    n <order>
    <u> <v>        # one arc per line, 0-based

MAP1::

    <u> -> <v>     # one line per source vertex
    collisions <k>
    <u> <v>        # k collision arcs

Lines starting with ``#`` are comments in both formats.
"""

from __future__ import annotations

from typing import Iterable

from .digraph import Digraph, Injection, PackingCertificate
from .errors import InjectivityError, InvalidDigraph, OverlapError, ParseError, ShapeError


def _content_lines(text: str) -> Iterable[tuple[int, str]]:
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield no, line


def _int(tok: str, no: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"not an integer: {tok!r}", no) from None


def parse_digraph(text: str) -> Digraph:
    lines = iter(_content_lines(text))
    try:
        no, head = next(lines)
    except StopIteration:
        raise ParseError("empty input: expected 'n <order>'", 1) from None
    parts = head.split()
    if len(parts) != 2 or parts[0] != "n":
        raise ParseError(f"expected 'n <order>', got {head!r}", no)
    order = _int(parts[1], no)
    if order < 0:
        raise ParseError("negative order", no)
    seen: set[tuple[int, int]] = set()
    arcs = []
    for no, line in lines:
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected '<u> <v>', got {line!r}", no)
        u, v = _int(parts[0], no), _int(parts[1], no)
        if not (0 <= u < order and 0 <= v < order):
            raise ParseError(f"vertex out of range in arc ({u}, {v})", no)
        if u == v:
            raise ParseError(f"self-loop at {u}", no)
        if (u, v) in seen:
            raise ParseError(f"duplicate arc ({u}, {v})", no)
        seen.add((u, v))
        arcs.append((u, v))
    return Digraph(order, arcs)


def emit_digraph(D: Digraph, comments: Iterable[str] = ()) -> str:
    out = [f"# {c}" for c in comments]
    out.append(f"n {D.order}")
    out.extend(f"{u} {v}" for u, v in D.sorted_arcs())
    return "\n".join(out) + "\n"


def emit_dot(D: Digraph, name: str = "D") -> str:
    body = "".join(f"  {v};\n" for v in range(D.order))
    body += "".join(f"  {u} -> {v};\n" for u, v in D.sorted_arcs())
    return f"digraph {name} {{\n{body}}}\n"


def emit_map(cert: PackingCertificate | Injection, comments: Iterable[str] = ()) -> str:
    if isinstance(cert, PackingCertificate):
        f, collisions = cert.map, cert.collisions
    else:
        f, collisions = cert, None
    out = [f"# {c}" for c in comments]
    out.extend(f"{u} -> {v}" for u, v in f.items())
    if collisions is not None:
        out.append(f"collisions {len(collisions)}")
        out.extend(f"{u} {v}" for u, v in collisions)
    return "\n".join(out) + "\n"


def parse_map(text: str, source_order: int, target_order: int) -> tuple[Injection, list[tuple[int, int]] | None]:
    """Parse MAP1; returns the injection and the declared collision list (or None)."""
    f = Injection(source_order, target_order)
    lines = list(_content_lines(text))
    collisions = None
    i = 0
    while i < len(lines):
        no, line = lines[i]
        parts = line.split()
        if parts[0] == "collisions":
            if len(parts) != 2:
                raise ParseError("expected 'collisions <k>'", no)
            k = _int(parts[1], no)
            body = lines[i + 1 :]
            if len(body) != k:
                raise ParseError(f"declared {k} collisions, found {len(body)} lines", no)
            collisions = []
            for bno, bline in body:
                bp = bline.split()
                if len(bp) != 2:
                    raise ParseError(f"expected '<u> <v>', got {bline!r}", bno)
                collisions.append((_int(bp[0], bno), _int(bp[1], bno)))
            break
        if len(parts) != 3 or parts[1] != "->":
            raise ParseError(f"expected '<u> -> <v>', got {line!r}", no)
        try:
            f.assign(_int(parts[0], no), _int(parts[2], no))
        except (ShapeError, OverlapError, InjectivityError, InvalidDigraph) as exc:
            raise ParseError(str(exc), no) from None
        i += 1
    return f, collisions
