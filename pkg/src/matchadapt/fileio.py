"""Text file formats: instances, matchings, queries, graphs, and DOT export.

All formats are line-oriented UTF-8 with ``#`` comments; emitters are
deterministic so that generated fixtures diff cleanly and repeated runs
are byte-identical.
"""

from __future__ import annotations

from typing import Iterable

from .core import AdaptQuery, Instance, Matching, NAME_RE, pair_of
from .errors import ValidationError
from .gen import Graph
from .rotations import RotationPoset


def _content_lines(text: str) -> list[tuple[int, str]]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((lineno, line))
    return out


def _parse_pref_tokens(lineno: int, tokens: list[str]) -> list:
    """Preference tokens: names and parenthesized tie-groups ``( x y )``."""
    groups: list = []
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok == "(":
            j = i + 1
            group = []
            while j < len(tokens) and tokens[j] != ")":
                group.append(tokens[j])
                j += 1
            if j == len(tokens):
                raise ValidationError([f"line {lineno}: unclosed tie-group"])
            if not group:
                raise ValidationError([f"line {lineno}: empty tie-group"])
            groups.append(group)
            i = j + 1
        elif tok == ")":
            raise ValidationError([f"line {lineno}: unmatched ')'"])
        else:
            groups.append(tok)
            i += 1
    return groups


def parse_instance(text: str) -> Instance:
    """Parse the ``.pref`` instance format.

    Line 1 declares ``kind sr`` or ``kind sm``; marriage instances then
    declare ``left`` and ``right`` agent lists; each remaining line is
    ``name : token token …`` in descending preference order.
    """
    lines = _content_lines(text)
    if not lines:
        raise ValidationError(["empty instance file"])
    lineno, first = lines[0]
    parts = first.split()
    if len(parts) != 2 or parts[0] != "kind" or parts[1] not in ("sr", "sm"):
        raise ValidationError([f"line {lineno}: expected 'kind sr' or 'kind sm'"])
    kind = parts[1]
    body = lines[1:]
    left = right = None
    if kind == "sm":
        if len(body) < 2:
            raise ValidationError(["marriage instance needs 'left' and 'right' lines"])
        for label in ("left", "right"):
            lineno, line = body[0]
            parts = line.split()
            if parts[0] != label:
                raise ValidationError([f"line {lineno}: expected '{label} …'"])
            if label == "left":
                left = parts[1:]
            else:
                right = parts[1:]
            body = body[1:]
    prefs: dict[str, list] = {}
    for lineno, line in body:
        if ":" not in line:
            raise ValidationError([f"line {lineno}: expected '<name> : <preferences>'"])
        name, _, rest = line.partition(":")
        name = name.strip()
        if not NAME_RE.match(name):
            raise ValidationError([f"line {lineno}: invalid agent name {name!r}"])
        if name in prefs:
            raise ValidationError([f"line {lineno}: duplicate preference line for {name}"])
        prefs[name] = _parse_pref_tokens(lineno, rest.split())
    from .core import validate_instance

    return validate_instance(kind, prefs, left=left, right=right)


def emit_instance(instance: Instance, header: str = "") -> str:
    lines = []
    if header:
        lines.extend(f"# {h}" for h in header.splitlines())
    lines.append(f"kind {instance.kind}")
    if instance.kind == "sm":
        lines.append("left " + " ".join(instance.names[a] for a in sorted(instance.left)))
        lines.append("right " + " ".join(instance.names[a] for a in sorted(instance.right)))
    for a in range(instance.n):
        tokens = []
        for group in instance.prefs[a]:
            if len(group) == 1:
                tokens.append(instance.names[group[0]])
            else:
                tokens.append("( " + " ".join(instance.names[b] for b in group) + " )")
        lines.append(f"{instance.names[a]} : " + " ".join(tokens))
    return "\n".join(lines) + "\n"


def _parse_pair_line(instance: Instance, lineno: int, line: str) -> tuple[int, int]:
    parts = line.split()
    if len(parts) != 2:
        raise ValidationError([f"line {lineno}: expected '<name> <name>'"])
    try:
        a, b = instance.index_of(parts[0]), instance.index_of(parts[1])
    except KeyError as exc:
        raise ValidationError([f"line {lineno}: {exc.args[0]}"]) from None
    return pair_of(a, b)


def parse_matching(text: str, instance: Instance) -> Matching:
    """Parse a matching file: one ``<name> <name>`` pair per line."""
    pairs = [_parse_pair_line(instance, lineno, line) for lineno, line in _content_lines(text)]
    try:
        return Matching(pairs)
    except ValueError as exc:
        raise ValidationError([str(exc)]) from None


def emit_matching(instance: Instance, matching: Matching, header: str = "") -> str:
    lines = [f"# {h}" for h in header.splitlines()] if header else []
    for a, b in matching.sorted_pairs():
        lines.append(f"{instance.names[a]} {instance.names[b]}")
    return "\n".join(lines) + "\n"


def parse_query(text: str, instance: Instance) -> AdaptQuery:
    """Parse a query file: ``[m1]``/``[forced]``/``[forbidden]`` pair sections and ``k = <int>``."""
    sections: dict[str, list[tuple[int, int]]] = {"m1": [], "forced": [], "forbidden": []}
    k = None
    current = None
    for lineno, line in _content_lines(text):
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in sections:
                raise ValidationError([f"line {lineno}: unknown section [{current}]"])
        elif line.replace(" ", "").startswith("k="):
            try:
                k = int(line.split("=", 1)[1])
            except ValueError:
                raise ValidationError([f"line {lineno}: invalid k"]) from None
        elif current is None:
            raise ValidationError([f"line {lineno}: pair outside any section"])
        else:
            sections[current].append(_parse_pair_line(instance, lineno, line))
    if k is None:
        raise ValidationError(["query file is missing 'k = <int>'"])
    try:
        m1 = Matching(sections["m1"])
    except ValueError as exc:
        raise ValidationError([str(exc)]) from None
    return AdaptQuery.make(m1, sections["forced"], sections["forbidden"], k)


def emit_query(instance: Instance, query: AdaptQuery, header: str = "") -> str:
    lines = [f"# {h}" for h in header.splitlines()] if header else []

    def section(name: str, pairs: Iterable[tuple[int, int]]):
        lines.append(f"[{name}]")
        for a, b in sorted(pairs):
            lines.append(f"{instance.names[a]} {instance.names[b]}")

    section("m1", query.m1.pairs)
    section("forced", query.forced)
    section("forbidden", query.forbidden)
    lines.append(f"k = {query.k}")
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> Graph:
    """Parse a graph file: optional ``vertices <n>`` line, then ``u v`` edge lines."""
    n = 0
    edges = []
    for lineno, line in _content_lines(text):
        parts = line.split()
        if parts[0] == "vertices":
            if len(parts) != 2 or not parts[1].isdigit():
                raise ValidationError([f"line {lineno}: expected 'vertices <n>'"])
            n = max(n, int(parts[1]))
            continue
        if len(parts) != 2:
            raise ValidationError([f"line {lineno}: expected '<u> <v>' edge"])
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValidationError([f"line {lineno}: vertices must be integers"]) from None
        if u == v or u < 0 or v < 0:
            raise ValidationError([f"line {lineno}: invalid edge ({u},{v})"])
        edges.append((u, v))
        n = max(n, u + 1, v + 1)
    return Graph.make(n, edges)


def poset_to_dot(poset: RotationPoset) -> str:
    """DOT rendering of the rotation digraph.

    One node per rotation (id ``r<k>``, labeled with its canonical
    cycle), solid arcs for precedence, and one dashed undirected edge per
    dual pair.
    """
    names = poset.instance.names
    lines = ["digraph rotations {"]
    for rot in poset.rotations:
        cyc = " ".join(f"({names[i]},{names[j]})" for i, j in rot.cycle)
        lines.append(f'  r{rot.rid} [label="{cyc}"];')
    for rid in range(len(poset.rotations)):
        for succ in sorted(poset.succs[rid]):
            lines.append(f"  r{rid} -> r{succ};")
    for rid, dual_rid in poset.dual_pairs:
        lines.append(f"  r{rid} -> r{dual_rid} [dir=none, style=dashed];")
    lines.append("}")
    return "\n".join(lines) + "\n"
