"""Line-oriented text format for network models.

::

    network "dyspnoea"
    description "four variable example"

    [variables]
    # id  label  cardinality  state names (optional)
    b "bronchitis" 2 no yes

    [directed]
    b -> d

    [undirected]
    c -- d

    [potentials]
    potential d | b
    0.9 0.1
    0.2 0.8

``potential d | b`` declares a table over ``(b, d)``, the child varying
fastest; ``potential c d`` declares a table over ``(c, d)`` as listed.
Cells follow in row-major order and may span any number of lines.
Blank lines and lines starting with ``#`` are ignored.
"""
from __future__ import annotations

import re

import numpy as np

from .errors import GraphError, NetworkParseError
from .graph import ChainGraph, chain_components, find_directed_cycle, relations
from .model import NetworkModel, component_cliques
from .tables import Potential, Variable

NORMALIZATION_TOLERANCE = 1e-9
SECTIONS = ("variables", "directed", "undirected", "potentials")

_TOKEN = re.compile(r'"(?:[^"\\]|\\.)*"|\S+')
_BARE = re.compile(r"^[A-Za-z0-9_.+\-]+$")


def _tokens(line: str):
    """``(text, column)`` pairs; quoted tokens are unescaped."""
    out = []
    for m in _TOKEN.finditer(line):
        tok = m.group(0)
        if tok.startswith("#"):
            break
        if tok.startswith('"'):
            if len(tok) < 2 or not tok.endswith('"'):
                raise NetworkParseError("unterminated string", None, m.start() + 1)
            tok = re.sub(r"\\(.)", r"\1", tok[1:-1])
        elif '"' in tok:
            raise NetworkParseError("stray quote", None, m.start() + 1)
        out.append((tok, m.start() + 1))
    return out


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _name(s: str) -> str:
    return s if _BARE.match(s) else _quote(s)


class _Pending:
    def __init__(self, domain, line, column, child):
        self.domain = domain
        self.line = line
        self.column = column
        self.child = child
        self.cells = []


def parse_network(data) -> NetworkModel:
    """Parse and validate a network document (``str`` or UTF-8 ``bytes``)."""
    text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data
    name, description = "network", ""
    variables, var_lines = [], {}
    directed, undirected, link_lines = [], [], {}
    pending = []
    section = None

    for lineno, raw in enumerate(text.splitlines(), 1):
        try:
            toks = _tokens(raw)
        except NetworkParseError as exc:
            raise NetworkParseError(exc.message, lineno, exc.column) from None
        if not toks:
            continue
        head, col = toks[0]

        def fail(msg, column=col):
            raise NetworkParseError(msg, lineno, column)

        if head.startswith("[") and raw.strip().endswith("]"):
            key = raw.strip()[1:-1].strip()
            if key not in SECTIONS:
                fail(f"unknown section [{key}]")
            section = key
            continue
        if section is None:
            if head in ("network", "description") and len(toks) == 2:
                if head == "network":
                    name = toks[1][0]
                else:
                    description = toks[1][0]
                continue
            fail(f"unexpected {head!r} outside a section")
        if section == "variables":
            if len(toks) < 3:
                fail("variable needs an id, a label and a cardinality")
            vid, label = head, toks[1][0]
            if vid in var_lines:
                fail(f"duplicate variable {vid!r}")
            try:
                card = int(toks[2][0])
            except ValueError:
                fail(f"cardinality {toks[2][0]!r} is not an integer", toks[2][1])
            states = tuple(t for t, _ in toks[3:])
            try:
                variables.append(Variable(vid, label, card, states or None))
            except ValueError as exc:
                fail(f"variable {vid!r}: {exc}", toks[2][1])
            var_lines[vid] = (lineno, col)
        elif section in ("directed", "undirected"):
            arrow = "->" if section == "directed" else "--"
            if len(toks) != 3 or toks[1][0] != arrow:
                fail(f"expected 'u {arrow} v'")
            u, v = toks[0][0], toks[2][0]
            for t, c in (toks[0], toks[2]):
                if t not in var_lines:
                    fail(f"unknown variable {t!r}", c)
            (directed if section == "directed" else undirected).append((u, v))
            link_lines.setdefault(frozenset((u, v)), (lineno, col))
        else:
            if head == "potential":
                names = [t for t, _ in toks[1:]]
                child = None
                if "|" in names:
                    bar = names.index("|")
                    if bar != 1:
                        fail("expected 'potential child | parents'")
                    child = names[0]
                    names = names[2:] + [child]
                if not names:
                    fail("potential without variables")
                for t, c in toks[1:]:
                    if t != "|" and t not in var_lines:
                        fail(f"unknown variable {t!r}", c)
                if len(set(names)) != len(names):
                    fail("repeated variable in potential")
                pending.append(_Pending(names, lineno, col, child))
                continue
            if not pending:
                fail("cells before any 'potential' line")
            for t, c in toks:
                try:
                    x = float(t)
                except ValueError:
                    fail(f"bad number {t!r}", c)
                if not np.isfinite(x) or x < 0:
                    fail(f"cell {t!r} must be a finite non-negative number", c)
                pending[-1].cells.append(x)

    if not variables:
        raise NetworkParseError("no variables declared", 1, 1)
    cards = {v.id: v.cardinality for v in variables}
    potentials = []
    for p in pending:
        want = int(np.prod([cards[v] for v in p.domain]))
        if len(p.cells) != want:
            who = p.child or p.domain[-1]
            raise NetworkParseError(
                f"arity mismatch in potential for {who!r}: expected {want} cells, found {len(p.cells)}",
                p.line, p.column,
            )
        potentials.append(Potential(p.domain, [cards[v] for v in p.domain], p.cells))

    try:
        graph = ChainGraph([v.id for v in variables], directed, undirected, validate=False)
    except GraphError as exc:
        line, col = _first_line(link_lines, directed + undirected)
        raise NetworkParseError(str(exc), line, col) from None
    cycle = find_directed_cycle(graph)
    if cycle is not None:
        line, col = _first_line(link_lines, list(zip(cycle, cycle[1:] + cycle[:1])))
        raise NetworkParseError(f"directed cycle through {' -> '.join(cycle)}", line, col)
    graph = ChainGraph(graph.nodes, graph.directed, graph.undirected)
    model = NetworkModel(variables, graph, potentials, name=name, description=description)
    _validate(model, pending)
    return model


def _first_line(link_lines, pairs):
    hits = [link_lines[frozenset(p)] for p in pairs if frozenset(p) in link_lines]
    return min(hits) if hits else (1, 1)


def _validate(model: NetworkModel, pending):
    g = model.graph
    if not g.undirected:
        seen = {}
        for p, src in zip(model.potentials, pending):
            child = p.domain[-1]
            if set(p.domain) != {child} | g.parents(child):
                raise NetworkParseError(
                    f"table for {child!r} must cover it and its parents {sorted(g.parents(child))}",
                    src.line, src.column,
                )
            if child in seen:
                raise NetworkParseError(f"second table for {child!r}", src.line, src.column)
            seen[child] = p
            sums = p.table.sum(axis=-1)
            if np.max(np.abs(sums - 1.0)) > NORMALIZATION_TOLERANCE:
                raise NetworkParseError(f"table for {child!r} is not normalized over {child!r}",
                                        src.line, src.column)
        missing = sorted(set(g.nodes) - set(seen))
        if missing:
            raise NetworkParseError(f"no table for {missing[0]!r}", 1, 1)
        return
    comps = chain_components(g)
    cliques = {}
    for p, src in zip(model.potentials, pending):
        dom = set(p.domain)
        fits = [k for k in comps if dom & k and dom <= k | relations(g, k)[0]]
        if not fits:
            raise NetworkParseError(f"potential over {p.domain} fits no chain component",
                                    src.line, src.column)
        k = fits[0]
        if k not in cliques:
            cliques[k] = component_cliques(g, k)
        if not any(dom <= c for c in cliques[k]):
            raise NetworkParseError(
                f"potential over {p.domain} is not inside a clique of its moralized component",
                src.line, src.column,
            )


def serialize_network(m: NetworkModel) -> bytes:
    """Render ``m``; cells use 17 significant digits so parsing round-trips exactly."""
    out = [f"network {_quote(m.name)}"]
    if m.description:
        out.append(f"description {_quote(m.description)}")
    out.append("")
    out.append("[variables]")
    for v in m.variables:
        out.append(" ".join([_name(v.id), _quote(v.label), str(v.cardinality)] + [_name(s) for s in v.states]))
    if m.graph.directed:
        out.append("")
        out.append("[directed]")
        for u, v in sorted(m.graph.directed):
            out.append(f"{_name(u)} -> {_name(v)}")
    if m.graph.undirected:
        out.append("")
        out.append("[undirected]")
        for e in sorted(tuple(sorted(e)) for e in m.graph.undirected):
            out.append(f"{_name(e[0])} -- {_name(e[1])}")
    if m.potentials:
        out.append("")
        out.append("[potentials]")
    dag = not m.graph.undirected
    for p in m.potentials:
        child = p.domain[-1]
        if dag and set(p.domain[:-1]) == m.graph.parents(child) and p.domain[:-1]:
            out.append(f"potential {_name(child)} | " + " ".join(_name(x) for x in p.domain[:-1]))
        else:
            out.append("potential " + " ".join(_name(x) for x in p.domain))
        width = p.cards[-1] if p.cards else 1
        flat = p.values
        for r in range(0, max(flat.size, 1), width):
            out.append(" ".join(format(float(x), ".17g") for x in flat[r:r + width]))
    return ("\n".join(out) + "\n").encode("utf-8")


def read_network(path) -> NetworkModel:
    with open(path, "rb") as fh:
        return parse_network(fh.read())
