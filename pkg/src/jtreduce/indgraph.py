"""Independence graphs after link removal.

Removing ``alpha ~ beta`` splits the junction tree at ``S = C - {alpha, beta}``
into variable sets ``A`` (holding alpha) and ``B`` (holding beta), and the
new joint is ``psi = phi_{A | S} * phi_{B | S} * phi_S``.  Its independence
graph is the union of a marginal graph over one side and a conditional
graph of the other side given ``S``, with some undirected links from ``S``
into the conditional side turned into directed ones.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import tables as tb
from .errors import CombinationError, DomainError, FactorizationError
from .graph import (
    ChainGraph,
    ancestral_set,
    chain_components,
    find_directed_cycle,
    is_triangulated,
    maximum_cardinality_order,
    moral_links,
    moralize,
    relations,
    topological_components,
    triangulate,
)
from .model import NetworkModel, joint_table
from .tables import Potential, Variable

MARGINAL_A_CONDITIONAL_B = "marginal-A-conditional-B"
MARGINAL_B_CONDITIONAL_A = "marginal-B-conditional-A"

#: Minimal repair search is used up to this many orientable links.
REPAIR_SEARCH_LIMIT = 12


def _pair(u, v):
    return frozenset((u, v))


def _creates_cycle(nodes, directed, undirected) -> bool:
    return find_directed_cycle(ChainGraph(nodes, directed, undirected, validate=False)) is not None


def marginalize_graph(g: ChainGraph, alpha) -> ChainGraph:
    """Independence graph of the distribution with ``alpha`` summed out.

    Completes ``nb(alpha)``; links each parent of alpha to alpha's
    neighbours and children, and each neighbour to each child; completes
    ``ch(alpha)`` with undirected links where that creates no directed
    cycle (directed links along the existing order otherwise); drops alpha.
    """
    if alpha not in g.nodes:
        raise DomainError(f"unknown node {alpha!r}")
    pa = sorted(g.parents(alpha))
    ch = sorted(g.children(alpha))
    nb = sorted(g.neighbours(alpha))
    directed = set(g.directed)
    undirected = set(g.undirected)

    def linked(u, v):
        return (u, v) in directed or (v, u) in directed or _pair(u, v) in undirected

    for u, v in combinations(nb, 2):
        if not linked(u, v):
            undirected.add(_pair(u, v))
    for u in pa:
        for v in sorted(set(nb) | set(ch)):
            if not linked(u, v):
                directed.add((u, v))
    for u in nb:
        for v in ch:
            if not linked(u, v):
                directed.add((u, v))
    # the normalizer of a child component K couples alpha's children in K
    # with every other parent of K once alpha is summed out
    for comp in chain_components(g):
        inside = sorted(comp & set(ch))
        if not inside:
            continue
        for u in sorted(relations(g, comp)[0] - {alpha}):
            for v in inside:
                if not linked(u, v):
                    directed.add((u, v))
    for u, v in combinations(ch, 2):
        if linked(u, v):
            continue
        if not _creates_cycle(g.nodes, directed, undirected | {_pair(u, v)}):
            undirected.add(_pair(u, v))
        elif not _creates_cycle(g.nodes, directed | {(u, v)}, undirected):
            directed.add((u, v))
        else:
            directed.add((v, u))
    keep = [n for n in g.nodes if n != alpha]
    return ChainGraph(
        keep,
        [(u, v) for u, v in directed if alpha not in (u, v)],
        [e for e in undirected if alpha not in e],
    )


def marginalize_graph_set(g: ChainGraph, drop) -> ChainGraph:
    """Sum out several nodes one at a time in increasing id order."""
    for n in sorted(drop):
        g = marginalize_graph(g, n)
    return g


def ancestral_moral_closure(g: ChainGraph, s) -> ChainGraph:
    """``g`` plus the moral links of its ancestral subgraph of ``s``.

    Moral links are undirected, so every link inside ``An(s)`` ends up
    undirected.
    """
    anc = ancestral_set(g, s)
    moral = moralize(g.subgraph(anc))
    directed = [(u, v) for u, v in g.directed if _pair(u, v) not in moral.undirected]
    return ChainGraph(g.nodes, directed, set(g.undirected) | set(moral.undirected))


def conditional_normal_form(g: ChainGraph, s) -> ChainGraph:
    """Drop links inside ``s``; links pointing into ``s`` from outside become undirected."""
    s = set(s)
    directed, undirected = [], set()
    for u, v in g.directed:
        if u in s and v in s:
            continue
        if v in s:
            undirected.add(_pair(u, v))
        else:
            directed.append((u, v))
    undirected |= {e for e in g.undirected if not e <= s}
    return ChainGraph(g.nodes, directed, undirected)


def condition_graph(g: ChainGraph, s, keep=None) -> ChainGraph:
    """Conditional independence graph given ``s``.

    With ``keep`` the nodes outside ``keep | s`` are summed out before the
    normal form is applied.
    """
    s = set(s)
    if not s <= set(g.nodes):
        raise DomainError(f"unknown nodes {sorted(s - set(g.nodes))}")
    out = ancestral_moral_closure(g, s) if s else g
    if keep is not None:
        out = marginalize_graph_set(out, set(g.nodes) - set(keep) - s)
    return conditional_normal_form(out, s)


def complexes(g: ChainGraph) -> set:
    """All complexes ``a -> v1 - ... - vk <- b`` of a chain graph.

    A complex is an induced subgraph of that shape: ``a`` and ``b`` are not
    adjacent, the ``v`` nodes form an undirected path inside one chain
    component, ``a`` touches only ``v1`` and ``b`` only ``vk``.  Each is
    returned as ``(frozenset({a, b}), tuple_of_path)`` with the path read
    from the smaller endpoint.
    """
    out = set()
    adj = {n: g.adjacency(n) for n in g.nodes}
    nb = {n: g.neighbours(n) for n in g.nodes}
    for v1 in g.nodes:
        for a in g.parents(v1):
            # extend induced undirected paths from v1; a must stay non-adjacent
            stack = [(v1,)]
            while stack:
                path = stack.pop()
                last = path[-1]
                for b in g.parents(last):
                    if b == a or b in adj[a]:
                        continue
                    if any(b in adj[v] for v in path[:-1]):
                        continue
                    key = (a, path, b) if a < b else (b, path[::-1], a)
                    out.add((frozenset((a, b)), key[1]))
                for nxt in nb[last]:
                    if nxt in path or nxt in adj[a]:
                        continue
                    if any(nxt in adj[v] for v in path[:-1]):
                        continue
                    stack.append(path + (nxt,))
    return out


def markov_equivalent(g: ChainGraph, h: ChainGraph) -> bool:
    """Same skeleton and same complexes."""
    return set(g.nodes) == set(h.nodes) and g.links() == h.links() and complexes(g) == complexes(h)


def combine_graphs(g_a: ChainGraph, g_b: ChainGraph, s) -> ChainGraph:
    """Union of a marginal graph and a conditional graph, repaired into a chain graph.

    Orienting every undirected ``gamma - delta`` (``gamma`` in ``s``,
    ``delta`` a conditional-side node) as ``gamma -> delta`` always yields a
    sound independence graph.  The smallest set of such orientations (ties:
    lexicographic) whose result is a chain graph Markov equivalent to that
    full orientation is applied; a cycle-free union is not enough on its
    own, since undirected links can hide a dependence between two members
    of ``s`` that the conditional side induces.
    """
    s = set(s)
    nodes = set(g_a.nodes) | set(g_b.nodes)
    directed = set(g_a.directed) | set(g_b.directed)
    undirected = set(g_a.undirected) | set(g_b.undirected)
    if any((v, u) in directed for u, v in directed):
        raise CombinationError("inputs direct the same link both ways")
    undirected -= {_pair(u, v) for u, v in directed}
    b_side = set(g_b.nodes) - s
    orientable = sorted(
        tuple(sorted(e, key=lambda x: x not in s)) for e in undirected
        if len(e & s) == 1 and len(e & b_side) == 1
    )

    def build(flip):
        und = undirected - {_pair(u, v) for u, v in flip}
        return ChainGraph(nodes, directed | set(flip), und, validate=False)

    target = build(orientable)
    if not target.is_chain_graph():
        raise CombinationError("union has a directed cycle that orienting S-links cannot break")

    def ok(cg):
        return cg.is_chain_graph() and complexes(cg) == complexes(target)

    if len(orientable) <= REPAIR_SEARCH_LIMIT:
        for size in range(len(orientable) + 1):
            for flip in combinations(orientable, size):
                cg = build(flip)
                if ok(cg):
                    return ChainGraph(cg.nodes, cg.directed, cg.undirected)
    return ChainGraph(target.nodes, target.directed, target.undirected)


@dataclass
class UpdateChoice:
    graph: ChainGraph
    variant: str
    marginal_side: frozenset


def _variant(g, marginal_side, conditional_side, s):
    g_a = marginalize_graph_set(g, set(g.nodes) - set(marginal_side) - set(s))
    g_b = condition_graph(g, s, keep=conditional_side)
    g_b = g_b.subgraph(set(conditional_side) | set(s))
    g_b = ChainGraph(g_b.nodes, g_b.directed, g_b.undirected)
    return combine_graphs(g_a, g_b, s)


def update_after_removal_detailed(g: ChainGraph, alpha, beta, partition) -> UpdateChoice:
    """Both marginal/conditional assignments, keeping the sparser result.

    Preference: fewer moral links, then fewer links, then the side with
    fewer variables as the marginal side, then the side holding the
    smaller of alpha and beta.
    """
    a_set, b_set, s = (frozenset(x) for x in partition)
    if alpha not in a_set or beta not in b_set:
        raise DomainError("partition does not put alpha in A and beta in B")
    options = []
    for variant, marg, cond, anchor in (
        (MARGINAL_A_CONDITIONAL_B, a_set, b_set, alpha),
        (MARGINAL_B_CONDITIONAL_A, b_set, a_set, beta),
    ):
        out = _variant(g, marg, cond, s)
        key = (len(moral_links(out)), out.link_count(), len(marg), anchor)
        options.append((key, UpdateChoice(out, variant, marg)))
    options.sort(key=lambda x: x[0])
    return options[0][1]


def update_after_removal(g: ChainGraph, alpha, beta, partition) -> ChainGraph:
    """Independence graph of the approximation after removing ``alpha ~ beta``.

    ``partition`` is ``(A, B, S)`` from the junction-tree surgery.
    """
    return update_after_removal_detailed(g, alpha, beta, partition).graph


# recursive model recovery ----------------------------------------------------


def _family_order(moral_k: ChainGraph, first) -> list:
    """Maximum cardinality search that visits the nodes of ``first`` before any other."""
    adj = {n: set(moral_k.adjacency(n)) for n in moral_k.nodes}
    weight = {n: 0 for n in moral_k.nodes}
    order, remaining = [], set(moral_k.nodes)
    first = set(first)
    while remaining:
        n = min(remaining, key=lambda x: (-weight[x], x not in first, x))
        order.append(n)
        remaining.discard(n)
        for m in adj[n]:
            if m in remaining:
                weight[m] += 1
    return order


def _marginal_fn(psi):
    from .jtree import JunctionTree, subtree_marginal

    if isinstance(psi, JunctionTree):
        return lambda vs: subtree_marginal(psi, vs)
    if isinstance(psi, Potential):
        return lambda vs: tb.marginalize(psi, vs)
    return psi


def derive_recursive_model(g: ChainGraph, psi, variables=None, name="recovered",
                           atol: float = 1e-10, strict: bool = True) -> NetworkModel:
    """DAG model ``prod p(v | pa(v))`` equivalent to ``psi`` factorizing over ``g``.

    ``psi`` is a consistent junction tree, a joint :class:`Potential`, or a
    callable returning the marginal over a set of variables.  When some
    moralized ``K | pa(K)`` is not triangulated it is filled in first and
    the result is flagged ``metadata["suboptimal"]``.

    With ``strict`` a mismatch between the recovered model and ``psi``
    raises :class:`FactorizationError`; otherwise the model built from
    ``psi``'s family marginals is returned as is (useful for estimated
    potentials that satisfy ``g`` only approximately).
    """
    marginal = _marginal_fn(psi)
    directed = []
    tables = []
    suboptimal = False
    cards = None
    for comp in topological_components(g):
        pa, _, _ = relations(g, comp)
        sub = moralize(g.subgraph(comp | pa)).with_links(undirected=combinations(sorted(pa), 2))
        if not is_triangulated(sub):
            sub, _ = triangulate(sub)
            suboptimal = True
        order = _family_order(sub, pa)
        pos = {n: i for i, n in enumerate(order)}
        joint_k = marginal(comp | pa)
        if cards is None:
            cards = {}
        cards.update(joint_k.card_map())
        fitted = tb.marginalize(joint_k, pa) if pa else Potential.scalar(joint_k.total())
        for v in sorted(comp, key=pos.get):
            fam_pa = sorted(m for m in sub.adjacency(v) if pos[m] < pos[v])
            directed.extend((u, v) for u in fam_pa)
            fam = tb.reorder(tb.marginalize(joint_k, set(fam_pa) | {v}), fam_pa + [v])
            cond = tb.divide(fam, tb.marginalize(fam, fam_pa))
            cond = _fill_rows(cond)
            tables.append(cond)
            fitted = tb.multiply(fitted, cond)
        err = float(np.max(np.abs(tb.reorder(fitted, joint_k.domain).table - joint_k.table)))
        if strict and err > atol * max(1.0, float(joint_k.table.max())):
            raise FactorizationError(
                f"joint over {sorted(comp | pa)} does not factorize (max error {err:.3g})"
            )
    if variables is None:
        variables = [Variable(v, v, cards[v]) for v in sorted(g.nodes)]
    dag = ChainGraph(g.nodes, directed)
    by_child = {p.domain[-1]: p for p in tables}
    ordered = [by_child[v.id] for v in variables]
    model = NetworkModel(list(variables), dag, ordered, name=name)
    model.metadata["suboptimal"] = suboptimal
    if strict:
        _verify(model, psi, atol)
    return model


def _verify(model: NetworkModel, psi, atol):
    """Compare the recovered model with ``psi`` beyond the per-component families."""
    from .jtree import JunctionTree, compile_model, subtree_marginal

    if isinstance(psi, JunctionTree):
        compiled = compile_model(model)
        pairs = [(tb.normalize(subtree_marginal(compiled, c)), tb.normalize(p))
                 for c, p in zip(psi.cliques, psi.potentials)]
    elif isinstance(psi, Potential):
        pairs = [(joint_table(model), tb.normalize(psi))]
    else:
        return
    for got, want in pairs:
        err = float(np.max(np.abs(tb.reorder(got, want.domain).table - want.table)))
        if err > atol:
            raise FactorizationError(
                f"recovered model differs from psi on {sorted(want.domain)} (max error {err:.3g})"
            )


def _fill_rows(cond: Potential) -> Potential:
    # parent configurations with zero probability get a uniform row
    t = np.array(cond.table)
    sums = t.sum(axis=-1, keepdims=True)
    t = np.where(sums > 0, t, 1.0 / t.shape[-1])
    return Potential(cond.domain, cond.cards, t)
