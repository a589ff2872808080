"""Chain graphs and the structural algorithms used to compile them.

A chain graph has directed links ``u -> v`` and undirected links ``u - v``
and contains no directed cycle, i.e. no cycle that uses at least one
directed link (traversed in its direction) plus any number of undirected
ones.  DAGs and undirected graphs are the two extreme cases.

Node ids are strings and every algorithm iterates them in sorted order, so
all results are deterministic.
"""
from __future__ import annotations

from collections import deque
from itertools import combinations
from typing import Iterable, Mapping

from .errors import DomainError, GraphError, PreconditionError


def _pair(u, v) -> frozenset:
    return frozenset((u, v))


class ChainGraph:
    """Immutable mixed graph.

    Args:
        nodes: node ids.
        directed: ``(parent, child)`` pairs.
        undirected: unordered pairs (any 2-element iterables).
        validate: when true (default) raise :class:`GraphError` unless the
            result is a chain graph.  Intermediate constructions that may
            contain directed cycles pass ``validate=False``.
    """

    __slots__ = ("nodes", "directed", "undirected", "_pa", "_ch", "_nb")

    def __init__(self, nodes: Iterable[str], directed=(), undirected=(), validate=True):
        self.nodes = tuple(sorted(set(nodes)))
        self.directed = frozenset((u, v) for u, v in directed)
        self.undirected = frozenset(_pair(*e) for e in undirected)
        known = set(self.nodes)
        pa = {n: set() for n in self.nodes}
        ch = {n: set() for n in self.nodes}
        nb = {n: set() for n in self.nodes}
        for u, v in self.directed:
            if u == v:
                raise GraphError(f"self-loop at {u!r}")
            if u not in known or v not in known:
                raise GraphError(f"link {u}->{v} references an unknown node")
            if (v, u) in self.directed:
                raise GraphError(f"links {u}->{v} and {v}->{u} both present")
            if _pair(u, v) in self.undirected:
                raise GraphError(f"{u} and {v} joined by both a directed and an undirected link")
            pa[v].add(u)
            ch[u].add(v)
        for e in self.undirected:
            if len(e) != 2:
                raise GraphError(f"self-loop at {next(iter(e))!r}")
            u, v = sorted(e)
            if u not in known or v not in known:
                raise GraphError(f"link {u}-{v} references an unknown node")
            nb[u].add(v)
            nb[v].add(u)
        self._pa = {n: frozenset(s) for n, s in pa.items()}
        self._ch = {n: frozenset(s) for n, s in ch.items()}
        self._nb = {n: frozenset(s) for n, s in nb.items()}
        if validate and not self.is_chain_graph():
            raise GraphError("graph contains a directed cycle")

    # construction helpers -------------------------------------------------

    @classmethod
    def undirected_graph(cls, nodes, edges) -> "ChainGraph":
        return cls(nodes, (), edges)

    def with_links(self, directed=(), undirected=(), validate=True) -> "ChainGraph":
        return ChainGraph(
            self.nodes, self.directed | set(directed), self.undirected | {_pair(*e) for e in undirected},
            validate=validate,
        )

    def without_links(self, pairs, validate=True) -> "ChainGraph":
        """Drop every link (either kind, either direction) between the given pairs."""
        drop = {_pair(*p) for p in pairs}
        return ChainGraph(
            self.nodes,
            [(u, v) for u, v in self.directed if _pair(u, v) not in drop],
            [e for e in self.undirected if e not in drop],
            validate=validate,
        )

    def subgraph(self, keep: Iterable[str]) -> "ChainGraph":
        keep = set(keep)
        self._check_nodes(keep)
        return ChainGraph(
            keep,
            [(u, v) for u, v in self.directed if u in keep and v in keep],
            [e for e in self.undirected if e <= keep],
            validate=False,
        )

    # queries ---------------------------------------------------------------

    def _check_nodes(self, nodes):
        unknown = set(nodes) - set(self.nodes)
        if unknown:
            raise DomainError(f"unknown nodes {sorted(unknown)}")

    def parents(self, n) -> frozenset:
        return self._pa[n]

    def children(self, n) -> frozenset:
        return self._ch[n]

    def neighbours(self, n) -> frozenset:
        return self._nb[n]

    def adjacent(self, u, v) -> bool:
        return v in self._pa[u] or v in self._ch[u] or v in self._nb[u]

    def adjacency(self, n) -> frozenset:
        return self._pa[n] | self._ch[n] | self._nb[n]

    def links(self) -> set:
        """Skeleton: every linked pair as a frozenset."""
        return {_pair(u, v) for u, v in self.directed} | set(self.undirected)

    def link_count(self) -> int:
        return len(self.directed) + len(self.undirected)

    def is_undirected(self) -> bool:
        return not self.directed

    def is_dag(self) -> bool:
        return not self.undirected and self.is_chain_graph()

    def is_chain_graph(self) -> bool:
        return find_directed_cycle(self) is None

    def __eq__(self, other):
        if not isinstance(other, ChainGraph):
            return NotImplemented
        return (self.nodes, self.directed, self.undirected) == (other.nodes, other.directed, other.undirected)

    def __hash__(self):
        return hash((self.nodes, self.directed, self.undirected))

    def __repr__(self):
        d = ", ".join(f"{u}->{v}" for u, v in sorted(self.directed))
        u = ", ".join("-".join(sorted(e)) for e in sorted(self.undirected, key=sorted))
        return f"ChainGraph(nodes={list(self.nodes)}, directed=[{d}], undirected=[{u}])"


# components, relations, ancestry ------------------------------------------


def chain_components(g: ChainGraph) -> list:
    """Connected components of the undirected-link subgraph, ordered by least node id."""
    seen = set()
    comps = []
    for start in g.nodes:
        if start in seen:
            continue
        comp = {start}
        queue = deque([start])
        while queue:
            n = queue.popleft()
            for m in g.neighbours(n):
                if m not in comp:
                    comp.add(m)
                    queue.append(m)
        seen |= comp
        comps.append(frozenset(comp))
    return comps


def find_directed_cycle(g: ChainGraph):
    """Return the nodes of some directed cycle as a list, or None.

    A directed cycle exists iff a directed link joins two nodes of the same
    chain component or the component-level digraph has a cycle.
    """
    comps = chain_components(g)
    where = {n: i for i, comp in enumerate(comps) for n in comp}
    succ = {i: set() for i in range(len(comps))}
    for u, v in sorted(g.directed):
        if where[u] == where[v]:
            return [u, v]
        succ[where[u]].add(where[v])
    # iterative DFS with colours on the component digraph
    colour = [0] * len(comps)
    for root in range(len(comps)):
        if colour[root]:
            continue
        stack = [(root, iter(sorted(succ[root])))]
        colour[root] = 1
        path = [root]
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                colour[node] = 2
                stack.pop()
                path.pop()
            elif colour[nxt] == 1:
                cyc = path[path.index(nxt):]
                return [min(comps[i]) for i in cyc]
            elif colour[nxt] == 0:
                colour[nxt] = 1
                stack.append((nxt, iter(sorted(succ[nxt]))))
                path.append(nxt)
    return None


def relations(g: ChainGraph, a: Iterable[str]):
    """Parents, children and neighbours of the node set ``a`` (each excluding ``a``)."""
    a = set(a)
    g._check_nodes(a)
    pa, ch, nb = set(), set(), set()
    for n in a:
        pa |= g.parents(n)
        ch |= g.children(n)
        nb |= g.neighbours(n)
    return pa - a, ch - a, nb - a


def ancestral_set(g: ChainGraph, a: Iterable[str]) -> frozenset:
    """Nodes with a directed or undirected path into ``a``, plus ``a`` itself."""
    a = set(a)
    g._check_nodes(a)
    result = set(a)
    queue = deque(sorted(a))
    while queue:
        n = queue.popleft()
        for m in g.parents(n) | g.neighbours(n):
            if m not in result:
                result.add(m)
                queue.append(m)
    return frozenset(result)


def moral_links(g: ChainGraph) -> set:
    """Skeleton of the moral graph as a set of frozenset pairs."""
    links = g.links()
    for comp in chain_components(g):
        pa, _, _ = relations(g, comp)
        for u, v in combinations(sorted(pa), 2):
            links.add(_pair(u, v))
    return links


def moralize(g: ChainGraph) -> ChainGraph:
    """Marry the parents of every chain component, then drop directions."""
    return ChainGraph.undirected_graph(g.nodes, moral_links(g))


def separates(g: ChainGraph, a, b, c) -> bool:
    """True iff every path from ``a`` to ``b`` in ``g`` meets ``c``.

    Link directions are ignored, so ``g`` is normally a moral graph.
    """
    a, b, c = set(a), set(b), set(c)
    if not a or not b:
        return True
    if (a & b) - c:
        return False
    seen = set(a - c)
    queue = deque(sorted(seen))
    while queue:
        n = queue.popleft()
        for m in g.adjacency(n):
            if m in c or m in seen:
                continue
            if m in b:
                return False
            seen.add(m)
            queue.append(m)
    return True


def c_separated(g: ChainGraph, a, b, c) -> bool:
    """Chain-graph separation of ``a`` and ``b`` by ``c``.

    ``c`` must separate ``a`` from ``b`` in the moral graph of the subgraph
    induced by the ancestral set of ``a | b | c``.
    """
    a, b, c = set(a), set(b), set(c)
    if not a or not b:
        return True
    anc = ancestral_set(g, a | b | c)
    return separates(moralize(g.subgraph(anc)), a, b, c)


# triangulation and cliques ---------------------------------------------------


def _adjacency_sets(g: ChainGraph) -> dict:
    return {n: set(g.adjacency(n)) for n in g.nodes}


def elimination_order(g: ChainGraph, cards: Mapping[str, int] | None = None):
    """Greedy minimum-fill elimination of an undirected graph.

    Ties are broken by the state-space size of the node's elimination
    clique, then by the lexicographically smallest set of fill-ins, then by
    node id.

    Returns:
        ``(order, fill_ins)`` where fill-ins are ordered pairs ``(u, v)``
        with ``u < v`` in the order they were added.
    """
    cards = cards or {}
    adj = _adjacency_sets(g)
    order, fills = [], []
    while adj:
        best = None
        for n in sorted(adj):
            nbrs = sorted(adj[n])
            missing = [(u, v) for u, v in combinations(nbrs, 2) if v not in adj[u]]
            weight = cards.get(n, 2)
            for m in nbrs:
                weight *= cards.get(m, 2)
            key = (len(missing), weight, missing, n)
            if best is None or key < best[0]:
                best = (key, n, missing)
        _, n, missing = best
        for u, v in missing:
            adj[u].add(v)
            adj[v].add(u)
        fills.extend(missing)
        for m in adj[n]:
            adj[m].discard(n)
        del adj[n]
        order.append(n)
    return order, fills


def triangulate(g: ChainGraph, cards: Mapping[str, int] | None = None):
    """Add fill-ins to make the undirected graph ``g`` triangulated.

    Returns:
        ``(triangulated_graph, fill_ins)``.
    """
    if g.directed:
        raise PreconditionError("triangulate expects an undirected graph")
    _, fills = elimination_order(g, cards)
    return ChainGraph.undirected_graph(g.nodes, g.links() | {_pair(u, v) for u, v in fills}), fills


def maximum_cardinality_order(g: ChainGraph) -> list:
    """Maximum cardinality search visiting order (ties to the smallest id)."""
    adj = _adjacency_sets(g)
    weight = {n: 0 for n in g.nodes}
    order = []
    remaining = set(g.nodes)
    while remaining:
        n = min(remaining, key=lambda x: (-weight[x], x))
        order.append(n)
        remaining.discard(n)
        for m in adj[n]:
            if m in remaining:
                weight[m] += 1
    return order


def is_triangulated(g: ChainGraph) -> bool:
    """Chordality test: the reverse MCS order must be a perfect elimination order."""
    adj = _adjacency_sets(g)
    order = maximum_cardinality_order(g)
    pos = {n: i for i, n in enumerate(order)}
    for n in order:
        earlier = [m for m in adj[n] if pos[m] < pos[n]]
        if len(earlier) < 2:
            continue
        latest = max(earlier, key=pos.get)
        if not set(earlier) - {latest} <= adj[latest]:
            return False
    return True


def find_cliques(g: ChainGraph) -> list:
    """All maximal cliques of a triangulated graph, sorted by their sorted member lists."""
    if not is_triangulated(g):
        raise PreconditionError("find_cliques requires a triangulated graph")
    adj = _adjacency_sets(g)
    order = maximum_cardinality_order(g)
    pos = {n: i for i, n in enumerate(order)}
    candidates = [frozenset({n} | {m for m in adj[n] if pos[m] < pos[n]}) for n in order]
    cliques = [c for c in candidates if not any(c < d for d in candidates)]
    return sorted(set(cliques), key=lambda c: sorted(c))


def maximal_cliques(g: ChainGraph) -> list:
    """All maximal cliques of any graph (Bron-Kerbosch with pivoting), sorted."""
    adj = _adjacency_sets(g)
    out = []

    def expand(r, p, x):
        if not p and not x:
            out.append(frozenset(r))
            return
        pivot = max(p | x, key=lambda n: (len(adj[n] & p), n))
        for n in sorted(p - adj[pivot]):
            expand(r | {n}, p & adj[n], x & adj[n])
            p = p - {n}
            x = x | {n}

    expand(set(), set(g.nodes), set())
    return sorted(out, key=lambda c: sorted(c))


def connected_components(g: ChainGraph) -> list:
    """Connected components ignoring link directions."""
    seen, comps = set(), []
    for start in g.nodes:
        if start in seen:
            continue
        comp = {start}
        queue = deque([start])
        while queue:
            n = queue.popleft()
            for m in g.adjacency(n):
                if m not in comp:
                    comp.add(m)
                    queue.append(m)
        seen |= comp
        comps.append(frozenset(comp))
    return comps


def topological_components(g: ChainGraph) -> list:
    """Chain components in an order where every parent component comes first."""
    comps = chain_components(g)
    where = {n: i for i, comp in enumerate(comps) for n in comp}
    indeg = [0] * len(comps)
    succ = {i: set() for i in range(len(comps))}
    for u, v in g.directed:
        i, j = where[u], where[v]
        if j not in succ[i]:
            succ[i].add(j)
            indeg[j] += 1
    ready = sorted((min(comps[i]), i) for i in range(len(comps)) if indeg[i] == 0)
    out = []
    while ready:
        _, i = ready.pop(0)
        out.append(comps[i])
        for j in succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                ready.append((min(comps[j]), j))
                ready.sort()
    if len(out) != len(comps):
        raise GraphError("graph contains a directed cycle")
    return out
