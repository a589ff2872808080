"""Junction trees: construction, initialization, propagation and queries.

Cliques are stored as frozensets with a potential whose domain is the
clique's members in sorted order.  Separators record their endpoints as a
pair of clique indices.  A disconnected network yields a tree joined by
empty separators (mass 1 each), so one tree always covers all variables.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import tables as tb
from .errors import (
    CompileInfeasibleError,
    CoverError,
    DegeneratePotentialError,
    InconsistencyError,
    StructureError,
    UnsupportedQueryError,
)
from .graph import find_cliques, moralize, triangulate
from .model import NetworkModel, component_normalizer
from .tables import Potential


@dataclass
class Separator:
    members: frozenset
    potential: Potential
    ends: tuple


def state_space(members, cards) -> int:
    return int(np.prod([cards[v] for v in members], dtype=np.int64))


class JunctionTree:
    """Cliques and separators with belief potentials.

    Attributes:
        cliques: list of frozensets.
        potentials: one :class:`Potential` per clique.
        separators: list of :class:`Separator`.
        cards: cardinality of every variable.
    """

    def __init__(self, cliques, potentials, separators, cards):
        self.cliques = list(cliques)
        self.potentials = list(potentials)
        self.separators = list(separators)
        self.cards = dict(cards)

    def copy(self) -> "JunctionTree":
        return JunctionTree(
            self.cliques,
            self.potentials,
            [Separator(s.members, s.potential, s.ends) for s in self.separators],
            self.cards,
        )

    def neighbours(self, i) -> list:
        """``(clique_index, separator_index)`` pairs adjacent to clique ``i``."""
        out = []
        for k, s in enumerate(self.separators):
            if s.ends[0] == i:
                out.append((s.ends[1], k))
            elif s.ends[1] == i:
                out.append((s.ends[0], k))
        return sorted(out)

    def variables(self) -> frozenset:
        return frozenset().union(*self.cliques) if self.cliques else frozenset()

    def containing(self, vars_) -> list:
        vars_ = set(vars_)
        return [i for i, c in enumerate(self.cliques) if vars_ <= c]

    def implied_links(self) -> set:
        """Links of the triangulated graph the tree represents."""
        out = set()
        for c in self.cliques:
            out |= {frozenset(p) for p in combinations(sorted(c), 2)}
        return out

    def clique_sizes(self) -> list:
        return [state_space(c, self.cards) for c in self.cliques]

    def check_structure(self):
        """Raise :class:`StructureError` unless the tree invariants hold."""
        n = len(self.cliques)
        if len(self.separators) != max(n - 1, 0):
            raise StructureError(f"{n} cliques but {len(self.separators)} separators")
        for s in self.separators:
            i, j = s.ends
            if s.members != self.cliques[i] & self.cliques[j]:
                raise StructureError(f"separator {sorted(s.members)} is not the intersection of its cliques")
        if n and len(_reachable(self, 0)) != n:
            raise StructureError("tree is not connected")
        if not has_running_intersection(self):
            raise StructureError("running intersection property violated")

    def __repr__(self):
        cl = ", ".join("{" + ",".join(sorted(c)) + "}" for c in self.cliques)
        return f"JunctionTree([{cl}])"


def _reachable(t: JunctionTree, start) -> set:
    seen = {start}
    stack = [start]
    while stack:
        i = stack.pop()
        for j, _ in t.neighbours(i):
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return seen


def has_running_intersection(t: JunctionTree) -> bool:
    """Every variable's cliques induce a connected subtree."""
    for v in t.variables():
        holders = {i for i, c in enumerate(t.cliques) if v in c}
        start = min(holders)
        seen = {start}
        stack = [start]
        while stack:
            i = stack.pop()
            for j, _ in t.neighbours(i):
                if j in holders and j not in seen:
                    seen.add(j)
                    stack.append(j)
        if seen != holders:
            return False
    return True


def build_junction_tree(cliques, cards) -> JunctionTree:
    """Maximum spanning tree of the clique graph weighted by ``|C & D|``.

    Equal weights go to the larger separator state space, then to the
    lexicographically smaller clique-index pair.  Unity potentials
    throughout.
    """
    cliques = [frozenset(c) for c in cliques]
    for a, b in combinations(cliques, 2):
        if a <= b or b <= a:
            raise StructureError(f"clique {sorted(a)} and {sorted(b)} are nested")
    edges = []
    for i, j in combinations(range(len(cliques)), 2):
        s = cliques[i] & cliques[j]
        edges.append((-len(s), -state_space(s, cards), i, j))
    edges.sort()
    root = list(range(len(cliques)))

    def find(x):
        while root[x] != x:
            root[x] = root[root[x]]
            x = root[x]
        return x

    seps = []
    for _, _, i, j in edges:
        ri, rj = find(i), find(j)
        if ri == rj:
            continue
        root[ri] = rj
        members = cliques[i] & cliques[j]
        seps.append(Separator(members, _unity(members, cards), (i, j)))
    pots = [_unity(c, cards) for c in cliques]
    t = JunctionTree(cliques, pots, seps, cards)
    if not has_running_intersection(t):
        raise StructureError("clique set is not decomposable")
    return t


def _unity(members, cards) -> Potential:
    dom = sorted(members)
    return tb.unity(dom, [cards[v] for v in dom])


def initialize(t: JunctionTree, model: NetworkModel) -> JunctionTree:
    """Load component potentials (and per-component normalizers) into cliques.

    Each table goes into the lowest-index clique containing its domain.
    The resulting joint belief is proportional to the model's distribution.
    """
    out = JunctionTree(
        t.cliques, [_unity(c, t.cards) for c in t.cliques],
        [Separator(s.members, _unity(s.members, t.cards), s.ends) for s in t.separators],
        t.cards,
    )
    for comp, pots in model.potentials_by_component().items():
        for p in pots:
            _absorb(out, p)
        norm = component_normalizer(model, comp, pots)
        # a constant normalizer only rescales the joint
        if not np.allclose(norm.table, norm.table.flat[0], rtol=1e-12, atol=0):
            _absorb(out, norm)
    return out


def _absorb(t: JunctionTree, p: Potential):
    homes = t.containing(p.domain)
    if not homes:
        raise CoverError(f"no clique contains {sorted(p.domain)}")
    i = homes[0]
    t.potentials[i] = tb.reorder(tb.multiply(t.potentials[i], p), t.potentials[i].domain)


def enter_evidence(t: JunctionTree, var, likelihood) -> JunctionTree:
    """Multiply a likelihood vector for ``var`` into its lowest-index clique."""
    out = t.copy()
    _absorb(out, Potential([var], [t.cards[var]], likelihood))
    return out


def _pass(t: JunctionTree, src, dst, k):
    sep = t.separators[k]
    new = tb.marginalize(t.potentials[src], sep.members)
    ratio = tb.divide(new, sep.potential)
    t.potentials[dst] = tb.reorder(tb.multiply(t.potentials[dst], ratio), t.potentials[dst].domain)
    sep.potential = new


def propagate(t: JunctionTree) -> JunctionTree:
    """Collect to clique 0 then distribute; returns a normalized consistent tree."""
    out = t.copy()
    if not out.cliques:
        return out
    order, parent = [], {0: None}
    stack = [0]
    while stack:
        i = stack.pop()
        order.append(i)
        for j, k in reversed(out.neighbours(i)):
            if j not in parent:
                parent[j] = (i, k)
                stack.append(j)
    try:
        for i in reversed(order[1:]):
            up, k = parent[i]
            _pass(out, i, up, k)
        for i in order[1:]:
            up, k = parent[i]
            _pass(out, up, i, k)
    except tb.PotentialDivisionError as exc:  # pragma: no cover - defensive
        raise InconsistencyError(str(exc)) from exc
    try:
        out.potentials = [tb.normalize(p) for p in out.potentials]
        for s in out.separators:
            s.potential = tb.normalize(s.potential)
    except DegeneratePotentialError as exc:
        raise InconsistencyError("propagation produced an all-zero clique") from exc
    return out


def query(t: JunctionTree, vars_) -> Potential:
    """Normalized marginal over ``vars_`` from a consistent tree."""
    vars_ = set(vars_)
    if not vars_:
        return Potential.scalar(1.0)
    homes = t.containing(vars_)
    if not homes:
        raise UnsupportedQueryError(f"no single clique contains {sorted(vars_)}")
    return tb.normalize(tb.marginalize(t.potentials[homes[0]], vars_))


def subtree_marginal(t: JunctionTree, vars_, limit: int = 1 << 22) -> Potential:
    """Marginal over any variable set of a consistent tree.

    Uses the smallest subtree covering one holder clique per variable and
    sums ``prod(cliques) / prod(separators)`` on it down to ``vars_``.
    """
    vars_ = set(vars_)
    if not vars_:
        return Potential.scalar(1.0)
    homes = t.containing(vars_)
    if homes:
        return tb.marginalize(t.potentials[homes[0]], vars_)
    terminals = set()
    for v in sorted(vars_):
        holders = t.containing({v})
        if not holders:
            raise UnsupportedQueryError(f"unknown variable {v!r}")
        if not any(h in terminals for h in holders):
            terminals.add(holders[0])
    keep = set(_reachable(t, min(terminals)))
    while True:
        leaves = [i for i in keep if i not in terminals
                  and sum(1 for j, _ in t.neighbours(i) if j in keep) <= 1]
        if not leaves:
            break
        keep -= set(leaves)
    dom = sorted(frozenset().union(*(t.cliques[i] for i in keep)))
    if state_space(dom, t.cards) > limit:
        raise UnsupportedQueryError(f"marginal over {sorted(vars_)} needs a {len(dom)}-variable table")
    out = tb.unity(dom, [t.cards[v] for v in dom])
    for i in sorted(keep):
        out = tb.multiply(out, t.potentials[i])
    for s in t.separators:
        if s.ends[0] in keep and s.ends[1] in keep:
            out = tb.divide(out, s.potential)
    return tb.marginalize(out, vars_)


def total_size(t: JunctionTree):
    """``(sum of clique state spaces, sum of separator state spaces)``."""
    return (
        sum(state_space(c, t.cards) for c in t.cliques),
        sum(state_space(s.members, t.cards) for s in t.separators),
    )


def compile_structure(model: NetworkModel):
    """Moralize, triangulate and extract the cliques of a model's graph.

    Returns:
        ``(junction_tree_with_unity_potentials, fill_ins)``.
    """
    cards = model.cards
    tri, fills = triangulate(moralize(model.graph), cards)
    return build_junction_tree(find_cliques(tri), cards), fills


def compile_model(model: NetworkModel, max_cells: int | None = None) -> JunctionTree:
    """Exact compilation: structure, initialization and propagation."""
    t, _ = compile_structure(model)
    if max_cells is not None and sum(total_size(t)) > max_cells:
        raise CompileInfeasibleError(
            f"compiled size {sum(total_size(t))} exceeds limit {max_cells}"
        )
    return propagate(initialize(t, model))


def joint_belief(t: JunctionTree) -> Potential:
    """``prod(clique potentials) / prod(separator potentials)`` over all variables.

    Only for small trees; used by tests and diagnostics.
    """
    dom = sorted(t.variables())
    out = tb.unity(dom, [t.cards[v] for v in dom])
    for p in t.potentials:
        out = tb.multiply(out, p)
    for s in t.separators:
        out = tb.divide(out, s.potential)
    return tb.reorder(out, dom)
