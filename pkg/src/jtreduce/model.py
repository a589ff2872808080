"""Network models: variables, an independence graph and component potentials."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import tables as tb
from .errors import ComponentTooLargeError, DomainError, GraphError
from .graph import (
    ChainGraph,
    chain_components,
    maximal_cliques,
    moralize,
    relations,
    topological_components,
)
from .tables import Potential, Variable

#: Largest table (in cells) that will be materialized for a single chain component.
COMPONENT_CELL_LIMIT = 2_000_000


@dataclass
class NetworkModel:
    """A graphical chain model.

    For a DAG the potentials are conditional tables ``p(v | pa(v))``.  In
    general each potential belongs to one chain component ``K``: its domain
    lies in ``K | pa(K)`` and meets ``K``, and the joint is the product over
    components of ``prod(phi_A) / sum_K prod(phi_A)``.
    """

    variables: list
    graph: ChainGraph
    potentials: list
    name: str = "network"
    description: str = ""
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        ids = [v.id for v in self.variables]
        if len(set(ids)) != len(ids):
            raise DomainError("duplicate variable ids")
        if set(ids) != set(self.graph.nodes):
            raise DomainError("graph nodes and declared variables differ")
        cards = self.cards
        for p in self.potentials:
            for v, c in zip(p.domain, p.cards):
                if v not in cards:
                    raise DomainError(f"potential over {p.domain}: unknown variable {v!r}")
                if cards[v] != c:
                    raise DomainError(f"potential over {p.domain}: {v!r} has cardinality {cards[v]}, table uses {c}")

    @property
    def cards(self) -> dict:
        return {v.id: v.cardinality for v in self.variables}

    def variable(self, vid) -> Variable:
        for v in self.variables:
            if v.id == vid:
                return v
        raise DomainError(f"unknown variable {vid!r}")

    def component_of(self, p: Potential) -> frozenset:
        """The chain component a potential belongs to."""
        dom = set(p.domain)
        for comp in chain_components(self.graph):
            pa, _, _ = relations(self.graph, comp)
            if dom & comp and dom <= comp | pa:
                return comp
        raise GraphError(f"potential over {p.domain} fits no chain component")

    def potentials_by_component(self) -> dict:
        groups = {comp: [] for comp in chain_components(self.graph)}
        for p in self.potentials:
            groups[self.component_of(p)].append(p)
        return groups

    def __eq__(self, other):
        if not isinstance(other, NetworkModel):
            return NotImplemented
        return (
            self.name == other.name
            and self.description == other.description
            and self.variables == other.variables
            and self.graph == other.graph
            and self.potentials == other.potentials
        )


def component_conditional(model: NetworkModel, comp, potentials=None,
                          limit: int = COMPONENT_CELL_LIMIT) -> Potential:
    """``p(K | pa(K))`` as a table over ``pa(K)`` followed by ``K`` (sorted)."""
    comp = frozenset(comp)
    if potentials is None:
        potentials = model.potentials_by_component().get(comp, [])
    cards = model.cards
    pa, _, _ = relations(model.graph, comp)
    domain = sorted(pa) + sorted(comp)
    size = int(np.prod([cards[v] for v in domain], dtype=np.int64))
    if size > limit:
        raise ComponentTooLargeError(f"component {sorted(comp)} needs {size} cells")
    prod = tb.unity(domain, [cards[v] for v in domain])
    for p in potentials:
        prod = tb.multiply(prod, p)
    prod = tb.reorder(prod, domain)
    z = tb.marginalize(prod, pa)
    return tb.divide(prod, z)


def component_normalizer(model: NetworkModel, comp, potentials) -> Potential:
    """``1 / sum_K prod(phi_A)`` over ``pa(K)``; 0 where the sum vanishes."""
    cards = model.cards
    pa, _, _ = relations(model.graph, comp)
    domain = sorted(pa) + sorted(comp)
    size = int(np.prod([cards[v] for v in domain], dtype=np.int64))
    if size > COMPONENT_CELL_LIMIT:
        raise ComponentTooLargeError(f"component {sorted(comp)} needs {size} cells")
    prod = tb.unity(domain, [cards[v] for v in domain])
    for p in potentials:
        prod = tb.multiply(prod, p)
    z = tb.marginalize(prod, pa)
    with np.errstate(divide="ignore"):
        inv = np.where(z.table > 0, 1.0 / np.where(z.table > 0, z.table, 1.0), 0.0)
    return Potential._wrap(z.domain, z.cards, inv)


def component_cliques(g: ChainGraph, comp) -> list:
    """Maximal cliques of the moralized subgraph on ``K | pa(K)`` that meet ``K``.

    ``pa(K)`` is treated as complete, so no clique lies wholly inside it.
    """
    comp = frozenset(comp)
    pa, _, _ = relations(g, comp)
    m = moralize(g.subgraph(comp | pa)).with_links(undirected=combinations(sorted(pa), 2))
    return [c for c in maximal_cliques(m) if c & comp]


def parameter_count(g: ChainGraph, cards: dict, conditional_only: bool = True) -> int:
    """Free parameters of a chain-graph model in component-potential form.

    Each clique ``A`` of the moralized ``K | pa(K)`` that meets component
    ``K`` is read as a table for ``A & K`` given ``A - K`` and contributes
    ``(||A & K|| - 1) * ||A - K||``.  With ``conditional_only`` the tables of
    parentless components (plain prior distributions) are skipped.
    """
    total = 0
    for comp in chain_components(g):
        pa, _, _ = relations(g, comp)
        if conditional_only and not pa:
            continue
        for clique in component_cliques(g, comp):
            inner = int(np.prod([cards[v] for v in clique & comp]))
            outer = int(np.prod([cards[v] for v in clique - comp]))
            total += (inner - 1) * outer
    return total


def joint_table(model: NetworkModel, limit: int = 1 << 22) -> Potential:
    """Full joint distribution (for small models), domain in sorted id order."""
    cards = model.cards
    domain = sorted(cards)
    size = int(np.prod([cards[v] for v in domain], dtype=np.int64))
    if size > limit:
        raise ComponentTooLargeError(f"joint needs {size} cells")
    joint = tb.Potential.scalar(1.0)
    groups = model.potentials_by_component()
    for comp in topological_components(model.graph):
        joint = tb.multiply(joint, component_conditional(model, comp, groups[comp]))
    full = tb.multiply(tb.unity(domain, [cards[v] for v in domain]), joint)
    return tb.normalize(tb.reorder(full, domain))
