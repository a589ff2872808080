"""Removal of weak dependences from a junction tree.

A link ``alpha ~ beta`` of the moral graph that lies in exactly one clique
``C`` can be removed by enforcing ``alpha _||_ beta | C - {alpha, beta}``.
The clique is replaced by its two marginals over ``C - {beta}`` and
``C - {alpha}``, each of which either becomes a new clique or is swallowed
by the neighbour it is contained in.  The cost of the removal is the
conditional mutual information of ``alpha`` and ``beta`` given the rest of
the clique, which equals the KL divergence between the clique potential
and its approximation; divergences of successive removals add up.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import tables as tb
from .errors import DomainError, PreconditionError, StaleCandidateError
from .graph import ChainGraph, moral_links
from .jtree import JunctionTree, Separator, state_space, total_size
from .tables import Potential

TWO_NEW = "two-new"
ONE_NEW = "one-new"
ZERO_NEW = "zero-new"


@dataclass
class RemovalCandidate:
    """A removable link and everything needed to score and apply it.

    ``indicator_alpha`` is 1 when ``C - {beta}`` becomes a clique of its
    own and 0 when a neighbour clique absorbs it; likewise for beta.
    """

    link: tuple
    clique_index: int
    clique: frozenset
    divergence: float = float("nan")
    saving: int = 0
    case: str = ""
    indicator_alpha: int = 1
    indicator_beta: int = 1
    absorber_alpha: int | None = None
    absorber_beta: int | None = None
    potential: Potential | None = field(default=None, repr=False)

    @property
    def alpha(self):
        return self.link[0]

    @property
    def beta(self):
        return self.link[1]


@dataclass
class RemovalRecord:
    """One enforced independence statement, in the order it was applied.

    ``kind`` is ``"link"`` for a removed moral link and ``"fill-in"`` for a
    triangulation link made redundant by an earlier removal.
    """

    link: tuple
    divergence: float
    saving: int
    case: str
    order: int
    kind: str = "link"
    mode: str = "exact"


@dataclass
class ReductionReport:
    removals: list
    total_divergence: float
    size_before: int
    size_after: int
    error_bound: float
    mode: str = "exact"
    budget: float = 0.0

    @property
    def links_removed(self) -> int:
        return sum(1 for r in self.removals if r.kind == "link")

    @property
    def reduction(self) -> float:
        return 1.0 - self.size_after / self.size_before if self.size_before else 0.0


@dataclass
class Surgery:
    """Structural outcome of one removal."""

    tree: JunctionTree
    case: str
    alpha_side: frozenset
    beta_side: frozenset
    separator: frozenset
    alpha_node: int
    beta_node: int


# potentials ----------------------------------------------------------------


def approx_clique_potential(phi_c: Potential, alpha, beta) -> Potential:
    """``sum_alpha(phi) * sum_beta(phi) / sum_{alpha,beta}(phi)``, with 0/0 = 0."""
    if alpha not in phi_c.domain or beta not in phi_c.domain or alpha == beta:
        raise DomainError(f"{alpha!r}, {beta!r} must be two variables of {phi_c.domain}")
    without_alpha = tb.sum_out(phi_c, [alpha])
    without_beta = tb.sum_out(phi_c, [beta])
    rest = tb.sum_out(without_alpha, [beta])
    num = tb.multiply(without_beta, without_alpha)
    return tb.reorder(tb.divide(num, rest), phi_c.domain)


def score(phi_c: Potential, alpha, beta) -> float:
    """Conditional mutual information of alpha and beta given the rest of the clique."""
    phi = tb.normalize(phi_c)
    return tb.kl_divergence(phi, approx_clique_potential(phi, alpha, beta))


def error_bound(total_divergence: float) -> float:
    """Bound on any marginal's absolute error: ``sqrt(D / 2)``."""
    if total_divergence < 0:
        raise DomainError("divergence must be non-negative")
    return math.sqrt(total_divergence / 2.0)


# candidates ------------------------------------------------------------------


def _norm_link(a, b) -> tuple:
    return (a, b) if a < b else (b, a)


def _classify(t: JunctionTree, cand: RemovalCandidate):
    i = cand.clique_index
    c = t.cliques[i]
    c_alpha = c - {cand.beta}
    c_beta = c - {cand.alpha}
    nbrs = t.neighbours(i)
    absorb_a = next((j for j, _ in nbrs if c_alpha <= t.cliques[j]), None)
    absorb_b = next((j for j, _ in nbrs if c_beta <= t.cliques[j]), None)
    cand.absorber_alpha, cand.absorber_beta = absorb_a, absorb_b
    cand.indicator_alpha = int(absorb_a is None)
    cand.indicator_beta = int(absorb_b is None)
    new = cand.indicator_alpha + cand.indicator_beta
    cand.case = {2: TWO_NEW, 1: ONE_NEW, 0: ZERO_NEW}[new]


def _candidate(t: JunctionTree, link) -> RemovalCandidate | None:
    a, b = _norm_link(*link)
    holders = t.containing({a, b})
    if len(holders) != 1:
        return None
    i = holders[0]
    cand = RemovalCandidate((a, b), i, t.cliques[i], potential=t.potentials[i])
    _classify(t, cand)
    cand.saving = saving(t, cand)
    return cand


def removable_links(t: JunctionTree, g_moral) -> list:
    """Unscored candidates: moral links that lie in exactly one clique.

    ``g_moral`` is a moral graph or any iterable of linked pairs.
    """
    links = g_moral.links() if isinstance(g_moral, ChainGraph) else {frozenset(p) for p in g_moral}
    out = []
    for link in sorted(tuple(sorted(p)) for p in links):
        cand = _candidate(t, link)
        if cand is not None:
            out.append(cand)
    return out


def redundant_fill_ins(t: JunctionTree, g) -> list:
    """Tree links absent from ``g``'s moral graph that lie in exactly one clique."""
    moral = moral_links(g)
    out = []
    for link in sorted(tuple(sorted(p)) for p in t.implied_links() - moral):
        cand = _candidate(t, link)
        if cand is not None:
            out.append(cand)
    return out


def saving(t: JunctionTree, cand: RemovalCandidate) -> int:
    """Reduction of clique plus separator mass achieved by the removal.

    ``||C||(1 - I_a/||b|| - I_b/||a||) - ||S|| + (1 - I_a)||S_1|| + (1 - I_b)||S_k||``,
    where ``S_1`` and ``S_k`` are the separators to the absorbing neighbours.
    """
    cards = t.cards
    c = cand.clique
    a, b = cand.link
    s = c - {a, b}
    size_c = state_space(c, cards)
    # ||C|| / ||beta|| is exactly ||C - {beta}||
    value = size_c
    value -= cand.indicator_alpha * (size_c // cards[b])
    value -= cand.indicator_beta * (size_c // cards[a])
    value -= state_space(s, cards)
    if not cand.indicator_alpha:
        value += state_space(c - {b}, cards)
    if not cand.indicator_beta:
        value += state_space(c - {a}, cards)
    return int(value)


def score_candidate(t: JunctionTree, cand: RemovalCandidate) -> RemovalCandidate:
    cand.divergence = score(t.potentials[cand.clique_index], *cand.link)
    return cand


# surgery ---------------------------------------------------------------------


def _check_fresh(t: JunctionTree, cand: RemovalCandidate):
    i = cand.clique_index
    if i >= len(t.cliques) or t.cliques[i] != cand.clique:
        raise StaleCandidateError(f"clique {sorted(cand.clique)} is no longer at index {i}")
    if cand.potential is not None and not (
        t.potentials[i] is cand.potential or t.potentials[i] == cand.potential
    ):
        raise StaleCandidateError("clique potential changed since the candidate was scored")
    if t.containing(set(cand.link)) != [i]:
        raise StaleCandidateError(f"{cand.link} is no longer in a unique clique")


def remove_link_detailed(t: JunctionTree, cand: RemovalCandidate) -> Surgery:
    """Split the candidate's clique and rewire the tree around the new separator."""
    _check_fresh(t, cand)
    _classify(t, cand)
    i = cand.clique_index
    a, b = cand.link
    c = t.cliques[i]
    phi = t.potentials[i]
    c_alpha, c_beta, s = c - {b}, c - {a}, c - {a, b}
    nbrs = t.neighbours(i)

    cliques = list(t.cliques)
    pots = list(t.potentials)
    # tree positions of the new cliques, keyed by side
    slots = {}
    if cand.indicator_alpha:
        slots["a"] = i
        cliques[i] = c_alpha
        pots[i] = tb.marginalize(phi, c_alpha)
    if cand.indicator_beta:
        if "a" in slots:
            slots["b"] = len(cliques)
            cliques.append(c_beta)
            pots.append(tb.marginalize(phi, c_beta))
        else:
            slots["b"] = i
            cliques[i] = c_beta
            pots[i] = tb.marginalize(phi, c_beta)
    a_node = slots.get("a", cand.absorber_alpha)
    b_node = slots.get("b", cand.absorber_beta)
    if a_node == b_node:
        raise PreconditionError("both halves absorbed by the same neighbour")

    seps = []
    for k, sep in enumerate(t.separators):
        if i not in sep.ends:
            seps.append(Separator(sep.members, sep.potential, sep.ends))
    for j, k in nbrs:
        if j in (a_node, b_node):
            # a neighbour that absorbed one half takes over C's place
            continue
        sep = t.separators[k]
        target = b_node if b in sep.members else a_node
        seps.append(Separator(sep.members, sep.potential, (target, j)))
    seps.append(Separator(s, tb.marginalize(phi, s), (a_node, b_node)))

    if not slots:
        # zero-new: C disappears entirely, renumber
        cliques.pop(i)
        pots.pop(i)
        remap = lambda x: x - 1 if x > i else x  # noqa: E731
        seps = [Separator(x.members, x.potential, (remap(x.ends[0]), remap(x.ends[1]))) for x in seps]
        a_node, b_node = remap(a_node), remap(b_node)

    new = JunctionTree(cliques, pots, seps, t.cards)
    alpha_side, beta_side = _sides(new, a_node, b_node)
    return Surgery(new, cand.case, alpha_side, beta_side, s, a_node, b_node)


def _sides(t: JunctionTree, a_node, b_node):
    """Variables on either side of the link between two adjacent cliques."""

    def collect(start, blocked):
        seen = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            for y, _ in t.neighbours(x):
                if y not in seen and y != blocked:
                    seen.add(y)
                    stack.append(y)
        return frozenset().union(*(t.cliques[x] for x in seen))

    return collect(a_node, b_node), collect(b_node, a_node)


def remove_link(t: JunctionTree, cand: RemovalCandidate) -> JunctionTree:
    return remove_link_detailed(t, cand).tree


# greedy reduction --------------------------------------------------------------


class _ScoreCache:
    """Divergences keyed by link and clique, valid while the clique potential object survives."""

    def __init__(self):
        self._store = {}

    def score(self, t: JunctionTree, cand: RemovalCandidate) -> RemovalCandidate:
        key = (cand.link, cand.clique)
        pot = t.potentials[cand.clique_index]
        hit = self._store.get(key)
        if hit is not None and hit[0] is pot:
            cand.divergence = hit[1]
        else:
            score_candidate(t, cand)
            self._store[key] = (pot, cand.divergence)
        return cand


def _selection_key(c: RemovalCandidate):
    return (c.divergence, -c.saving, c.link)


def greedy_reduce(t: JunctionTree, g: ChainGraph, budget: float, mode: str = "exact",
                  prune_fill_ins: bool = True, max_removals: int | None = None):
    """Remove weakest links while the summed divergence stays within ``budget``.

    Candidates are ranked by divergence, ties going to the larger saving
    and then the smaller link.  After every removal the independence graph
    is rebuilt and triangulation links that it no longer needs are split
    off as well.

    Returns:
        ``(tree, graph, report)``.
    """
    from .indgraph import update_after_removal

    if budget < 0:
        raise DomainError("budget must be non-negative")
    before = sum(total_size(t))
    cache = _ScoreCache()
    records = []
    total = 0.0
    tree, graph = t, g
    if prune_fill_ins:
        tree, total = _prune(tree, graph, cache, records, total, mode, budget)
    while max_removals is None or sum(r.kind == "link" for r in records) < max_removals:
        cands = [cache.score(tree, c) for c in removable_links(tree, moral_links(graph))]
        if not cands:
            break
        best = min(cands, key=_selection_key)
        if total + best.divergence > budget:
            break
        surgery = remove_link_detailed(tree, best)
        total += best.divergence
        records.append(RemovalRecord(best.link, best.divergence, best.saving, surgery.case,
                                     len(records), "link", mode))
        graph = update_after_removal(
            graph, best.alpha, best.beta,
            (surgery.alpha_side, surgery.beta_side, surgery.separator),
        )
        tree = surgery.tree
        if prune_fill_ins:
            tree, total = _prune(tree, graph, cache, records, total, mode, budget)
    after = sum(total_size(tree))
    report = ReductionReport(records, total, before, after, error_bound(total), mode, budget)
    return tree, graph, report


def _prune(tree, graph, cache, records, total, mode, budget):
    # with estimated potentials a redundant fill-in is not free, so it too must fit the budget
    while True:
        fills = [cache.score(tree, f) for f in redundant_fill_ins(tree, graph)]
        cand = next((c for c in fills if total + c.divergence <= budget), None)
        if cand is None:
            return tree, total
        surgery = remove_link_detailed(tree, cand)
        total += cand.divergence
        records.append(RemovalRecord(cand.link, cand.divergence, cand.saving, surgery.case,
                                     len(records), "fill-in", mode))
        tree = surgery.tree


# annihilation baseline -----------------------------------------------------------


@dataclass
class CompressedTable:
    """Zero-run-length encoding of a flat table.

    ``tokens`` alternates literal non-zero values and ``(0, run_length)``
    markers; ``size`` counts stored numbers (one per literal, two per run).
    """

    length: int
    tokens: list

    @property
    def size(self) -> int:
        return sum(2 if isinstance(x, tuple) else 1 for x in self.tokens)

    def decompress(self) -> np.ndarray:
        out = []
        for tok in self.tokens:
            if isinstance(tok, tuple):
                out.extend([0.0] * tok[1])
            else:
                out.append(tok)
        return np.array(out, dtype=float)


def compress(values) -> CompressedTable:
    values = np.asarray(values, dtype=float).reshape(-1)
    tokens, run = [], 0
    for x in values:
        if x == 0.0:
            run += 1
            continue
        if run:
            tokens.append((0, run))
            run = 0
        tokens.append(float(x))
    if run:
        tokens.append((0, run))
    return CompressedTable(values.size, tokens)


@dataclass
class AnnihilationStats:
    removed_mass: list
    zeroed_cells: list
    dense_sizes: list
    compressed_sizes: list
    tables: list

    @property
    def total_dense(self) -> int:
        return sum(self.dense_sizes)

    @property
    def total_compressed(self) -> int:
        return sum(self.compressed_sizes)


def annihilation_count(values, threshold: float) -> int:
    """Largest ``k`` whose ``k`` smallest values sum to strictly less than ``threshold``."""
    ordered = np.sort(np.asarray(values, dtype=float).reshape(-1))
    prefix = np.cumsum(ordered)
    return int(np.searchsorted(prefix, threshold, side="left"))


def annihilate(t: JunctionTree, threshold: float = 1e-4):
    """Zero each clique's smallest probabilities while their mass stays below ``threshold``.

    Zero-heavy clique tables are kept in run-length form when that is
    smaller than the dense table.  The returned tree is re-propagated.

    Returns:
        ``(tree, AnnihilationStats)``.
    """
    from .jtree import propagate

    if not 0 <= threshold < 1:
        raise DomainError("threshold must lie in [0, 1)")
    pots, removed, zeroed, dense, packed, tables = [], [], [], [], [], []
    for p in t.potentials:
        flat = tb.normalize(p).values
        k = annihilation_count(flat, threshold)
        order = np.argsort(flat, kind="stable")[:k]
        cut = flat.copy()
        cut[order] = 0.0
        removed.append(float(np.cumsum(np.sort(flat))[k - 1]) if k else 0.0)
        zeroed.append(k)
        comp = compress(cut)
        dense.append(flat.size)
        if comp.size < flat.size:
            packed.append(comp.size)
            tables.append(comp)
        else:
            packed.append(flat.size)
            tables.append(None)
        pots.append(Potential._wrap(p.domain, p.cards, cut.reshape(p.cards)))
    out = JunctionTree(t.cliques, pots,
                       [Separator(s.members, s.potential, s.ends) for s in t.separators], t.cards)
    if any(zeroed):
        out = propagate(out)
    return out, AnnihilationStats(removed, zeroed, dense, packed, tables)

