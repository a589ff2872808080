"""Worked-example networks and seeded synthetic model generators."""
from __future__ import annotations

from itertools import combinations

import numpy as np

from .graph import ChainGraph, chain_components, relations
from .model import NetworkModel, component_cliques
from .tables import Potential, Variable

# dyspnoea example: bronchitis, cancer, dyspnoea, lung (smoking-related) factor
DYSPNOEA_NODES = ("b", "c", "d", "l")
SIXNODE_NODES = ("a", "b", "c", "d", "e", "f")


def dyspnoea_graph_dag() -> ChainGraph:
    return ChainGraph(DYSPNOEA_NODES, [("b", "c"), ("b", "d"), ("c", "d"), ("l", "d")])


def dyspnoea_graph_chain() -> ChainGraph:
    return ChainGraph(DYSPNOEA_NODES, [("b", "c"), ("b", "d"), ("l", "d")], [("c", "d")])


def sixnode_graph() -> ChainGraph:
    return ChainGraph(
        SIXNODE_NODES,
        [("a", "b"), ("b", "e"), ("c", "e"), ("a", "f"), ("d", "f"), ("e", "f")],
        [("c", "d")],
    )


def sixnode_marginal_graph() -> ChainGraph:
    """Marginal graph over ``{a, b, c, e}`` after removing ``c ~ d`` from the six-node network."""
    return ChainGraph(("a", "b", "c", "e"), [("a", "b"), ("b", "e"), ("c", "e")])


def sixnode_conditional_graph() -> ChainGraph:
    """Conditional graph over ``{a, d, e, f}`` given ``{a, e}``."""
    return ChainGraph(("a", "d", "e", "f"), [("a", "f"), ("d", "f"), ("e", "f")],
                      [("a", "d"), ("d", "e")])


def sixnode_reduced_graph() -> ChainGraph:
    return ChainGraph(
        SIXNODE_NODES,
        [("a", "b"), ("b", "e"), ("c", "e"), ("a", "d"), ("e", "d"),
         ("a", "f"), ("d", "f"), ("e", "f")],
    )


def _variables(nodes, card):
    return [Variable(n, n, card) for n in nodes]


def _cpt(rng, n_parent_cfg, card, strength):
    logits = rng.normal(0.0, strength, size=(n_parent_cfg, card))
    p = np.exp(logits)
    return p / p.sum(axis=1, keepdims=True)


def dyspnoea_model(states: int = 5, seed: int = 0, interaction: float = 0.05) -> NetworkModel:
    """DAG ``b -> c, b -> d, c -> d, l -> d`` with a weak ``c``/``l`` interaction.

    ``p(d | b, c, l)`` is proportional to ``f(d, b, c) g(d, b, l)`` times a
    small perturbation of size ``interaction``, so ``c`` and ``l`` are
    nearly independent given ``b`` and ``d``.
    """
    rng = np.random.default_rng(seed)
    n = states
    pb = _cpt(rng, 1, n, 1.0)[0]
    pl = _cpt(rng, 1, n, 1.0)[0]
    pc = _cpt(rng, n, n, 2.0)
    f = np.exp(rng.normal(0, 2.0, size=(n, n, n)))        # b, c, d
    g = np.exp(rng.normal(0, 2.0, size=(n, n, n)))        # b, l, d
    noise = np.exp(rng.normal(0, interaction, size=(n, n, n, n)))
    d = f[:, :, None, :] * g[:, None, :, :] * noise       # b, c, l, d
    d = d / d.sum(axis=-1, keepdims=True)
    cards = [n] * 4
    pots = [
        Potential(["b"], [n], pb),
        Potential(["b", "c"], cards[:2], pc),
        Potential(["b", "c", "l", "d"], cards, d),
        Potential(["l"], [n], pl),
    ]
    return NetworkModel(_variables(DYSPNOEA_NODES, n), dyspnoea_graph_dag(), pots,
                        name="dyspnoea", description=f"{n}-state dyspnoea example")


def sixnode_model(seed: int = 3, weak: float = 0.02) -> NetworkModel:
    """Binary model on the six-node chain graph whose ``c -- d`` interaction is weak."""
    rng = np.random.default_rng(seed)
    pa = _cpt(rng, 1, 2, 1.0)[0]
    pb = _cpt(rng, 2, 2, 3.0)
    pe = _cpt(rng, 4, 2, 3.0)
    pf = _cpt(rng, 8, 2, 3.0)
    cd = np.outer([0.4, 0.6], [0.55, 0.45]) * np.exp(weak * np.array([[1.0, -1.0], [-1.0, 1.0]]))
    pots = [
        Potential(["a"], [2], pa),
        Potential(["a", "b"], [2, 2], pb),
        Potential(["c", "d"], [2, 2], cd / cd.sum()),
        Potential(["b", "c", "e"], [2, 2, 2], pe),
        Potential(["a", "d", "e", "f"], [2] * 4, pf),
    ]
    return NetworkModel(_variables(SIXNODE_NODES, 2), sixnode_graph(), pots,
                        name="sixnode", description="six-variable chain graph example")


# synthetic generators ---------------------------------------------------------------


def _ids(n):
    width = len(str(max(n - 1, 0)))
    return [f"v{i:0{width}d}" for i in range(n)]


def random_chain_graph(n: int, seed: int, max_component: int = 3, max_parents: int = 2,
                       p_parent: float = 0.6) -> ChainGraph:
    """Random chain graph: blocks of up to ``max_component`` nodes joined by spanning trees.

    Each block draws up to ``max_parents`` parents from earlier blocks.
    ``max_component=1`` gives a DAG.
    """
    rng = np.random.default_rng(seed)
    ids = _ids(n)
    blocks, i = [], 0
    while i < n:
        size = int(rng.integers(1, max_component + 1))
        blocks.append(ids[i:i + size])
        i += size
    directed, undirected = [], []
    earlier = []
    for block in blocks:
        for k in range(1, len(block)):
            undirected.append((block[int(rng.integers(0, k))], block[k]))
        if earlier and rng.random() < p_parent:
            count = int(rng.integers(1, min(max_parents, len(earlier)) + 1))
            for u in rng.choice(len(earlier), size=count, replace=False):
                v = block[int(rng.integers(0, len(block)))]
                directed.append((earlier[int(u)], v))
        earlier.extend(block)
    return ChainGraph(ids, directed, undirected)


def random_model(g: ChainGraph, seed: int, card: int = 2, strength: float = 1.5,
                 name: str = "random") -> NetworkModel:
    """Strictly positive component potentials on the cliques of each moralized ``K | pa(K)``."""
    rng = np.random.default_rng(seed)
    cards = {v: card for v in g.nodes}
    pots = []
    for comp in chain_components(g):
        pa, _, _ = relations(g, comp)
        if len(comp) == 1:
            # singleton components get a conditional table, so DAGs stay DAG models
            (v,) = comp
            dom = sorted(pa) + [v]
            table = _cpt(rng, card ** len(pa), card, strength)
            pots.append(Potential(dom, [card] * len(dom), table))
            continue
        for clique in component_cliques(g, comp):
            dom = sorted(clique)
            shape = [cards[v] for v in dom]
            pots.append(Potential(dom, shape, np.exp(rng.normal(0, strength, size=shape))))
    return NetworkModel([Variable(v, v, card) for v in g.nodes], g, pots, name=name)


def random_dag_model(n: int, seed: int, card: int = 2, max_parents: int = 2,
                     strength: float = 1.5) -> NetworkModel:
    """Random DAG with one conditional table per variable."""
    rng = np.random.default_rng(seed)
    ids = _ids(n)
    directed = []
    for k in range(1, n):
        count = int(rng.integers(0, min(max_parents, k) + 1))
        for u in rng.choice(k, size=count, replace=False):
            directed.append((ids[int(u)], ids[k]))
    g = ChainGraph(ids, directed)
    pots = []
    for v in ids:
        pa = sorted(g.parents(v))
        cpt = _cpt(rng, card ** len(pa), card, strength)
        pots.append(Potential(pa + [v], [card] * (len(pa) + 1), cpt))
    return NetworkModel([Variable(v, v, card) for v in ids], g, pots, name=f"dag{n}-{seed}")


def random_chain_model(n: int, seed: int, card: int = 2, **kw) -> NetworkModel:
    g = random_chain_graph(n, seed, **kw)
    return random_model(g, seed + 1, card=card, name=f"chain{n}-{seed}")


#: Synthetic benchmark sizes (variables, seed, max component size).
BENCHMARKS = {
    "synthetic-small": (12, 101, 2),
    "synthetic-medium": (24, 202, 3),
    "synthetic-large": (40, 303, 3),
}


def benchmark_model(key: str) -> NetworkModel:
    n, seed, comp = BENCHMARKS[key]
    m = random_chain_model(n, seed, max_component=comp, max_parents=3)
    m.name = key
    return m


def complete_pairs(nodes):
    return [frozenset(p) for p in combinations(sorted(nodes), 2)]
