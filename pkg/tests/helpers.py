"""Model builders shared by several test modules."""
import numpy as np

from jtreduce.graph import ChainGraph
from jtreduce.model import NetworkModel
from jtreduce.tables import Potential, Variable


def clique_model(cliques, cards, seed=0):
    """Undirected model with one random positive potential per given clique."""
    rng = np.random.default_rng(seed)
    nodes = sorted(set().union(*map(set, cliques)))
    edges = {tuple(sorted((u, v))) for c in cliques for u in c for v in c if u < v}
    pots = []
    for c in cliques:
        dom = sorted(c)
        size = int(np.prod([cards[v] for v in dom]))
        pots.append(Potential(dom, [cards[v] for v in dom], rng.uniform(0.2, 2.0, size)))
    return NetworkModel([Variable(v, v, cards[v]) for v in nodes],
                        ChainGraph(nodes, [], edges), pots, name="cliques")


def small_population(count, max_nodes=8, offset=0):
    """Seeded mix of random DAG and chain-graph models over binary variables."""
    from jtreduce.fixtures import random_chain_model, random_dag_model

    out = []
    for i in range(count):
        seed = offset + i
        n = 3 + seed % (max_nodes - 2)
        out.append(random_dag_model(n, seed) if i % 2 else random_chain_model(n, seed))
    return out
