"""Approximate junction trees by removing weak dependences.

Typical use::

    from jtreduce import compile_model, greedy_reduce, moralize
    tree = compile_model(model)
    reduced, graph, report = greedy_reduce(tree, model.graph, budget=1e-3)
"""
from .errors import *  # noqa: F401,F403
from .graph import (
    ChainGraph,
    ancestral_set,
    c_separated,
    chain_components,
    elimination_order,
    find_cliques,
    is_triangulated,
    moralize,
    relations,
    separates,
    triangulate,
)
from .indgraph import (
    combine_graphs,
    condition_graph,
    derive_recursive_model,
    marginalize_graph,
    update_after_removal,
)
from .jtree import (
    JunctionTree,
    Separator,
    build_junction_tree,
    compile_model,
    compile_structure,
    enter_evidence,
    initialize,
    joint_belief,
    propagate,
    query,
    subtree_marginal,
    total_size,
)
from .model import NetworkModel, joint_table, parameter_count
from .netfile import parse_network, read_network, serialize_network
from .reduce import (
    annihilate,
    approx_clique_potential,
    error_bound,
    greedy_reduce,
    removable_links,
    remove_link,
    saving,
    score,
)
from .sampling import SampleSet, estimate_clique_potentials, forward_sample
from .tables import Potential, Variable

__version__ = "0.1.0"
