import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jtreduce.errors import DomainError, GraphError, PreconditionError
from jtreduce.fixtures import (
    dyspnoea_graph_chain,
    dyspnoea_graph_dag,
    random_chain_graph,
    sixnode_graph,
    sixnode_reduced_graph,
)
from jtreduce.graph import (
    ChainGraph,
    ancestral_set,
    c_separated,
    chain_components,
    connected_components,
    find_cliques,
    is_triangulated,
    maximal_cliques,
    moralize,
    relations,
    separates,
    triangulate,
)


def links(*pairs):
    return {frozenset(p.split("-")) for p in pairs}


def collider_graph():
    # gamma -> beta <- epsilon, alpha -> beta, alpha -> delta
    return ChainGraph("abdge", [("g", "b"), ("e", "b"), ("a", "b"), ("a", "d")])


def c4():
    return ChainGraph.undirected_graph("abcd", [("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")])


class TestConstruction:
    def test_directed_cycle_rejected(self):
        with pytest.raises(GraphError):
            ChainGraph("abc", [("a", "b"), ("b", "c"), ("c", "a")])

    def test_partially_directed_cycle_rejected(self):
        with pytest.raises(GraphError):
            ChainGraph("abc", [("a", "b"), ("b", "c")], [("c", "a")])

    def test_double_link_rejected(self):
        with pytest.raises(GraphError):
            ChainGraph("ab", [("a", "b")], [("a", "b")])

    def test_unknown_node(self):
        with pytest.raises(GraphError):
            ChainGraph("ab", [("a", "z")])


class TestComponents:
    def test_dag_has_singletons(self):
        assert chain_components(dyspnoea_graph_dag()) == [frozenset(x) for x in "bcdl"]

    def test_undirected_is_one_component(self):
        assert chain_components(c4()) == [frozenset("abcd")]

    def test_dyspnoea_chain(self):
        assert set(chain_components(dyspnoea_graph_chain())) == {
            frozenset("b"), frozenset("l"), frozenset("cd")}


class TestRelations:
    def test_dyspnoea_parents(self):
        pa, ch, nb = relations(dyspnoea_graph_dag(), {"d"})
        assert (pa, ch, nb) == ({"b", "c", "l"}, set(), set())

    def test_whole_graph(self):
        g = dyspnoea_graph_dag()
        assert relations(g, g.nodes) == (set(), set(), set())

    def test_chain_neighbour(self):
        assert relations(dyspnoea_graph_chain(), {"c"}) == ({"b"}, set(), {"d"})

    def test_unknown(self):
        with pytest.raises(DomainError):
            relations(dyspnoea_graph_dag(), {"z"})


class TestAncestry:
    def test_roots(self):
        assert ancestral_set(dyspnoea_graph_dag(), {"b", "l"}) == {"b", "l"}

    def test_dyspnoea(self):
        assert ancestral_set(dyspnoea_graph_dag(), {"c"}) == {"b", "c"}

    def test_everything(self):
        g = dyspnoea_graph_dag()
        assert ancestral_set(g, g.nodes) == set(g.nodes)

    def test_neighbours_count_as_ancestors(self):
        # c - d, so an ancestor of d must include c's parent b
        assert ancestral_set(dyspnoea_graph_chain(), {"d"}) == {"b", "c", "d", "l"}


class TestMoralize:
    def test_dyspnoea(self):
        m = moralize(dyspnoea_graph_dag())
        assert m.is_undirected()
        added = m.links() - dyspnoea_graph_dag().links()
        assert added == links("c-l", "b-l")

    def test_undirected_unchanged(self):
        assert moralize(c4()) == c4()

    def test_sixnode(self):
        m = moralize(sixnode_graph())
        assert m.links() == links("a-b", "b-e", "c-e", "a-f", "d-f", "e-f", "c-d",
                                  "b-c", "a-d", "a-e", "d-e")


class TestSeparation:
    def test_connected_empty_separator(self):
        assert not separates(c4(), {"a"}, {"c"}, set())

    def test_chain(self):
        g = ChainGraph.undirected_graph("asb", [("a", "s"), ("s", "b")])
        assert separates(g, {"a"}, {"b"}, {"s"})

    def test_sixnode_triangulated(self):
        t, _ = triangulate(moralize(sixnode_graph()))
        # the c - d link bridges the two sides until it is removed
        assert not separates(t, {"b", "c"}, {"d", "f"}, {"a", "e"})
        assert separates(t.without_links([("c", "d")]), {"b", "c"}, {"d", "f"}, {"a", "e"})

    def test_collider(self):
        g = collider_graph()
        assert c_separated(g, {"g"}, {"e"}, {"d"})
        assert c_separated(g, {"g"}, {"e"}, set())
        assert not c_separated(g, {"g"}, {"e"}, {"b"})
        assert not c_separated(g, {"b"}, {"d"}, {"g", "e"})

    def test_dyspnoea_marginal_independence(self):
        assert c_separated(dyspnoea_graph_dag(), {"b"}, {"l"}, set())

    def test_dyspnoea_collider(self):
        assert not c_separated(dyspnoea_graph_dag(), {"c"}, {"l"}, {"d"})


class TestTriangulation:
    def test_already_triangulated(self):
        g = ChainGraph.undirected_graph("abc", [("a", "b"), ("b", "c"), ("a", "c")])
        assert triangulate(g)[1] == []

    def test_c4_gets_one_chord(self):
        t, fills = triangulate(c4())
        assert len(fills) == 1 and is_triangulated(t)

    def test_sixnode_fill_in(self):
        _, fills = triangulate(moralize(sixnode_graph()))
        assert [frozenset(f) for f in fills] == [frozenset("ac")]

    def test_sixnode_cliques(self):
        t, _ = triangulate(moralize(sixnode_graph()))
        assert set(find_cliques(t)) == {frozenset("abce"), frozenset("acde"), frozenset("adef")}

    def test_complete_graph(self):
        g = ChainGraph.undirected_graph("abcd", itertools.combinations("abcd", 2))
        assert find_cliques(g) == [frozenset("abcd")]

    def test_tree_cliques(self):
        g = ChainGraph.undirected_graph("abcd", [("a", "b"), ("b", "c"), ("b", "d")])
        assert set(find_cliques(g)) == {frozenset("ab"), frozenset("bc"), frozenset("bd")}

    def test_find_cliques_rejects_cycle(self):
        with pytest.raises(PreconditionError):
            find_cliques(c4())

    def test_is_triangulated(self):
        g = ChainGraph.undirected_graph("abcd", [("a", "b"), ("b", "c"), ("b", "d")])
        assert is_triangulated(g)
        assert not is_triangulated(c4())
        assert is_triangulated(moralize(sixnode_reduced_graph()))


# properties ----------------------------------------------------------------


def all_paths_blocked(g, a, b, c):
    """Path-enumeration reference for ``separates``."""
    def walk(node, seen):
        if node in b:
            return False
        for m in g.adjacency(node):
            if m in seen or m in c:
                continue
            if not walk(m, seen | {m}):
                return False
        return True
    if (a & b) - c:
        return False
    return all(walk(x, {x}) for x in a - c)


graphs = st.builds(random_chain_graph, st.integers(2, 7), st.integers(0, 10_000))


@settings(max_examples=80, deadline=None)
@given(graphs, st.data())
def test_separates_matches_path_enumeration(g, data):
    m = moralize(g)
    nodes = list(g.nodes)
    a = data.draw(st.sets(st.sampled_from(nodes), min_size=1, max_size=2))
    b = data.draw(st.sets(st.sampled_from(nodes), min_size=1, max_size=2).filter(lambda s: not s & a))
    c = data.draw(st.sets(st.sampled_from(nodes)).map(lambda s: s - a - b))
    assert separates(m, a, b, c) == all_paths_blocked(m, a, b, c)


@settings(max_examples=80, deadline=None)
@given(graphs)
def test_triangulation_invariants(g):
    m = moralize(g)
    assert moralize(m) == m
    t, fills = triangulate(m)
    assert is_triangulated(t)
    assert t.links() == m.links() | {frozenset(f) for f in fills}
    cliques = find_cliques(t)
    assert len(cliques) <= len(g.nodes)
    assert set(cliques) == set(maximal_cliques(t))
    covered = set().union(*cliques)
    assert covered == set(g.nodes)


@settings(max_examples=80, deadline=None)
@given(graphs)
def test_components_partition_nodes(g):
    comps = chain_components(g)
    assert sorted(n for k in comps for n in k) == sorted(g.nodes)
    for k in comps:
        pa, _, _ = relations(g, k)
        assert not pa & k
    parts = connected_components(moralize(g))
    assert sorted(n for k in parts for n in k) == sorted(g.nodes)
