import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle
from helpers import clique_model, small_population
from jtreduce.errors import DomainError, StaleCandidateError
from jtreduce.fixtures import sixnode_model
from jtreduce.graph import moralize
from jtreduce.jtree import build_junction_tree, compile_model, total_size
from jtreduce.reduce import (
    ONE_NEW,
    TWO_NEW,
    ZERO_NEW,
    annihilate,
    annihilation_count,
    approx_clique_potential,
    compress,
    error_bound,
    greedy_reduce,
    removable_links,
    remove_link,
    remove_link_detailed,
    score,
    score_candidate,
)
from jtreduce.tables import Potential, kl_divergence, marginalize, reorder


def pair(values):
    return Potential(["x", "y"], [2, 2], values)


def candidate(tree, link):
    wanted = tuple(sorted(link))
    for c in removable_links(tree, tree.implied_links()):
        if c.link == wanted:
            return score_candidate(tree, c)
    raise AssertionError(f"{link} is not removable")


def size(tree):
    return sum(total_size(tree))


class TestApproximation:
    def test_uniform_unchanged(self):
        phi = pair([0.25] * 4)
        assert approx_clique_potential(phi, "x", "y") == phi

    def test_correlated_pair(self):
        psi = approx_clique_potential(pair([0.4, 0.1, 0.1, 0.4]), "x", "y")
        assert psi.values.tolist() == pytest.approx([0.25] * 4, abs=1e-15)

    def test_fixed_point(self):
        phi = Potential(["x", "y", "z"], [2, 2, 2],
                        np.einsum("z,xz,yz->xyz", [0.3, 0.7], [[0.2, 0.5], [0.8, 0.5]], [[0.6, 0.1], [0.4, 0.9]]))
        assert np.allclose(reorder(approx_clique_potential(phi, "x", "y"), phi.domain).table, phi.table)

    def test_scores(self):
        assert score(pair([0.25] * 4), "x", "y") == pytest.approx(0.0, abs=1e-15)
        expected = 2 * 0.4 * math.log(1.6) + 2 * 0.1 * math.log(0.4)
        assert score(pair([0.4, 0.1, 0.1, 0.4]), "x", "y") == pytest.approx(expected, abs=1e-14)
        assert expected == pytest.approx(0.19274, abs=1e-5)
        assert score(pair([0.5, 0, 0, 0.5]), "x", "y") == pytest.approx(math.log(2), abs=1e-15)

    def test_bad_link(self):
        with pytest.raises(DomainError):
            approx_clique_potential(pair([0.25] * 4), "x", "q")


class TestErrorBound:
    def test_values(self):
        assert error_bound(0.0) == 0.0
        assert error_bound(0.001) == pytest.approx(0.022360679, abs=1e-9)
        assert error_bound(2.0) == 1.0

    def test_negative(self):
        with pytest.raises(DomainError):
            error_bound(-1e-3)


class TestCandidates:
    def test_single_clique(self):
        t = compile_model(clique_model([{"a", "b"}], {"a": 2, "b": 2}))
        assert [c.link for c in removable_links(t, t.implied_links())] == [("a", "b")]

    def test_sixnode_tree(self):
        t = compile_model(sixnode_model())
        links = {c.link: c for c in removable_links(t, moralize(sixnode_model().graph))}
        assert ("c", "d") in links and links[("c", "d")].clique == frozenset("acde")
        assert ("a", "e") not in links


# removal cases ------------------------------------------------------------------


CASES = {
    # name: (cliques, cards, link, expected case, expected saving)
    "two-new binary": ([set("abc")], dict(a=2, b=2, c=2), ("a", "b"), TWO_NEW, -2),
    "two-new mixed": ([set("abc")], dict(a=3, b=4, c=2), ("a", "b"), TWO_NEW, 8),
    "one-new": ([set("abc"), set("bcd")], dict(a=2, b=3, c=2, d=2), ("a", "b"), ONE_NEW, None),
    "zero-new": ([set("acd"), set("abc"), set("bce")], dict(a=2, b=2, c=2, d=2, e=2), ("a", "b"), ZERO_NEW, 14),
    "zero-new mixed": ([set("acd"), set("abc"), set("bce")], dict(a=3, b=2, c=4, d=2, e=3), ("a", "b"), ZERO_NEW, None),
}


@pytest.mark.parametrize("name", sorted(CASES))
def test_saving_equals_measured_delta(name):
    cliques, cards, link, case, expected = CASES[name]
    t = compile_model(clique_model(cliques, cards, seed=7))
    cand = candidate(t, link)
    assert cand.case == case
    after = remove_link(t, cand)
    assert cand.saving == size(t) - size(after)
    if expected is not None:
        assert cand.saving == expected


def test_upper_bound_form():
    cliques, cards, link, _, _ = CASES["zero-new mixed"]
    t = compile_model(clique_model(cliques, cards))
    cand = candidate(t, link)
    c = cand.clique
    sz = lambda vs: int(np.prod([cards[v] for v in vs]))  # noqa: E731
    assert cand.saving == sz(c) - sz(c - set(link)) + sz(c - {"b"}) + sz(c - {"a"})


def test_sixnode_cd_removal():
    t = compile_model(sixnode_model())
    cand = candidate(t, ("c", "d"))
    after = remove_link(t, cand)
    assert cand.case == ZERO_NEW
    assert size(t) - size(after) == cand.saving == 28
    assert {frozenset(s.members) for s in after.separators} == {frozenset("ae")}


@pytest.mark.parametrize("name", sorted(CASES))
def test_surgery_matches_factorized_joint(name):
    cliques, cards, link, _, _ = CASES[name]
    t = compile_model(clique_model(cliques, cards, seed=11))
    s = remove_link_detailed(t, candidate(t, link))
    ids, p = oracle.tree_joint(t)
    expected = factorized(ids, p, s)
    _, q = oracle.tree_joint(s.tree)
    assert np.max(np.abs(q - expected)) <= 1e-12
    # untouched cliques keep their potentials
    for c, pot in zip(t.cliques, t.potentials):
        if set(link) <= c:
            continue
        j = s.tree.cliques.index(c)
        assert s.tree.potentials[j] is pot or s.tree.potentials[j] == pot


def factorized(ids, p, surgery):
    """``p(A, S) p(B, S) / p(S)`` on the full grid."""
    a = sorted(surgery.alpha_side)
    b = sorted(surgery.beta_side)
    s = sorted(surgery.separator)
    out = np.zeros_like(p)
    pa, pb, ps = (oracle.marginal(ids, p, x) for x in (a, b, s))
    for idx in np.ndindex(*p.shape):
        x = dict(zip(ids, idx))
        den = ps[tuple(x[v] for v in s)]
        out[idx] = pa[tuple(x[v] for v in a)] * pb[tuple(x[v] for v in b)] / den if den else 0.0
    return out


def test_stale_candidate():
    t = compile_model(sixnode_model())
    cand = candidate(t, ("c", "d"))
    after = remove_link(t, cand)
    with pytest.raises(StaleCandidateError):
        remove_link(after, cand)


class TestGreedy:
    def test_zero_budget(self):
        t = compile_model(sixnode_model())
        tree, graph, report = greedy_reduce(t, sixnode_model().graph, 0.0)
        assert report.links_removed == 0 and report.reduction == 0.0
        assert size(tree) == size(t)

    def test_unbounded_single_clique(self):
        m = clique_model([{"a", "b"}], {"a": 2, "b": 2})
        tree, graph, report = greedy_reduce(compile_model(m), m.graph, math.inf)
        assert report.links_removed == 1
        assert sorted(map(sorted, tree.cliques)) == [["a"], ["b"]]
        assert [s.members for s in tree.separators] == [frozenset()]
        assert graph.links() == set()

    def test_default_budget_bound(self):
        m = sixnode_model()
        _, _, report = greedy_reduce(compile_model(m), m.graph, 0.001)
        assert report.total_divergence <= 0.001
        assert error_bound(0.001) == pytest.approx(0.0224, abs=1e-4)

    def test_sixnode(self):
        m = sixnode_model()
        tree, graph, report = greedy_reduce(compile_model(m), m.graph, 1e-3)
        assert [r.link for r in report.removals if r.kind == "link"] == [("c", "d")]
        assert (report.size_before, report.size_after) == (64, 40)
        assert sorted(len(c) for c in tree.cliques) == [3, 3, 4]

    def test_negative_budget(self):
        m = sixnode_model()
        with pytest.raises(DomainError):
            greedy_reduce(compile_model(m), m.graph, -1.0)

    def test_selection_is_minimal_divergence(self):
        for m in small_population(10, offset=500):
            t = compile_model(m)
            _, _, report = greedy_reduce(t, m.graph, math.inf, max_removals=1, prune_fill_ins=False)
            if not report.removals:
                continue
            cands = [score_candidate(t, c) for c in removable_links(t, moralize(m.graph))]
            assert report.removals[0].divergence == min(c.divergence for c in cands)


class TestAnnihilation:
    def tree(self, values):
        m = clique_model([{"a", "b"}], {"a": 2, "b": 2})
        t = compile_model(m)
        t.potentials[0] = Potential(["a", "b"], [2, 2], values)
        return t

    def test_threshold_zero(self):
        t = self.tree([0.5, 0.3, 0.15, 0.05])
        out, stats = annihilate(t, 0.0)
        assert stats.zeroed_cells == [0]
        assert np.array_equal(out.potentials[0].table, t.potentials[0].table)

    def test_two_smallest(self):
        out, stats = annihilate(self.tree([0.5, 0.3, 0.15, 0.05]), 0.21)
        assert stats.zeroed_cells == [2]
        assert out.potentials[0].values.tolist() == pytest.approx([0.625, 0.375, 0, 0])
        assert stats.removed_mass[0] == pytest.approx(0.20)

    def test_strict_boundary(self):
        assert annihilation_count([0.25] * 4, 0.25) == 0
        assert annihilation_count([0.25] * 4, 0.2500001) == 1

    def test_range(self):
        with pytest.raises(DomainError):
            annihilate(self.tree([0.25] * 4), 1.0)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.one_of(st.just(0.0), st.floats(1e-6, 1.0)), max_size=40))
def test_compression_round_trip(values):
    c = compress(values)
    assert c.decompress().tolist() == [float(x) for x in values]
    assert c.size <= 2 * len(values)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([2, 3]))
def test_approximation_keeps_both_marginals(seed, card):
    rng = np.random.default_rng(seed)
    phi = Potential(["x", "y", "z"], [card, 2, card], rng.dirichlet(np.ones(2 * card * card)))
    psi = approx_clique_potential(phi, "x", "y")
    for keep in ({"x", "z"}, {"y", "z"}):
        assert np.allclose(marginalize(psi, keep).table, marginalize(phi, keep).table, atol=1e-14)
    assert score(phi, "x", "y") == pytest.approx(kl_divergence(phi, psi), abs=1e-14)
    assert score(phi, "x", "y") >= -1e-15
