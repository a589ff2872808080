import pathlib

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jtreduce.errors import NetworkParseError
from jtreduce.fixtures import BENCHMARKS, benchmark_model, dyspnoea_model, sixnode_model, random_chain_model
from jtreduce.model import parameter_count
from jtreduce.netfile import parse_network, read_network, serialize_network

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"
ALL_FIXTURES = sorted(FIXTURES.glob("*.net"))

GOOD = """network "tiny"
description "two binary variables"

[variables]
a "alpha" 2 no yes
b "beta" 2

[directed]
a -> b

[potentials]
potential a
0.3 0.7
potential b | a
0.9 0.1
0.2 0.8
"""


def error_of(text):
    with pytest.raises(NetworkParseError) as info:
        parse_network(text)
    return info.value


def test_parse_good():
    m = parse_network(GOOD.encode())
    assert m.name == "tiny" and m.description == "two binary variables"
    assert m.variable("a").states == ("no", "yes")
    assert m.graph.directed == {("a", "b")}
    assert [p.domain for p in m.potentials] == [("a",), ("a", "b")]


def test_dyspnoea_parameters():
    m = read_network(FIXTURES / "dyspnoea.net")
    assert parameter_count(m.graph, m.cards) == 520


def test_no_variables():
    e = error_of('network "x"\n')
    assert (e.line, e.column) == (1, 1)


def test_arity_mismatch_names_variable():
    e = error_of(GOOD.replace("0.2 0.8\n", "0.2\n"))
    assert "arity mismatch" in str(e) and "'b'" in str(e)
    assert e.line == 14


def test_unknown_variable_position():
    e = error_of(GOOD.replace("a -> b", "a -> z"))
    assert (e.line, e.column) == (9, 6)


def test_bad_number():
    e = error_of(GOOD.replace("0.3 0.7", "0.3 x"))
    assert (e.line, e.column) == (13, 5) and "bad number" in str(e)


def test_negative_cell():
    e = error_of(GOOD.replace("0.3 0.7", "0.3 -0.7"))
    assert e.line == 13


def test_unnormalized_table():
    e = error_of(GOOD.replace("0.9 0.1", "0.9 0.2"))
    assert e.line == 14 and "normalized" in str(e)


def test_directed_cycle():
    text = GOOD.replace('b "beta" 2', 'b "beta" 2\nc "gamma" 2').replace(
        "a -> b", "a -> b\nb -> c\nc -> a")
    e = error_of(text)
    assert "cycle" in str(e) and e.line == 10


def test_unknown_section():
    e = error_of(GOOD.replace("[directed]", "[arrows]"))
    assert e.line == 8


def test_unterminated_string():
    e = error_of(GOOD.replace('"beta"', '"beta'))
    assert e.line == 6


@pytest.mark.parametrize("path", ALL_FIXTURES, ids=lambda p: p.stem)
def test_fixture_round_trip(path):
    data = path.read_bytes()
    m = parse_network(data)
    assert serialize_network(m) == data
    assert parse_network(serialize_network(m)) == m


def test_fixtures_match_generators():
    models = [dyspnoea_model(), sixnode_model()] + [benchmark_model(k) for k in BENCHMARKS]
    assert sorted(p.stem for p in ALL_FIXTURES) == sorted(m.name for m in models)
    for m in models:
        assert (FIXTURES / f"{m.name}.net").read_bytes() == serialize_network(m)


def test_zeros_preserved():
    m = parse_network(GOOD.replace("0.9 0.1", "1 0"))
    back = parse_network(serialize_network(m))
    assert back.potentials[1].values.tolist() == [1.0, 0.0, 0.2, 0.8]


def test_chain_graph_uses_undirected_section():
    text = serialize_network(sixnode_model()).decode()
    assert "[undirected]\nc -- d\n" in text


def test_quoted_names_survive():
    m = parse_network(GOOD.replace('"alpha"', '"al \\"pha\\""'))
    assert parse_network(serialize_network(m)).variable("a").label == 'al "pha"'


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 9), st.integers(0, 10_000), st.integers(2, 3))
def test_random_round_trip(n, seed, card):
    m = random_chain_model(n, seed, card=card)
    back = parse_network(serialize_network(m))
    assert back == m
    for p, q in zip(back.potentials, m.potentials):
        assert np.array_equal(p.table, q.table)
