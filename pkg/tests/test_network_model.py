"""
Tests for graphs, instances and min-cuts
"""

import networkx as nx
import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings, strategies as st

from src.corpus import crossed_pairs, parallel_relay, random_unicast_instance, wide_bottleneck
from src.network_model import (
    BranchRole,
    Edge,
    NECInstance,
    NetworkGraph,
    min_cut,
    normalize_adversary,
    unicast_cut_check,
)


def test_topological_edges_follow_tails_then_declaration(fly):
    order = [edge.id for edge in fly.graph.topological_edges()]
    assert order == ["e1", "e6", "e2", "e7", "e3", "e4", "e5"]


def test_topological_nodes_reject_cycles():
    graph = NetworkGraph(["a", "b"], [Edge("e1", "a", "b"), Edge("e2", "b", "a")])
    with pytest.raises(nx.NetworkXUnfeasible):
        graph.topological_nodes()


def test_parallel_edges_sum_in_capacity_view():
    graph = NetworkGraph(["a", "b"], [Edge("e1", "a", "b"), Edge("e2", "a", "b", 3)])
    assert graph.capacity_digraph()["a"]["b"]["capacity"] == 4
    assert graph.to_networkx().number_of_edges("a", "b") == 2


def test_butterfly_pairs_each_have_unit_cut(fly):
    # the shared edge carries one bit; each pair alone still has a unit path
    assert unicast_cut_check(fly) == [1, 1]


def test_terminal_side_cut_witness(fly):
    cut = min_cut(fly.graph, "s1", "t1")
    assert cut.value == 1
    assert cut.cut_edges == frozenset({"e4"})


def test_wide_edge_counts_its_capacity():
    inst = wide_bottleneck()
    graph = NetworkGraph(
        [*inst.graph.nodes, "s"],
        [*inst.graph.edges, Edge("f1", "s", "s1"), Edge("f2", "s", "s2")],
    )
    assert min_cut(graph, "s", "v").value == 2


def test_unreachable_terminal_has_zero_cut():
    assert unicast_cut_check(crossed_pairs()) == [0, 0]
    cut = min_cut(crossed_pairs().graph, "s1", "t1")
    assert cut.value == 0
    assert cut.cut_edges == frozenset()


def test_min_cut_rejects_bad_endpoints(fly):
    with pytest.raises(ValueError):
        min_cut(fly.graph, "s1", "s1")
    with pytest.raises(ValueError, match="unknown node"):
        min_cut(fly.graph, "s1", "nowhere")


def test_reduced_instance_cut_equals_pair_count(fly_reduced):
    cut = min_cut(fly_reduced.graph, fly_reduced.source, fly_reduced.terminal)
    assert cut.value == 2
    assert cut.cut_edges == frozenset({"b_1", "b_2"})


def test_adversary_is_deduplicated_and_sorted():
    sets = normalize_adversary([["e2"], ["e1", "e3"], ["e2"], ["e3", "e1"]])
    assert sets == (frozenset({"e1", "e3"}), frozenset({"e2"}))


def test_nec_instance_roles_and_jammable_edges(fly_reduced):
    assert fly_reduced.branch_count == 2
    assert fly_reduced.role_edge("z'", 2) == "z'_2"
    assert "a_1" not in fly_reduced.jammable_edges
    assert {"x_1", "e3", "z_2"} <= fly_reduced.jammable_edges
    with pytest.raises(KeyError):
        fly_reduced.role_edge("b", 3)


def test_roles_are_coerced_to_branch_roles():
    inst = NECInstance(
        graph=NetworkGraph(["s", "t"], [Edge("e1", "s", "t")]),
        source="s",
        terminal="t",
        roles={"e1": ("internal", None)},
    )
    assert inst.roles["e1"] == BranchRole("internal")
    assert inst.branch_count == 0


def test_instance_properties():
    inst = parallel_relay()
    assert inst.k == 2
    assert inst.sources == ("s1", "s2")
    assert inst.terminals == ("t1", "t2")


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
@given(seed=st.integers(0, 2 ** 32 - 1), data=st.data())
def test_min_cut_ignores_edge_order_and_node_names(seed, data):
    inst = random_unicast_instance(np.random.default_rng(seed))
    assume(inst is not None)
    graph = inst.graph
    fresh = data.draw(st.permutations([f"n{i}" for i in range(len(graph.nodes))]))
    names = dict(zip(graph.nodes, fresh))
    shuffled = data.draw(st.permutations(list(graph.edges)))
    relabeled = NetworkGraph(
        [names[node] for node in reversed(graph.nodes)],
        [Edge(edge.id, names[edge.tail], names[edge.head], edge.capacity) for edge in shuffled],
    )
    for src, dst in inst.pairs:
        cut = min_cut(graph, src, dst)
        moved = min_cut(relabeled, names[src], names[dst])
        assert moved.value == cut.value
        assert moved.cut_edges == cut.cut_edges
