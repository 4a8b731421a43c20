"""
Tests for error patterns and admissible pattern enumeration
"""

import pytest
from hypothesis import given, settings, strategies as st

from src.adversary import ZERO_PATTERN, AdversaryClass, ErrorPattern, enumerate_patterns, pattern_count
from src.errors import ExhaustiveCheckTooLarge
from src.network_model import Edge, NECInstance, NetworkGraph

EDGE_IDS = ["e1", "e2", "e3", "e4"]


def chain_instance(adversary, capacities=(1, 1, 1, 1)):
    nodes = ["s", "v1", "v2", "v3", "t"]
    edges = [
        Edge(edge_id, nodes[i], nodes[i + 1], capacity)
        for i, (edge_id, capacity) in enumerate(zip(EDGE_IDS, capacities))
    ]
    return NECInstance(NetworkGraph(nodes, edges), "s", "t", adversary)


def test_pattern_keeps_only_nonzero_entries():
    pattern = ErrorPattern({"e2": 1, "e1": 0, "e3": 2})
    assert pattern.values == (("e2", 1), ("e3", 2))
    assert pattern.support == ("e2", "e3")
    assert pattern.value("e1") == 0
    assert pattern.as_dict() == {"e2": 1, "e3": 2}
    assert not pattern.is_zero()
    assert ZERO_PATTERN.is_zero()


def test_maximal_sets_drop_contained_members():
    adversary = AdversaryClass([["e1"], ["e1", "e2"], ["e3"]])
    assert adversary.maximal_sets() == [frozenset({"e1", "e2"}), frozenset({"e3"})]


def test_canonical_order_for_overlapping_sets():
    inst = chain_instance([["e1", "e2"], ["e2", "e3"]])
    supports = [pattern.support for pattern in enumerate_patterns(inst, 1)]
    assert supports == [(), ("e1",), ("e1", "e2"), ("e2",), ("e2", "e3"), ("e3",)]
    assert pattern_count(inst, 1) == 6


def test_values_run_over_nonzero_symbols():
    inst = chain_instance([["e1"]], capacities=(2, 1, 1, 1))
    values = [pattern.value("e1") for pattern in enumerate_patterns(inst, 1)]
    assert values == [0, 1, 2, 3]


def test_single_link_adversary_on_reduced_butterfly(fly_reduced):
    assert pattern_count(fly_reduced, 1) == 16
    assert pattern_count(fly_reduced, 2) == 1 + 15 * 3


def test_slicing_matches_full_stream():
    inst = chain_instance([["e1", "e2"], ["e4"]])
    full = list(enumerate_patterns(inst, 1))
    assert list(enumerate_patterns(inst, 1, start=2, stop=4)) == full[2:4]


def test_support_limit_refuses_early():
    inst = chain_instance([["e1", "e2"], ["e3", "e4"]])
    with pytest.raises(ExhaustiveCheckTooLarge, match="supports"):
        enumerate_patterns(inst, 1, limit=1)


def test_block_length_must_be_positive():
    inst = chain_instance([["e1"]])
    with pytest.raises(ValueError):
        pattern_count(inst, 0)
    with pytest.raises(ValueError):
        enumerate_patterns(inst, 0)


@settings(max_examples=60, deadline=None)
@given(
    sets=st.lists(st.sets(st.sampled_from(EDGE_IDS), min_size=1, max_size=3), max_size=4),
    capacities=st.tuples(*[st.integers(1, 2)] * 4),
    n=st.integers(1, 2),
)
def test_count_matches_enumeration(sets, capacities, n):
    inst = chain_instance(sets, capacities)
    patterns = list(enumerate_patterns(inst, n))
    assert pattern_count(inst, n) == len(patterns)
    assert len(set(patterns)) == len(patterns)


def parallel_instance(width, adversary):
    edges = [Edge(f"e{i}", "s", "t") for i in range(width)]
    return NECInstance(NetworkGraph(["s", "t"], edges), "s", "t", adversary)


def test_many_overlapping_pairs_are_counted_by_support():
    # 45 overlapping maximal sets
    inst = parallel_instance(10, [[f"e{i}", f"e{j}"] for i in range(10) for j in range(i + 1, 10)])
    assert pattern_count(inst, 1) == 1 + 10 + 45
    assert pattern_count(inst, 1) == len(list(enumerate_patterns(inst, 1)))
    assert pattern_count(inst, 2) == 1 + 10 * 3 + 45 * 9


def test_wide_overlapping_sets_refuse_to_count():
    inst = parallel_instance(30, [[f"e{i}" for i in range(25)], [f"e{i}" for i in range(5, 30)]])
    with pytest.raises(ExhaustiveCheckTooLarge, match="supports exceeds limit"):
        pattern_count(inst, 1)


def test_disjoint_wide_sets_use_the_closed_form():
    inst = parallel_instance(40, [[f"e{i}" for i in range(20)], [f"e{i}" for i in range(20, 40)]])
    assert pattern_count(inst, 1) == 1 + 2 * (2 ** 20 - 1)


def test_negative_error_values_are_rejected():
    with pytest.raises(ValueError, match="negative error value on e3"):
        ErrorPattern({"e3": -1})
    with pytest.raises(ValueError, match="negative"):
        ErrorPattern((("e1", 1), ("e2", -2)))
