"""
Tests for message classification, occupancy sets and counting audits
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from src.audit import (
    ChainViolationReport,
    MessageClassification,
    audit_counting_bounds,
    check_bijections,
    classify_messages,
    compute_signal_sets,
    information_rows,
    rows_as_dicts,
)
from src.corpus import (
    butterfly,
    butterfly_xor_code,
    combiner_copies_x,
    constant_x,
    identity_code,
    relay,
    single_edge,
)
from src.reduction import BijectionChain, lift_code, reduce


def test_zero_error_code_has_only_good_messages(fly_reduced, fly_lifted):
    classification = classify_messages(fly_lifted, fly_reduced)
    assert classification.good == frozenset(range(4))
    assert classification.bad == frozenset()
    assert classification.poor == frozenset()
    assert classification.circle == classification.good
    assert classification.epsilon == 0
    assert classification.problems() == []


def test_every_message_bad_when_combiner_copies_x(fly_reduced, fly_lifted):
    classification = classify_messages(combiner_copies_x(fly_lifted, fly_reduced), fly_reduced)
    assert classification.bad == frozenset(range(4))
    assert classification.epsilon == Fraction(1)
    assert classification.epsilon_prime == Fraction(4)


def test_constant_x_leaves_half_the_messages_good(fly_reduced, fly_lifted):
    classification = classify_messages(constant_x(fly_lifted, fly_reduced), fly_reduced)
    assert classification.good == frozenset({0, 1})
    assert classification.epsilon == Fraction(1, 2)


def test_signal_sets_of_lifted_code(fly_reduced, fly_lifted):
    classification = classify_messages(fly_lifted, fly_reduced)
    sets = compute_signal_sets(fly_lifted, fly_reduced, classification, l=2)
    assert sets.a_tuples == frozenset({(0, 0), (0, 1), (1, 0), (1, 1)})
    assert sets.a_cross == frozenset()
    assert sets.b_cross == frozenset()
    assert sets.good_b_count == 4
    first = sets.branches[0]
    assert first.a_counts == {0: 2, 1: 2}
    assert first.a_level == frozenset({0, 1})
    assert first.a_fibre_sizes == {0: 1, 1: 1}
    assert first.zp_majority == {0: (0, 2), 1: (1, 2)}


def test_level_parameter_must_be_positive(fly_reduced, fly_lifted):
    classification = classify_messages(fly_lifted, fly_reduced)
    with pytest.raises(ValueError):
        compute_signal_sets(fly_lifted, fly_reduced, classification, l=0)


def test_all_rows_hold_for_lifted_code(fly_reduced, fly_lifted):
    classification = classify_messages(fly_lifted, fly_reduced)
    sets = compute_signal_sets(fly_lifted, fly_reduced, classification, l=2)
    report = audit_counting_bounds(classification, sets, l=2)
    assert report.holds
    assert len(report.rows) == 16
    row = report.row("a_level[1]")
    assert (row.lhs, row.relation, row.rhs) == (2, ">=", 1)
    assert report.row("majority_gap[2]").lhs == 0


def test_classification_rows_only():
    classification = MessageClassification(
        good=frozenset({1, 2, 3}), bad=frozenset({0}), poor=frozenset(), circle=frozenset({1, 2, 3}),
        message_bits=2,
    )
    report = audit_counting_bounds(classification, None, l=2)
    assert [row.name for row in report.rows] == ["bad_messages", "poor_messages", "circle_messages"]
    assert report.holds


def test_malformed_classification_is_reported():
    classification = MessageClassification(
        good=frozenset({0, 1}), bad=frozenset({1}), poor=frozenset({3}), circle=frozenset(),
        message_bits=2,
    )
    report = audit_counting_bounds(classification, None, l=2)
    assert report.malformed
    assert not report.holds
    assert [row.name for row in report.rows] == ["malformed classification"]
    assert len(classification.problems()) == 4


def test_audit_frame_renders_exact_values(fly_reduced, fly_lifted):
    classification = classify_messages(fly_lifted, fly_reduced)
    report = audit_counting_bounds(classification, None, l=2)
    frame = report.to_frame()
    assert list(frame.columns) == ["bound", "lhs", "relation", "rhs", "holds"]
    assert frame.loc[2, "rhs"] == "4"


def test_bijection_check_returns_chain_or_violation(fly_reduced, fly_lifted):
    assert isinstance(check_bijections(fly_lifted, fly_reduced), BijectionChain)
    violation = check_bijections(constant_x(fly_lifted, fly_reduced), fly_reduced)
    assert violation == ChainViolationReport(1, "x_1 not injective in a_1", (0, 1), (0, 2))
    rendered = rows_as_dicts([violation])[0]
    assert rendered["relation"] == "x_1 not injective in a_1"


def test_information_rows_for_lifted_code(fly_reduced, fly_lifted):
    classification = classify_messages(fly_lifted, fly_reduced)
    rows = {row.name: row for row in information_rows(fly_lifted, fly_reduced, classification, l=2)}
    assert rows["H(b_1)"].value == pytest.approx(1.0)
    assert rows["I(z_2;z'_2)"].value == pytest.approx(1.0)
    assert rows["H(b_1|z'_1)"].value == pytest.approx(0.0)
    # eps = 0 and l = 2: n - 2n/l - 1
    assert rows["I(z_1;z'_1)"].bound == pytest.approx(-1.0)


def test_information_rows_empty_without_circle(fly_reduced, fly_lifted):
    broken = combiner_copies_x(fly_lifted, fly_reduced)
    classification = classify_messages(broken, fly_reduced)
    assert information_rows(broken, fly_reduced, classification, l=2) == []


@pytest.fixture(name="edge_gadget", scope="module")
def fixture_edge_gadget():
    inst = single_edge()
    reduced = reduce(inst)
    return reduced, lift_code(identity_code(inst), inst, reduced).code


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_classification_rows_hold_for_any_single_pair_code(edge_gadget, data):
    reduced, code = edge_gadget
    for edge_id, fn in code.edge_functions.items():
        if edge_id == "a_1":
            continue
        table = data.draw(st.lists(st.integers(0, 1), min_size=len(fn.table), max_size=len(fn.table)))
        code = code.with_function(edge_id, fn.inputs, table)
    decoder = data.draw(st.lists(st.integers(0, 1), min_size=2, max_size=2))
    code = code.with_decoder(reduced.terminal, ["b_1"], decoder)

    classification = classify_messages(code, reduced)
    assert classification.problems() == []
    assert audit_counting_bounds(classification, None, l=2).holds


def test_relay_gadget_audit_at_two_bits():
    inst = relay()
    reduced = reduce(inst)
    code = lift_code(identity_code(inst, n=2), inst, reduced).code
    classification = classify_messages(code, reduced)
    sets = compute_signal_sets(code, reduced, classification, l=4)
    assert audit_counting_bounds(classification, sets, l=4).holds


@pytest.fixture(name="butterfly_gadget", scope="module")
def fixture_butterfly_gadget():
    inst = butterfly()
    reduced = reduce(inst)
    return reduced, lift_code(butterfly_xor_code(), inst, reduced).code


@settings(max_examples=40, deadline=None)
@given(data=st.data(), l=st.integers(1, 4))
def test_every_row_holds_for_perturbed_two_pair_codes(butterfly_gadget, data, l):
    reduced, code = butterfly_gadget
    edges = data.draw(st.sets(st.sampled_from(sorted(code.edge_functions)), min_size=1, max_size=4))
    for edge_id in sorted(edges):
        fn = code.edge_functions[edge_id]
        table = data.draw(st.lists(st.integers(0, 1), min_size=len(fn.table), max_size=len(fn.table)))
        code = code.with_function(edge_id, fn.inputs, table)
    if data.draw(st.booleans()):
        decoder = code.decoders[reduced.terminal]
        table = data.draw(st.lists(st.integers(0, 3), min_size=len(decoder.table), max_size=len(decoder.table)))
        code = code.with_decoder(reduced.terminal, decoder.inputs, table)

    classification = classify_messages(code, reduced)
    sets = compute_signal_sets(code, reduced, classification, l)
    report = audit_counting_bounds(classification, sets, l)
    assert report.holds, [row.name for row in report.rows if not row.holds]


@pytest.mark.parametrize("corrupt", [combiner_copies_x, constant_x])
def test_every_row_holds_for_corrupted_lifts(fly_reduced, fly_lifted, corrupt):
    broken = corrupt(fly_lifted, fly_reduced)
    classification = classify_messages(broken, fly_reduced)
    sets = compute_signal_sets(broken, fly_reduced, classification, l=2)
    report = audit_counting_bounds(classification, sets, l=2)
    assert report.holds
    assert len(report.rows) == 16
