"""
Tests for entropies, the three-variable inequality and the rate bound
"""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.corpus import identity_code, parallel_relay, relay, single_edge
from src.errors import ExhaustiveCheckTooLarge
from src.infotools import (
    BoundParams,
    JointDistribution,
    conditional_entropy,
    edge_joint_distribution,
    entropy,
    mutual_information,
    random_joint_distribution,
    rate_bound,
    triangle_bound_check,
)
from src.reduction import lift_code, reduce


def fair_bits():
    """X, Y fair and independent, Z = X xor Y"""
    return JointDistribution(
        ("X", "Y", "Z"),
        {(x, y, x ^ y): Fraction(1, 4) for x in (0, 1) for y in (0, 1)},
    )


def test_entropies_of_xor_triple():
    dist = fair_bits()
    assert entropy(dist, ["X"]) == pytest.approx(1.0)
    assert entropy(dist, ["X", "Y", "Z"]) == pytest.approx(2.0)
    assert entropy(dist, []) == 0.0
    assert mutual_information(dist, ["X"], ["Z"]) == pytest.approx(0.0)
    assert mutual_information(dist, ["X", "Y"], ["Z"]) == pytest.approx(1.0)
    assert conditional_entropy(dist, ["Z"], ["X"]) == pytest.approx(1.0)


def test_inequality_is_tight_on_xor_triple():
    lhs, rhs, holds = triangle_bound_check(fair_bits())
    assert lhs == pytest.approx(0.0)
    assert rhs == pytest.approx(-1.0)
    assert holds


def test_distribution_validation():
    with pytest.raises(ValueError, match="sum to"):
        JointDistribution(("X",), {(0,): Fraction(1, 3)})
    with pytest.raises(ValueError, match="negative"):
        JointDistribution(("X",), {(0,): 1.5, (1,): -0.5})
    with pytest.raises(ValueError, match="distinct"):
        JointDistribution(("X", "X"), {(0, 0): 1})
    with pytest.raises(ValueError, match="unknown variable: W"):
        entropy(fair_bits(), ["W"])
    with pytest.raises(ValueError, match="overlap"):
        mutual_information(fair_bits(), ["X"], ["X", "Y"])


def test_marginal_is_exact():
    marginal = fair_bits().marginal(["Z"])
    assert marginal.pmf == {(0,): Fraction(1, 2), (1,): Fraction(1, 2)}
    assert marginal.exact


@settings(max_examples=200, deadline=None)
@given(
    seed=st.integers(0, 2 ** 32 - 1),
    shape=st.tuples(st.integers(1, 4), st.integers(1, 4), st.integers(1, 4)),
    sparsity=st.sampled_from([0.0, 0.5, 0.9]),
)
def test_inequality_holds_on_random_pmfs(seed, shape, sparsity):
    dist = random_joint_distribution(shape, np.random.default_rng(seed), sparsity=sparsity)
    assert triangle_bound_check(dist)[2]


def test_edge_distribution_of_lifted_code(fly_reduced, fly_lifted):
    dist = edge_joint_distribution(fly_lifted, fly_reduced, ["a_1", "b_1"], exact=True)
    assert dist.pmf == {(0, 0): Fraction(1, 2), (1, 1): Fraction(1, 2)}
    assert mutual_information(dist, ["a_1"], ["b_1"]) == pytest.approx(1.0)


def test_subset_mode_uses_listed_messages(fly_reduced, fly_lifted):
    dist = edge_joint_distribution(fly_lifted, fly_reduced, ["a_1"], mode="subset", messages=[2, 3])
    assert dist.pmf == {(1,): 1.0}


def test_uniform_a_mode_injects_a_values(fly_reduced, fly_lifted):
    dist = edge_joint_distribution(fly_lifted, fly_reduced, ["a_2", "z'_2"], mode="uniform_a", exact=True)
    assert dist.pmf == {(0, 0): Fraction(1, 2), (1, 1): Fraction(1, 2)}


def test_edge_distribution_arguments(fly_reduced, fly_lifted, fly, xor_code):
    with pytest.raises(ValueError, match="unknown mode"):
        edge_joint_distribution(fly_lifted, fly_reduced, ["a_1"], mode="gaussian")
    with pytest.raises(ValueError, match="duplicates"):
        edge_joint_distribution(fly_lifted, fly_reduced, ["a_1", "a_1"])
    with pytest.raises(ValueError, match="unknown edge"):
        edge_joint_distribution(fly_lifted, fly_reduced, ["ghost"])
    with pytest.raises(ValueError, match="nonempty"):
        edge_joint_distribution(fly_lifted, fly_reduced, ["a_1"], mode="subset", messages=[])
    with pytest.raises(ValueError, match="reduced NEC instance"):
        edge_joint_distribution(xor_code, fly, ["e3"], mode="uniform_a")


def test_edge_distribution_size_guard(fly_reduced, fly_lifted, monkeypatch):
    monkeypatch.setenv("NETREDUCE_MAX_EVALUATIONS", "2")
    with pytest.raises(ExhaustiveCheckTooLarge):
        edge_joint_distribution(fly_lifted, fly_reduced, ["a_1"])


def test_bound_reference_values():
    assert rate_bound(BoundParams(n=10, eps=0, l=10, k=2)).value == pytest.approx(7.0, abs=1e-9)
    vacuous = rate_bound(BoundParams(n=10, eps=0, l=1, k=2))
    assert vacuous.value == pytest.approx(-11.0, abs=1e-9)
    assert vacuous.vacuous
    assert rate_bound(BoundParams(n=20, eps=0.0025, l=5, k=2)).value == pytest.approx(7.978, abs=0.01)


def test_bound_approaches_unit_rate():
    report = rate_bound(BoundParams(n=1000, eps=0, l=1000, k=2))
    assert report.value / 1000 == pytest.approx(0.997, abs=1e-9)
    assert report.value / 1000 > 0.99


def test_bound_outside_its_domain():
    report = rate_bound(BoundParams(n=10, eps=0.1, l=3, k=2))
    assert report.value is None
    assert report.vacuous
    assert rate_bound(BoundParams(n=10, eps=0.25, l=1, k=2)).value is None


def test_bound_nonincreasing_in_eps():
    grid = [0, 1e-4, 5e-4, 1e-3, 5e-3, 1e-2]
    values = [rate_bound(BoundParams(n=100, eps=eps, l=20, k=2)).value for eps in grid]
    assert all(later <= earlier + 1e-9 for earlier, later in zip(values, values[1:]))


def test_bound_nondecreasing_in_l_at_zero_error():
    values = [rate_bound(BoundParams(n=50, eps=0, l=l, k=2)).value for l in range(2, 30)]
    assert all(later >= earlier - 1e-9 for earlier, later in zip(values, values[1:]))


def test_uniform_a_scales_the_value():
    plain = rate_bound(BoundParams(n=20, eps=0.0025, l=5, k=2)).value
    scaled = rate_bound(BoundParams(n=20, eps=0.0025, l=5, k=2, uniform_a=True)).value
    assert scaled == pytest.approx(plain * 0.99)


def test_bound_params_are_validated():
    with pytest.raises(ValueError):
        BoundParams(n=0, eps=0, l=1, k=1)
    with pytest.raises(ValueError):
        BoundParams(n=1, eps=-0.1, l=1, k=1)


@pytest.mark.slow
def test_inequality_holds_over_ten_thousand_seeded_pmfs():
    rng = np.random.default_rng(20240613)
    failures = []
    for draw in range(10 ** 4):
        shape = [int(size) for size in rng.integers(2, 5, size=3)]
        sparsity = 0.5 if draw % 4 == 0 else 0.0
        lhs, rhs, holds = triangle_bound_check(random_joint_distribution(shape, rng, sparsity=sparsity))
        if not holds:
            failures.append((draw, shape, lhs, rhs))
    assert failures == []


@pytest.mark.parametrize("builder", [single_edge, relay, parallel_relay])
@pytest.mark.parametrize("n", [1, 2])
def test_z_pairs_share_n_bits_on_lifted_identity_codes(builder, n):
    inst = builder()
    reduced = reduce(inst)
    lifted = lift_code(identity_code(inst, n), inst, reduced).code
    for i in range(1, inst.k + 1):
        z, zp = reduced.role_edge("z", i), reduced.role_edge("z'", i)
        dist = edge_joint_distribution(lifted, reduced, [z, zp], exact=True)
        assert mutual_information(dist, [z], [zp]) == pytest.approx(n)


def test_z_pairs_share_one_bit_on_lifted_xor_code(fly_reduced, fly_lifted):
    for i in (1, 2):
        z, zp = fly_reduced.role_edge("z", i), fly_reduced.role_edge("z'", i)
        dist = edge_joint_distribution(fly_lifted, fly_reduced, [z, zp], exact=True)
        assert mutual_information(dist, [z], [zp]) == pytest.approx(1.0)
