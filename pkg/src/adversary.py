"""
Adversary - error patterns and the admissible pattern set of an adversary class
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from itertools import chain, combinations, islice, product
from math import prod
from typing import Dict, FrozenSet, Iterator, List, Mapping, Optional, Tuple

from .errors import ExhaustiveCheckTooLarge
from .network_model import NECInstance, normalize_adversary

logger = logging.getLogger(__name__)

# overlapping classes are counted support by support up to this many
MAX_SUPPORTS = 2 ** 20


@dataclass(frozen=True)
class ErrorPattern:
    """Edge -> error value; only nonzero entries are stored"""

    values: Tuple[Tuple[str, int], ...] = ()

    def __post_init__(self):
        items = self.values.items() if isinstance(self.values, Mapping) else self.values
        normalized = tuple(sorted((edge_id, int(value)) for edge_id, value in items if value))
        negative = [edge_id for edge_id, value in normalized if value < 0]
        if negative:
            raise ValueError(f"negative error value on {', '.join(negative)}")
        object.__setattr__(self, "values", normalized)

    @cached_property
    def _lookup(self) -> Dict[str, int]:
        return dict(self.values)

    @property
    def support(self) -> Tuple[str, ...]:
        return tuple(edge_id for edge_id, _ in self.values)

    def value(self, edge_id: str) -> int:
        return self._lookup.get(edge_id, 0)

    def is_zero(self) -> bool:
        return not self.values

    def as_dict(self) -> Dict[str, int]:
        return dict(self.values)


ZERO_PATTERN = ErrorPattern()


@dataclass(frozen=True)
class AdversaryClass:
    """The collection A of jammable edge sets"""

    sets: Tuple[FrozenSet[str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "sets", normalize_adversary(self.sets))

    @classmethod
    def of(cls, inst: NECInstance) -> "AdversaryClass":
        return cls(inst.adversary)

    def maximal_sets(self) -> List[FrozenSet[str]]:
        """Members not strictly contained in another member"""
        return [
            member for member in self.sets
            if member and not any(member < other for other in self.sets)
        ]

    def supports(self) -> List[Tuple[str, ...]]:
        """All nonempty admissible supports, sorted lexicographically"""
        found = set()
        for member in self.maximal_sets():
            ordered = sorted(member)
            subsets = chain.from_iterable(
                combinations(ordered, size) for size in range(1, len(ordered) + 1)
            )
            found.update(subsets)
        return sorted(found)


def _alphabet(inst: NECInstance, edge_id: str, n: int) -> int:
    return 2 ** (inst.graph.edge(edge_id).capacity * n)


def enumerate_patterns(
    inst: NECInstance,
    n: int,
    start: int = 0,
    stop: Optional[int] = None,
    limit: Optional[int] = None,
) -> Iterator[ErrorPattern]:
    """
    Stream the admissible patterns in canonical order

    Order is: zero pattern, then supports sorted lexicographically (as sorted
    edge-id tuples), then value tuples lexicographically. The stream can be
    sliced by index range for sharding.

    Args:
        inst: NEC instance
        n: Block length
        start: First pattern index to yield
        stop: One past the last index (None for all)
        limit: Refuse when more supports than this would be generated

    Returns:
        Iterator of ErrorPattern
    """
    if n < 1:
        raise ValueError("block length must be at least 1")

    adversary = AdversaryClass.of(inst)
    if limit is not None:
        support_total = sum(2 ** len(member) for member in adversary.maximal_sets())
        if support_total > limit:
            raise ExhaustiveCheckTooLarge(support_total, limit, what="supports")

    def stream() -> Iterator[ErrorPattern]:
        yield ZERO_PATTERN
        for support in adversary.supports():
            ranges = [range(1, _alphabet(inst, edge_id, n)) for edge_id in support]
            for values in product(*ranges):
                yield ErrorPattern(tuple(zip(support, values)))

    return islice(stream(), start, stop)


def pattern_count(inst: NECInstance, n: int, max_supports: int = MAX_SUPPORTS) -> int:
    """
    |R_A| without enumerating value tuples

    Disjoint maximal sets use the closed form. Overlapping sets are counted
    support by support, refusing when the supports themselves are too many.

    Args:
        inst: NEC instance
        n: Block length
        max_supports: Refuse overlapping classes with more supports than this

    Returns:
        Exact number of admissible patterns (zero pattern included)
    """
    if n < 1:
        raise ValueError("block length must be at least 1")

    adversary = AdversaryClass.of(inst)
    maximal = adversary.maximal_sets()

    disjoint = all(not (first & second) for first, second in combinations(maximal, 2))
    if disjoint:
        return 1 + sum(prod(_alphabet(inst, edge_id, n) for edge_id in member) - 1 for member in maximal)

    support_total = sum(2 ** len(member) for member in maximal)
    if support_total > max_supports:
        raise ExhaustiveCheckTooLarge(support_total, max_supports, what="supports")
    # every support carries a nonzero value on each of its edges
    return 1 + sum(
        prod(_alphabet(inst, edge_id, n) - 1 for edge_id in support)
        for support in adversary.supports()
    )
