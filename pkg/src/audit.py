"""
Audit - good/bad/poor message classification, signal occupancy sets and the
counting bounds of the vanishing-error analysis, in exact arithmetic
"""

import logging
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Tuple, Union

import pandas as pd

from .errors import BijectionChainViolation
from .infotools import (
    BoundParams,
    conditional_entropy,
    edge_joint_distribution,
    entropy,
    mutual_information,
    rate_bound,
)
from .netcode_engine import NetworkCode, bad_messages
from .network_model import NECInstance
from .reduction import BijectionChain, BranchWiring, branch_signals, trace_chain

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MessageClassification:
    """Partition of [0, 2^(kn)) into good/bad plus the poor refinement"""

    good: FrozenSet[int]
    bad: FrozenSet[int]
    poor: FrozenSet[int]
    circle: FrozenSet[int]
    message_bits: int
    n: int = 1

    @property
    def total(self) -> int:
        return 2 ** self.message_bits

    @property
    def k(self) -> int:
        return self.message_bits // self.n

    @property
    def epsilon(self) -> Fraction:
        return Fraction(len(self.bad), self.total)

    @property
    def epsilon_prime(self) -> Fraction:
        return 4 * self.epsilon

    def problems(self) -> List[str]:
        """Broken invariants; empty for a well-formed classification"""
        problems = []
        if self.good & self.bad:
            problems.append("good and bad overlap")
        if (self.good | self.bad) != frozenset(range(self.total)):
            problems.append("good and bad do not cover the message space")
        if not self.poor <= self.good:
            problems.append("poor not contained in good")
        if self.circle != self.good - self.poor:
            problems.append("circle differs from good minus poor")
        return problems


def classify_messages(code: NetworkCode, inst: NECInstance, jobs: int = 1) -> MessageClassification:
    """
    Split messages by worst-case decodability and z'-collisions

    Args:
        code: Code on a reduced instance
        inst: Reduced instance
        jobs: Worker count

    Returns:
        MessageClassification
    """
    bad = frozenset(bad_messages(code, inst, jobs=jobs))
    good = frozenset(range(2 ** code.message_bits)) - bad

    ordered = sorted(good)
    signals = branch_signals(code, inst, messages=ordered, jobs=jobs) if ordered else {}
    groups: Dict[Tuple[int, ...], List[int]] = defaultdict(list)
    for position, message in enumerate(ordered):
        key = tuple(signals[branch]["z'"][position] for branch in sorted(signals))
        groups[key].append(message)
    poor = frozenset(m for members in groups.values() if len(members) > 1 for m in members)

    classification = MessageClassification(
        good=good, bad=bad, poor=poor, circle=good - poor,
        message_bits=code.message_bits, n=code.n,
    )
    logger.info(
        f"Classified {classification.total} messages: {len(good)} good, "
        f"{len(bad)} bad, {len(poor)} poor (epsilon = {classification.epsilon})"
    )
    return classification


@dataclass(frozen=True)
class BranchSignalSets:
    """Occupancy data of one branch over M°"""

    branch: int
    a_counts: Dict[int, int]
    b_counts: Dict[int, int]
    zp_counts: Dict[int, int]
    a_level: FrozenSet[int]
    b_level: FrozenSet[int]
    zp_level: FrozenSet[int]
    # distinct b_i values inside each a_i fibre
    a_fibre_sizes: Dict[int, int]
    # z'_i value -> (most frequent b_i value, its multiplicity)
    zp_majority: Dict[int, Tuple[int, int]]

    @property
    def a_values(self) -> FrozenSet[int]:
        return frozenset(self.a_counts)

    @property
    def b_values(self) -> FrozenSet[int]:
        return frozenset(self.b_counts)

    @property
    def zp_values(self) -> FrozenSet[int]:
        return frozenset(self.zp_counts)


@dataclass(frozen=True)
class SignalSets:
    """A°, B°, Z'° and their complements, plus per-branch occupancy"""

    l: int
    n: int
    k: int
    a_tuples: FrozenSet[Tuple[int, ...]]
    a_cross: FrozenSet[Tuple[int, ...]]
    b_tuples: FrozenSet[Tuple[int, ...]]
    b_cross: FrozenSet[Tuple[int, ...]]
    zp_tuples: FrozenSet[Tuple[int, ...]]
    good_b_count: int
    branches: Tuple[BranchSignalSets, ...] = field(default=())


def _complement(tuples: FrozenSet[Tuple[int, ...]], n: int, k: int) -> FrozenSet[Tuple[int, ...]]:
    size = 2 ** n
    everything = []
    for index in range(size ** k):
        digits = []
        for _ in range(k):
            digits.append(index % size)
            index //= size
        everything.append(tuple(reversed(digits)))
    return frozenset(everything) - tuples


def compute_signal_sets(
    code: NetworkCode,
    inst: NECInstance,
    classification: MessageClassification,
    l: int,
    jobs: int = 1,
) -> SignalSets:
    """
    Occupancy sets over M° from error-free simulation

    Args:
        code: Code on a reduced instance
        inst: Reduced instance
        classification: classify_messages(code, inst)
        l: Level-set parameter (positive)
        jobs: Worker count

    Returns:
        SignalSets
    """
    if l < 1:
        raise ValueError("l must be a positive integer")

    wiring = BranchWiring.from_instance(inst)
    n, k = code.n, len(wiring.branches)
    good = sorted(classification.good)
    signals = branch_signals(code, inst, messages=good, jobs=jobs) if good else {
        branch.index: {role: [] for role in ("a", "x", "y", "z", "z'", "b")} for branch in wiring.branches
    }
    in_circle = [message in classification.circle for message in good]

    def tuples(role: str, only_circle: bool = True) -> List[Tuple[int, ...]]:
        rows = zip(*(signals[branch.index][role] for branch in wiring.branches))
        return [row for row, keep in zip(rows, in_circle) if keep or not only_circle]

    a_tuples = frozenset(tuples("a"))
    b_tuples = frozenset(tuples("b"))
    threshold = (1 - l * classification.epsilon_prime) * 2 ** ((k - 1) * n)

    branches = []
    for position, branch in enumerate(wiring.branches):
        values = {
            role: [v for v, keep in zip(signals[branch.index][role], in_circle) if keep]
            for role in ("a", "b", "z'")
        }
        counts = {role: dict(sorted(Counter(values[role]).items())) for role in values}

        fibres: Dict[int, set] = defaultdict(set)
        for a_value, b_value in zip(values["a"], values["b"]):
            fibres[a_value].add(b_value)

        pairs: Dict[int, Counter] = defaultdict(Counter)
        for zp_value, b_value in zip(values["z'"], values["b"]):
            pairs[zp_value][b_value] += 1
        majority = {}
        for zp_value, tally in sorted(pairs.items()):
            best = max(tally.values())
            b_hat = min(b for b, count in tally.items() if count == best)
            majority[zp_value] = (b_hat, best)

        branches.append(BranchSignalSets(
            branch=branch.index,
            a_counts=counts["a"],
            b_counts=counts["b"],
            zp_counts=counts["z'"],
            a_level=frozenset(v for v, c in counts["a"].items() if c >= threshold),
            b_level=frozenset(v for v, c in counts["b"].items() if c >= threshold),
            zp_level=frozenset(v for v, c in counts["z'"].items() if c >= threshold),
            a_fibre_sizes={v: len(bs) for v, bs in sorted(fibres.items())},
            zp_majority=majority,
        ))

    return SignalSets(
        l=l, n=n, k=k,
        a_tuples=a_tuples,
        a_cross=_complement(a_tuples, n, k),
        b_tuples=b_tuples,
        b_cross=_complement(b_tuples, n, k),
        zp_tuples=frozenset(tuples("z'")),
        good_b_count=len(set(tuples("b", only_circle=False))),
        branches=tuple(branches),
    )


@dataclass(frozen=True)
class AuditRow:
    """One checked inequality lhs <relation> rhs"""

    name: str
    lhs: Fraction
    relation: str
    rhs: Fraction
    holds: bool


@dataclass
class AuditReport:
    """Bound rows for one classification"""

    rows: List[AuditRow] = field(default_factory=list)
    malformed: bool = False

    @property
    def holds(self) -> bool:
        return not self.malformed and all(row.holds for row in self.rows)

    def row(self, name: str) -> AuditRow:
        for row in self.rows:
            if row.name == name:
                return row
        raise KeyError(name)

    def to_frame(self) -> pd.DataFrame:
        """Rows as a DataFrame with exact values rendered as strings"""
        return pd.DataFrame(
            [
                {
                    "bound": row.name,
                    "lhs": str(row.lhs),
                    "relation": row.relation,
                    "rhs": str(row.rhs),
                    "holds": row.holds,
                }
                for row in self.rows
            ],
            columns=["bound", "lhs", "relation", "rhs", "holds"],
        )


def _row(name: str, lhs, relation: str, rhs) -> AuditRow:
    lhs, rhs = Fraction(lhs), Fraction(rhs)
    holds = lhs <= rhs if relation == "<=" else lhs >= rhs
    return AuditRow(name=name, lhs=lhs, relation=relation, rhs=rhs, holds=holds)


def audit_counting_bounds(
    classification: MessageClassification,
    signal_sets: Optional[SignalSets],
    l: int,
) -> AuditReport:
    """
    Check the counting inequalities with exact rationals

    Args:
        classification: Message classification
        signal_sets: Occupancy sets (None audits the classification rows only)
        l: Level-set parameter

    Returns:
        AuditReport; a failed row on a well-formed classification is a bug
    """
    problems = classification.problems()
    if problems:
        logger.warning(f"Malformed classification: {'; '.join(problems)}")
        return AuditReport(
            rows=[AuditRow("malformed classification", Fraction(len(problems)), "<=", Fraction(0), False)],
            malformed=True,
        )

    total = classification.total
    eps = classification.epsilon
    eps_prime = classification.epsilon_prime

    rows = [
        _row("bad_messages", len(classification.bad), "<=", eps * total),
        _row("poor_messages", len(classification.poor), "<=", 3 * eps * total),
        _row("circle_messages", len(classification.circle), ">=", (1 - eps_prime) * total),
    ]

    if signal_sets is not None:
        n, k = signal_sets.n, signal_sets.k
        b_cross = len(signal_sets.b_cross)
        level_floor = (1 - eps_prime - Fraction(1, l)) * 2 ** n
        rows.extend([
            _row("good_b_signals", signal_sets.good_b_count, ">=", (1 - eps) * total),
            _row("a_cross", len(signal_sets.a_cross), "<=", eps_prime * total),
            _row("b_cross", b_cross, "<=", eps_prime * total),
        ])
        for branch in signal_sets.branches:
            i = branch.branch
            fibre_spread = sum(
                (branch.a_fibre_sizes[a_value] - 1) * count
                for a_value, count in branch.a_counts.items()
            )
            majority_gap = sum(
                branch.zp_counts[zp_value] - branch.zp_majority[zp_value][1]
                for zp_value in branch.zp_counts
            )
            rows.extend([
                _row(f"a_level[{i}]", len(branch.a_level), ">=", level_floor),
                _row(f"b_level[{i}]", len(branch.b_level), ">=", level_floor),
                _row(f"zp_level[{i}]", len(branch.zp_level), ">=", level_floor),
                _row(f"fibre_spread[{i}]", fibre_spread, "<=", b_cross),
                _row(f"majority_gap[{i}]", majority_gap, "<=", 2 * b_cross),
            ])

    report = AuditReport(rows=rows)
    if report.holds:
        logger.info(f"✅ All {len(rows)} counting bounds hold")
    else:
        failed = [row.name for row in rows if not row.holds]
        logger.warning(f"Counting bounds violated: {failed}")
    return report


@dataclass(frozen=True)
class ChainViolationReport:
    """First branch relation that fails to be a permutation"""

    branch: int
    relation: str
    values: Tuple[int, int]
    messages: Tuple[int, int]


def check_bijections(
    code: NetworkCode,
    inst: NECInstance,
    jobs: int = 1,
) -> Union[BijectionChain, ChainViolationReport]:
    """
    Verify the a -> x -> b -> z' and a -> z permutations branch by branch

    Args:
        code: Code on a reduced instance
        inst: Reduced instance with roles
        jobs: Worker count

    Returns:
        The verified chain, or the first violated relation with witnesses
    """
    try:
        return trace_chain(code, inst, jobs=jobs)
    except BijectionChainViolation as violation:
        logger.info(f"Bijection check failed: {violation.relation}")
        return ChainViolationReport(
            branch=violation.branch,
            relation=violation.relation,
            values=violation.values,
            messages=violation.messages,
        )


@dataclass(frozen=True)
class InformationRow:
    """An information quantity next to the analytic bound it should meet"""

    name: str
    value: float
    relation: str
    bound: Optional[float]


def information_rows(
    code: NetworkCode,
    inst: NECInstance,
    classification: MessageClassification,
    l: int,
) -> List[InformationRow]:
    """
    Entropy quantities under M°-uniform messages, reported beside their bounds

    Bounds are None when l*eps' >= 1 or eps' >= 1. Nothing here is asserted.

    Args:
        code: Code on a reduced instance
        inst: Reduced instance
        classification: Its classification
        l: Level-set parameter

    Returns:
        List of InformationRow (empty when M° is empty)
    """
    if not classification.circle:
        return []

    wiring = BranchWiring.from_instance(inst)
    k, n = len(wiring.branches), code.n
    eps = float(classification.epsilon)
    bound = rate_bound(BoundParams(n=n, eps=eps, l=l, k=k))
    terms = bound.terms

    rows = []
    for branch in wiring.branches:
        a, b, z, zp = (branch.edge(role) for role in ("a", "b", "z", "z'"))
        dist = edge_joint_distribution(
            code, inst, [a, b, z, zp], mode="subset", messages=sorted(classification.circle)
        )
        i = branch.index
        rows.extend([
            InformationRow(f"H(b_{i})", entropy(dist, [b]), ">=", terms.get("entropy_floor")),
            InformationRow(f"I(a_{i};b_{i})", mutual_information(dist, [a], [b]), ">=", terms.get("ab_floor")),
            InformationRow(f"H(b_{i}|a_{i})", conditional_entropy(dist, [b], [a]), "<=", terms.get("b_given_a_ceiling")),
            InformationRow(f"H(b_{i}|z'_{i})", conditional_entropy(dist, [b], [zp]), "<=", terms.get("b_given_zp_ceiling")),
            InformationRow(f"I(z_{i};z'_{i})", mutual_information(dist, [z], [zp]), ">=", bound.value),
        ])
    return rows


def rows_as_dicts(rows) -> List[Dict]:
    """JSON-friendly rendering of audit or information rows"""
    rendered = []
    for row in rows:
        item = asdict(row)
        for key, value in item.items():
            if isinstance(value, Fraction):
                item[key] = str(value)
        rendered.append(item)
    return rendered
