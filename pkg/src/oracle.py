"""
Oracle - exhaustive zero-error feasibility search over deterministic codes at
a fixed block length

Codes are enumerated edge by edge in topological order. Three normalizations
shrink the space without changing the verdict: single-input edges whose
input fits are fixed to the identity embedding, an un-jammable full-rate
source split is fixed to the canonical split, and every other table is
enumerated up to relabeling of its outputs (restricted-growth strings over
its reachable rows). Decoders are never enumerated; they are derived from
the observations at each terminal. A partial code is dropped as soon as two
scenarios with different decoding targets agree on everything that can
still reach a decoder.
"""

import logging
import time
from dataclasses import dataclass, field
from itertools import islice
from math import prod
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from joblib import Parallel, delayed

from .adversary import ZERO_PATTERN, enumerate_patterns, pattern_count
from .config import get_settings
from .errors import CodeMismatchError, ExhaustiveCheckTooLarge
from .netcode_engine import (
    LocalFunction,
    NetworkCode,
    check_code_shape,
    check_zero_error,
    message_from_index,
    message_slot,
)
from .network_model import Instance, NECInstance, UnicastInstance, min_cut
from .validators import validate_instance

logger = logging.getLogger(__name__)

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
EXHAUSTED = "exhausted-budget"

# scenario matrices beyond this many rows are refused
MAX_SCENARIOS = 2 ** 20

# rows above which the per-edge normalized count is replaced by 2^(rows-1)
EXACT_COUNT_ROWS = 256


@dataclass(frozen=True)
class SearchBudget:
    """Candidate and wall-clock caps for one search"""

    max_codes: int
    max_seconds: float
    n: int = 1

    def __post_init__(self):
        if self.max_codes < 1 or self.max_seconds <= 0 or self.n < 1:
            raise ValueError("search budget fields must be positive")

    @classmethod
    def default(cls, n: int = 1) -> "SearchBudget":
        settings = get_settings()
        return cls(max_codes=settings.search_budget, max_seconds=settings.search_seconds, n=n)


@dataclass(frozen=True)
class SearchVerdict:
    """Outcome of a feasibility search at one block length"""

    status: str
    n: int
    code_space: int
    normalized_space: int
    candidates: int = 0
    elapsed: float = 0.0
    witness: Optional[NetworkCode] = field(default=None, compare=False)

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE

    @property
    def note(self) -> str:
        if self.status == EXHAUSTED:
            return f"budget exhausted at n={self.n}"
        return f"{self.status} at n={self.n}"

    def as_dict(self) -> Dict:
        return {
            "status": self.status,
            "n": self.n,
            "note": self.note,
            "code_space": self.code_space,
            "normalized_space": self.normalized_space,
            "candidates": self.candidates,
            "elapsed_seconds": round(self.elapsed, 3),
        }


@dataclass(frozen=True)
class _EdgePlan:
    """Enumeration plan for one edge"""

    edge_id: str
    inputs: Tuple[str, ...]
    radices: Tuple[int, ...]
    alphabet: int
    fixed: Optional[Tuple[int, ...]] = None

    @property
    def rows(self) -> int:
        return prod(self.radices)


def _slot_bits(inst: Instance, n: int, message_bits: int) -> Dict[str, int]:
    if isinstance(inst, UnicastInstance):
        return {source: n for source in inst.sources}
    return {inst.source: message_bits}


def _edge_inputs(inst: Instance, node: str, n: int, slots: Dict[str, int]) -> Tuple[List[str], List[int]]:
    """Canonical inputs at `node`: its message slot, then in-edges in declaration order"""
    names, radices = [], []
    if node in slots:
        names.append(message_slot(node))
        radices.append(2 ** slots[node])
    for edge in inst.graph.in_edges(node):
        names.append(edge.id)
        radices.append(2 ** (edge.capacity * n))
    return names, radices


def _source_split(inst: Instance, n: int, message_bits: int) -> Dict[str, Tuple[int, ...]]:
    """Canonical split tables for the NEC source, when the split is forced"""
    if not isinstance(inst, NECInstance):
        return {}
    graph = inst.graph
    out_edges = graph.out_edges(inst.source)
    if not out_edges or graph.in_edges(inst.source):
        return {}
    if any(edge.id in inst.jammable_edges for edge in out_edges):
        return {}
    if sum(edge.capacity * n for edge in out_edges) != message_bits:
        return {}

    tables = {}
    remaining = message_bits
    for edge in out_edges:
        width = edge.capacity * n
        remaining -= width
        mask = 2 ** width - 1
        tables[edge.id] = tuple((m >> remaining) & mask for m in range(2 ** message_bits))
    return tables


def _plan(inst: Instance, n: int, message_bits: int) -> List[_EdgePlan]:
    """Edge plans in topological order"""
    slots = _slot_bits(inst, n, message_bits)
    split = _source_split(inst, n, message_bits)
    plans = []
    for edge in inst.graph.topological_edges():
        names, radices = _edge_inputs(inst, edge.tail, n, slots)
        alphabet = 2 ** (edge.capacity * n)
        fixed = split.get(edge.id)
        if fixed is None and len(radices) == 1 and radices[0] <= alphabet:
            fixed = tuple(range(radices[0]))
        plans.append(_EdgePlan(edge.id, tuple(names), tuple(radices), alphabet, fixed))
    return plans


def _partitions_upto(rows: int, blocks: int) -> int:
    """Number of set partitions of `rows` items into at most `blocks` blocks"""
    blocks = min(blocks, rows)
    # stirling[j] = S(r, j) for the current r
    stirling = [1] + [0] * blocks
    for _ in range(rows):
        for j in range(blocks, 0, -1):
            stirling[j] = j * stirling[j] + stirling[j - 1]
        stirling[0] = 0
    return sum(stirling[1:])


def _normalized_count(plan: _EdgePlan) -> int:
    if plan.fixed is not None or plan.alphabet == 1:
        return 1
    if plan.rows > EXACT_COUNT_ROWS:
        return 2 ** (plan.rows - 1)
    return _partitions_upto(plan.rows, plan.alphabet)


def count_code_space(inst: Instance, n: int, rate_bits: Optional[int] = None) -> int:
    """
    Number of encoder assignments, prod over edges of alphabet^(input rows)

    Inputs of an edge are the message slot of its tail (if any) plus every
    in-edge of the tail.

    Args:
        inst: Unicast or NEC instance
        n: Block length
        rate_bits: NEC message size; defaults to n times the source-terminal min-cut

    Returns:
        Exact count
    """
    if n < 1:
        raise ValueError("block length must be at least 1")
    message_bits = _message_bits(inst, n, rate_bits)
    slots = _slot_bits(inst, n, message_bits)
    total = 1
    for edge in inst.graph.edges:
        _, radices = _edge_inputs(inst, edge.tail, n, slots)
        total *= (2 ** (edge.capacity * n)) ** prod(radices)
    return total


def normalized_space(inst: Instance, n: int, rate_bits: Optional[int] = None) -> int:
    """Size of the space the search actually ranges over, before pruning"""
    message_bits = _message_bits(inst, n, rate_bits)
    return prod(_normalized_count(plan) for plan in _plan(inst, n, message_bits))


def _message_bits(inst: Instance, n: int, rate_bits: Optional[int]) -> int:
    if isinstance(inst, UnicastInstance):
        return inst.k * n
    if rate_bits is None:
        return n * min_cut(inst.graph, inst.source, inst.terminal).value
    return rate_bits


def _restricted_growth(length: int, alphabet: int) -> Iterator[Tuple[int, ...]]:
    """Label sequences whose first occurrences come in increasing order"""
    if length == 0:
        yield ()
        return
    labels = [0] * length

    def extend(position: int, top: int) -> Iterator[Tuple[int, ...]]:
        if position == length:
            yield tuple(labels)
            return
        for value in range(min(top + 2, alphabet)):
            labels[position] = value
            yield from extend(position + 1, max(top, value))

    yield from extend(1, 0)


def _mixed_radix(matrix: np.ndarray, columns: Sequence[int], radices: Sequence[int]) -> np.ndarray:
    index = np.zeros(matrix.shape[0], dtype=np.int64)
    for column, radix in zip(columns, radices):
        index = index * radix + matrix[:, column]
    return index


def _inconsistent(groups: np.ndarray, target: np.ndarray) -> bool:
    """True if some group holds two different targets"""
    size = int(groups.max()) + 1 if groups.size else 0
    low = np.full(size, np.iinfo(np.int64).max, dtype=np.int64)
    high = np.full(size, -1, dtype=np.int64)
    np.minimum.at(low, groups, target)
    np.maximum.at(high, groups, target)
    return bool(np.any(low != high))


class _OutOfTime(Exception):
    pass


class _Search:
    """Depth-first search state for one instance and block length"""

    def __init__(self, inst: Instance, n: int, message_bits: int, deadline: float):
        self.inst = inst
        self.n = n
        self.message_bits = message_bits
        self.deadline = deadline
        self.visited = 0
        self.shard: Optional[Tuple[int, int, int]] = None

        graph = inst.graph
        self.plans = _plan(inst, n, message_bits)
        self.order = [graph.edge(plan.edge_id) for plan in self.plans]
        position = {edge.id: i for i, edge in enumerate(self.order)}

        slots = _slot_bits(inst, n, message_bits)
        self.slot_nodes = list(slots)
        slot_column = {node: i for i, node in enumerate(self.slot_nodes)}

        if isinstance(inst, UnicastInstance):
            self.decoding = list(inst.terminals)
            patterns = [ZERO_PATTERN]
        else:
            self.decoding = [inst.terminal]
            patterns = list(enumerate_patterns(inst, n))

        messages = 2 ** message_bits
        scenarios = messages * len(patterns)

        edge_count = len(self.order)
        self.slots = np.zeros((scenarios, len(self.slot_nodes)), dtype=np.int64)
        self.errors = np.zeros((scenarios, edge_count), dtype=np.int64)
        self.received = np.zeros((scenarios, edge_count), dtype=np.int64)
        self.targets = {node: np.zeros(scenarios, dtype=np.int64) for node in self.decoding}

        row = 0
        for index in range(messages):
            message = message_from_index(inst, n, index)
            parts = message if isinstance(message, tuple) else (message,)
            for pattern in patterns:
                self.slots[row, :] = parts
                for edge_id, value in pattern.values:
                    self.errors[row, position[edge_id]] = value
                for node, part in zip(self.decoding, parts):
                    self.targets[node][row] = part
                row += 1

        self.input_columns = []
        for plan, edge in zip(self.plans, self.order):
            columns = []
            for name in plan.inputs:
                if name.startswith("msg:"):
                    columns.append(("slot", slot_column[edge.tail]))
                else:
                    columns.append(("edge", position[name]))
            self.input_columns.append(columns)

        self.decoder_inputs = {}
        for node in self.decoding:
            in_edges = graph.in_edges(node)
            self.decoder_inputs[node] = (
                tuple(edge.id for edge in in_edges),
                [position[edge.id] for edge in in_edges],
                [2 ** (edge.capacity * n) for edge in in_edges],
            )

        self.frontiers = self._frontiers()
        self.tables: List[Optional[np.ndarray]] = [None] * edge_count

    def _frontiers(self) -> List[Dict[str, Tuple[np.ndarray, np.ndarray, np.ndarray]]]:
        """Per assigned-count c and decoding node: signals that can still reach it"""
        graph = self.inst.graph.to_networkx()
        reach = {node: nx.ancestors(graph, node) | {node} for node in self.decoding}
        jammable = self.inst.jammable_edges if isinstance(self.inst, NECInstance) else frozenset()

        frontiers = []
        for assigned in range(len(self.order) + 1):
            pending = self.order[assigned:]
            per_node = {}
            for node in self.decoding:
                feeding = {edge.tail for edge in pending if edge.head in reach[node]}
                received = [
                    i for i, edge in enumerate(self.order[:assigned])
                    if edge.head == node or edge.head in feeding
                ]
                slots = [i for i, owner in enumerate(self.slot_nodes) if owner in feeding]
                errors = [
                    assigned + j for j, edge in enumerate(pending)
                    if edge.id in jammable and edge.head in reach[node]
                ]
                per_node[node] = tuple(np.array(cols, dtype=np.intp) for cols in (received, slots, errors))
            frontiers.append(per_node)
        return frontiers

    def _rows(self, position: int) -> np.ndarray:
        index = np.zeros(self.received.shape[0], dtype=np.int64)
        for (kind, column), radix in zip(self.input_columns[position], self.plans[position].radices):
            source = self.slots if kind == "slot" else self.received
            index = index * radix + source[:, column]
        return index

    def _conflict(self, assigned: int) -> bool:
        for node in self.decoding:
            received, slots, errors = self.frontiers[assigned][node]
            key = np.concatenate(
                [self.received[:, received], self.slots[:, slots], self.errors[:, errors]], axis=1
            )
            if key.shape[1] == 0:
                groups = np.zeros(key.shape[0], dtype=np.int64)
            else:
                _, groups = np.unique(key, axis=0, return_inverse=True)
                groups = groups.reshape(-1)
            if _inconsistent(groups, self.targets[node]):
                return True
        return False

    def candidate_count(self, position: int) -> int:
        plan = self.plans[position]
        if plan.fixed is not None:
            return 1
        reachable = np.unique(self._rows(position)).size
        return _partitions_upto(reachable, plan.alphabet) if reachable else 1

    def _candidates(self, position: int) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
        plan = self.plans[position]
        rows = self._rows(position)
        if plan.fixed is not None:
            yield np.array(plan.fixed, dtype=np.int64), rows
            return
        reachable = np.unique(rows)
        for labels in _restricted_growth(reachable.size, plan.alphabet):
            table = np.zeros(plan.rows, dtype=np.int64)
            table[reachable] = labels
            yield table, rows

    def probe(self) -> Optional[Tuple[int, int]]:
        """
        Walk the forced prefix; return (position, width) of the first real choice

        Returns None when the forced prefix already decides the search.
        """
        if self._conflict(0):
            return None
        for position in range(len(self.order)):
            width = self.candidate_count(position)
            if width > 1:
                return position, width
            table, rows = next(self._candidates(position))
            self._assign(position, table, rows)
            if self._conflict(position + 1):
                return None
        return None

    def _assign(self, position: int, table: np.ndarray, rows: np.ndarray) -> None:
        self.tables[position] = table
        self.received[:, position] = table[rows] ^ self.errors[:, position]

    def run(self) -> Optional[NetworkCode]:
        """First witness in canonical order, or None"""
        if self._conflict(0):
            return None
        return self._descend(0)

    def _descend(self, position: int) -> Optional[NetworkCode]:
        if position == len(self.order):
            return self._witness()
        candidates = self._candidates(position)
        if self.shard is not None and self.shard[0] == position:
            candidates = islice(candidates, self.shard[1], self.shard[2])
        for table, rows in candidates:
            self.visited += 1
            if time.monotonic() > self.deadline:
                raise _OutOfTime()
            self._assign(position, table, rows)
            if self._conflict(position + 1):
                continue
            found = self._descend(position + 1)
            if found is not None:
                return found
        return None

    def _witness(self) -> Optional[NetworkCode]:
        decoders = {}
        for node in self.decoding:
            inputs, columns, radices = self.decoder_inputs[node]
            rows = _mixed_radix(self.received, columns, radices)
            _, groups = np.unique(rows, return_inverse=True)
            if _inconsistent(groups.reshape(-1), self.targets[node]):
                return None
            table = np.zeros(prod(radices), dtype=np.int64)
            table[rows] = self.targets[node]
            decoders[node] = LocalFunction(inputs, table.tolist())
        functions = {
            plan.edge_id: LocalFunction(plan.inputs, table.tolist())
            for plan, table in zip(self.plans, self.tables)
        }
        return NetworkCode(n=self.n, message_bits=self.message_bits, edge_functions=functions, decoders=decoders)


def _search_shard(
    inst: Instance,
    n: int,
    message_bits: int,
    deadline_seconds: float,
    shard: Optional[Tuple[int, int, int]],
) -> Tuple[Optional[NetworkCode], int, bool]:
    """Run one shard; returns (witness, candidates visited, timed out)"""
    search = _Search(inst, n, message_bits, time.monotonic() + deadline_seconds)
    search.shard = shard
    try:
        return search.run(), search.visited, False
    except _OutOfTime:
        return None, search.visited, True


def _shards(width: int, jobs: int) -> List[Tuple[int, int]]:
    jobs = max(1, min(jobs, width))
    step = -(-width // jobs)
    return [(lo, min(lo + step, width)) for lo in range(0, width, step)]


def _first_in_order(
    results: Sequence[Tuple[Optional[NetworkCode], int, bool]],
) -> Tuple[Optional[NetworkCode], bool]:
    """
    Pick the verdict a single in-order search would reach

    Shards are walked in enumeration order. A shard that ran out of time
    before any earlier shard found a witness hides whatever it had left, so
    later witnesses are not reported.

    Returns:
        (witness or None, whether the search stopped early)
    """
    for witness, _, timed_out in results:
        if timed_out:
            return None, True
        if witness is not None:
            return witness, False
    return None, False


def _block_length(n: Optional[int], budget: SearchBudget) -> int:
    n = budget.n if n is None else n
    if n < 1:
        raise ValueError("block length must be at least 1")
    return n


def _search(
    inst: Instance,
    n: int,
    message_bits: int,
    budget: SearchBudget,
    jobs: int,
) -> SearchVerdict:
    report = validate_instance(inst)
    if not report.is_valid:
        raise ValueError(f"invalid instance: {'; '.join(report.errors)}")

    patterns = pattern_count(inst, n) if isinstance(inst, NECInstance) else 1
    scenarios = 2 ** message_bits * patterns
    if scenarios > MAX_SCENARIOS:
        raise ExhaustiveCheckTooLarge(scenarios, MAX_SCENARIOS, what="scenarios")

    started = time.monotonic()
    space = count_code_space(inst, n, message_bits)
    reduced_space = normalized_space(inst, n, message_bits)
    if reduced_space > budget.max_codes:
        logger.warning(f"Normalized code space {reduced_space} exceeds budget {budget.max_codes}")
        return SearchVerdict(EXHAUSTED, n, space, reduced_space)

    branch = None
    if jobs > 1:
        branch = _Search(inst, n, message_bits, started + budget.max_seconds).probe()
    if branch is not None:
        position, width = branch
        results = Parallel(n_jobs=jobs)(
            delayed(_search_shard)(inst, n, message_bits, budget.max_seconds, (position, lo, hi))
            for lo, hi in _shards(width, jobs)
        )
    else:
        results = [_search_shard(inst, n, message_bits, budget.max_seconds, None)]

    candidates = sum(visited for _, visited, _ in results)
    elapsed = time.monotonic() - started
    witness, stopped = _first_in_order(results)
    if witness is not None:
        logger.info(f"✅ Feasible at n={n} after {candidates} candidates")
        return SearchVerdict(FEASIBLE, n, space, reduced_space, candidates, elapsed, witness)
    if stopped:
        logger.warning(f"Search stopped after {budget.max_seconds}s")
        return SearchVerdict(EXHAUSTED, n, space, reduced_space, candidates, elapsed)

    logger.info(f"Infeasible at n={n} ({candidates} candidates)")
    return SearchVerdict(INFEASIBLE, n, space, reduced_space, candidates, elapsed)


def search_unicast(
    inst: UnicastInstance,
    n: Optional[int] = None,
    budget: Optional[SearchBudget] = None,
    jobs: int = 1,
) -> SearchVerdict:
    """
    Decide whether a zero-error unit-rate code exists at block length n

    Args:
        inst: Multiple-unicast instance
        n: Block length (defaults to budget.n)
        budget: Candidate and time caps (defaults from settings)
        jobs: Worker count; verdict and witness do not depend on it

    Returns:
        SearchVerdict; infeasible means infeasible at this n only
    """
    if not isinstance(inst, UnicastInstance):
        raise TypeError("search_unicast needs a unicast instance")
    budget = budget or SearchBudget.default()
    n = _block_length(n, budget)
    return _search(inst, n, inst.k * n, budget, jobs)


def search_nec(
    inst: NECInstance,
    rate_bits: int,
    n: Optional[int] = None,
    budget: Optional[SearchBudget] = None,
    jobs: int = 1,
    hint: Optional[NetworkCode] = None,
) -> SearchVerdict:
    """
    Decide whether a zero-error code carrying rate_bits bits exists at block
    length n against the instance's adversary

    Args:
        inst: NEC instance
        rate_bits: Message bits per block
        n: Block length (defaults to budget.n)
        budget: Candidate and time caps (defaults from settings)
        jobs: Worker count
        hint: Candidate witness checked before any enumeration

    Returns:
        SearchVerdict
    """
    if not isinstance(inst, NECInstance):
        raise TypeError("search_nec needs an NEC instance")
    if rate_bits < 0:
        raise ValueError("rate_bits must be nonnegative")
    budget = budget or SearchBudget.default()
    n = _block_length(n, budget)

    if hint is not None and hint.n == n and hint.message_bits == rate_bits:
        started = time.monotonic()
        try:
            check_code_shape(hint, inst)
            accepted = check_zero_error(hint, inst, jobs=jobs).ok
        except CodeMismatchError as exc:
            logger.warning(f"Ignoring hint: {exc}")
            accepted = False
        if accepted:
            logger.info("✅ Hint verified as zero-error witness")
            return SearchVerdict(
                FEASIBLE, n,
                count_code_space(inst, n, rate_bits),
                normalized_space(inst, n, rate_bits),
                0, time.monotonic() - started, hint,
            )
        logger.info("Hint rejected; enumerating")
    elif hint is not None:
        logger.warning("Ignoring hint with a different block length or rate")

    return _search(inst, n, rate_bits, budget, jobs)

