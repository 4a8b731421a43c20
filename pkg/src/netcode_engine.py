"""
Network Code Engine - table-driven network codes, evaluation under errors,
and exhaustive zero-error checks
"""

import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import prod
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from joblib import Parallel, delayed

from .adversary import ZERO_PATTERN, ErrorPattern, enumerate_patterns, pattern_count
from .config import get_settings
from .errors import CodeMismatchError, ExhaustiveCheckTooLarge
from .network_model import Instance, NECInstance, UnicastInstance

logger = logging.getLogger(__name__)

MSG_PREFIX = "msg:"

Message = Union[int, Tuple[int, ...]]


def message_slot(node: str) -> str:
    """Input name under which `node` reads its own source message"""
    return f"{MSG_PREFIX}{node}"


@dataclass(frozen=True)
class LocalFunction:
    """Ordered inputs plus a row-major mixed-radix lookup table"""

    inputs: Tuple[str, ...]
    table: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "table", tuple(int(value) for value in self.table))


def _as_function(value) -> LocalFunction:
    if isinstance(value, LocalFunction):
        return value
    if isinstance(value, Mapping):
        return LocalFunction(value["inputs"], value["table"])
    inputs, table = value
    return LocalFunction(inputs, table)


@dataclass(frozen=True)
class NetworkCode:
    """Block length, message size, encoders per edge, decoders per terminal"""

    n: int
    message_bits: int
    edge_functions: Mapping[str, LocalFunction] = field(default_factory=dict)
    decoders: Mapping[str, LocalFunction] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(
            self, "edge_functions",
            {edge_id: _as_function(fn) for edge_id, fn in self.edge_functions.items()},
        )
        object.__setattr__(
            self, "decoders",
            {node: _as_function(fn) for node, fn in self.decoders.items()},
        )

    def with_function(self, edge_id: str, inputs: Sequence[str], table: Sequence[int]) -> "NetworkCode":
        """Copy with one encoder replaced"""
        functions = dict(self.edge_functions)
        functions[edge_id] = LocalFunction(inputs, table)
        return replace(self, edge_functions=functions)

    def with_decoder(self, node: str, inputs: Sequence[str], table: Sequence[int]) -> "NetworkCode":
        """Copy with one decoder replaced"""
        decoders = dict(self.decoders)
        decoders[node] = LocalFunction(inputs, table)
        return replace(self, decoders=decoders)


@dataclass(frozen=True)
class EvalTrace:
    """Per-edge transmitted/received values and per-terminal decisions"""

    transmitted: Dict[str, int]
    received: Dict[str, int]
    decoded: Dict[str, int]


def edge_alphabet(inst: Instance, edge_id: str, n: int) -> int:
    return 2 ** (inst.graph.edge(edge_id).capacity * n)


def slot_bits(inst: Instance, n: int, message_bits: int) -> Dict[str, int]:
    """Bits carried by each source message slot"""
    if isinstance(inst, UnicastInstance):
        return {message_slot(source): n for source in inst.sources}
    return {message_slot(inst.source): message_bits}


def target_bits(inst: Instance, n: int, message_bits: int) -> int:
    """Bits of the value each decoder must output"""
    return n if isinstance(inst, UnicastInstance) else message_bits


def message_count(code: NetworkCode) -> int:
    return 2 ** code.message_bits


def message_from_index(inst: Instance, n: int, index: int) -> Message:
    """Unicast messages are tuples with the first pair most significant"""
    if isinstance(inst, NECInstance):
        return index
    parts = []
    for _ in range(inst.k):
        parts.append(index % (2 ** n))
        index //= 2 ** n
    return tuple(reversed(parts))


def message_index(inst: Instance, n: int, message: Message) -> int:
    if isinstance(inst, NECInstance):
        return int(message)
    index = 0
    for part in message:
        index = index * (2 ** n) + part
    return index


def expected_outputs(inst: Instance, message: Message) -> Dict[str, int]:
    """What every decoder must output for `message`"""
    if isinstance(inst, NECInstance):
        return {inst.terminal: int(message)}
    return {terminal: part for terminal, part in zip(inst.terminals, message)}


def check_code_shape(code: NetworkCode, inst: Instance) -> None:
    """
    Verify locality, table sizes and codomains of every function

    Raises:
        CodeMismatchError: on the first problem found
    """
    graph = inst.graph
    if code.n < 1:
        raise CodeMismatchError("block length must be at least 1")
    if isinstance(inst, UnicastInstance) and code.message_bits != inst.k * code.n:
        raise CodeMismatchError(
            f"unicast code needs message_bits = k*n = {inst.k * code.n}, got {code.message_bits}"
        )
    if code.message_bits < 0:
        raise CodeMismatchError("message_bits must be nonnegative")

    expected = set(graph.edge_ids)
    present = set(code.edge_functions)
    if expected - present:
        raise CodeMismatchError(f"missing edge functions: {sorted(expected - present)}")
    if present - expected:
        raise CodeMismatchError(f"functions for unknown edges: {sorted(present - expected)}")

    slots = slot_bits(inst, code.n, code.message_bits)

    def radix(owner: str, node: str, name: str) -> int:
        if name.startswith(MSG_PREFIX):
            if name != message_slot(node) or name not in slots:
                raise CodeMismatchError(f"{owner} reads foreign message slot {name}")
            return 2 ** slots[name]
        if not graph.has_edge(name) or graph.edge(name).head != node:
            raise CodeMismatchError(f"{owner} reads {name}, which does not enter {node}")
        return edge_alphabet(inst, name, code.n)

    for edge in graph.edges:
        fn = code.edge_functions[edge.id]
        rows = prod(radix(f"edge {edge.id}", edge.tail, name) for name in fn.inputs)
        if len(fn.table) != rows:
            raise CodeMismatchError(f"edge {edge.id} table has {len(fn.table)} rows, expected {rows}")
        limit = edge_alphabet(inst, edge.id, code.n)
        if any(value < 0 or value >= limit for value in fn.table):
            raise CodeMismatchError(f"edge {edge.id} table leaves [0, {limit})")

    terminals = set(inst.terminals if isinstance(inst, UnicastInstance) else [inst.terminal])
    if set(code.decoders) != terminals:
        raise CodeMismatchError(f"decoders expected for {sorted(terminals)}, got {sorted(code.decoders)}")
    limit = 2 ** target_bits(inst, code.n, code.message_bits)
    for node, fn in code.decoders.items():
        rows = prod(radix(f"decoder {node}", node, name) for name in fn.inputs)
        if len(fn.table) != rows:
            raise CodeMismatchError(f"decoder {node} table has {len(fn.table)} rows, expected {rows}")
        if any(value < 0 or value >= limit for value in fn.table):
            raise CodeMismatchError(f"decoder {node} table leaves [0, {limit})")


class CodeSimulator:
    """A code compiled against an instance for repeated evaluation"""

    def __init__(self, code: NetworkCode, inst: Instance):
        check_code_shape(code, inst)
        self.code = code
        self.inst = inst
        self._slots = slot_bits(inst, code.n, code.message_bits)
        self._plan = [
            (edge.id, self._compile(code.edge_functions[edge.id]))
            for edge in inst.graph.topological_edges()
        ]
        self._decoders = [
            (node, self._compile(fn)) for node, fn in sorted(code.decoders.items())
        ]

    def _compile(self, fn: LocalFunction):
        inputs = []
        for name in fn.inputs:
            if name.startswith(MSG_PREFIX):
                inputs.append((True, name, 2 ** self._slots[name]))
            else:
                inputs.append((False, name, edge_alphabet(self.inst, name, self.code.n)))
        return inputs, fn.table

    def message_values(self, message: Message) -> Dict[str, int]:
        """Slot values for `message`, range-checked"""
        if isinstance(self.inst, NECInstance):
            message = int(message)
            if not 0 <= message < 2 ** self.code.message_bits:
                raise ValueError(f"message {message} out of range")
            return {message_slot(self.inst.source): message}
        message = tuple(message)
        if len(message) != self.inst.k or any(not 0 <= m < 2 ** self.code.n for m in message):
            raise ValueError(f"message {message} out of range")
        return {message_slot(source): m for source, m in zip(self.inst.sources, message)}

    @staticmethod
    def _lookup(compiled, slots: Dict[str, int], received: Dict[str, int]) -> int:
        inputs, table = compiled
        index = 0
        for is_slot, name, radix in inputs:
            index = index * radix + (slots[name] if is_slot else received[name])
        return table[index]

    def run(
        self,
        message: Message,
        pattern: ErrorPattern = ZERO_PATTERN,
        overrides: Optional[Mapping[str, int]] = None,
    ) -> EvalTrace:
        """
        Evaluate every edge in topological order

        Args:
            message: Integer (NEC) or tuple of per-pair messages (unicast)
            pattern: Error pattern XORed onto transmitted values
            overrides: Transmitted values forced on selected edges

        Returns:
            EvalTrace
        """
        slots = self.message_values(message)
        transmitted: Dict[str, int] = {}
        received: Dict[str, int] = {}
        for edge_id, compiled in self._plan:
            if overrides and edge_id in overrides:
                value = overrides[edge_id]
            else:
                value = self._lookup(compiled, slots, received)
            transmitted[edge_id] = value
            received[edge_id] = value ^ pattern.value(edge_id)
        decoded = {
            node: self._lookup(compiled, slots, received) for node, compiled in self._decoders
        }
        return EvalTrace(transmitted=transmitted, received=received, decoded=decoded)

    def decodes(self, message: Message, pattern: ErrorPattern = ZERO_PATTERN) -> bool:
        return self.run(message, pattern).decoded == expected_outputs(self.inst, message)


def evaluate(
    code: NetworkCode,
    inst: Instance,
    message: Message,
    err: Optional[ErrorPattern] = None,
) -> EvalTrace:
    """
    Evaluate one transmission

    Args:
        code: Network code
        inst: Unicast or NEC instance
        message: Source message(s)
        err: Error pattern (zero pattern when omitted)

    Returns:
        EvalTrace with transmitted, received and decoded values
    """
    pattern = err or ZERO_PATTERN
    for edge_id, value in pattern.values:
        if not inst.graph.has_edge(edge_id):
            raise CodeMismatchError(f"error on unknown edge {edge_id}")
        if not 0 < value < edge_alphabet(inst, edge_id, code.n):
            raise ValueError(f"error value {value} outside alphabet of {edge_id}")
    return CodeSimulator(code, inst).run(message, pattern)


@dataclass(frozen=True)
class Counterexample:
    """First failing transmission in canonical order"""

    message: Message
    pattern: ErrorPattern
    decoded: Dict[str, int]
    pattern_index: int = 0


@dataclass(frozen=True)
class ZeroErrorResult:
    """Outcome of an exhaustive zero-error check"""

    ok: bool
    counterexample: Optional[Counterexample] = None
    evaluations: int = 0


def _chunks(total: int, jobs: int) -> List[Tuple[int, int]]:
    jobs = max(1, min(jobs, total))
    step = -(-total // jobs)
    return [(lo, min(lo + step, total)) for lo in range(0, total, step)]


def _scan(
    code: NetworkCode,
    inst: Instance,
    patterns: Sequence[ErrorPattern],
    lo: int,
    hi: int,
    first_only: bool,
) -> Tuple[List[Counterexample], int]:
    """Messages lo..hi-1: first failing pattern of each bad message"""
    simulator = CodeSimulator(code, inst)
    failures = []
    evaluations = 0
    for index in range(lo, hi):
        message = message_from_index(inst, code.n, index)
        expected = expected_outputs(inst, message)
        for pattern_index, pattern in enumerate(patterns):
            evaluations += 1
            decoded = simulator.run(message, pattern).decoded
            if decoded != expected:
                failures.append(Counterexample(message, pattern, decoded, pattern_index))
                break
        if failures and first_only:
            break
    return failures, evaluations


def _exhaust(
    code: NetworkCode,
    inst: Instance,
    first_only: bool,
    jobs: int = 1,
    limit: Optional[int] = None,
) -> Tuple[List[Counterexample], int]:
    """Shared driver for the exhaustive checks; failures in canonical order"""
    check_code_shape(code, inst)
    limit = limit if limit is not None else get_settings().max_evaluations
    if isinstance(inst, NECInstance):
        size = message_count(code) * pattern_count(inst, code.n)
        if size > limit:
            raise ExhaustiveCheckTooLarge(size, limit)
        patterns = list(enumerate_patterns(inst, code.n))
    else:
        size = message_count(code)
        if size > limit:
            raise ExhaustiveCheckTooLarge(size, limit)
        patterns = [ZERO_PATTERN]

    chunks = _chunks(message_count(code), jobs)
    if len(chunks) > 1:
        results = Parallel(n_jobs=jobs)(
            delayed(_scan)(code, inst, patterns, lo, hi, first_only) for lo, hi in chunks
        )
    else:
        results = [_scan(code, inst, patterns, lo, hi, first_only) for lo, hi in chunks]

    failures: List[Counterexample] = []
    evaluations = 0
    for chunk_failures, chunk_evaluations in results:
        failures.extend(chunk_failures)
        evaluations += chunk_evaluations
    if first_only:
        failures = failures[:1]
    return failures, evaluations


def check_zero_error(
    code: NetworkCode,
    inst: NECInstance,
    jobs: int = 1,
    limit: Optional[int] = None,
) -> ZeroErrorResult:
    """
    Decide zero-error decodability over all messages and admissible patterns

    Args:
        code: Network code for the NEC instance
        inst: NEC instance
        jobs: Worker count; the reported counterexample does not depend on it
        limit: Refusal threshold on messages x patterns

    Returns:
        ZeroErrorResult with the canonical-first counterexample if any
    """
    failures, evaluations = _exhaust(code, inst, first_only=True, jobs=jobs, limit=limit)
    if failures:
        logger.info(f"Counterexample at message {failures[0].message}, support {failures[0].pattern.support}")
        return ZeroErrorResult(ok=False, counterexample=failures[0], evaluations=evaluations)
    logger.info(f"✅ Zero-error check passed ({evaluations} evaluations)")
    return ZeroErrorResult(ok=True, evaluations=evaluations)


def check_unicast_zero_error(
    code: NetworkCode,
    inst: UnicastInstance,
    jobs: int = 1,
    limit: Optional[int] = None,
) -> ZeroErrorResult:
    """
    Decide whether every terminal recovers its paired message

    Args:
        code: Unicast network code
        inst: Unicast instance
        jobs: Worker count
        limit: Refusal threshold on the number of message tuples

    Returns:
        ZeroErrorResult; the counterexample carries the message tuple
    """
    failures, evaluations = _exhaust(code, inst, first_only=True, jobs=jobs, limit=limit)
    if failures:
        return ZeroErrorResult(ok=False, counterexample=failures[0], evaluations=evaluations)
    return ZeroErrorResult(ok=True, evaluations=evaluations)


def failing_terminals(inst: UnicastInstance, counterexample: Counterexample) -> List[str]:
    """Terminals whose decision is wrong in a unicast counterexample"""
    expected = expected_outputs(inst, counterexample.message)
    return [node for node in inst.terminals if counterexample.decoded[node] != expected[node]]


def bad_messages(
    code: NetworkCode,
    inst: NECInstance,
    jobs: int = 1,
    limit: Optional[int] = None,
) -> List[int]:
    """Messages broken by at least one admissible pattern, ascending"""
    failures, _ = _exhaust(code, inst, first_only=False, jobs=jobs, limit=limit)
    return [failure.message for failure in failures]


def empirical_error_prob(
    code: NetworkCode,
    inst: NECInstance,
    jobs: int = 1,
    limit: Optional[int] = None,
) -> Fraction:
    """
    Worst-case-per-message error probability |M^b| / 2^message_bits

    Args:
        code: Network code
        inst: NEC instance
        jobs: Worker count
        limit: Refusal threshold

    Returns:
        Exact fraction in [0, 1]
    """
    bad = bad_messages(code, inst, jobs=jobs, limit=limit)
    return Fraction(len(bad), message_count(code))


def _signals_chunk(
    code: NetworkCode,
    inst: Instance,
    edges: Sequence[str],
    messages: Sequence[Message],
) -> Dict[str, List[int]]:
    simulator = CodeSimulator(code, inst)
    collected: Dict[str, List[int]] = {edge_id: [] for edge_id in edges}
    for message in messages:
        trace = simulator.run(message)
        for edge_id in edges:
            collected[edge_id].append(trace.transmitted[edge_id])
    return collected


def zero_pattern_signals(
    code: NetworkCode,
    inst: Instance,
    edges: Sequence[str],
    messages: Optional[Sequence[Message]] = None,
    jobs: int = 1,
) -> Dict[str, List[int]]:
    """
    Error-free signals on `edges`, one list entry per message

    Args:
        code: Network code
        inst: Instance
        edges: Edge ids to record
        messages: Messages in the order wanted (all, ascending, by default)
        jobs: Worker count

    Returns:
        Edge id -> list of transmitted values aligned with `messages`
    """
    if messages is None:
        messages = [message_from_index(inst, code.n, index) for index in range(message_count(code))]
    messages = list(messages)
    chunks = _chunks(len(messages), jobs) if messages else []
    if len(chunks) > 1:
        parts = Parallel(n_jobs=jobs)(
            delayed(_signals_chunk)(code, inst, edges, messages[lo:hi]) for lo, hi in chunks
        )
    else:
        parts = [_signals_chunk(code, inst, edges, messages)]

    collected: Dict[str, List[int]] = {edge_id: [] for edge_id in edges}
    for part in parts:
        for edge_id in edges:
            collected[edge_id].extend(part[edge_id])
    return collected
