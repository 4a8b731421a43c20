"""
Reduction - gadget construction from a multiple-unicast instance, code
lifting into the gadget, and code extraction back out of it
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .errors import BijectionChainViolation, PremiseViolation
from .netcode_engine import (
    LocalFunction,
    NetworkCode,
    check_unicast_zero_error,
    check_zero_error,
    message_slot,
    zero_pattern_signals,
)
from .network_model import (
    INTERNAL_ROLE,
    ROLE_TAGS,
    BranchRole,
    Edge,
    NECInstance,
    NetworkGraph,
    UnicastInstance,
)
from .validators import validate_instance

logger = logging.getLogger(__name__)

# Signal relations checked per branch, in reporting order
CHAIN_RELATIONS = (("a", "x"), ("x", "b"), ("b", "z'"), ("a", "z"))


@dataclass(frozen=True)
class Branch:
    """Landmarks of one gadget branch"""

    index: int
    source: str
    terminal: str
    u: str
    combiner: str
    edges: Dict[str, str] = field(compare=False)

    def edge(self, role: str) -> str:
        return self.edges[role]

    def label(self, role: str) -> str:
        return f"{role}_{self.index}"


@dataclass(frozen=True)
class BranchWiring:
    """All branches of a reduced instance plus its internal edges"""

    branches: Tuple[Branch, ...]
    internal_edges: Tuple[str, ...]

    @classmethod
    def from_instance(cls, inst: NECInstance) -> "BranchWiring":
        """
        Read the wiring from an instance's role labels

        Raises:
            ValueError: if the instance carries no roles
        """
        if not inst.roles:
            raise ValueError("instance has no branch roles; not a reduced instance")

        graph = inst.graph
        branches = []
        for index in range(1, inst.branch_count + 1):
            edges = {role: inst.role_edge(role, index) for role in ROLE_TAGS}
            branches.append(Branch(
                index=index,
                source=graph.edge(edges["z"]).head,
                terminal=graph.edge(edges["z'"]).tail,
                u=graph.edge(edges["a"]).head,
                combiner=graph.edge(edges["x"]).head,
                edges=edges,
            ))
        internal = tuple(
            edge.id for edge in graph.edges
            if inst.roles.get(edge.id, BranchRole(INTERNAL_ROLE)).role == INTERNAL_ROLE
        )
        return cls(branches=tuple(branches), internal_edges=internal)


@dataclass(frozen=True)
class BijectionChain:
    """Per branch, the four signal maps as permutation tables"""

    maps: Dict[int, Dict[str, Tuple[int, ...]]]
    normalized: bool = False

    def is_identity(self) -> bool:
        return all(
            table == tuple(range(len(table)))
            for relations in self.maps.values()
            for table in relations.values()
        )


def relation_name(source: str, target: str) -> str:
    return f"{source}->{target}"


def _fresh(base: str, taken: Set[str]) -> str:
    name = base
    while name in taken:
        name += "'"
    taken.add(name)
    return name


def reduce(inst: UnicastInstance) -> NECInstance:
    """
    Build the single-source error-correction gadget around a unicast network

    Every pair i gets a fan-out node u_i fed by a_i from the new source, the
    parallel pair x_i, y_i into the combiner B_i, z_i into the pair's source,
    z'_i from the pair's terminal into B_i, and b_i from B_i to the new
    terminal. Every edge except the a_i and b_i is singly jammable.

    Args:
        inst: Valid multiple-unicast instance

    Returns:
        NECInstance with branch roles
    """
    report = validate_instance(inst)
    if not report.is_valid:
        raise ValueError(f"invalid unicast instance: {'; '.join(report.errors)}")

    graph = inst.graph
    taken_nodes = set(graph.nodes)
    taken_edges = set(graph.edge_ids)

    source = _fresh("s", taken_nodes)
    terminal = _fresh("t", taken_nodes)
    fan_out = [_fresh(f"u_{i}", taken_nodes) for i in range(1, inst.k + 1)]
    combiners = [_fresh(f"B_{i}", taken_nodes) for i in range(1, inst.k + 1)]

    edges = list(graph.edges)
    roles = {edge.id: BranchRole(INTERNAL_ROLE) for edge in graph.edges}
    jammable = [edge.id for edge in graph.edges]

    for i, ((s_i, t_i), u, combiner) in enumerate(zip(inst.pairs, fan_out, combiners), start=1):
        wiring = (
            ("a", source, u),
            ("x", u, combiner),
            ("y", u, combiner),
            ("z", u, s_i),
            ("z'", t_i, combiner),
            ("b", combiner, terminal),
        )
        for role, tail, head in wiring:
            edge_id = _fresh(f"{role}_{i}", taken_edges)
            edges.append(Edge(edge_id, tail, head, 1))
            roles[edge_id] = BranchRole(role, i)
            if role not in ("a", "b"):
                jammable.append(edge_id)

    reduced = NECInstance(
        graph=NetworkGraph(nodes=(*graph.nodes, source, terminal, *fan_out, *combiners), edges=edges),
        source=source,
        terminal=terminal,
        adversary=[{edge_id} for edge_id in jammable],
        roles=roles,
    )
    logger.info(
        f"Reduced {inst.k}-unicast instance: {len(reduced.graph.nodes)} nodes, "
        f"{len(reduced.graph.edges)} edges, {len(reduced.adversary)} adversary sets"
    )
    return reduced


def unicast_from_reduced(inst: NECInstance) -> UnicastInstance:
    """Recover the embedded unicast instance from a reduced instance"""
    wiring = BranchWiring.from_instance(inst)
    added = {inst.source, inst.terminal}
    for branch in wiring.branches:
        added.update((branch.u, branch.combiner))
    graph = inst.graph
    internal = set(wiring.internal_edges)
    return UnicastInstance(
        graph=NetworkGraph(
            nodes=[node for node in graph.nodes if node not in added],
            edges=[edge for edge in graph.edges if edge.id in internal],
        ),
        pairs=[(branch.source, branch.terminal) for branch in wiring.branches],
    )


def majority_table(n: int) -> List[int]:
    """Bitwise 3-input majority over n-bit symbols, row-major in (x, y, z')"""
    mask = 2 ** n - 1
    table = []
    for index in range(2 ** (3 * n)):
        x, y, z = index >> (2 * n), (index >> n) & mask, index & mask
        table.append((x & y) | (x & z) | (y & z))
    return table


@dataclass(frozen=True)
class LiftResult:
    """Lifted code plus whether the unicast premise held"""

    code: NetworkCode
    premise_holds: bool


def lift_code(
    ucode: NetworkCode,
    inst: UnicastInstance,
    reduced: Optional[NECInstance] = None,
    force: bool = False,
    jobs: int = 1,
) -> LiftResult:
    """
    Lift a unit-rate unicast code into the reduced instance

    The source splits its message into M_1..M_k, a_i, x_i, y_i, z_i repeat
    M_i, the network runs the unicast code with s_i reading z_i, z'_i carries
    t_i's decision and B_i takes the bitwise majority.

    Args:
        ucode: Unicast code at block length n
        inst: The unicast instance
        reduced: reduce(inst), rebuilt when omitted
        force: Emit the lift even when ucode is not zero-error
        jobs: Worker count for the premise check

    Returns:
        LiftResult

    Raises:
        PremiseViolation: ucode is not zero-error and force is False
    """
    premise = check_unicast_zero_error(ucode, inst, jobs=jobs)
    if not premise.ok:
        if not force:
            logger.error("Refusing to lift: unicast code not zero-error")
            raise PremiseViolation("unicast code not zero-error", premise.counterexample)
        logger.warning("Lifting a unicast code that is not zero-error")

    reduced = reduced or reduce(inst)
    wiring = BranchWiring.from_instance(reduced)
    n, k = ucode.n, inst.k
    mask = 2 ** n - 1
    identity = list(range(2 ** n))
    source_slot = message_slot(reduced.source)

    functions: Dict[str, LocalFunction] = {}
    for branch in wiring.branches:
        a, x, y, z, zp, b = (branch.edge(role) for role in ROLE_TAGS)
        shift = n * (k - branch.index)
        functions[a] = LocalFunction((source_slot,), [(m >> shift) & mask for m in range(2 ** (k * n))])
        for copy in (x, y, z):
            functions[copy] = LocalFunction((a,), identity)
        decoder = ucode.decoders[branch.terminal]
        functions[zp] = LocalFunction(decoder.inputs, decoder.table)
        functions[b] = LocalFunction((x, y, zp), majority_table(n))

    rebind = {message_slot(branch.source): branch.edge("z") for branch in wiring.branches}
    for edge in inst.graph.edges:
        fn = ucode.edge_functions[edge.id]
        functions[edge.id] = LocalFunction([rebind.get(name, name) for name in fn.inputs], fn.table)

    b_edges = [branch.edge("b") for branch in wiring.branches]
    code = NetworkCode(
        n=n,
        message_bits=k * n,
        edge_functions=functions,
        decoders={reduced.terminal: LocalFunction(b_edges, range(2 ** (k * n)))},
    )
    return LiftResult(code=code, premise_holds=premise.ok)


def branch_signals(
    code: NetworkCode,
    inst: NECInstance,
    messages: Optional[Sequence[int]] = None,
    jobs: int = 1,
) -> Dict[int, Dict[str, List[int]]]:
    """
    Error-free branch signals per message

    Returns:
        branch index -> role -> values aligned with `messages`
    """
    wiring = BranchWiring.from_instance(inst)
    edges = [branch.edge(role) for branch in wiring.branches for role in ROLE_TAGS]
    signals = zero_pattern_signals(code, inst, edges, messages=messages, jobs=jobs)
    return {
        branch.index: {role: signals[branch.edge(role)] for role in ROLE_TAGS}
        for branch in wiring.branches
    }


def _permutation(
    branch: int,
    source: str,
    target: str,
    source_values: Sequence[int],
    target_values: Sequence[int],
    messages: Sequence[int],
    size: int,
) -> Tuple[int, ...]:
    """Read target as a function of source and demand a permutation of [0, size)"""
    mapping: Dict[int, int] = {}
    witness: Dict[int, int] = {}
    for message, value, image in zip(messages, source_values, target_values):
        if value in mapping and mapping[value] != image:
            raise BijectionChainViolation(
                branch, f"{target}_{branch} not a function of {source}_{branch}",
                (value, value), (witness[value], message),
            )
        mapping.setdefault(value, image)
        witness.setdefault(value, message)

    preimage: Dict[int, int] = {}
    for value in sorted(mapping):
        image = mapping[value]
        if image in preimage:
            earlier = preimage[image]
            raise BijectionChainViolation(
                branch, f"{target}_{branch} not injective in {source}_{branch}",
                (earlier, value), (witness[earlier], witness[value]),
            )
        preimage[image] = value

    missing = [value for value in range(size) if value not in mapping]
    if missing:
        raise BijectionChainViolation(
            branch, f"{source}_{branch} does not take every value",
            (missing[0], missing[0]), (-1, -1),
        )
    return tuple(mapping[value] for value in range(size))


def trace_chain(code: NetworkCode, inst: NECInstance, jobs: int = 1) -> BijectionChain:
    """
    Build the per-branch signal maps from error-free simulation

    Raises:
        BijectionChainViolation: first relation that is not a permutation
    """
    signals = branch_signals(code, inst, jobs=jobs)
    messages = list(range(2 ** code.message_bits))
    size = 2 ** code.n
    maps = {}
    for branch, values in signals.items():
        maps[branch] = {
            relation_name(source, target): _permutation(
                branch, source, target, values[source], values[target], messages, size
            )
            for source, target in CHAIN_RELATIONS
        }
    return BijectionChain(maps=maps)


def _rewrite_input(
    fn: LocalFunction,
    radices: Sequence[int],
    position_maps: Dict[int, Sequence[int]],
) -> List[int]:
    """Table of fn after substituting input values through position_maps"""
    table = []
    for index in range(len(fn.table)):
        digits = []
        rest = index
        for radix in reversed(radices):
            digits.append(rest % radix)
            rest //= radix
        digits.reverse()
        source_index = 0
        for position, (digit, radix) in enumerate(zip(digits, radices)):
            if position in position_maps:
                digit = position_maps[position][digit]
            source_index = source_index * radix + digit
        table.append(fn.table[source_index])
    return table


def _z_as_function_of_a(fn: LocalFunction, n: int) -> List[int]:
    """Values of a z_i table (whose inputs can only be a_i) for each a-value"""
    values = []
    for a_value in range(2 ** n):
        index = 0
        for _ in fn.inputs:
            index = index * (2 ** n) + a_value
        values.append(fn.table[index])
    return values


def normalize_z_edges(code: NetworkCode, inst: NECInstance) -> NetworkCode:
    """
    Rewrite every z_i to copy a_i and fold the old z_i map into s_i

    Error-free behaviour is unchanged, and every behaviour of the rewritten
    code under an admissible pattern is also a behaviour of the original.

    Args:
        code: Code on a reduced instance
        inst: Reduced instance

    Returns:
        Rewritten code
    """
    wiring = BranchWiring.from_instance(inst)
    radix = 2 ** code.n
    functions = dict(code.edge_functions)
    for branch in wiring.branches:
        z, a = branch.edge("z"), branch.edge("a")
        old_map = _z_as_function_of_a(code.edge_functions[z], code.n)
        functions[z] = LocalFunction((a,), range(radix))
        for edge in inst.graph.out_edges(branch.source):
            fn = code.edge_functions[edge.id]
            positions = {p: old_map for p, name in enumerate(fn.inputs) if name == z}
            if not positions:
                continue
            radices = [_input_radix(inst, code, name) for name in fn.inputs]
            functions[edge.id] = LocalFunction(fn.inputs, _rewrite_input(fn, radices, positions))
    return NetworkCode(code.n, code.message_bits, functions, code.decoders)


def _input_radix(inst, code: NetworkCode, name: str) -> int:
    if name.startswith("msg:"):
        return 2 ** code.message_bits
    return 2 ** (inst.graph.edge(name).capacity * code.n)


def _z_injective(signals: Dict[int, Dict[str, List[int]]]) -> bool:
    for values in signals.values():
        seen: Dict[int, int] = {}
        for a_value, z_value in zip(values["a"], values["z"]):
            seen.setdefault(a_value, z_value)
        if len(set(seen.values())) != len(seen):
            return False
    return True


def extract_code(
    ncode: NetworkCode,
    inst: NECInstance,
    jobs: int = 1,
) -> Tuple[NetworkCode, BijectionChain]:
    """
    Turn a zero-error rate-k code on a reduced instance into a unit-rate
    zero-error unicast code

    Unicast message m_i is identified with the a_i value. Source s_i sends the
    z_i value sigma_i(m_i), the network runs unchanged and t_i evaluates its
    z'_i function and undoes z' <- b <- x <- a.

    Args:
        ncode: NEC code with message_bits = k*n
        inst: Reduced instance
        jobs: Worker count for the exhaustive passes

    Returns:
        (unicast code, bijection chain)

    Raises:
        PremiseViolation: wrong rate, or the code is not zero-error
        BijectionChainViolation: a branch relation is not a permutation
    """
    wiring = BranchWiring.from_instance(inst)
    k, n = len(wiring.branches), ncode.n
    if ncode.message_bits != k * n:
        raise PremiseViolation(f"NEC code carries {ncode.message_bits} bits, expected k*n = {k * n}")

    verdict = check_zero_error(ncode, inst, jobs=jobs)
    if not verdict.ok:
        logger.error("Refusing to extract: NEC code not zero-error")
        raise PremiseViolation("NEC code not zero-error", verdict.counterexample)

    normalized = False
    if not _z_injective(branch_signals(ncode, inst, jobs=jobs)):
        logger.info("z edges not injective in a; applying z := a rewrite")
        ncode = normalize_z_edges(ncode, inst)
        if not check_zero_error(ncode, inst, jobs=jobs).ok:
            raise PremiseViolation("z := a rewrite lost zero-error decodability")
        normalized = True

    chain = trace_chain(ncode, inst, jobs=jobs)
    chain = BijectionChain(maps=chain.maps, normalized=normalized)
    unicast = unicast_from_reduced(inst)

    functions: Dict[str, LocalFunction] = {}
    for edge_id in wiring.internal_edges:
        functions[edge_id] = ncode.edge_functions[edge_id]

    decoders: Dict[str, LocalFunction] = {}
    size = 2 ** n
    for branch in wiring.branches:
        maps = chain.maps[branch.index]
        z, slot = branch.edge("z"), message_slot(branch.source)
        sigma = maps[relation_name("a", "z")]
        for edge in unicast.graph.out_edges(branch.source):
            fn = functions[edge.id]
            positions = {p: sigma for p, name in enumerate(fn.inputs) if name == z}
            if not positions:
                continue
            radices = [size if name == z else _input_radix(inst, ncode, name) for name in fn.inputs]
            table = _rewrite_input(fn, radices, positions)
            functions[edge.id] = LocalFunction([slot if name == z else name for name in fn.inputs], table)

        inverse = {}
        for relation in (relation_name("a", "x"), relation_name("x", "b"), relation_name("b", "z'")):
            inverse[relation] = {image: value for value, image in enumerate(maps[relation])}

        def undo(zp_value: int) -> int:
            b_value = inverse[relation_name("b", "z'")][zp_value]
            x_value = inverse[relation_name("x", "b")][b_value]
            return inverse[relation_name("a", "x")][x_value]

        zp_fn = ncode.edge_functions[branch.edge("z'")]
        decoders[branch.terminal] = LocalFunction(zp_fn.inputs, [undo(value) for value in zp_fn.table])

    code = NetworkCode(n=n, message_bits=k * n, edge_functions=functions, decoders=decoders)
    logger.info(f"✅ Extracted unicast code for {k} pair(s)")
    return code, chain
