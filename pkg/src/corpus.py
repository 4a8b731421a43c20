"""
Corpus - named small instances, seeded random DAG instances and reference
codes (including deliberately corrupted lifts)
"""

import logging
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .netcode_engine import LocalFunction, NetworkCode, message_slot
from .network_model import Edge, NECInstance, NetworkGraph, UnicastInstance
from .oracle import normalized_space
from .reduction import BranchWiring, reduce
from .validators import validate_instance

logger = logging.getLogger(__name__)


def _unicast(nodes, edges, pairs) -> UnicastInstance:
    return UnicastInstance(
        graph=NetworkGraph(nodes=nodes, edges=[Edge(*edge) for edge in edges]),
        pairs=pairs,
    )


def single_edge() -> UnicastInstance:
    return _unicast(["s1", "t1"], [("e1", "s1", "t1")], [("s1", "t1")])


def relay() -> UnicastInstance:
    return _unicast(
        ["s1", "r", "t1"],
        [("e1", "s1", "r"), ("e2", "r", "t1")],
        [("s1", "t1")],
    )


def butterfly() -> UnicastInstance:
    """Two crossing pairs sharing the unit edge u->v, plus side links"""
    return _unicast(
        ["s1", "s2", "u", "v", "t1", "t2"],
        [
            ("e1", "s1", "u"),
            ("e2", "s2", "u"),
            ("e3", "u", "v"),
            ("e4", "v", "t1"),
            ("e5", "v", "t2"),
            ("e6", "s1", "t2"),
            ("e7", "s2", "t1"),
        ],
        [("s1", "t1"), ("s2", "t2")],
    )


def bottleneck() -> UnicastInstance:
    """Butterfly without side links: both pairs squeeze through u->v"""
    return _unicast(
        ["s1", "s2", "u", "v", "t1", "t2"],
        [
            ("e1", "s1", "u"),
            ("e2", "s2", "u"),
            ("e3", "u", "v"),
            ("e4", "v", "t1"),
            ("e5", "v", "t2"),
        ],
        [("s1", "t1"), ("s2", "t2")],
    )


def wide_bottleneck() -> UnicastInstance:
    """Bottleneck with a two-bit shared edge, solvable by routing"""
    return _unicast(
        ["s1", "s2", "u", "v", "t1", "t2"],
        [
            ("e1", "s1", "u"),
            ("e2", "s2", "u"),
            ("e3", "u", "v", 2),
            ("e4", "v", "t1"),
            ("e5", "v", "t2"),
        ],
        [("s1", "t1"), ("s2", "t2")],
    )


def parallel_relay() -> UnicastInstance:
    return _unicast(
        ["s1", "s2", "r", "t1", "t2"],
        [("e1", "s1", "t1"), ("e2", "s2", "r"), ("e3", "r", "t2")],
        [("s1", "t1"), ("s2", "t2")],
    )


def crossed_pairs() -> UnicastInstance:
    """Each source reaches only the other pair's terminal"""
    return _unicast(
        ["s1", "s2", "t1", "t2"],
        [("e1", "s1", "t2"), ("e2", "s2", "t1")],
        [("s1", "t1"), ("s2", "t2")],
    )


NAMED_INSTANCES: Dict[str, Callable[[], UnicastInstance]] = {
    "single_edge": single_edge,
    "relay": relay,
    "butterfly": butterfly,
    "bottleneck": bottleneck,
    "wide_bottleneck": wide_bottleneck,
    "parallel_relay": parallel_relay,
    "crossed_pairs": crossed_pairs,
}


def random_unicast_instance(rng: np.random.Generator, max_edges: int = 8) -> Optional[UnicastInstance]:
    """
    Random DAG with 1-2 pairs, unit capacities and in-degree at most 2

    Sources have no in-edges and terminals no out-edges. Returns None when
    the draw produces an invalid instance.
    """
    k = int(rng.integers(1, 3))
    hidden = int(rng.integers(0, 3))
    sources = [f"s{i}" for i in range(1, k + 1)]
    middle = [f"w{i}" for i in range(1, hidden + 1)]
    terminals = [f"t{i}" for i in range(1, k + 1)]
    nodes = sources + middle + terminals
    rank = {node: i for i, node in enumerate(nodes)}

    target = int(rng.integers(k, max_edges + 1))
    in_degree = {node: 0 for node in nodes}
    arcs: List[Tuple[str, str]] = []
    for _ in range(20 * max_edges):
        if len(arcs) >= target:
            break
        tail = nodes[int(rng.integers(0, len(sources) + len(middle)))]
        head = nodes[int(rng.integers(len(sources), len(nodes)))]
        if rank[tail] >= rank[head] or in_degree[head] >= 2 or (tail, head) in arcs:
            continue
        arcs.append((tail, head))
        in_degree[head] += 1

    inst = _unicast(
        nodes,
        [(f"e{i}", tail, head) for i, (tail, head) in enumerate(arcs, start=1)],
        list(zip(sources, terminals)),
    )
    return inst if validate_instance(inst).is_valid else None


def random_corpus(
    seed: int,
    count: int,
    max_space: int = 500_000,
    max_edges: int = 8,
) -> List[Tuple[str, UnicastInstance]]:
    """
    Seeded random instances whose unicast and reduced searches stay small

    Args:
        seed: numpy seed
        count: Instances wanted
        max_space: Cap on the normalized search space at n=1, both sides
        max_edges: Edge cap of the unicast instance

    Returns:
        List of (name, instance); may be shorter than count if draws run out
    """
    rng = np.random.default_rng(seed)
    found: List[Tuple[str, UnicastInstance]] = []
    for attempt in range(200 * count):
        if len(found) >= count:
            break
        inst = random_unicast_instance(rng, max_edges=max_edges)
        if inst is None:
            continue
        if normalized_space(inst, 1) > max_space:
            continue
        if normalized_space(reduce(inst), 1, inst.k) > max_space:
            continue
        found.append((f"random_{seed}_{attempt}", inst))
    logger.info(f"Random corpus: {len(found)} instance(s) from seed {seed}")
    return found


def default_corpus(seed: int, random_count: int = 14) -> List[Tuple[str, UnicastInstance]]:
    """Named instances followed by seeded random ones"""
    named = [(name, builder()) for name, builder in NAMED_INSTANCES.items()]
    return named + random_corpus(seed, random_count)


def butterfly_xor_code() -> NetworkCode:
    """Side links carry the messages, e3 carries their XOR"""
    copy = [0, 1]
    xor = [0, 1, 1, 0]
    return NetworkCode(
        n=1,
        message_bits=2,
        edge_functions={
            "e1": LocalFunction(["msg:s1"], copy),
            "e2": LocalFunction(["msg:s2"], copy),
            "e3": LocalFunction(["e1", "e2"], xor),
            "e4": LocalFunction(["e3"], copy),
            "e5": LocalFunction(["e3"], copy),
            "e6": LocalFunction(["msg:s1"], copy),
            "e7": LocalFunction(["msg:s2"], copy),
        },
        decoders={
            "t1": LocalFunction(["e4", "e7"], xor),
            "t2": LocalFunction(["e5", "e6"], xor),
        },
    )


def butterfly_routing_code() -> NetworkCode:
    """e3 forwards M1 only, so t2 cannot recover M2"""
    code = butterfly_xor_code().with_function("e3", ["e1", "e2"], [0, 0, 1, 1])
    first = [0, 0, 1, 1]
    return code.with_decoder("t1", ["e4", "e7"], first).with_decoder("t2", ["e5", "e6"], first)


def identity_code(inst: UnicastInstance, n: int = 1) -> NetworkCode:
    """
    Pure forwarding code for instances where every node has a single input

    Raises:
        ValueError: when some edge or terminal would need to combine inputs
    """
    graph = inst.graph
    sources = set(inst.sources)
    size = 2 ** n

    def single_input(node: str) -> Tuple[str, int]:
        inputs = [message_slot(node)] if node in sources else []
        inputs += [edge.id for edge in graph.in_edges(node)]
        if len(inputs) != 1:
            raise ValueError(f"node {node} has {len(inputs)} inputs; forwarding needs exactly one")
        name = inputs[0]
        width = n if name.startswith("msg:") else graph.edge(name).capacity * n
        return name, width

    functions = {}
    for edge in graph.edges:
        name, width = single_input(edge.tail)
        if width > edge.capacity * n:
            raise ValueError(f"edge {edge.id} too narrow to forward {name}")
        functions[edge.id] = LocalFunction([name], range(2 ** width))
    decoders = {}
    for terminal in inst.terminals:
        name, width = single_input(terminal)
        decoders[terminal] = LocalFunction([name], [value % size for value in range(2 ** width)])
    return NetworkCode(n=n, message_bits=inst.k * n, edge_functions=functions, decoders=decoders)


def combiner_copies_x(code: NetworkCode, reduced: NECInstance, branch: int = 1) -> NetworkCode:
    """Corrupt a lift: b_branch forwards x_branch instead of the majority"""
    edges = BranchWiring.from_instance(reduced).branches[branch - 1].edges
    n = code.n
    table = [index >> (2 * n) for index in range(2 ** (3 * n))]
    return code.with_function(edges["b"], [edges["x"], edges["y"], edges["z'"]], table)


def constant_x(code: NetworkCode, reduced: NECInstance, branch: int = 1) -> NetworkCode:
    """Corrupt a lift: x_branch is constant 0"""
    edges = BranchWiring.from_instance(reduced).branches[branch - 1].edges
    return code.with_function(edges["x"], [edges["a"]], [0] * (2 ** code.n))
