"""
Network Model - directed acyclic networks, problem instances and min-cuts
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Mapping, NamedTuple, Optional, Tuple, Union

import networkx as nx

logger = logging.getLogger(__name__)

# Branch role tags carried by reduced instances
ROLE_TAGS = ("a", "x", "y", "z", "z'", "b")
INTERNAL_ROLE = "internal"


@dataclass(frozen=True)
class Edge:
    """A unit of capacity `capacity` bits per symbol time from tail to head"""

    id: str
    tail: str
    head: str
    capacity: int = 1


@dataclass(frozen=True)
class NetworkGraph:
    """Nodes plus an ordered edge list; parallel edges allowed"""

    nodes: Tuple[str, ...]
    edges: Tuple[Edge, ...]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))

    @cached_property
    def _by_id(self) -> Dict[str, Edge]:
        return {edge.id: edge for edge in self.edges}

    @cached_property
    def _node_index(self) -> Dict[str, int]:
        return {node: i for i, node in enumerate(self.nodes)}

    @property
    def edge_ids(self) -> Tuple[str, ...]:
        return tuple(edge.id for edge in self.edges)

    def has_edge(self, edge_id: str) -> bool:
        return edge_id in self._by_id

    def edge(self, edge_id: str) -> Edge:
        """Look up an edge by id (KeyError if unknown)"""
        return self._by_id[edge_id]

    def in_edges(self, node: str) -> Tuple[Edge, ...]:
        return tuple(edge for edge in self.edges if edge.head == node)

    def out_edges(self, node: str) -> Tuple[Edge, ...]:
        return tuple(edge for edge in self.edges if edge.tail == node)

    def to_networkx(self) -> nx.MultiDiGraph:
        """Multigraph view keyed by edge id"""
        graph = nx.MultiDiGraph()
        graph.add_nodes_from(self.nodes)
        for edge in self.edges:
            graph.add_edge(edge.tail, edge.head, key=edge.id, capacity=edge.capacity)
        return graph

    def capacity_digraph(self) -> nx.DiGraph:
        """Simple digraph with parallel edge capacities summed"""
        graph = nx.DiGraph()
        graph.add_nodes_from(self.nodes)
        for edge in self.edges:
            if graph.has_edge(edge.tail, edge.head):
                graph[edge.tail][edge.head]["capacity"] += edge.capacity
            else:
                graph.add_edge(edge.tail, edge.head, capacity=edge.capacity)
        return graph

    def topological_nodes(self) -> List[str]:
        """
        Deterministic topological order, ties broken by declaration order

        Raises:
            networkx.NetworkXUnfeasible: if the graph has a cycle
        """
        return list(
            nx.lexicographical_topological_sort(
                self.to_networkx(), key=lambda node: self._node_index[node]
            )
        )

    def topological_edges(self) -> List[Edge]:
        """Edges ordered by tail position, then declaration order"""
        position = {node: i for i, node in enumerate(self.topological_nodes())}
        return sorted(self.edges, key=lambda edge: position[edge.tail])


class BranchRole(NamedTuple):
    """Role of an edge inside a reduced instance"""

    role: str
    branch: Optional[int] = None


@dataclass(frozen=True)
class UnicastInstance:
    """A DAG with k ordered (source, terminal) pairs"""

    graph: NetworkGraph
    pairs: Tuple[Tuple[str, str], ...]

    kind = "unicast"

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(tuple(pair) for pair in self.pairs))

    @property
    def k(self) -> int:
        return len(self.pairs)

    @property
    def sources(self) -> Tuple[str, ...]:
        return tuple(source for source, _ in self.pairs)

    @property
    def terminals(self) -> Tuple[str, ...]:
        return tuple(terminal for _, terminal in self.pairs)


def normalize_adversary(sets: Iterable[Iterable[str]]) -> Tuple[FrozenSet[str], ...]:
    """Collapse duplicate sets and order them canonically"""
    unique = {frozenset(member) for member in sets}
    return tuple(sorted(unique, key=lambda member: sorted(member)))


@dataclass(frozen=True)
class NECInstance:
    """Single source, single terminal, adversary class A"""

    graph: NetworkGraph
    source: str
    terminal: str
    adversary: Tuple[FrozenSet[str], ...] = ()
    roles: Optional[Mapping[str, BranchRole]] = field(default=None, compare=False)

    kind = "nec"

    def __post_init__(self):
        object.__setattr__(self, "adversary", normalize_adversary(self.adversary))
        if self.roles is not None:
            object.__setattr__(
                self,
                "roles",
                {edge_id: BranchRole(*role) for edge_id, role in self.roles.items()},
            )

    @property
    def jammable_edges(self) -> FrozenSet[str]:
        return frozenset().union(*self.adversary) if self.adversary else frozenset()

    @property
    def branch_count(self) -> int:
        """Number of reduction branches (0 when roles are absent)"""
        if not self.roles:
            return 0
        return max((role.branch or 0) for role in self.roles.values())

    def role_edge(self, role: str, branch: int) -> str:
        """Edge id carrying `role` on `branch` (KeyError if absent)"""
        for edge_id, tag in (self.roles or {}).items():
            if tag.role == role and tag.branch == branch:
                return edge_id
        raise KeyError(f"no {role} edge on branch {branch}")


Instance = Union[UnicastInstance, NECInstance]


@dataclass(frozen=True)
class CutReport:
    """Min-cut value and a witness edge set"""

    value: int
    cut_edges: FrozenSet[str]


def min_cut(graph: NetworkGraph, src: str, dst: str) -> CutReport:
    """
    Minimum src-dst cut with integer capacities

    The witness is the terminal-side minimal cut: the edges entering the set
    of nodes that can still reach `dst` in the residual network of a maximum
    flow. That set does not depend on which maximum flow is found.

    Args:
        graph: Network graph
        src: Source node
        dst: Destination node

    Returns:
        CutReport (value 0 and empty cut when dst is unreachable)
    """
    if src == dst:
        raise ValueError("min_cut needs distinct endpoints")
    for node in (src, dst):
        if node not in graph.nodes:
            raise ValueError(f"unknown node: {node}")

    flow_graph = graph.capacity_digraph()
    if not nx.has_path(flow_graph, src, dst):
        logger.info(f"{dst} unreachable from {src}; cut value 0")
        return CutReport(value=0, cut_edges=frozenset())

    # networkx puts the nodes that can reach dst in the residual network on the sink side
    value, (_, dst_side) = nx.minimum_cut(flow_graph, src, dst)
    cut_edges = frozenset(
        edge.id for edge in graph.edges
        if edge.head in dst_side and edge.tail not in dst_side
    )
    return CutReport(value=int(value), cut_edges=cut_edges)


def unicast_cut_check(inst: UnicastInstance) -> List[int]:
    """
    Per-pair min-cut values; a 0 entry rules out unit rate for that pair

    Args:
        inst: Multiple-unicast instance

    Returns:
        List of min-cut values in pair order
    """
    values = [min_cut(inst.graph, source, terminal).value for source, terminal in inst.pairs]
    logger.info(f"Per-pair min-cuts: {values}")
    return values
