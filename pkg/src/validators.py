"""
Instance validation - structural checks for unicast and NEC instances
"""

from dataclasses import dataclass, field
from typing import Dict, List, Tuple, Union
import logging

import networkx as nx

from .network_model import (
    INTERNAL_ROLE,
    ROLE_TAGS,
    NECInstance,
    NetworkGraph,
    UnicastInstance,
)

logger = logging.getLogger(__name__)


@dataclass
class ValidationReport:
    """Every violated invariant, empty iff the instance is valid"""

    errors: List[str] = field(default_factory=list)

    @property
    def is_valid(self) -> bool:
        return not self.errors


class InstanceValidator:
    """Structural validators for networks and instances"""

    # role -> (tail, head) in terms of branch landmarks
    ROLE_WIRING = {
        "a": ("source", "u"),
        "x": ("u", "B"),
        "y": ("u", "B"),
        "z": ("u", "s_i"),
        "z'": ("t_i", "B"),
        "b": ("B", "terminal"),
    }

    @staticmethod
    def validate_graph(graph: NetworkGraph) -> Tuple[bool, List[str]]:
        """
        Validate node/edge references, capacities and acyclicity

        Args:
            graph: Network graph

        Returns:
            (is_valid, list_of_errors)
        """
        errors = []

        seen_nodes = set()
        for node in graph.nodes:
            if not isinstance(node, str) or not node:
                errors.append(f"node ids must be non-empty strings, got {node!r}")
            elif node in seen_nodes:
                errors.append(f"duplicate node id: {node}")
            seen_nodes.add(node)

        seen_edges = set()
        for edge in graph.edges:
            if edge.id in seen_edges:
                errors.append(f"duplicate edge id: {edge.id}")
            seen_edges.add(edge.id)
            for end in (edge.tail, edge.head):
                if end not in seen_nodes:
                    errors.append(f"edge {edge.id} references unknown node {end}")
            capacity = edge.capacity
            if isinstance(capacity, bool) or not isinstance(capacity, int) or capacity < 1:
                errors.append(f"edge {edge.id} capacity must be a positive integer, got {capacity!r}")

        if not errors and not nx.is_directed_acyclic_graph(graph.to_networkx()):
            errors.append("cycle detected")

        return len(errors) == 0, errors

    @staticmethod
    def validate_unicast(inst: UnicastInstance) -> Tuple[bool, List[str]]:
        """
        Validate the pairing of a multiple-unicast instance

        Args:
            inst: Unicast instance

        Returns:
            (is_valid, list_of_errors)
        """
        errors = []
        if inst.k < 1:
            errors.append("at least one source/terminal pair required")

        endpoints = [node for pair in inst.pairs for node in pair]
        for node in endpoints:
            if node not in inst.graph.nodes:
                errors.append(f"pair endpoint {node} is not a graph node")
        if len(set(endpoints)) != len(endpoints):
            errors.append("pair endpoints must be distinct")

        return len(errors) == 0, errors

    @staticmethod
    def validate_nec(inst: NECInstance) -> Tuple[bool, List[str]]:
        """
        Validate endpoints and the adversary class of an NEC instance

        Args:
            inst: NEC instance

        Returns:
            (is_valid, list_of_errors)
        """
        errors = []
        for node in (inst.source, inst.terminal):
            if node not in inst.graph.nodes:
                errors.append(f"endpoint {node} is not a graph node")
        if inst.source == inst.terminal:
            errors.append("source and terminal must differ")

        for member in inst.adversary:
            for edge_id in sorted(member):
                if not inst.graph.has_edge(edge_id):
                    errors.append(f"unknown edge in adversary: {edge_id}")

        return len(errors) == 0, errors

    @staticmethod
    def validate_roles(inst: NECInstance) -> Tuple[bool, List[str]]:
        """
        Validate branch roles against the gadget wiring

        Args:
            inst: NEC instance carrying roles

        Returns:
            (is_valid, list_of_errors)
        """
        if inst.roles is None:
            return True, []

        errors = []
        branches: Dict[int, Dict[str, str]] = {}
        for edge_id, tag in inst.roles.items():
            if not inst.graph.has_edge(edge_id):
                errors.append(f"unknown edge in roles: {edge_id}")
                continue
            if tag.role == INTERNAL_ROLE:
                continue
            if tag.role not in ROLE_TAGS:
                errors.append(f"edge {edge_id} has unknown role {tag.role!r}")
                continue
            if not isinstance(tag.branch, int) or isinstance(tag.branch, bool) or tag.branch < 1:
                errors.append(f"edge {edge_id} needs a positive branch index")
                continue
            slots = branches.setdefault(tag.branch, {})
            if tag.role in slots:
                errors.append(f"branch {tag.branch} has more than one {tag.role} edge")
            slots[tag.role] = edge_id

        if errors:
            return False, errors

        for branch in sorted(branches):
            slots = branches[branch]
            missing = [role for role in ROLE_TAGS if role not in slots]
            if missing:
                errors.append(f"branch {branch} missing roles: {', '.join(missing)}")
                continue
            errors.extend(InstanceValidator._check_branch_wiring(inst, branch, slots))

        if branches and sorted(branches) != list(range(1, len(branches) + 1)):
            errors.append("branch indices must be 1..k")

        return len(errors) == 0, errors

    @staticmethod
    def _check_branch_wiring(inst: NECInstance, branch: int, slots: Dict[str, str]) -> List[str]:
        """Check one branch against ROLE_WIRING"""
        graph = inst.graph
        edges = {role: graph.edge(edge_id) for role, edge_id in slots.items()}
        landmarks = {
            "source": inst.source,
            "terminal": inst.terminal,
            "u": edges["a"].head,
            "B": edges["x"].head,
            "s_i": edges["z"].head,
            "t_i": edges["z'"].tail,
        }

        errors = []
        for role, (tail, head) in InstanceValidator.ROLE_WIRING.items():
            edge = edges[role]
            if (edge.tail, edge.head) != (landmarks[tail], landmarks[head]):
                errors.append(
                    f"branch {branch}: {role} edge {edge.id} must run "
                    f"{landmarks[tail]}->{landmarks[head]}"
                )
            if edge.capacity != 1:
                errors.append(f"branch {branch}: {role} edge {edge.id} must have unit capacity")
        return errors


def validate_instance(inst: Union[UnicastInstance, NECInstance]) -> ValidationReport:
    """
    Collect every violated invariant of an instance

    Args:
        inst: Unicast or NEC instance

    Returns:
        ValidationReport (violations are data, never raised)
    """
    _, errors = InstanceValidator.validate_graph(inst.graph)

    if isinstance(inst, UnicastInstance):
        _, extra = InstanceValidator.validate_unicast(inst)
        errors.extend(extra)
    else:
        _, extra = InstanceValidator.validate_nec(inst)
        errors.extend(extra)
        if not errors:
            _, extra = InstanceValidator.validate_roles(inst)
            errors.extend(extra)

    if errors:
        logger.warning(f"Instance invalid: {len(errors)} violation(s)")
    return ValidationReport(errors=errors)
