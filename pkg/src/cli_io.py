"""
Document I/O - JSON instance and code documents with schema validation and
canonical, byte-stable serialization
"""

import json
import logging
from fractions import Fraction
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np
from schema import And, Optional as Maybe, Or, Schema, SchemaError

from .errors import CodeMismatchError, DocumentError
from .netcode_engine import Counterexample, LocalFunction, NetworkCode, check_code_shape
from .network_model import (
    INTERNAL_ROLE,
    ROLE_TAGS,
    BranchRole,
    Edge,
    Instance,
    NECInstance,
    NetworkGraph,
    UnicastInstance,
)
from .validators import validate_instance

logger = logging.getLogger(__name__)

FORMAT_VERSION = "1"


def _positive_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool) and value >= 1


def _natural(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool) and value >= 0


NAME = And(str, len, error="ids must be non-empty strings")

EDGE_SCHEMA = Schema({
    "id": NAME,
    "from": NAME,
    "to": NAME,
    Maybe("capacity", default=1): And(int, _positive_int, error="capacity must be a positive integer"),
})

COMMON = {
    "format_version": FORMAT_VERSION,
    "nodes": [NAME],
    "edges": [EDGE_SCHEMA],
}

UNICAST_SCHEMA = Schema({
    **COMMON,
    "kind": "unicast",
    "pairs": [{"source": NAME, "terminal": NAME}],
})

NEC_SCHEMA = Schema({
    **COMMON,
    "kind": "nec",
    "source": NAME,
    "terminal": NAME,
    "adversary": [[NAME]],
    Maybe("roles"): {
        str: {
            "role": Or(*ROLE_TAGS, INTERNAL_ROLE),
            "branch": Or(None, And(int, _positive_int)),
        }
    },
})

FUNCTION_SCHEMA = {
    "inputs": [NAME],
    "table": [And(int, _natural, error="table entries must be nonnegative integers")],
}

CODE_SCHEMA = Schema({
    "format_version": FORMAT_VERSION,
    "n": And(int, _positive_int, error="n must be a positive integer"),
    "message_bits": And(int, _natural, error="message_bits must be a nonnegative integer"),
    "edge_functions": {str: FUNCTION_SCHEMA},
    "decoders": {str: FUNCTION_SCHEMA},
})


def canonical_json(document) -> str:
    """Sorted keys, two-space indent, trailing newline"""
    return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _load_json(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _validate(schema: Schema, document: Dict, what: str) -> Dict:
    try:
        return schema.validate(document)
    except SchemaError as exc:
        detail = " / ".join(line for line in str(exc).splitlines() if line.strip())
        raise DocumentError(f"{what} schema violation: {detail}") from exc


def instance_from_document(document: Dict) -> Instance:
    """
    Build an instance from a decoded document

    Raises:
        DocumentError: unknown kind, schema violation or invalid instance
    """
    if not isinstance(document, dict):
        raise DocumentError("instance document must be a JSON object")
    kind = document.get("kind")
    if kind == "unicast":
        document = _validate(UNICAST_SCHEMA, document, "instance")
    elif kind == "nec":
        document = _validate(NEC_SCHEMA, document, "instance")
    else:
        raise DocumentError(f"unknown kind: {kind!r}")

    graph = NetworkGraph(
        nodes=document["nodes"],
        edges=[Edge(e["id"], e["from"], e["to"], e["capacity"]) for e in document["edges"]],
    )
    if kind == "unicast":
        inst = UnicastInstance(
            graph=graph,
            pairs=[(pair["source"], pair["terminal"]) for pair in document["pairs"]],
        )
    else:
        roles = document.get("roles")
        inst = NECInstance(
            graph=graph,
            source=document["source"],
            terminal=document["terminal"],
            adversary=document["adversary"],
            roles=None if roles is None else {
                edge_id: BranchRole(tag["role"], tag["branch"]) for edge_id, tag in roles.items()
            },
        )

    report = validate_instance(inst)
    if not report.is_valid:
        raise DocumentError("; ".join(report.errors))
    return inst


def instance_to_document(inst: Instance) -> Dict:
    """Plain-data document for an instance"""
    document = {
        "format_version": FORMAT_VERSION,
        "kind": inst.kind,
        "nodes": list(inst.graph.nodes),
        "edges": [
            {"id": e.id, "from": e.tail, "to": e.head, "capacity": e.capacity}
            for e in inst.graph.edges
        ],
    }
    if isinstance(inst, UnicastInstance):
        document["pairs"] = [{"source": s, "terminal": t} for s, t in inst.pairs]
        return document

    document["source"] = inst.source
    document["terminal"] = inst.terminal
    document["adversary"] = [sorted(member) for member in inst.adversary]
    if inst.roles is not None:
        document["roles"] = {
            edge_id: {"role": tag.role, "branch": tag.branch} for edge_id, tag in inst.roles.items()
        }
    return document


def parse_instance(text: str) -> Instance:
    return instance_from_document(_load_json(text))


def serialize_instance(inst: Instance) -> str:
    return canonical_json(instance_to_document(inst))


def code_from_document(document: Dict, instance: Optional[Instance] = None) -> NetworkCode:
    """
    Build a code from a decoded document, checked against `instance` if given

    Raises:
        DocumentError: schema violation or code/instance mismatch
    """
    if not isinstance(document, dict):
        raise DocumentError("code document must be a JSON object")
    document = _validate(CODE_SCHEMA, document, "code")

    def functions(section: Dict) -> Dict[str, LocalFunction]:
        return {key: LocalFunction(fn["inputs"], fn["table"]) for key, fn in section.items()}

    code = NetworkCode(
        n=document["n"],
        message_bits=document["message_bits"],
        edge_functions=functions(document["edge_functions"]),
        decoders=functions(document["decoders"]),
    )
    if instance is not None:
        try:
            check_code_shape(code, instance)
        except CodeMismatchError as exc:
            raise DocumentError(str(exc)) from exc
    return code


def code_to_document(code: NetworkCode) -> Dict:
    def section(functions) -> Dict:
        return {
            key: {"inputs": list(fn.inputs), "table": list(fn.table)}
            for key, fn in functions.items()
        }

    return {
        "format_version": FORMAT_VERSION,
        "n": code.n,
        "message_bits": code.message_bits,
        "edge_functions": section(code.edge_functions),
        "decoders": section(code.decoders),
    }


def parse_code(text: str, instance: Optional[Instance] = None) -> NetworkCode:
    return code_from_document(_load_json(text), instance)


def serialize_code(code: NetworkCode) -> str:
    return canonical_json(code_to_document(code))


def load_instance(path: Union[str, Path]) -> Instance:
    """Read and parse an instance file"""
    path = Path(path)
    logger.info(f"Loading instance from {path}")
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        logger.error(f"File not found: {path}")
        raise
    return parse_instance(text)


def load_code(path: Union[str, Path], instance: Optional[Instance] = None) -> NetworkCode:
    """Read and parse a code file"""
    path = Path(path)
    logger.info(f"Loading code from {path}")
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        logger.error(f"File not found: {path}")
        raise
    return parse_code(text, instance)


def write_text(path: Union[str, Path], text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.info(f"💾 Wrote {path}")
    return path


def counterexample_to_dict(counterexample: Counterexample) -> Dict:
    message = counterexample.message
    return {
        "message": list(message) if isinstance(message, tuple) else message,
        "pattern": counterexample.pattern.as_dict(),
        "pattern_index": counterexample.pattern_index,
        "decoded": dict(counterexample.decoded),
    }


def plain(value):
    """Recursively convert report values into JSON-ready data"""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, (set, frozenset)):
        return sorted(plain(item) for item in value)
    if isinstance(value, tuple):
        return [plain(item) for item in value]
    if isinstance(value, list):
        return [plain(item) for item in value]
    if isinstance(value, dict):
        return {str(key): plain(item) for key, item in value.items()}
    return value
