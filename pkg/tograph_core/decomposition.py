"""
Task decomposition protocol: parsing, validation, serialization, the
retrying ``decompose`` entry point and the parallel-stage schedule.
"""

from __future__ import annotations

import json
from threading import Lock
from typing import Any, List, Optional, Protocol, Sequence, Union

import networkx as nx
from pydantic import AliasChoices, BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import (
    DecompositionFailed,
    EmptyDecomposition,
    MalformedPlaceholder,
    ProtocolViolation,
    UnknownResourceType,
)
from .models import DecompositionResult, Subtask, TypedValue
from .resources import (
    DOMAINS,
    RESOURCE_TYPES,
    GenPlaceholder,
    NameRegistry,
    format_placeholder,
    parse_placeholder,
    parse_resource_type,
)

DEFAULT_DECOMPOSITION_RETRIES = 2


class ResourceDoc(BaseModel):
    model_config = ConfigDict(extra="forbid")

    type: str
    value: str


class SubtaskDoc(BaseModel):
    """Wire form of one subtask. ``task`` is accepted as an alias of ``domains``."""

    model_config = ConfigDict(extra="forbid")

    description: str = Field(min_length=1)
    domains: List[str] = Field(validation_alias=AliasChoices("domains", "task"))
    id: int = Field(ge=0)
    dep: List[int] = Field(default_factory=list)
    args: List[ResourceDoc] = Field(min_length=1)
    returns: List[ResourceDoc] = Field(min_length=1)

    @field_validator("dep", mode="before")
    @classmethod
    def _normalize_dep(cls, value: Any) -> Any:
        # Single ids and the ``-1`` "no dependency" marker both occur in model output.
        if isinstance(value, int) and not isinstance(value, bool):
            value = [value]
        if isinstance(value, list):
            return [item for item in value if item != -1]
        return value


def _violation_from(error: ValidationError, index: Optional[int] = None) -> ProtocolViolation:
    first = error.errors()[0]
    loc = ".".join(str(part) for part in first.get("loc", ()))
    prefix = f"[{index}]" if index is not None else ""
    field = f"{prefix}.{loc}" if prefix and loc else (prefix or loc or "document")
    return ProtocolViolation(field, first.get("msg", "invalid value"))


def _resolve_type(name: str, where: str, registry: NameRegistry):
    try:
        return parse_resource_type(name, registry)
    except UnknownResourceType:
        raise ProtocolViolation(where, f"unknown resource type {name!r}") from None


def _to_subtask(
    doc: SubtaskDoc,
    index: int,
    previous: Sequence[Subtask],
    registry: NameRegistry,
    domains: NameRegistry,
) -> Subtask:
    where = f"[{index}]"
    if doc.id != index:
        raise ProtocolViolation(f"{where}.id", f"ids must be contiguous from 0; expected {index}, got {doc.id}")

    for domain in doc.domains:
        if domain not in domains:
            raise ProtocolViolation(f"{where}.task", f"unknown task domain {domain!r}")

    for dep in doc.dep:
        if dep < 0 or dep >= doc.id:
            raise ProtocolViolation(f"{where}.dep", f"dependency {dep} must refer to an earlier subtask")

    args: List[TypedValue] = []
    for position, arg in enumerate(doc.args):
        rtype = _resolve_type(arg.type, f"{where}.args[{position}].type", registry)
        value = arg.value
        if value.startswith("<GEN>"):
            try:
                ref = parse_placeholder(value)
            except MalformedPlaceholder:
                raise ProtocolViolation(f"{where}.args[{position}].value", f"malformed placeholder {value!r}") from None
            if ref not in doc.dep:
                raise ProtocolViolation(
                    f"{where}.args[{position}].value", f"placeholder {value!r} refers to {ref}, which is not in dep"
                )
            if rtype not in previous[ref].return_types:
                raise ProtocolViolation(
                    f"{where}.args[{position}].value",
                    f"subtask {ref} does not generate a resource of type {rtype.name!r}",
                )
            value = format_placeholder(ref)
        args.append(TypedValue(rtype=rtype, value=value))

    returns: List[GenPlaceholder] = []
    for position, ret in enumerate(doc.returns):
        rtype = _resolve_type(ret.type, f"{where}.returns[{position}].type", registry)
        try:
            ref = parse_placeholder(ret.value)
        except MalformedPlaceholder:
            raise ProtocolViolation(f"{where}.returns[{position}].value", f"malformed placeholder {ret.value!r}") from None
        if ref != doc.id:
            raise ProtocolViolation(
                f"{where}.returns[{position}].value", f"return placeholder must name this subtask ({doc.id}), got {ref}"
            )
        returns.append(GenPlaceholder(task_id=doc.id, rtype=rtype))

    return Subtask(
        id=doc.id,
        description=doc.description,
        domains=tuple(doc.domains),
        dep=tuple(doc.dep),
        args=tuple(args),
        returns=tuple(returns),
    )


def parse_decomposition(
    doc: Union[str, list],
    source_request: str = "",
    registry: Optional[NameRegistry] = None,
    domains: Optional[NameRegistry] = None,
) -> DecompositionResult:
    """
    Parse and validate a decomposition document (JSON text or decoded list).

    Raises ``ProtocolViolation`` naming the offending field.
    """
    registry = registry if registry is not None else RESOURCE_TYPES
    domains = domains if domains is not None else DOMAINS

    if isinstance(doc, str):
        try:
            data = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ProtocolViolation("document", f"invalid JSON: {exc.msg}") from exc
    else:
        data = doc
    if not isinstance(data, list):
        raise ProtocolViolation("document", "a decomposition must be a JSON array of subtasks")

    subtasks: List[Subtask] = []
    for index, item in enumerate(data):
        try:
            parsed = SubtaskDoc.model_validate(item)
        except ValidationError as exc:
            raise _violation_from(exc, index) from exc
        subtasks.append(_to_subtask(parsed, index, subtasks, registry, domains))
    return DecompositionResult(subtasks=tuple(subtasks), source_request=source_request)


def to_protocol(result: DecompositionResult) -> list:
    return [
        {
            "description": subtask.description,
            "task": list(subtask.domains),
            "id": subtask.id,
            "dep": list(subtask.dep),
            "args": [{"type": arg.rtype.name, "value": arg.value} for arg in subtask.args],
            "returns": [{"type": ret.rtype.name, "value": ret.raw} for ret in subtask.returns],
        }
        for subtask in result.subtasks
    ]


def serialize_decomposition(result: DecompositionResult, indent: Optional[int] = None) -> str:
    return json.dumps(to_protocol(result), indent=indent)


class Decomposer(Protocol):
    """Produces raw protocol JSON text for a request."""

    exclusive: bool

    def decompose(self, request: str, prior_knowledge: bool = False) -> str: ...


_EXCLUSIVE_LOCK = Lock()


def decompose(
    request: str,
    decomposer: Decomposer,
    retries: int = DEFAULT_DECOMPOSITION_RETRIES,
    prior_knowledge: bool = False,
    registry: Optional[NameRegistry] = None,
    domains: Optional[NameRegistry] = None,
    logger=None,
) -> DecompositionResult:
    """
    Run the decomposer and re-validate its output. Malformed output is retried
    ``retries`` times before ``DecompositionFailed``; an empty list means the
    request could not be parsed and raises ``EmptyDecomposition``.
    """
    if not request or not request.strip():
        raise EmptyDecomposition("empty request")

    last_error: Optional[Exception] = None
    for attempt in range(retries + 1):
        if attempt and logger:
            logger.retry("decompose", attempt, retries, details={"error": str(last_error)})
        try:
            if getattr(decomposer, "exclusive", False):
                with _EXCLUSIVE_LOCK:
                    raw = decomposer.decompose(request, prior_knowledge=prior_knowledge)
            else:
                raw = decomposer.decompose(request, prior_knowledge=prior_knowledge)
        except EmptyDecomposition:
            raise
        except Exception as exc:  # pylint: disable=broad-except
            last_error = exc
            continue

        try:
            result = parse_decomposition(raw, source_request=request, registry=registry, domains=domains)
        except ProtocolViolation as exc:
            last_error = exc
            continue
        if not result.subtasks:
            raise EmptyDecomposition(f"request could not be decomposed: {request!r}")
        return result

    if logger:
        logger.error(f"Decomposition failed after {retries + 1} attempts: {last_error}")
    raise DecompositionFailed(f"decomposer output rejected after {retries + 1} attempts: {last_error}")


def subtask_schedule(result: DecompositionResult) -> List[List[int]]:
    """Longest-path layering: each stage holds subtasks whose deps all lie in earlier stages."""
    graph = nx.DiGraph()
    for subtask in result.subtasks:
        graph.add_node(subtask.id)
        for dep in subtask.dep:
            graph.add_edge(dep, subtask.id)
    return [sorted(stage) for stage in nx.topological_generations(graph)]
