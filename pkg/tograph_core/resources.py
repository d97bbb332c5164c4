"""
Closed resource-type vocabulary, task-domain list, typed resources and
``<GEN>`` placeholders shared by every other module.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from threading import Lock
from typing import Iterable, Iterator, Optional

from .errors import MalformedPlaceholder, RegistryFrozen, UnknownResourceType

BASE_RESOURCE_TYPES = (
    "text",
    "tags",
    "html",
    "image",
    "video",
    "audio",
    "segmentation",
    "edge",
    "line",
    "hed",
    "canny",
    "scribble",
    "pose",
    "depth",
    "normal",
    "mask",
    "point",
    "bbox",
    "category",
)

BASE_DOMAINS = (
    "question-answering",
    "visual-question-answering",
    "natural-language-processing",
    "image-perception",
    "image-generation",
    "image-editing",
    "image-processing",
    "audio-perception",
    "audio-generation",
    "audio-editing",
    "video-question-answering",
    "video-perception",
    "video-processing",
    "video-generation",
    "video-editing",
)

# Values of these types are carried inline; everything else is a file path.
INLINE_TYPES = frozenset({"text", "tags", "category", "point", "bbox"})


class NameRegistry:
    """
    A closed set of identifiers that may only grow at configuration time.
    Once frozen, extending it with unseen names raises ``RegistryFrozen``.
    """

    def __init__(self, names: Iterable[str], kind: str):
        self.kind = kind
        self._names: list[str] = []
        self._frozen = False
        self._lock = Lock()
        for name in names:
            if name not in self._names:
                self._names.append(name)

    def __contains__(self, name: object) -> bool:
        return name in self._names

    def __iter__(self) -> Iterator[str]:
        return iter(list(self._names))

    def __len__(self) -> int:
        return len(self._names)

    @property
    def frozen(self) -> bool:
        return self._frozen

    def extend(self, names: Iterable[str]) -> None:
        with self._lock:
            new = [name for name in names if name not in self._names]
            if not new:
                return
            if self._frozen:
                raise RegistryFrozen(f"{self.kind} registry is frozen; cannot add {new}")
            for name in new:
                if not re.fullmatch(r"[a-z][a-z0-9_\-]*", name):
                    raise ValueError(f"Invalid {self.kind} identifier: {name!r}")
                self._names.append(name)

    def freeze(self) -> None:
        with self._lock:
            self._frozen = True

    def copy(self) -> "NameRegistry":
        return NameRegistry(self._names, self.kind)

    def __deepcopy__(self, memo) -> "NameRegistry":
        # Shared vocabulary; use copy() for an independent one.
        return self


RESOURCE_TYPES = NameRegistry(BASE_RESOURCE_TYPES, "resource type")
DOMAINS = NameRegistry(BASE_DOMAINS, "domain")


@dataclass(frozen=True, order=True)
class ResourceType:
    """A resource node of the tool graph: one entry of the type registry."""

    name: str
    # Registry the name was checked against; the global one when unset.
    registry: Optional[NameRegistry] = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        registry = self.registry if self.registry is not None else RESOURCE_TYPES
        if not isinstance(self.name, str) or self.name not in registry:
            raise UnknownResourceType(str(self.name))

    @property
    def inline(self) -> bool:
        return self.name in INLINE_TYPES

    def __str__(self) -> str:
        return self.name


def parse_resource_type(name: str, registry: Optional[NameRegistry] = None) -> ResourceType:
    """Resolve ``name`` against the registry (case-sensitive, exact match)."""
    if registry is None or registry is RESOURCE_TYPES:
        return ResourceType(name)
    return ResourceType(name, registry=registry)


_CANONICAL_RE = re.compile(r"<GEN>-([0-9]+)")
# Tool/type-qualified form such as ``<GEN>-detr-bbox-0``; normalized to the trailing id.
_COMPOUND_RE = re.compile(r"<GEN>-(?:[A-Za-z][A-Za-z0-9_]*-)+([0-9]+)")


def parse_placeholder(raw: str) -> int:
    """Extract the subtask id ``k`` from ``<GEN>-k`` (or its compound form)."""
    if not isinstance(raw, str):
        raise MalformedPlaceholder(str(raw))
    match = _CANONICAL_RE.fullmatch(raw) or _COMPOUND_RE.fullmatch(raw)
    if match is None:
        raise MalformedPlaceholder(raw)
    return int(match.group(1))


def format_placeholder(task_id: int) -> str:
    if task_id < 0:
        raise MalformedPlaceholder(f"<GEN>-{task_id}")
    return f"<GEN>-{task_id}"


def is_placeholder(value: object) -> bool:
    try:
        parse_placeholder(value)  # type: ignore[arg-type]
    except MalformedPlaceholder:
        return False
    return True


def is_generated(resource_id: str) -> bool:
    """True for ids of engine-produced resources (placeholders and step outputs)."""
    return isinstance(resource_id, str) and resource_id.startswith("<GEN>-")


@dataclass(frozen=True)
class GenPlaceholder:
    """
    A resource that does not exist yet. ``raw`` is always canonical; the
    producing tool, type and step index live in fields, not in the string.
    """

    task_id: int
    rtype: ResourceType
    tool: Optional[str] = None
    step: Optional[int] = None

    @property
    def raw(self) -> str:
        return format_placeholder(self.task_id)

    @property
    def resource_id(self) -> str:
        if self.step is None:
            return self.raw
        return f"{self.raw}.{self.step}"

    @classmethod
    def parse(cls, raw: str, rtype: ResourceType) -> "GenPlaceholder":
        return cls(task_id=parse_placeholder(raw), rtype=rtype)


@dataclass(frozen=True)
class Resource:
    """A typed value held in state memory: inline text or a file path."""

    id: str
    rtype: ResourceType
    value: Optional[str] = None
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def to_dict(self) -> dict:
        return {"id": self.id, "type": self.rtype.name, "value": self.value}

    @classmethod
    def from_dict(cls, data: dict) -> "Resource":
        return cls(
            id=str(data["id"]),
            rtype=parse_resource_type(data["type"]),
            value=data.get("value", data["id"]),
        )
