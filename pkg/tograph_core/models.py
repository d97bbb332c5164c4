from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, TypedDict

from .errors import InvalidToolSpec, MalformedPlaceholder
from .resources import DOMAINS, GenPlaceholder, Resource, ResourceType, parse_placeholder, parse_resource_type


@dataclass(frozen=True)
class ToolArg:
    """A named, typed slot of a tool signature."""

    name: str
    rtype: ResourceType

    def to_dict(self) -> Dict[str, str]:
        return {"name": self.name, "type": self.rtype.name}


@dataclass(frozen=True)
class ToolSpec:
    """Tool node: description, typed args and a single typed return."""

    name: str
    description: str
    domains: Tuple[str, ...]
    args: Tuple[ToolArg, ...]
    ret: ToolArg

    def __post_init__(self) -> None:
        if not self.name:
            raise InvalidToolSpec("tool name must be non-empty")
        if not self.args:
            raise InvalidToolSpec(f"tool {self.name!r} must declare at least one argument")
        unknown = [domain for domain in self.domains if domain not in DOMAINS]
        if unknown:
            raise InvalidToolSpec(f"tool {self.name!r} has unknown domains {unknown}")

    @property
    def arg_types(self) -> frozenset:
        return frozenset(arg.rtype for arg in self.args)

    @property
    def ret_type(self) -> ResourceType:
        return self.ret.rtype

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "description": self.description,
            "domains": list(self.domains),
            "args": [arg.to_dict() for arg in self.args],
            "returns": self.ret.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ToolSpec":
        try:
            return cls(
                name=data["name"],
                description=data.get("description", ""),
                domains=tuple(data.get("domains", [])),
                args=tuple(
                    ToolArg(arg["name"], parse_resource_type(arg["type"])) for arg in data.get("args", [])
                ),
                ret=ToolArg(data["returns"]["name"], parse_resource_type(data["returns"]["type"])),
            )
        except (KeyError, TypeError) as exc:
            raise InvalidToolSpec(f"malformed tool record {data!r}: {exc}") from exc


@dataclass(frozen=True)
class TypedValue:
    """A subtask argument: a type plus a literal value or a ``<GEN>`` reference."""

    rtype: ResourceType
    value: str

    @property
    def placeholder_id(self) -> Optional[int]:
        try:
            return parse_placeholder(self.value)
        except MalformedPlaceholder:
            return None


@dataclass(frozen=True)
class Subtask:
    id: int
    description: str
    domains: Tuple[str, ...]
    dep: Tuple[int, ...]
    args: Tuple[TypedValue, ...]
    returns: Tuple[GenPlaceholder, ...]

    @property
    def arg_types(self) -> frozenset:
        return frozenset(arg.rtype for arg in self.args)

    @property
    def return_types(self) -> Tuple[ResourceType, ...]:
        return tuple(ret.rtype for ret in self.returns)


@dataclass(frozen=True)
class DecompositionResult:
    subtasks: Tuple[Subtask, ...]
    source_request: str = ""

    def __len__(self) -> int:
        return len(self.subtasks)

    def by_id(self, subtask_id: int) -> Subtask:
        return self.subtasks[subtask_id]


@dataclass(frozen=True)
class SolutionStep:
    tool: ToolSpec
    output: GenPlaceholder


@dataclass(frozen=True)
class SolutionPath:
    """An ordered tool sequence ending in the requested return type."""

    subtask_id: int
    steps: Tuple[SolutionStep, ...]
    terminal_type: ResourceType

    def __post_init__(self) -> None:
        if not self.steps:
            raise ValueError("ill-formed solution: a solution path needs at least one step")
        if self.steps[-1].tool.ret_type != self.terminal_type:
            raise ValueError("ill-formed solution: final step does not return the terminal type")

    @property
    def tool_names(self) -> Tuple[str, ...]:
        return tuple(step.tool.name for step in self.steps)

    def __len__(self) -> int:
        return len(self.steps)

    def renumbered(self, offset: int) -> "SolutionPath":
        steps = tuple(
            SolutionStep(step.tool, replace(step.output, step=offset + index))
            for index, step in enumerate(self.steps)
        )
        return replace(self, steps=steps)


@dataclass
class SearchStats:
    visited_tools: int = 0
    solutions_found: int = 0
    assessor_calls: int = 0
    cache_hits: int = 0

    def merge(self, other: "SearchStats") -> "SearchStats":
        return SearchStats(
            visited_tools=self.visited_tools + other.visited_tools,
            solutions_found=self.solutions_found + other.solutions_found,
            assessor_calls=self.assessor_calls + other.assessor_calls,
            cache_hits=self.cache_hits + other.cache_hits,
        )

    def to_dict(self) -> Dict[str, int]:
        return {
            "visited_tools": self.visited_tools,
            "solutions_found": self.solutions_found,
            "assessor_calls": self.assessor_calls,
            "cache_hits": self.cache_hits,
        }


@dataclass(frozen=True)
class ToolAssessment:
    tool: str
    score: int
    thought: str = ""


@dataclass(frozen=True)
class SolutionScore:
    solution: SolutionPath
    score: int
    thought: str = ""


@dataclass(frozen=True)
class BoundInput:
    """One filled argument: a resource id reference or an inline text value."""

    name: str
    rtype: ResourceType
    ref: Optional[str] = None
    text: Optional[str] = None

    @property
    def inline(self) -> bool:
        return self.ref is None

    def to_dict(self) -> Dict[str, Any]:
        if self.ref is not None:
            return {"name": self.name, "type": self.rtype.name, "ref": self.ref}
        return {"name": self.name, "type": self.rtype.name, "text": self.text}


@dataclass(frozen=True)
class BoundStep:
    tool: ToolSpec
    inputs: Tuple[BoundInput, ...]
    output: GenPlaceholder


@dataclass(frozen=True)
class ArgumentBinding:
    steps: Tuple[BoundStep, ...]

    def references(self) -> List[str]:
        return [item.ref for step in self.steps for item in step.inputs if item.ref is not None]


@dataclass(frozen=True)
class BoundSolution:
    path: SolutionPath
    binding: ArgumentBinding
    score: int = 0


@dataclass
class RankedPlan:
    """Optimal bound solution(s) for one subtask, one per declared return."""

    subtask_id: int
    solutions: List[BoundSolution]
    alternatives: List[SolutionScore] = field(default_factory=list)
    stats: SearchStats = field(default_factory=SearchStats)

    @property
    def optimal(self) -> BoundSolution:
        return self.solutions[0]


class ActionStatus(Enum):
    OK = "ok"
    FAILED = "failed"
    SKIPPED = "skipped"


@dataclass(frozen=True)
class Correction:
    arg: str
    stale_ref: str
    substituted_ref: str


@dataclass(frozen=True)
class Action:
    seq: int
    tool: ToolSpec
    inputs: Tuple[BoundInput, ...]
    output_id: str
    subtask_id: int
    stage: int = 0
    depends_on: Tuple[int, ...] = ()
    corrections: Tuple[Correction, ...] = ()
    # Last step of a bound solution; its output is a subtask result.
    final: bool = False

    @property
    def output_type(self) -> ResourceType:
        return self.tool.ret_type


@dataclass(frozen=True)
class ToolResult:
    output: Resource
    elapsed: float
    tool: str


@dataclass
class ActionRecord:
    seq: int
    tool: str
    subtask_id: int
    status: ActionStatus
    inputs: Tuple[BoundInput, ...] = ()
    output_id: str = ""
    output: Optional[Resource] = None
    error: Optional[str] = None
    started_at: float = 0.0
    ended_at: float = 0.0
    corrections: Tuple[Correction, ...] = ()

    @property
    def elapsed(self) -> float:
        return max(0.0, self.ended_at - self.started_at)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seq": self.seq,
            "tool": self.tool,
            "subtask_id": self.subtask_id,
            "inputs": [item.to_dict() for item in self.inputs],
            "output": self.output.to_dict() if self.output else {"id": self.output_id},
            "status": self.status.value,
            "error": self.error,
            "corrections": [correction.__dict__ for correction in self.corrections],
            "start": self.started_at,
            "end": self.ended_at,
        }


@dataclass
class ExecutionReport:
    records: List[ActionRecord] = field(default_factory=list)
    resources: List[Resource] = field(default_factory=list)
    wall_clock: float = 0.0
    critical_path: float = 0.0
    final_ids: List[str] = field(default_factory=list)

    @property
    def statuses(self) -> List[ActionStatus]:
        return [record.status for record in self.records]

    def produced(self) -> List[Resource]:
        return [record.output for record in self.records if record.output is not None]

    def final_resources(self) -> List[Resource]:
        """Outputs of the final step of every bound solution that completed."""
        finals = set(self.final_ids)
        return [
            record.output
            for record in self.records
            if record.output_id in finals and record.status is ActionStatus.OK and record.output is not None
        ]

    @property
    def all_failed(self) -> bool:
        return bool(self.records) and not any(r.status is ActionStatus.OK for r in self.records)

    def write_trace(self, path: str | Path) -> Path:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        with target.open("w", encoding="utf-8") as handle:
            for record in self.records:
                handle.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")
        return target


class PipelineState(TypedDict, total=False):
    request: str
    resources: List[Resource]
    decomposition: DecompositionResult
    schedule: List[List[int]]
    plans: Dict[int, RankedPlan]
    planning_errors: Dict[int, str]
    actions: List[Action]
    report: ExecutionReport
    response: str
    failed_stage: str
    error: str
    dry_run: bool
