"""
Planner quality metrics over a benchmark of annotated instructions.

Each case gets five predicates:

    F  the predicted tools include one outside ``allowed_tools``
    H  some acceptable tool set is contained in the predicted tools
    P  a bound argument references a resource that does not exist
    Q  every bound argument has its tool's declared type
    W  H and not P and Q, and execution produced the expected final types

Aggregates are exact fractions of cases: IR = F, NR = H, HR = P, CR = Q,
SE = W, with SE also broken down by difficulty tier.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Collection, Dict, FrozenSet, List, Optional, Sequence

import numpy as np

from .errors import BenchmarkFormatError, EmptyBenchmark, UnknownGoldTool
from .models import BoundSolution, ExecutionReport
from .resources import Resource, ResourceType, format_placeholder, parse_resource_type


class Difficulty(str, Enum):
    EASY = "easy"
    MEDIUM = "medium"
    HARD = "hard"

    @classmethod
    def for_size(cls, necessary: int) -> "Difficulty":
        if necessary < 2:
            return cls.EASY
        if necessary <= 3:
            return cls.MEDIUM
        return cls.HARD


@dataclass(frozen=True)
class GoldAnnotation:
    acceptable_tool_sets: tuple
    allowed_tools: FrozenSet[str]
    expected_final_types: tuple

    def __post_init__(self) -> None:
        if not self.acceptable_tool_sets:
            raise BenchmarkFormatError("gold annotation needs at least one acceptable tool set")
        for tool_set in self.acceptable_tool_sets:
            if not tool_set:
                raise BenchmarkFormatError("acceptable tool sets must not be empty")
            extra = set(tool_set) - set(self.allowed_tools)
            if extra:
                raise BenchmarkFormatError(f"acceptable set uses tools outside allowed_tools: {sorted(extra)}")

    @property
    def necessary_size(self) -> int:
        return min(len(tool_set) for tool_set in self.acceptable_tool_sets)

    def check_registry(self, registry: Collection[str]) -> None:
        for name in sorted(self.allowed_tools):
            if name not in registry:
                raise UnknownGoldTool(name)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GoldAnnotation":
        acceptable = tuple(frozenset(tool_set) for tool_set in data["acceptable_tool_sets"])
        allowed = frozenset(data.get("allowed_tools") or set().union(*acceptable))
        return cls(
            acceptable_tool_sets=acceptable,
            allowed_tools=allowed,
            expected_final_types=tuple(parse_resource_type(name) for name in data["expected_final_types"]),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "acceptable_tool_sets": [sorted(tool_set) for tool_set in self.acceptable_tool_sets],
            "allowed_tools": sorted(self.allowed_tools),
            "expected_final_types": [rtype.name for rtype in self.expected_final_types],
        }


@dataclass(frozen=True)
class BenchmarkCase:
    id: str
    instruction: str
    difficulty: Difficulty
    initial_resources: tuple
    gold: GoldAnnotation

    def __post_init__(self) -> None:
        expected = Difficulty.for_size(self.gold.necessary_size)
        if Difficulty(self.difficulty) is not expected:
            raise BenchmarkFormatError(
                f"case {self.id}: difficulty {Difficulty(self.difficulty).value!r} does not match "
                f"{self.gold.necessary_size} necessary tool(s) ({expected.value})"
            )

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BenchmarkCase":
        gold = GoldAnnotation.from_dict(data["gold"])
        difficulty = data.get("difficulty") or Difficulty.for_size(gold.necessary_size).value
        return cls(
            id=str(data["id"]),
            instruction=data["instruction"],
            difficulty=Difficulty(difficulty),
            initial_resources=tuple(Resource.from_dict(item) for item in data.get("initial_resources", [])),
            gold=gold,
        )


@dataclass(frozen=True)
class CaseRecord:
    case_id: str
    difficulty: Difficulty
    F: bool
    H: bool
    P: bool
    Q: bool
    W: bool
    predicted_tools: tuple = ()
    visited_tools: int = 0
    error: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "case": self.case_id,
            "difficulty": self.difficulty.value,
            "F": self.F,
            "H": self.H,
            "P": self.P,
            "Q": self.Q,
            "W": self.W,
            "predicted_tools": list(self.predicted_tools),
            "visited_tools": self.visited_tools,
            "error": self.error,
        }


@dataclass
class EvalReport:
    records: List[CaseRecord]
    IR: Fraction
    NR: Fraction
    HR: Fraction
    CR: Fraction
    SE: Fraction
    se_by_difficulty: Dict[Difficulty, Optional[Fraction]] = field(default_factory=dict)
    mean_visited_tools: float = 0.0
    strategy: str = ""

    def to_dict(self) -> Dict[str, Any]:
        def _num(value: Optional[Fraction]) -> Optional[float]:
            return None if value is None else float(value)

        return {
            "strategy": self.strategy,
            "cases": len(self.records),
            "IR": _num(self.IR),
            "NR": _num(self.NR),
            "HR": _num(self.HR),
            "CR": _num(self.CR),
            "SE": _num(self.SE),
            "SE_by_difficulty": {tier.value: _num(value) for tier, value in self.se_by_difficulty.items()},
            "mean_visited_tools": self.mean_visited_tools,
            "records": [record.to_dict() for record in self.records],
        }


def _predicted_tools(predicted: Sequence[BoundSolution]) -> List[str]:
    return [step.tool.name for bound in predicted for step in bound.path.steps]


def judge_case(
    case: BenchmarkCase,
    predicted: Sequence[BoundSolution],
    report: Optional[ExecutionReport],
    registry: Optional[Collection[str]] = None,
    visited_tools: int = 0,
    error: Optional[str] = None,
) -> CaseRecord:
    """Pure function of its inputs; an empty prediction scores H=False and W=False."""
    if registry is not None:
        case.gold.check_registry(registry)

    tools = _predicted_tools(predicted)
    tool_set = set(tools)

    known: Dict[str, set] = {}
    for resource in case.initial_resources:
        known.setdefault(resource.id, set()).add(resource.rtype)
    for bound in predicted:
        known.setdefault(format_placeholder(bound.path.subtask_id), set()).add(bound.path.terminal_type)
        for step in bound.path.steps:
            known.setdefault(step.output.resource_id, set()).add(step.output.rtype)

    hallucinated = False
    consistent = True
    for bound in predicted:
        for step in bound.binding.steps:
            declared = {arg.name: arg.rtype for arg in step.tool.args}
            for item in step.inputs:
                if declared.get(item.name) != item.rtype:
                    consistent = False
                if item.ref is None:
                    if item.rtype.name != "text":
                        hallucinated = True
                    continue
                types = known.get(item.ref)
                if types is None:
                    hallucinated = True
                elif item.rtype not in types:
                    consistent = False

    F = bool(tool_set - case.gold.allowed_tools)
    H = any(set(acceptable) <= tool_set for acceptable in case.gold.acceptable_tool_sets)
    P = hallucinated
    Q = consistent

    solved = False
    if report is not None:
        produced = [resource.rtype for resource in report.final_resources()]
        solved = _covers(produced, case.gold.expected_final_types)
    W = H and not P and Q and solved
    return CaseRecord(
        case_id=case.id,
        difficulty=Difficulty(case.difficulty),
        F=F,
        H=H,
        P=P,
        Q=Q,
        W=W,
        predicted_tools=tuple(tools),
        visited_tools=visited_tools,
        error=error,
    )


def _covers(produced: Sequence[ResourceType], expected: Sequence[ResourceType]) -> bool:
    remaining = list(produced)
    for rtype in expected:
        if rtype not in remaining:
            return False
        remaining.remove(rtype)
    return True


def _ratio(records: Sequence[CaseRecord], predicate: str) -> Fraction:
    return Fraction(sum(1 for record in records if getattr(record, predicate)), len(records))


def aggregate(records: Sequence[CaseRecord], strategy: str = "") -> EvalReport:
    if not records:
        raise EmptyBenchmark("cannot aggregate an empty set of case records")
    by_tier: Dict[Difficulty, Optional[Fraction]] = {}
    for tier in Difficulty:
        subset = [record for record in records if record.difficulty is tier]
        by_tier[tier] = _ratio(subset, "W") if subset else None
    return EvalReport(
        records=list(records),
        IR=_ratio(records, "F"),
        NR=_ratio(records, "H"),
        HR=_ratio(records, "P"),
        CR=_ratio(records, "Q"),
        SE=_ratio(records, "W"),
        se_by_difficulty=by_tier,
        mean_visited_tools=float(np.mean([record.visited_tools for record in records])),
        strategy=strategy,
    )


def load_suite(path: str | Path, registry: Optional[Collection[str]] = None) -> List[BenchmarkCase]:
    """Read a JSON-lines suite; blank lines and ``#`` comments are ignored."""
    cases: List[BenchmarkCase] = []
    with Path(path).open("r", encoding="utf-8") as handle:
        for number, line in enumerate(handle, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                case = BenchmarkCase.from_dict(json.loads(line))
            except BenchmarkFormatError as exc:
                raise BenchmarkFormatError(f"{path}:{number}: {exc}") from exc
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise BenchmarkFormatError(f"{path}:{number}: {exc}") from exc
            if registry is not None:
                case.gold.check_registry(registry)
            cases.append(case)
    return cases


def _cell(value: Optional[Fraction]) -> str:
    return "-" if value is None else f"{float(value):.2f}"


TABLE_COLUMNS = ("IR↓", "NR↑", "HR↓", "CR↑", "SE", "SE-easy", "SE-medium", "SE-hard", "visited")


def format_table(reports: Sequence[EvalReport]) -> str:
    """Aligned text table, one row per report."""
    header = ("strategy",) + TABLE_COLUMNS
    rows = [header]
    for report in reports:
        rows.append(
            (
                report.strategy or "-",
                _cell(report.IR),
                _cell(report.NR),
                _cell(report.HR),
                _cell(report.CR),
                _cell(report.SE),
                _cell(report.se_by_difficulty.get(Difficulty.EASY)),
                _cell(report.se_by_difficulty.get(Difficulty.MEDIUM)),
                _cell(report.se_by_difficulty.get(Difficulty.HARD)),
                f"{report.mean_visited_tools:.2f}",
            )
        )
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(widths[i]) if i == 0 else cell.rjust(widths[i]) for i, cell in enumerate(row))
             for row in rows]
    return "\n".join(line.rstrip() for line in lines) + "\n"
