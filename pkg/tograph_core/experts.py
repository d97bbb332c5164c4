"""
Tool assessment, solution ranking and argument binding.

The expert implementations (deterministic or LLM-backed) live in
``tograph_agents``; everything here treats them as untrusted and validates
what they return before the planner accepts it.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Protocol, Sequence, Tuple

from .errors import (
    AssessorProtocolError,
    AssessorUnavailable,
    BindingHallucination,
    ExpertProtocolError,
    ExpertUnavailable,
    TypeMismatch,
    UnbindableArgument,
)
from .models import (
    ArgumentBinding,
    BoundStep,
    SolutionPath,
    SolutionScore,
    Subtask,
    ToolAssessment,
    ToolSpec,
)
from .resources import Resource, ResourceType

DEFAULT_EXPERT_RETRIES = 2
ALTERNATIVE_THRESHOLD = 3
SCORE_RANGE = range(1, 6)


class ToolAssessor(Protocol):
    name: str

    def assess(self, task: Subtask, tool: ToolSpec) -> ToolAssessment: ...


class SolutionExpert(Protocol):
    name: str

    def score_solutions(
        self,
        task: Subtask,
        request: str,
        solutions: Sequence[SolutionPath],
        rendered: Sequence[str],
    ) -> List[SolutionScore]: ...


class ResourceExpert(Protocol):
    name: str

    def bind(
        self,
        task: Optional[Subtask],
        request: str,
        solution: SolutionPath,
        available: Sequence[Resource],
    ) -> ArgumentBinding: ...


def _valid_score(score: object) -> bool:
    return isinstance(score, int) and not isinstance(score, bool) and score in SCORE_RANGE


def assess_tool(
    task: Subtask,
    tool: ToolSpec,
    assessor: ToolAssessor,
    retries: int = DEFAULT_EXPERT_RETRIES,
) -> ToolAssessment:
    """Score ``tool`` for ``task`` on the 1-5 rubric; out-of-range answers are rejected."""
    last_error: Optional[Exception] = None
    for _ in range(retries + 1):
        try:
            assessment = assessor.assess(task, tool)
        except AssessorProtocolError as exc:
            last_error = exc
            continue
        except Exception as exc:  # pylint: disable=broad-except
            last_error = AssessorUnavailable(f"assessor {getattr(assessor, 'name', assessor)!r} failed: {exc}")
            continue
        if not isinstance(assessment, ToolAssessment) or not _valid_score(assessment.score):
            score = getattr(assessment, "score", assessment)
            last_error = AssessorProtocolError(f"score for {tool.name!r} must be an integer in [1, 5], got {score!r}")
            continue
        return assessment
    raise last_error  # type: ignore[misc]


def format_solution(solution: SolutionPath) -> str:
    """One line per step: ``name(description): argtypes -> rettype``."""
    if not solution.steps:
        raise ValueError("ill-formed solution: a solution path needs at least one step")
    lines = []
    for step in solution.steps:
        tool = step.tool
        arg_types = ", ".join(arg.rtype.name for arg in tool.args)
        lines.append(f"{tool.name}({tool.description}): {arg_types} -> {tool.ret_type.name}")
    return "\n".join(lines)


def _ranking_key(item: SolutionScore) -> Tuple[int, int, Tuple[str, ...]]:
    return (-item.score, len(item.solution), item.solution.tool_names)


def rank_solutions(
    task: Subtask,
    request: str,
    solutions: Sequence[SolutionPath],
    expert: SolutionExpert,
    retries: int = DEFAULT_EXPERT_RETRIES,
) -> List[SolutionScore]:
    """
    Order solutions best first: by expert score, then fewer steps, then tool
    names. The result is a permutation of ``solutions``.
    """
    if not solutions:
        raise ValueError("rank_solutions needs at least one solution")
    rendered = [format_solution(solution) for solution in solutions]

    last_error: Optional[Exception] = None
    for _ in range(retries + 1):
        try:
            scores = expert.score_solutions(task, request, solutions, rendered)
        except ExpertProtocolError as exc:
            last_error = exc
            continue
        except Exception as exc:  # pylint: disable=broad-except
            last_error = ExpertUnavailable(f"solution expert {getattr(expert, 'name', expert)!r} failed: {exc}")
            continue
        problem = _check_scores(solutions, scores)
        if problem:
            last_error = ExpertProtocolError(problem)
            continue
        return sorted(scores, key=_ranking_key)
    raise last_error  # type: ignore[misc]


def _check_scores(solutions: Sequence[SolutionPath], scores: Sequence[SolutionScore]) -> Optional[str]:
    if len(scores) != len(solutions):
        return f"expected {len(solutions)} scores, got {len(scores)}"
    for solution, item in zip(solutions, scores):
        if not isinstance(item, SolutionScore) or item.solution is not solution:
            return "scores must be returned in solution order"
        if not _valid_score(item.score):
            return f"solution score must be an integer in [1, 5], got {item.score!r}"
    return None


def validate_binding(
    solution: SolutionPath,
    binding: ArgumentBinding,
    available: Sequence[Resource],
) -> None:
    """
    Reject bindings that reference resources which do not exist or whose type
    differs from the declared argument type. Inline values are only valid for
    ``text`` arguments.
    """
    known: Dict[str, set] = {}
    for resource in available:
        known.setdefault(resource.id, set()).add(resource.rtype)

    if not isinstance(binding, ArgumentBinding) or len(binding.steps) != len(solution.steps):
        raise ExpertProtocolError("binding must have exactly one entry per solution step")

    for step, bound in zip(solution.steps, binding.steps):
        tool = step.tool
        if not isinstance(bound, BoundStep) or bound.tool.name != tool.name or bound.output != step.output:
            raise ExpertProtocolError(f"binding step does not match solution step {tool.name!r}")
        if [item.name for item in bound.inputs] != [arg.name for arg in tool.args]:
            raise ExpertProtocolError(f"binding for {tool.name!r} must fill arguments {[a.name for a in tool.args]}")

        for item, arg in zip(bound.inputs, tool.args):
            if item.rtype != arg.rtype:
                raise TypeMismatch(f"{tool.name}.{arg.name}", arg.rtype.name, item.rtype.name)
            if item.ref is None:
                if arg.rtype.name != "text" or not item.text:
                    raise BindingHallucination(tool.name, str(item.text))
                continue
            types = known.get(item.ref)
            if types is None:
                raise BindingHallucination(tool.name, item.ref)
            if arg.rtype not in types:
                actual = ", ".join(sorted(t.name for t in types))
                raise TypeMismatch(f"{tool.name}.{arg.name} <- {item.ref}", arg.rtype.name, actual)

        known.setdefault(step.output.resource_id, set()).add(step.output.rtype)


def bind_arguments(
    solution: SolutionPath,
    available: Sequence[Resource],
    request: str,
    expert: ResourceExpert,
    task: Optional[Subtask] = None,
    retries: int = DEFAULT_EXPERT_RETRIES,
    logger=None,
) -> ArgumentBinding:
    """
    Fill every argument of every step. Expert output is always re-validated;
    rejected bindings are retried, then the last rejection is raised.
    """
    last_error: Optional[Exception] = None
    for attempt in range(retries + 1):
        if attempt and logger:
            logger.retry("bind_arguments", attempt, retries, details={"error": str(last_error)})
        try:
            binding = expert.bind(task, request, solution, available)
        except UnbindableArgument:
            raise
        except (BindingHallucination, TypeMismatch, ExpertProtocolError) as exc:
            last_error = exc
            continue
        except Exception as exc:  # pylint: disable=broad-except
            last_error = ExpertUnavailable(f"resource expert {getattr(expert, 'name', expert)!r} failed: {exc}")
            continue
        try:
            validate_binding(solution, binding, available)
        except (BindingHallucination, TypeMismatch, ExpertProtocolError) as exc:
            last_error = exc
            continue
        return binding
    raise last_error  # type: ignore[misc]


def most_recent_of_type(rtype: ResourceType, resources: Sequence[Resource]) -> Optional[Resource]:
    for resource in reversed(resources):
        if resource.rtype == rtype:
            return resource
    return None
