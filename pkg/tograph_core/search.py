"""
Depth-first solution search over the tool graph.

Starting from the subtask's argument types, the search walks tool nodes whose
inputs are all available, records every path whose last tool returns the
requested type, and keeps going deeper until the path length limit. The
strategy decides which scored candidates are expanded at each step.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from .errors import InvalidSubtask, PlanningFailed
from .graph import ToolGraph, applicable_tools
from .models import (
    BoundSolution,
    RankedPlan,
    SearchStats,
    SolutionPath,
    SolutionStep,
    Subtask,
    ToolSpec,
)
from .resources import GenPlaceholder, Resource, ResourceType
from .experts import ALTERNATIVE_THRESHOLD, DEFAULT_EXPERT_RETRIES, ToolAssessor, assess_tool, bind_arguments, rank_solutions


class SearchStrategy(str, Enum):
    GREEDY = "greedy"
    BEAM = "beam"
    ADAPTIVE = "adaptive"
    EXHAUSTIVE = "exhaustive"


@dataclass(frozen=True)
class SearchConfig:
    strategy: SearchStrategy = SearchStrategy.ADAPTIVE
    beam_width: int = 3
    adaptive_threshold: int = 3
    max_path_len: int = 10
    allow_tool_reuse: bool = False
    # Opt-in: skip tools whose return type is already available unless it is the target.
    prune_redundant: bool = False
    domain_filter: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "strategy", SearchStrategy(self.strategy))
        if self.beam_width < 1:
            raise ValueError(f"beam_width must be >= 1, got {self.beam_width}")
        if not 1 <= self.adaptive_threshold <= 5:
            raise ValueError(f"adaptive_threshold must be in [1, 5], got {self.adaptive_threshold}")
        if self.max_path_len < 1:
            raise ValueError(f"max_path_len must be >= 1, got {self.max_path_len}")


class AssessmentCache:
    """Memo of ``(task description, tool name) -> score`` for one planning call."""

    def __init__(self) -> None:
        self._scores: Dict[Tuple[str, str], int] = {}

    def get(self, task: Subtask, tool: ToolSpec) -> Optional[int]:
        return self._scores.get((task.description, tool.name))

    def put(self, task: Subtask, tool: ToolSpec, score: int) -> None:
        self._scores[(task.description, tool.name)] = score

    def __len__(self) -> int:
        return len(self._scores)


def select_candidates(candidates: Sequence[Tuple[ToolSpec, int]], cfg: SearchConfig) -> List[ToolSpec]:
    """Apply the strategy's pruning rule to scored candidates (descending score, then name)."""
    ranked = sorted(candidates, key=lambda item: (-item[1], item[0].name))
    if cfg.strategy is SearchStrategy.GREEDY:
        ranked = ranked[:1]
    elif cfg.strategy is SearchStrategy.BEAM:
        ranked = ranked[: cfg.beam_width]
    elif cfg.strategy is SearchStrategy.ADAPTIVE:
        ranked = [item for item in ranked if item[1] >= cfg.adaptive_threshold]
    return [tool for tool, _ in ranked]


def _score(
    subtask: Subtask,
    tool: ToolSpec,
    assessor: ToolAssessor,
    cache: AssessmentCache,
    stats: SearchStats,
    retries: int = DEFAULT_EXPERT_RETRIES,
) -> int:
    cached = cache.get(subtask, tool)
    if cached is not None:
        stats.cache_hits += 1
        return cached
    stats.assessor_calls += 1
    score = assess_tool(subtask, tool, assessor, retries=retries).score
    cache.put(subtask, tool, score)
    return score


def dfs_search(
    subtask: Subtask,
    graph: ToolGraph,
    cfg: SearchConfig,
    assessor: ToolAssessor,
    target: Optional[ResourceType] = None,
    cache: Optional[AssessmentCache] = None,
    logger=None,
    retries: int = DEFAULT_EXPERT_RETRIES,
) -> Tuple[List[SolutionPath], SearchStats]:
    """
    Enumerate solution paths for one requested return type.

    An empty list means no path was found; it is not an error.
    """
    if not subtask.args:
        raise InvalidSubtask(f"subtask {subtask.id} has no input arguments to seed the search")
    if target is None:
        if not subtask.returns:
            raise InvalidSubtask(f"subtask {subtask.id} declares no return type")
        target = subtask.returns[0].rtype
    if not isinstance(target, ResourceType):
        raise InvalidSubtask(f"search target must be a ResourceType, got {target!r}")

    cache = cache if cache is not None else AssessmentCache()
    stats = SearchStats()
    domains = subtask.domains if cfg.domain_filter else ()
    solutions: List[SolutionPath] = []
    seen: set = set()

    if logger:
        logger.search_start(subtask.id, details={"target": target.name, "strategy": cfg.strategy.value})

    def candidates_for(available: FrozenSet[ResourceType], path: List[ToolSpec]) -> List[ToolSpec]:
        on_path = {tool.name for tool in path}
        result = []
        for tool in applicable_tools(graph, available, domains):
            if not cfg.allow_tool_reuse and tool.name in on_path:
                continue
            if cfg.prune_redundant and tool.ret_type in available and tool.ret_type != target:
                continue
            result.append(tool)
        return result

    def record(path: List[ToolSpec]) -> None:
        names = tuple(tool.name for tool in path)
        if names in seen:
            return
        seen.add(names)
        steps = tuple(
            SolutionStep(tool, GenPlaceholder(task_id=subtask.id, rtype=tool.ret_type, tool=tool.name, step=index))
            for index, tool in enumerate(path)
        )
        solutions.append(SolutionPath(subtask_id=subtask.id, steps=steps, terminal_type=target))
        stats.solutions_found += 1

    def visit(available: FrozenSet[ResourceType], path: List[ToolSpec]) -> None:
        if len(path) >= cfg.max_path_len:
            return
        candidates = candidates_for(available, path)
        scored = [(tool, _score(subtask, tool, assessor, cache, stats, retries)) for tool in candidates]
        for tool in select_candidates(scored, cfg):
            stats.visited_tools += 1
            path.append(tool)
            if tool.ret_type == target:
                record(path)
            grew = tool.ret_type not in available
            if grew or not cfg.prune_redundant:
                visit(available | {tool.ret_type}, path)
            path.pop()

    visit(frozenset(subtask.arg_types), [])

    if logger:
        logger.search_end(subtask.id, details={"target": target.name, **stats.to_dict()})
    return solutions, stats


def subtask_resources(subtask: Subtask) -> List[Resource]:
    """
    Resources a subtask brings to binding: literal non-text inputs and the
    placeholders of upstream outputs. Literal text is passed inline instead.
    """
    resources: List[Resource] = []
    seen: set = set()
    for arg in subtask.args:
        key = (arg.value, arg.rtype)
        if key in seen:
            continue
        if arg.placeholder_id is not None:
            resources.append(Resource(id=arg.value, rtype=arg.rtype))
        elif arg.rtype.name != "text":
            resources.append(Resource(id=arg.value, rtype=arg.rtype, value=arg.value))
        else:
            continue
        seen.add(key)
    return resources


def plan_subtask(
    subtask: Subtask,
    graph: ToolGraph,
    cfg: SearchConfig,
    assessor: ToolAssessor,
    solution_expert,
    resource_expert,
    resources: Optional[Sequence[Resource]] = None,
    request: str = "",
    logger=None,
    retries: int = DEFAULT_EXPERT_RETRIES,
) -> RankedPlan:
    """
    Search, rank and bind: one optimal bound solution per declared return,
    plus every other candidate the solution expert scored at 3 or more.
    """
    cache = AssessmentCache()
    stats = SearchStats()
    # The subtask's own inputs go last so recency-based binding prefers them.
    own = subtask_resources(subtask)
    own_keys = {(item.id, item.rtype) for item in own}
    available = [resource for resource in resources or [] if (resource.id, resource.rtype) not in own_keys] + own

    bound = []
    alternatives = []
    offset = 0
    for ret in subtask.returns:
        paths, search_stats = dfs_search(
            subtask, graph, cfg, assessor, target=ret.rtype, cache=cache, logger=logger, retries=retries
        )
        stats = stats.merge(search_stats)
        if not paths:
            raise PlanningFailed(subtask.id, f"no tool path reaches {ret.rtype.name!r}")

        ranking = rank_solutions(subtask, request, paths, solution_expert, retries=retries)
        best = ranking[0]
        optimal = best.solution.renumbered(offset)
        offset += len(optimal)
        binding = bind_arguments(optimal, available, request, resource_expert, task=subtask, logger=logger, retries=retries)
        bound.append(BoundSolution(path=optimal, binding=binding, score=best.score))
        alternatives.extend(item for item in ranking[1:] if item.score >= ALTERNATIVE_THRESHOLD)

    return RankedPlan(subtask_id=subtask.id, solutions=bound, alternatives=alternatives, stats=stats)
