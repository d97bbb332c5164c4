from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .decomposition import DEFAULT_DECOMPOSITION_RETRIES, decompose, parse_decomposition, subtask_schedule
from .endpoints import EndpointTable
from .errors import ToGraphError
from .execution import StateMemory, compile_actions, execute, generate_response
from .experts import DEFAULT_EXPERT_RETRIES
from .graph import ToolGraph
from .models import Action, DecompositionResult, ExecutionReport, RankedPlan, SearchStats, Subtask
from .resources import Resource, is_generated
from .search import SearchConfig, plan_subtask, subtask_resources


def seed_resources(decomposition: DecompositionResult, resources: Sequence[Resource] = ()) -> List[Resource]:
    """Given resources plus every literal file the subtasks name, one entry per id."""
    seeded: Dict[str, Resource] = {resource.id: resource for resource in resources}
    for subtask in decomposition.subtasks:
        for resource in subtask_resources(subtask):
            if not is_generated(resource.id) and resource.id not in seeded:
                seeded[resource.id] = resource
    return list(seeded.values())


@dataclass
class DecompositionService:
    decomposer: Any
    retries: int = DEFAULT_DECOMPOSITION_RETRIES
    prior_knowledge: bool = False
    logger: Any = None

    def decompose(self, request: str) -> DecompositionResult:
        return decompose(
            request,
            self.decomposer,
            retries=self.retries,
            prior_knowledge=self.prior_knowledge,
            logger=self.logger,
        )

    @staticmethod
    def from_document(doc: Any, request: str = "") -> DecompositionResult:
        """Authored decompositions skip the decomposer but not validation."""
        return parse_decomposition(doc, source_request=request)


@dataclass
class PlanningOutcome:
    plans: Dict[int, RankedPlan] = field(default_factory=dict)
    errors: Dict[int, str] = field(default_factory=dict)
    schedule: List[List[int]] = field(default_factory=list)

    @property
    def stats(self) -> SearchStats:
        total = SearchStats()
        for plan in self.plans.values():
            total = total.merge(plan.stats)
        return total

    @property
    def complete(self) -> bool:
        return not self.errors


@dataclass
class PlanningService:
    """Plans every subtask; independent subtasks are searched concurrently."""

    graph: ToolGraph
    search: SearchConfig
    assessor: Any
    solution_expert: Any
    resource_expert: Any
    parallelism: int = 1
    expert_retries: int = DEFAULT_EXPERT_RETRIES
    logger: Any = None

    def plan_one(self, subtask: Subtask, resources: Sequence[Resource], request: str) -> RankedPlan:
        return plan_subtask(
            subtask,
            self.graph,
            self.search,
            self.assessor,
            self.solution_expert,
            self.resource_expert,
            resources=resources,
            request=request,
            logger=self.logger,
            retries=self.expert_retries,
        )

    def plan(
        self,
        decomposition: DecompositionResult,
        resources: Sequence[Resource] = (),
        request: str = "",
    ) -> PlanningOutcome:
        outcome = PlanningOutcome(schedule=subtask_schedule(decomposition))
        request = request or decomposition.source_request

        def attempt(subtask: Subtask) -> Tuple[int, Optional[RankedPlan], Optional[str]]:
            try:
                return subtask.id, self.plan_one(subtask, resources, request), None
            except ToGraphError as exc:
                return subtask.id, None, f"{type(exc).__name__}: {exc}"

        with ThreadPoolExecutor(max_workers=max(1, self.parallelism)) as pool:
            for subtask_id, plan, error in pool.map(attempt, decomposition.subtasks):
                if plan is not None:
                    outcome.plans[subtask_id] = plan
                else:
                    outcome.errors[subtask_id] = error or "planning failed"
                    if self.logger:
                        self.logger.error(f"Planning failed for subtask {subtask_id}: {error}")

        # Subtasks downstream of a failure cannot be compiled.
        for stage in outcome.schedule:
            for subtask_id in stage:
                failed = [dep for dep in decomposition.by_id(subtask_id).dep if dep not in outcome.plans]
                if failed and subtask_id in outcome.plans:
                    del outcome.plans[subtask_id]
                    outcome.errors[subtask_id] = f"depends on unplanned subtask(s) {failed}"
        return outcome


@dataclass
class ExecutionService:
    endpoints: EndpointTable
    parallelism: int = 1
    trace_path: Optional[Path] = None
    logger: Any = None

    def run(
        self,
        outcome: PlanningOutcome,
        resources: Sequence[Resource] = (),
    ) -> Tuple[List[Action], ExecutionReport]:
        actions = compile_actions(outcome.plans, outcome.schedule)
        memory = StateMemory(resources)
        report = execute(actions, self.endpoints, memory, parallelism=self.parallelism, logger=self.logger)
        if self.trace_path is not None:
            report.write_trace(self.trace_path)
        return actions, report


@dataclass
class ResponseService:
    responder: Any = None
    logger: Any = None

    def respond(self, request: str, actions: Sequence[Action], report: Optional[ExecutionReport]) -> str:
        return generate_response(request, actions, report, responder=self.responder, logger=self.logger)
