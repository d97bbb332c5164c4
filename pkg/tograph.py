from __future__ import annotations

from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from langgraph.graph import END, START, StateGraph

from llm_clients import create_llm_client
from tograph_agents import AgentBundle
from tograph_core.config import EngineConfig
from tograph_core.endpoints import EndpointTable, build_endpoint
from tograph_core.errors import ConfigError, ToGraphError
from tograph_core.evaluation import BenchmarkCase, CaseRecord, EvalReport, aggregate, judge_case
from tograph_core.execution import CANNOT_FINISH
from tograph_core.graph import build_graph, load_tool_registry
from tograph_core.logging_config import LogLevel, setup_logging
from tograph_core.models import BoundSolution, DecompositionResult, PipelineState, ToolSpec
from tograph_core.resources import Resource
from tograph_core.search import SearchStrategy
from tograph_core.services import (
    DecompositionService,
    ExecutionService,
    PlanningOutcome,
    PlanningService,
    ResponseService,
    seed_resources,
)
from tograph_core.toolbox import default_registry, desk_toolbox
from tograph_core.utils import load_prompts


def resolve_tools(config: EngineConfig) -> List[ToolSpec]:
    if config.tool_registry is not None:
        return load_tool_registry(config.tool_registry)
    if config.builtin_toolbox == "desk":
        return desk_toolbox()
    return default_registry()


def endpoint_table(config: EngineConfig, workspace: Optional[Path] = None) -> EndpointTable:
    workspace = Path(workspace or config.workspace)

    def make(settings) -> Any:
        return build_endpoint(
            settings.kind,
            workspace,
            url=settings.url,
            latency_ms=settings.latency_ms,
            max_in_flight=settings.max_in_flight,
            fail=settings.fail,
        )

    return EndpointTable(
        default=make(config.default_endpoint),
        overrides={name: make(settings) for name, settings in config.endpoints.items()},
    )


class ToGraph:
    """
    LangGraph pipeline: decompose -> plan -> execute -> respond.

    A dry run stops after planning. A stage failure skips straight to the
    response, which then names the failed stage.
    """

    def __init__(
        self,
        config: EngineConfig,
        llm_client: Any = None,
        tools: Optional[Sequence[ToolSpec]] = None,
        logger=None,
        enable_logging: bool = True,
    ):
        self.config = config
        if logger is None and enable_logging:
            logger = setup_logging(
                log_level=LogLevel.parse(config.log_level),
                log_file=config.log_file,
                console_output=True,
            )
        self.logger = logger

        self.tools = list(tools) if tools is not None else resolve_tools(config)
        self.tool_graph = build_graph(self.tools)
        self.search_config = config.search.to_search_config()

        remote = (
            config.experts.backend == "remote" or config.decomposer == "remote" or config.responder == "remote"
        )
        self.prompts: Dict[str, str] = load_prompts(str(config.prompts_dir)) if remote else {}
        if remote and llm_client is None:
            llm_client = self._create_client()
        self.llm_client = llm_client

        self.agents = AgentBundle.create(
            llm_client,
            self.prompts,
            logger=self.logger,
            experts=config.experts.backend,
            decomposer=config.decomposer,
            responder=config.responder,
            registry=self.tools,
        )

        self.decomposition_service = DecompositionService(
            decomposer=self.agents.decomposer,
            retries=config.decomposition_retries,
            prior_knowledge=config.prior_knowledge,
            logger=self.logger,
        )
        self.planning_service = PlanningService(
            graph=self.tool_graph,
            search=self.search_config,
            assessor=self.agents.assessor,
            solution_expert=self.agents.solution_expert,
            resource_expert=self.agents.resource_expert,
            parallelism=config.parallelism,
            expert_retries=config.experts.retries,
            logger=self.logger,
        )
        self.execution_service = ExecutionService(
            endpoints=endpoint_table(config),
            parallelism=config.parallelism,
            trace_path=self.trace_path,
            logger=self.logger,
        )
        self.response_service = ResponseService(responder=self.agents.responder, logger=self.logger)

        self.graph = self._build_graph()

    @property
    def trace_path(self) -> Path:
        return Path(self.config.trace_path or Path(self.config.workspace) / "trace.jsonl")

    def _create_client(self) -> Any:
        experts = self.config.experts
        kwargs: Dict[str, Any] = {
            "api_key": self.config.api_key(),
            "model": experts.model,
            "temperature": experts.temperature,
            "max_tokens": experts.max_tokens,
        }
        if experts.base_url:
            kwargs["base_url"] = experts.base_url
        try:
            return create_llm_client(experts.provider, **kwargs)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"cannot create LLM client: {exc}") from exc

    def _build_graph(self):
        graph = StateGraph(PipelineState)

        graph.add_node("decompose", self._node_decompose)
        graph.add_node("plan", self._node_plan)
        graph.add_node("execute", self._node_execute)
        graph.add_node("respond", self._node_respond)

        graph.add_edge(START, "decompose")
        graph.add_conditional_edges(
            "decompose",
            self._route_after_decompose,
            {"ok": "plan", "failed": "respond"},
        )
        graph.add_conditional_edges(
            "plan",
            self._route_after_plan,
            {"execute": "execute", "dry_run": END, "failed": "respond"},
        )
        graph.add_edge("execute", "respond")
        graph.add_edge("respond", END)

        return graph.compile()

    def _node_decompose(self, state: PipelineState) -> Dict[str, Any]:
        if self.logger:
            self.logger.state_transition("decompose", details={"authored": "decomposition" in state})
        if state.get("decomposition") is not None:
            return {}
        try:
            return {"decomposition": self.decomposition_service.decompose(state["request"])}
        except ToGraphError as exc:
            return {"failed_stage": "decompose", "error": str(exc)}

    def _route_after_decompose(self, state: PipelineState) -> str:
        return "failed" if state.get("failed_stage") else "ok"

    def _node_plan(self, state: PipelineState) -> Dict[str, Any]:
        decomposition = state["decomposition"]
        if self.logger:
            self.logger.state_transition("plan", details={"subtasks": len(decomposition)})

        outcome = self.planning_service.plan(decomposition, state.get("resources", []), state.get("request", ""))
        updates: Dict[str, Any] = {
            "schedule": outcome.schedule,
            "plans": outcome.plans,
            "planning_errors": outcome.errors,
        }
        if not outcome.plans:
            updates["failed_stage"] = "plan"
            updates["error"] = "; ".join(f"subtask {k}: {v}" for k, v in sorted(outcome.errors.items()))
        return updates

    def _route_after_plan(self, state: PipelineState) -> str:
        if state.get("failed_stage"):
            return "failed"
        if state.get("dry_run"):
            return "dry_run"
        return "execute"

    def _node_execute(self, state: PipelineState) -> Dict[str, Any]:
        if self.logger:
            self.logger.state_transition("execute", details={"subtasks": len(state.get("plans", {}))})

        outcome = PlanningOutcome(
            plans=state.get("plans", {}),
            errors=state.get("planning_errors", {}),
            schedule=state.get("schedule", []),
        )
        resources = seed_resources(state["decomposition"], state.get("resources", []))
        try:
            actions, report = self.execution_service.run(outcome, resources)
        except ToGraphError as exc:
            return {"failed_stage": "execute", "error": str(exc), "actions": []}
        return {"actions": actions, "report": report}

    def _node_respond(self, state: PipelineState) -> Dict[str, Any]:
        if self.logger:
            self.logger.state_transition("respond", details={"failed_stage": state.get("failed_stage")})

        stage = state.get("failed_stage")
        if stage and state.get("report") is None:
            return {"response": f"{CANNOT_FINISH}: the {stage} stage failed ({state.get('error', '')}).\n"}
        response = self.response_service.respond(state.get("request", ""), state.get("actions", []), state.get("report"))
        return {"response": response}

    def solve(
        self,
        request: str = "",
        resources: Sequence[Resource] = (),
        decomposition: Optional[DecompositionResult] = None,
        dry_run: bool = False,
    ) -> PipelineState:
        initial_state: PipelineState = {
            "request": request or (decomposition.source_request if decomposition else ""),
            "resources": list(resources),
            "dry_run": dry_run,
        }
        if decomposition is not None:
            initial_state["decomposition"] = decomposition
        return self.graph.invoke(initial_state)


def run_benchmark(
    engine: ToGraph,
    cases: Sequence[BenchmarkCase],
    strategy: Optional[SearchStrategy | str] = None,
    workspace: Optional[Path] = None,
) -> EvalReport:
    """
    Decompose, plan, execute and judge every case with the engine's own
    decomposer. Decomposition, planning and execution failures only make
    predicates false; unexpected errors are kept on the case record.
    """
    search = engine.search_config
    if strategy is not None:
        search = replace(search, strategy=SearchStrategy(strategy))
    planner = replace(engine.planning_service, search=search)
    names = [tool.name for tool in engine.tools]
    root = Path(workspace or engine.config.workspace) / "bench"

    records: List[CaseRecord] = []
    for case in cases:
        predicted: List[BoundSolution] = []
        report = None
        visited = 0
        error = None
        try:
            decomposition = engine.decomposition_service.decompose(case.instruction)
        except ToGraphError:
            decomposition = None

        try:
            if decomposition is not None:
                outcome = planner.plan(decomposition, case.initial_resources, case.instruction)
                visited = outcome.stats.visited_tools
                predicted = [bound for _, plan in sorted(outcome.plans.items()) for bound in plan.solutions]
                executor = replace(
                    engine.execution_service,
                    endpoints=endpoint_table(engine.config, root / case.id),
                    trace_path=None,
                )
                try:
                    _, report = executor.run(outcome, seed_resources(decomposition, case.initial_resources))
                except ToGraphError:
                    report = None
        except Exception as exc:  # pylint: disable=broad-except
            error = f"{type(exc).__name__}: {exc}"

        records.append(judge_case(case, predicted, report, registry=names, visited_tools=visited, error=error))
        if engine.logger:
            engine.logger.info(f"Case {case.id}: W={records[-1].W} visited={visited}")

    return aggregate(records, strategy=search.strategy.value)
