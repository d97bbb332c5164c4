"""
Execution engine: compiles ranked plans into actions, runs them stage by stage
on a bounded worker pool and keeps every intermediate result in state memory.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from threading import Lock
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from .endpoints import EndpointTable
from .errors import (
    MalformedPlaceholder,
    MemoryWriteConflict,
    MissingInput,
    ToGraphError,
    TypeMismatch,
    UnresolvedReference,
)
from .models import (
    Action,
    ActionRecord,
    ActionStatus,
    BoundInput,
    Correction,
    ExecutionReport,
    RankedPlan,
)
from .resources import Resource, ResourceType, parse_placeholder
from .toolbox import invoke


class StateMemory:
    """Write-once, insertion-ordered store of every resource in a session."""

    def __init__(self, initial: Iterable[Resource] = ()):
        self._entries: Dict[str, Resource] = {}
        self._lock = Lock()
        for resource in initial:
            self.write(resource)

    def write(self, resource: Resource) -> None:
        if not isinstance(resource.rtype, ResourceType):
            raise TypeError(f"resource {resource.id!r} has no registry type")
        with self._lock:
            if resource.id in self._entries:
                raise MemoryWriteConflict(resource.id)
            self._entries[resource.id] = resource

    def get(self, resource_id: str) -> Optional[Resource]:
        with self._lock:
            return self._entries.get(resource_id)

    def __contains__(self, resource_id: object) -> bool:
        with self._lock:
            return resource_id in self._entries

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)

    def entries(self) -> List[Resource]:
        with self._lock:
            return list(self._entries.values())

    def most_recent(self, rtype: ResourceType) -> Optional[Resource]:
        with self._lock:
            for resource in reversed(list(self._entries.values())):
                if resource.rtype == rtype:
                    return resource
        return None


def _subtask_outputs(plans: Mapping[int, RankedPlan]) -> Dict[Tuple[int, ResourceType], str]:
    outputs: Dict[Tuple[int, ResourceType], str] = {}
    for subtask_id, plan in plans.items():
        for bound in plan.solutions:
            final = bound.path.steps[-1].output
            outputs.setdefault((subtask_id, final.rtype), final.resource_id)
    return outputs


def compile_actions(plans: Mapping[int, RankedPlan], schedule: Sequence[Sequence[int]]) -> List[Action]:
    """
    One action per bound step, numbered stage-major, subtask-id-minor, then in
    step order. ``<GEN>-k`` inputs are rewritten to the id of the output that
    subtask ``k`` produces for the argument's type.
    """
    outputs = _subtask_outputs(plans)
    producer: Dict[str, int] = {}
    actions: List[Action] = []

    for stage_index, stage in enumerate(schedule):
        for subtask_id in sorted(stage):
            plan = plans.get(subtask_id)
            if plan is None:
                continue
            previous: Optional[int] = None
            for bound in plan.solutions:
                steps = bound.binding.steps
                for position, step in enumerate(steps):
                    inputs = []
                    depends: List[int] = [] if previous is None else [previous]
                    for item in step.inputs:
                        if item.ref is not None:
                            ref = _resolve(item, subtask_id, outputs)
                            item = replace(item, ref=ref)
                            if ref in producer and producer[ref] not in depends:
                                depends.append(producer[ref])
                        inputs.append(item)
                    seq = len(actions)
                    action = Action(
                        seq=seq,
                        tool=step.tool,
                        inputs=tuple(inputs),
                        output_id=step.output.resource_id,
                        subtask_id=subtask_id,
                        stage=stage_index,
                        depends_on=tuple(sorted(depends)),
                        final=position == len(steps) - 1,
                    )
                    actions.append(action)
                    producer[action.output_id] = seq
                    previous = seq
    return actions


def _resolve(item: BoundInput, subtask_id: int, outputs: Dict[Tuple[int, ResourceType], str]) -> str:
    try:
        k = parse_placeholder(item.ref)
    except MalformedPlaceholder:
        return item.ref
    if k == subtask_id or (k, item.rtype) not in outputs:
        raise UnresolvedReference(item.ref, subtask_id)
    return outputs[(k, item.rtype)]


def correct_inputs(action: Action, memory: StateMemory) -> Action:
    """
    Replace input ids missing from memory with the most recent entry of the
    declared type. Present ids of the wrong type are not re-bound.
    """
    inputs = []
    corrections: List[Correction] = []
    for item in action.inputs:
        if item.ref is None:
            inputs.append(item)
            continue
        current = memory.get(item.ref)
        if current is not None:
            if current.rtype != item.rtype:
                raise TypeMismatch(f"{action.tool.name}.{item.name} <- {item.ref}", item.rtype.name, current.rtype.name)
            inputs.append(item)
            continue
        substitute = memory.most_recent(item.rtype)
        if substitute is None:
            raise MissingInput(action.tool.name, item.name, item.rtype.name)
        corrections.append(Correction(arg=item.name, stale_ref=item.ref, substituted_ref=substitute.id))
        inputs.append(replace(item, ref=substitute.id))

    if not corrections:
        return action
    return replace(action, inputs=tuple(inputs), corrections=action.corrections + tuple(corrections))


@dataclass
class ExecutionSettings:
    parallelism: int = 1

    def __post_init__(self) -> None:
        if self.parallelism < 1:
            raise ValueError(f"parallelism must be >= 1, got {self.parallelism}")


class ActionExecutor:
    """Runs compiled actions; failures end up in the report, never as exceptions."""

    def __init__(self, endpoints: EndpointTable, settings: Optional[ExecutionSettings] = None, logger=None):
        self.endpoints = endpoints
        self._settings = settings or ExecutionSettings()
        self.logger = logger

    def run(self, actions: Sequence[Action], memory: StateMemory) -> ExecutionReport:
        started = time.perf_counter()
        records: Dict[int, ActionRecord] = {}
        unhealthy: Set[int] = set()
        lock = Lock()

        def run_chain(chain: List[Action]) -> None:
            for action in chain:
                with lock:
                    blocked = any(dep in unhealthy for dep in action.depends_on)
                if blocked:
                    record = ActionRecord(
                        seq=action.seq,
                        tool=action.tool.name,
                        subtask_id=action.subtask_id,
                        status=ActionStatus.SKIPPED,
                        inputs=action.inputs,
                        output_id=action.output_id,
                        error="upstream action failed",
                    )
                    if self.logger:
                        self.logger.action_end(action.seq, action.tool.name, record.status.value)
                else:
                    record = self._run_action(action, memory)
                with lock:
                    records[action.seq] = record
                    if record.status is not ActionStatus.OK:
                        unhealthy.add(action.seq)

        stages: Dict[int, Dict[int, List[Action]]] = {}
        for action in sorted(actions, key=lambda a: a.seq):
            stages.setdefault(action.stage, {}).setdefault(action.subtask_id, []).append(action)

        if actions:
            with ThreadPoolExecutor(max_workers=self._settings.parallelism) as pool:
                for stage in sorted(stages):
                    futures = [pool.submit(run_chain, chain) for _, chain in sorted(stages[stage].items())]
                    # Stage barrier: dependents only start once the whole stage has finished.
                    for future in futures:
                        future.result()

        ordered = [records[seq] for seq in sorted(records)]
        return ExecutionReport(
            records=ordered,
            resources=memory.entries(),
            wall_clock=time.perf_counter() - started,
            critical_path=_critical_path(actions, records),
            final_ids=[action.output_id for action in actions if action.final],
        )

    def _run_action(self, action: Action, memory: StateMemory) -> ActionRecord:
        record = ActionRecord(
            seq=action.seq,
            tool=action.tool.name,
            subtask_id=action.subtask_id,
            status=ActionStatus.FAILED,
            inputs=action.inputs,
            output_id=action.output_id,
            started_at=time.time(),
        )
        if self.logger:
            self.logger.action_start(action.seq, action.tool.name, details={"subtask": action.subtask_id})
        try:
            action = correct_inputs(action, memory)
            record.inputs = action.inputs
            record.corrections = action.corrections
            if self.logger:
                for correction in action.corrections:
                    self.logger.correction(action.tool.name, correction.stale_ref, correction.substituted_ref)
            inputs = _materialize(action, memory)
            result = invoke(action.tool, inputs, self.endpoints.for_tool(action.tool.name), action.output_id)
            memory.write(result.output)
            record.output = result.output
            record.status = ActionStatus.OK
        except ToGraphError as exc:
            record.error = str(exc)
        except Exception as exc:  # pylint: disable=broad-except
            record.error = f"{type(exc).__name__}: {exc}"
        record.ended_at = time.time()

        if self.logger:
            self.logger.action_end(
                action.seq,
                action.tool.name,
                record.status.value,
                details={"elapsed": round(record.elapsed, 4), "error": record.error},
            )
        return record


def _materialize(action: Action, memory: StateMemory) -> Dict[str, Resource]:
    inputs: Dict[str, Resource] = {}
    for item in action.inputs:
        if item.ref is None:
            inputs[item.name] = Resource(id=f"{action.output_id}:{item.name}", rtype=item.rtype, value=item.text)
            continue
        resource = memory.get(item.ref)
        if resource is None:
            raise MissingInput(action.tool.name, item.name, item.rtype.name)
        inputs[item.name] = resource
    return inputs


def _critical_path(actions: Sequence[Action], records: Mapping[int, ActionRecord]) -> float:
    finish: Dict[int, float] = {}
    for action in sorted(actions, key=lambda a: a.seq):
        record = records.get(action.seq)
        own = record.elapsed if record is not None else 0.0
        finish[action.seq] = own + max((finish.get(dep, 0.0) for dep in action.depends_on), default=0.0)
    return max(finish.values(), default=0.0)


def execute(
    actions: Sequence[Action],
    endpoints: EndpointTable,
    memory: StateMemory,
    parallelism: int = 1,
    logger=None,
) -> ExecutionReport:
    """
    Steps of one subtask run in order; subtasks of the same stage run
    concurrently, up to ``parallelism`` at a time.
    """
    executor = ActionExecutor(endpoints, ExecutionSettings(parallelism=parallelism), logger=logger)
    return executor.run(actions, memory)


CANNOT_FINISH = "I can not finish the task"


def template_response(request: str, actions: Sequence[Action], report: Optional[ExecutionReport]) -> str:
    """Answer line, workflow summary, then the full path of every produced file."""
    ok = [r for r in (report.records if report else []) if r.status is ActionStatus.OK]
    if not ok:
        reason = "no tool could be run" if actions else "no solution was found for the request"
        return f"{CANNOT_FINISH}: {reason}.\n"

    finals = report.final_resources()
    answers = [res.value for res in finals if res.rtype.inline and res.value]
    files = [res.value for res in report.produced() if not res.rtype.inline and res.value]

    lines = []
    if answers:
        lines.append("Answer: " + " | ".join(answers))
    else:
        lines.append(f"Done: produced {len(finals)} result(s) for \"{request}\".")
    lines.append("Workflow: " + " -> ".join(record.tool for record in report.records))
    failed = [r for r in report.records if r.status is not ActionStatus.OK]
    if failed:
        lines.append("Not completed: " + ", ".join(f"{r.tool} ({r.status.value})" for r in failed))
    if files:
        lines.append("Files:")
        lines.extend(f"- {path}" for path in files)
    return "\n".join(lines) + "\n"


def generate_response(
    request: str,
    actions: Sequence[Action],
    report: Optional[ExecutionReport],
    responder=None,
    logger=None,
) -> str:
    if responder is not None:
        try:
            return responder.respond(request, actions, report)
        except Exception as exc:  # pylint: disable=broad-except
            if logger:
                logger.warning(f"Responder failed, using template response: {exc}")
    return template_response(request, actions, report)
