"""
Argument binding roles. Whatever they return is re-validated by
``tograph_core.experts.bind_arguments`` before the planner uses it.
"""

from typing import Any, Dict, List, Optional, Sequence

from tograph_core.errors import ExpertProtocolError, UnbindableArgument
from tograph_core.experts import most_recent_of_type
from tograph_core.models import ArgumentBinding, BoundInput, BoundStep, SolutionPath, Subtask
from tograph_core.resources import Resource
from tograph_core.utils import format_tool_args

from .base import LLMBackedAgent, RuleAgent


def _inline_text(task: Optional[Subtask], request: str) -> str:
    return task.description if task is not None else request


class RecencyResourceExpert(RuleAgent):
    """
    Each argument takes the most recent resource of its type, where outputs
    of earlier steps count as newer than the available resources. Text
    arguments always get the subtask description verbatim.
    """

    def __init__(self, logger=None):
        super().__init__(name="RecencyResourceExpert", logger=logger)

    def bind(
        self,
        task: Optional[Subtask],
        request: str,
        solution: SolutionPath,
        available: Sequence[Resource],
    ) -> ArgumentBinding:
        self._start(steps=len(solution))
        pool: List[Resource] = list(available)
        steps = []
        for step in solution.steps:
            inputs = []
            for arg in step.tool.args:
                if arg.rtype.name == "text":
                    inputs.append(BoundInput(arg.name, arg.rtype, text=_inline_text(task, request)))
                    continue
                resource = most_recent_of_type(arg.rtype, pool)
                if resource is None:
                    raise UnbindableArgument(step.tool.name, arg.name, arg.rtype.name)
                inputs.append(BoundInput(arg.name, arg.rtype, ref=resource.id))
            steps.append(BoundStep(tool=step.tool, inputs=tuple(inputs), output=step.output))
            pool.append(Resource(id=step.output.resource_id, rtype=step.output.rtype))
        self._end(steps=len(steps))
        return ArgumentBinding(steps=tuple(steps))


def _resource_listing(resources: Sequence[Resource]) -> str:
    if not resources:
        return "(none)"
    return "\n".join(f"- {resource.id} ({resource.rtype.name})" for resource in resources)


class LLMResourceExpert(LLMBackedAgent):
    """
    One model call per step. The model answers a list of single-key objects,
    one per argument in order; values naming a known resource become
    references, other values are inline text.
    """

    def __init__(self, llm_client: Any, prompt: str = "", logger=None):
        super().__init__(llm_client, prompt, name="LLMResourceExpert", logger=logger)

    def bind(
        self,
        task: Optional[Subtask],
        request: str,
        solution: SolutionPath,
        available: Sequence[Resource],
    ) -> ArgumentBinding:
        pool: List[Resource] = list(available)
        steps = []
        for step in solution.steps:
            tool = step.tool
            try:
                payload = self.invoke_json(
                    request=request,
                    task_description=task.description if task is not None else request,
                    resources=_resource_listing(pool),
                    tool_name=tool.name,
                    tool_description=tool.description,
                    arguments=format_tool_args(tool.args),
                    returns=format_tool_args([tool.ret]),
                    input=", ".join(f"{arg.name} ({arg.rtype.name})" for arg in tool.args),
                )
            except ValueError as exc:
                raise ExpertProtocolError(f"unparseable binding for {tool.name!r}: {exc}") from exc
            values = self._values(payload, len(tool.args), tool.name)

            known: Dict[str, Resource] = {resource.id: resource for resource in pool}
            inputs = []
            for arg, value in zip(tool.args, values):
                if value in known or arg.rtype.name != "text":
                    inputs.append(BoundInput(arg.name, arg.rtype, ref=value))
                else:
                    inputs.append(BoundInput(arg.name, arg.rtype, text=value))
            steps.append(BoundStep(tool=tool, inputs=tuple(inputs), output=step.output))
            pool.append(Resource(id=step.output.resource_id, rtype=step.output.rtype))
        return ArgumentBinding(steps=tuple(steps))

    @staticmethod
    def _values(payload: Any, expected: int, tool: str) -> List[str]:
        if not isinstance(payload, list) or len(payload) != expected:
            raise ExpertProtocolError(f"binding for {tool!r} must list {expected} argument(s)")
        values = []
        for item in payload:
            if not isinstance(item, dict) or len(item) != 1:
                raise ExpertProtocolError(f"binding entries for {tool!r} must be single-key objects")
            values.append(str(next(iter(item.values()))))
        return values
