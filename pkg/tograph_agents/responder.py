from typing import Any, Optional, Sequence

from tograph_core.execution import template_response
from tograph_core.models import Action, ActionStatus, ExecutionReport

from .base import LLMBackedAgent, RuleAgent


def describe_workflow(actions: Sequence[Action], report: Optional[ExecutionReport]) -> str:
    records = {record.seq: record for record in (report.records if report else [])}
    lines = []
    for action in actions:
        record = records.get(action.seq)
        status = record.status.value if record else "not run"
        inputs = ", ".join(
            f"{item.name}={item.ref if item.ref is not None else repr(item.text)}" for item in action.inputs
        )
        lines.append(f"{action.seq}. {action.tool.name}({inputs}) -> {action.output_id} [{status}]")
    return "\n".join(lines)


def summarize_results(report: Optional[ExecutionReport]) -> str:
    if report is None:
        return ""
    return "\n".join(
        f"- {record.tool}: {record.output.value}"
        for record in report.records
        if record.status is ActionStatus.OK and record.output is not None
    )


class TemplateResponder(RuleAgent):
    def __init__(self, logger=None):
        super().__init__(name="TemplateResponder", logger=logger)

    def respond(self, request: str, actions: Sequence[Action], report: Optional[ExecutionReport]) -> str:
        return template_response(request, actions, report)


class LLMResponder(LLMBackedAgent):
    """Free-form answer from a chat model, given the workflow and its results."""

    def __init__(self, llm_client: Any, prompt: str = "", assistant_name: str = "ToGraph", logger=None):
        super().__init__(llm_client, prompt, name="LLMResponder", logger=logger)
        self.assistant_name = assistant_name

    def respond(self, request: str, actions: Sequence[Action], report: Optional[ExecutionReport]) -> str:
        response = self.invoke(
            assistant_name=self.assistant_name,
            request=request,
            solution=describe_workflow(actions, report),
            results=summarize_results(report),
        )
        return response.strip() + "\n"
