from typing import Any

from tograph_core.errors import AssessorProtocolError
from tograph_core.models import Subtask, ToolAssessment, ToolSpec
from tograph_core.utils import format_tool_args

from .base import LLMBackedAgent, RuleAgent, keyword_overlap, relevance_score


def _tool_text(tool: ToolSpec) -> str:
    return f"{tool.name.replace('_', ' ')} {tool.description}"


class KeywordToolAssessor(RuleAgent):
    """
    Scores by shared keywords between the subtask and the tool: none -> 2,
    one -> 3, two or more -> 4. A tool returning one of the subtask's return
    types gets one more point, capped at 5.
    """

    def __init__(self, logger=None):
        super().__init__(name="KeywordToolAssessor", logger=logger)

    def assess(self, task: Subtask, tool: ToolSpec) -> ToolAssessment:
        self._start(tool=tool.name)
        matches = keyword_overlap(task.description, _tool_text(tool))
        score = relevance_score(len(matches))
        if tool.ret_type in task.return_types:
            score += 1
        score = min(score, 5)
        self._end(tool=tool.name, score=score)
        thought = f"shared keywords: {', '.join(matches)}" if matches else "no shared keywords"
        return ToolAssessment(tool=tool.name, score=score, thought=thought)


def parse_score(payload: Any) -> int:
    """``{"Score": n}`` -> n. Digit strings are accepted; anything else is a protocol error."""
    if not isinstance(payload, dict):
        raise AssessorProtocolError(f"expected a JSON object with a Score, got {type(payload).__name__}")
    score = payload.get("Score", payload.get("score"))
    if isinstance(score, str) and score.strip().isdigit():
        score = int(score.strip())
    if not isinstance(score, int) or isinstance(score, bool):
        raise AssessorProtocolError(f"Score must be an integer, got {score!r}")
    return score


class LLMToolAssessor(LLMBackedAgent):
    def __init__(self, llm_client: Any, prompt: str = "", logger=None):
        super().__init__(llm_client, prompt, name="LLMToolAssessor", logger=logger)

    def assess(self, task: Subtask, tool: ToolSpec) -> ToolAssessment:
        try:
            payload = self.invoke_json(
                task=task.description,
                tool_name=tool.name,
                tool_description=tool.description,
                arguments=format_tool_args(tool.args),
                returns=format_tool_args([tool.ret]),
            )
        except ValueError as exc:
            raise AssessorProtocolError(f"unparseable assessment for {tool.name!r}: {exc}") from exc
        return ToolAssessment(tool=tool.name, score=parse_score(payload), thought=str(payload.get("Thought", "")))
