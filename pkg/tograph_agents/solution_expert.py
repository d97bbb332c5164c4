from typing import Any, List, Sequence

from tograph_core.errors import AssessorProtocolError, ExpertProtocolError
from tograph_core.models import SolutionPath, SolutionScore, Subtask

from .assessor import parse_score
from .base import LLMBackedAgent, RuleAgent


class HeuristicSolutionExpert(RuleAgent):
    """
    Deterministic ranking by length: the shortest candidates score 5 and each
    extra step costs one point, down to 1.
    """

    def __init__(self, logger=None):
        super().__init__(name="HeuristicSolutionExpert", logger=logger)

    def score_one(self, task: Subtask, solution: SolutionPath, shortest: int) -> int:
        return 5 - min(4, len(solution) - shortest)

    def score_solutions(
        self,
        task: Subtask,
        request: str,
        solutions: Sequence[SolutionPath],
        rendered: Sequence[str],
    ) -> List[SolutionScore]:
        self._start(candidates=len(solutions))
        shortest = min((len(solution) for solution in solutions), default=0)
        scores = [SolutionScore(solution, self.score_one(task, solution, shortest)) for solution in solutions]
        self._end(best=max((item.score for item in scores), default=0))
        return scores


class LLMSolutionExpert(LLMBackedAgent):
    """One model call per candidate, in candidate order."""

    def __init__(self, llm_client: Any, prompt: str = "", logger=None):
        super().__init__(llm_client, prompt, name="LLMSolutionExpert", logger=logger)

    def score_solutions(
        self,
        task: Subtask,
        request: str,
        solutions: Sequence[SolutionPath],
        rendered: Sequence[str],
    ) -> List[SolutionScore]:
        scores = []
        for solution, text in zip(solutions, rendered):
            try:
                payload = self.invoke_json(request=request, task=task.description, solution=text)
                score = parse_score(payload)
            except (ValueError, AssessorProtocolError) as exc:
                raise ExpertProtocolError(f"unparseable solution score: {exc}") from exc
            scores.append(SolutionScore(solution, score, thought=str(payload.get("Thought", ""))))
        return scores
