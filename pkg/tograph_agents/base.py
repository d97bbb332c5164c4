import re
from typing import Any, List, Optional

from tograph_core.utils import parse_solution_json

STOPWORDS = frozenset(
    """
    a an the of and or to in on for with by from into this that these those it its is are be as at then
    me my please can could you your i we our some such new use using given there their them all any
    image images picture video videos audio text file png jpg jpeg gif mp4 wav mp3 html
    """.split()
)


def keywords(text: str) -> List[str]:
    """Lower-cased content words of ``text`` in first-seen order."""
    seen = []
    for word in re.findall(r"[a-z]+", (text or "").lower()):
        if len(word) >= 3 and word not in STOPWORDS and word not in seen:
            seen.append(word)
    return seen


def _related(a: str, b: str) -> bool:
    if a == b:
        return True
    # Shared stem: "crop"/"cropping", "detect"/"detection".
    return min(len(a), len(b)) >= 4 and (a.startswith(b) or b.startswith(a))


def keyword_overlap(query: str, document: str) -> List[str]:
    """Keywords of ``query`` that also occur (up to a shared stem) in ``document``."""
    doc_words = keywords(document)
    return [word for word in keywords(query) if any(_related(word, other) for other in doc_words)]


def relevance_score(matches: int) -> int:
    """No shared keyword scores 2, one scores 3, two or more score 4."""
    if matches <= 0:
        return 2
    if matches == 1:
        return 3
    return 4


class LLMBackedAgent:
    """
    Base class for agents that rely on an LLM client and a prompt template.
    """

    def __init__(self, llm_client: Any, prompt: str = "", name: Optional[str] = None, logger=None):
        self.llm_client = llm_client
        self.prompt = prompt or ""
        self.name = name or self.__class__.__name__
        self.logger = logger

    @property
    def configured(self) -> bool:
        return bool(self.prompt) and self.llm_client is not None

    def invoke(self, **kwargs) -> str:
        if not self.prompt:
            raise ValueError(f"Prompt not configured for agent '{self.name}'.")
        if self.llm_client is None:
            raise ValueError(f"No LLM client configured for agent '{self.name}'.")

        if self.logger:
            details = {"prompt_length": len(self.prompt), "kwargs_keys": sorted(kwargs)}
            self.logger.agent_start(self.name, details=details)
            self.logger.llm_call_start(self.name, details=details)

        try:
            result = self.llm_client.generate(self.prompt, **kwargs)
        except Exception as e:
            if self.logger:
                self.logger.error(f"Agent '{self.name}' failed: {str(e)}", details={"error": str(e)})
            raise

        if self.logger:
            details = {"response_length": len(result) if result else 0}
            self.logger.llm_call_end(self.name, details=details)
            self.logger.agent_end(self.name, details=details)
        return result

    def invoke_json(self, **kwargs) -> Any:
        """Invoke and decode the JSON inside the ``<Solution>`` block."""
        return parse_solution_json(self.invoke(**kwargs))


class RuleAgent:
    """Deterministic stand-in for an LLM-backed role; reports calls like one."""

    def __init__(self, name: Optional[str] = None, logger=None):
        self.name = name or self.__class__.__name__
        self.logger = logger

    @property
    def configured(self) -> bool:
        return True

    def _start(self, **details) -> None:
        if self.logger:
            self.logger.agent_start(self.name, details=details or None)

    def _end(self, **details) -> None:
        if self.logger:
            self.logger.agent_end(self.name, details=details or None)
