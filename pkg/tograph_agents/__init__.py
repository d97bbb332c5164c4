"""Pluggable roles for the ToGraph planner: deterministic and LLM-backed."""

from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence

from tograph_core.models import ToolSpec

from .assessor import KeywordToolAssessor, LLMToolAssessor
from .base import LLMBackedAgent, RuleAgent, keyword_overlap, keywords
from .decomposer import LLMDecomposer, RuleBasedDecomposer
from .resource_expert import LLMResourceExpert, RecencyResourceExpert
from .responder import LLMResponder, TemplateResponder
from .solution_expert import HeuristicSolutionExpert, LLMSolutionExpert


@dataclass
class AgentBundle:
    """Convenience container that holds one agent per planner role."""

    decomposer: Any
    assessor: Any
    solution_expert: Any
    resource_expert: Any
    responder: Any

    @classmethod
    def create(
        cls,
        llm_client: Any = None,
        prompts: Optional[Dict[str, str]] = None,
        logger=None,
        experts: str = "mock",
        decomposer: str = "rule",
        responder: str = "template",
        registry: Optional[Sequence[ToolSpec]] = None,
    ) -> "AgentBundle":
        prompts = prompts or {}
        for role, backend in (("experts", experts), ("decomposer", decomposer), ("responder", responder)):
            if backend not in ("mock", "rule", "template") and llm_client is None:
                raise ValueError(f"{role} backend {backend!r} needs an LLM client")

        if experts == "remote":
            assessor = LLMToolAssessor(llm_client, prompts.get("tool_assessment", ""), logger=logger)
            solution_expert = LLMSolutionExpert(llm_client, prompts.get("solution_expert", ""), logger=logger)
            resource_expert = LLMResourceExpert(llm_client, prompts.get("resource_expert", ""), logger=logger)
        else:
            assessor = KeywordToolAssessor(logger=logger)
            solution_expert = HeuristicSolutionExpert(logger=logger)
            resource_expert = RecencyResourceExpert(logger=logger)

        if decomposer == "remote":
            decomposer_agent = LLMDecomposer(
                llm_client, prompts.get("decomposition", ""), registry=registry, logger=logger
            )
        else:
            decomposer_agent = RuleBasedDecomposer(registry=registry, logger=logger)

        if responder == "remote":
            responder_agent = LLMResponder(llm_client, prompts.get("response", ""), logger=logger)
        else:
            responder_agent = TemplateResponder(logger=logger)

        return cls(
            decomposer=decomposer_agent,
            assessor=assessor,
            solution_expert=solution_expert,
            resource_expert=resource_expert,
            responder=responder_agent,
        )

    def update_prompt(self, prompt_name: str, prompt: str) -> None:
        targets = {
            "decomposition": self.decomposer,
            "tool_assessment": self.assessor,
            "solution_expert": self.solution_expert,
            "resource_expert": self.resource_expert,
            "response": self.responder,
        }
        if prompt_name not in targets:
            raise ValueError(f"Unknown prompt: {prompt_name}")
        agent = targets[prompt_name]
        if not isinstance(agent, LLMBackedAgent):
            raise ValueError(f"Agent for {prompt_name!r} is not prompt-driven")
        agent.prompt = prompt


__all__ = [
    "AgentBundle",
    "HeuristicSolutionExpert",
    "KeywordToolAssessor",
    "LLMBackedAgent",
    "LLMDecomposer",
    "LLMResourceExpert",
    "LLMResponder",
    "LLMSolutionExpert",
    "LLMToolAssessor",
    "RecencyResourceExpert",
    "RuleAgent",
    "RuleBasedDecomposer",
    "TemplateResponder",
    "keyword_overlap",
    "keywords",
]
