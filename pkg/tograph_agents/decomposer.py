"""
Request decomposers. Both produce protocol JSON text; validation happens in
``tograph_core.decomposition.decompose``.
"""

import json
import re
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

from tograph_core.models import ToolSpec
from tograph_core.resources import DOMAINS, RESOURCE_TYPES
from tograph_core.utils import extract_solution_block

from .base import LLMBackedAgent, RuleAgent

FILE_RE = re.compile(
    r"[\w\-/]*[\w\-]\.(png|jpe?g|gif|bmp|webp|mp4|avi|mov|mkv|wav|mp3|flac|ogg|html?)\b",
    re.IGNORECASE,
)
EXTENSION_TYPES = {
    "png": "image", "jpg": "image", "jpeg": "image", "gif": "image", "bmp": "image", "webp": "image",
    "mp4": "video", "avi": "video", "mov": "video", "mkv": "video",
    "wav": "audio", "mp3": "audio", "flac": "audio", "ogg": "audio",
    "html": "html", "htm": "html",
}
CLAUSE_SPLIT_RE = re.compile(r"(?<=[.!?;])\s+|,?\s+(?:and\s+)?then\s+", re.IGNORECASE)
BACKREF_RE = re.compile(r"\b(?:it|this|that|them|the result)\b", re.IGNORECASE)


@dataclass(frozen=True)
class ClauseRule:
    """Keyword pattern -> (domains, return type). ``by_media`` overrides domains per input media."""

    name: str
    pattern: str
    domains: Tuple[str, ...]
    returns: str
    by_media: Tuple[Tuple[str, Tuple[str, ...]], ...] = ()
    needs_media: bool = True

    def matches(self, clause: str) -> bool:
        return re.search(self.pattern, clause, re.IGNORECASE) is not None

    def domains_for(self, media: Optional[str]) -> Tuple[str, ...]:
        for media_type, domains in self.by_media:
            if media == media_type:
                return domains
        return self.domains


# First match wins, so specific rules precede generic ones.
RULES: Tuple[ClauseRule, ...] = (
    ClauseRule("edge", r"\bedges?\b|\bcanny\b", ("image-processing",), "edge"),
    ClauseRule("pose", r"\bposes?\b|\bskeleton", ("image-processing",), "pose"),
    ClauseRule("depth", r"\bdepth\b", ("image-processing",), "depth"),
    ClauseRule("normal", r"\bnormal map|\bsurface normal", ("image-processing",), "normal"),
    ClauseRule("scribble", r"\bscribble|\bsketch", ("image-processing",), "scribble"),
    ClauseRule("hed", r"\bhed\b|\bsoft boundar", ("image-processing",), "hed"),
    ClauseRule("line", r"\bstraight lines?\b|\bline map\b", ("image-processing",), "line"),
    ClauseRule("crop", r"\bcrop", ("image-perception", "image-editing"), "image"),
    ClauseRule("mask", r"\bmask\b", ("image-perception",), "mask"),
    ClauseRule("segment", r"\bsegment", ("image-perception",), "segmentation"),
    ClauseRule("detect", r"\bdetect|\bbounding box|\blocate\b", ("image-perception",), "bbox"),
    ClauseRule("dub", r"\bdub", ("video-processing",), "video"),
    ClauseRule("webpage", r"\bweb ?page|\bhtml\b", ("video-processing",), "html"),
    ClauseRule("animate", r"\banimate|\binto a video|\bvideo from\b", ("video-generation",), "video"),
    ClauseRule(
        "denoise", r"\bdenois|\benhance\b.*\b(audio|sound|recording)|\bclean up\b", ("audio-editing",), "audio"
    ),
    ClauseRule("speech", r"\bspeech\b|\bspeak|\baloud\b|\bvoice\b|\bnarrat", ("audio-generation",), "audio", needs_media=False),
    ClauseRule("music", r"\bmusic\b|\bsong\b|\bmelody\b", ("audio-generation",), "audio", needs_media=False),
    ClauseRule(
        "caption",
        r"\bcaption|\bdescribe\b|\bwhat is in\b",
        ("image-perception",),
        "text",
        by_media=(("video", ("video-perception",)),),
    ),
    ClauseRule(
        "classify",
        r"\bclassif|\bcategor|\bwhat kind\b",
        ("image-perception",),
        "category",
        by_media=(("video", ("video-perception",)), ("audio", ("audio-perception",))),
    ),
    ClauseRule("summarize", r"\bsummar", ("natural-language-processing",), "text", needs_media=False),
    ClauseRule("title", r"\btitle\b|\bheadline", ("natural-language-processing",), "text", needs_media=False),
    ClauseRule("tags", r"\btags?\b|\bkeywords?\b", ("natural-language-processing",), "tags", needs_media=False),
    ClauseRule("sentiment", r"\bsentiment", ("natural-language-processing",), "category", needs_media=False),
    ClauseRule(
        "translate", r"\btranslat|\brewrite|\bparaphras", ("natural-language-processing",), "text", needs_media=False
    ),
    ClauseRule("edit", r"\breplace\b|\bchange the\b|\bedit\b|\bremove\b", ("image-editing",), "image"),
    ClauseRule("video", r"\b(generate|create|make)\b.*\bvideo\b", ("video-generation",), "video", needs_media=False),
    ClauseRule(
        "draw",
        r"\b(generate|create|draw|make|paint)\b.*\b(image|picture|photo|painting|drawing)\b|\bpicture of\b",
        ("image-generation",),
        "image",
        needs_media=False,
    ),
    ClauseRule(
        "question",
        r"\?|\bwhat\b|\bhow many\b|\bwho\b|\bwhich\b|\bwhere\b|\bquestion\b|\banswer\b",
        ("question-answering",),
        "text",
        by_media=(("image", ("visual-question-answering",)),),
    ),
)


def find_files(text: str) -> List[Tuple[str, str]]:
    """``(path, resource type)`` for every file name in ``text``, in order, without repeats."""
    found: List[Tuple[str, str]] = []
    for match in FILE_RE.finditer(text):
        item = (match.group(0), EXTENSION_TYPES[match.group(1).lower()])
        if item not in found:
            found.append(item)
    return found


def split_clauses(request: str) -> List[str]:
    clauses = []
    for part in CLAUSE_SPLIT_RE.split(request.strip()):
        part = re.sub(r"^(?:and|then)\s+", "", part.strip(), flags=re.IGNORECASE).strip(" .,;")
        if part:
            clauses.append(part)
    return clauses


class RuleBasedDecomposer(RuleAgent):
    """
    Keyword-driven decomposition: one subtask per recognised clause. A clause
    without a file of its own consumes the previous subtask's output.
    """

    exclusive = False

    def __init__(self, registry: Optional[Sequence[ToolSpec]] = None, logger=None):
        super().__init__(name="RuleBasedDecomposer", logger=logger)
        self.registry = list(registry or [])

    def _hints(self, rule: ClauseRule, domains: Sequence[str]) -> List[str]:
        tools = [
            tool.name
            for tool in self.registry
            if tool.ret_type.name == rule.returns and set(tool.domains) & set(domains)
        ]
        return sorted(tools)[:3]

    def build(self, request: str, prior_knowledge: bool = False) -> List[Dict[str, Any]]:
        request_files = find_files(request)
        subtasks: List[Dict[str, Any]] = []
        for clause in split_clauses(request):
            rule = next((r for r in RULES if r.matches(clause)), None)
            if rule is None:
                continue

            sid = len(subtasks)
            files = find_files(clause)
            dep: List[int] = []
            media: List[Dict[str, str]] = [{"type": rtype, "value": path} for path, rtype in files]
            if subtasks and (not files or BACKREF_RE.search(clause)):
                previous = subtasks[-1]
                dep = [previous["id"]]
                media.append({"type": previous["returns"][0]["type"], "value": f"<GEN>-{previous['id']}"})
            elif not media and rule.needs_media and request_files:
                path, rtype = request_files[0]
                media = [{"type": rtype, "value": path}]

            primary = media[0]["type"] if media else None
            domains = list(rule.domains_for(primary))
            description = clause
            if prior_knowledge:
                hints = self._hints(rule, domains)
                if hints:
                    description = f"{clause} (consider tools: {', '.join(hints)})"

            subtasks.append(
                {
                    "description": description,
                    "task": domains,
                    "id": sid,
                    "dep": dep,
                    "args": media + [{"type": "text", "value": clause}],
                    "returns": [{"type": rule.returns, "value": f"<GEN>-{sid}"}],
                }
            )
        return subtasks

    def decompose(self, request: str, prior_knowledge: bool = False) -> str:
        self._start(method="decompose")
        subtasks = self.build(request, prior_knowledge=prior_knowledge)
        self._end(method="decompose", subtasks=len(subtasks))
        return json.dumps(subtasks)


class LLMDecomposer(LLMBackedAgent):
    """Decomposition by a chat model; the answer is the ``<Solution>`` block."""

    def __init__(
        self,
        llm_client: Any,
        prompt: str = "",
        registry: Optional[Sequence[ToolSpec]] = None,
        exclusive: bool = False,
        logger=None,
    ):
        super().__init__(llm_client, prompt, name="LLMDecomposer", logger=logger)
        self.registry = list(registry or [])
        # A single locally hosted model cannot serve concurrent requests.
        self.exclusive = exclusive

    def decompose(self, request: str, prior_knowledge: bool = False) -> str:
        hints = ""
        if prior_knowledge and self.registry:
            listing = "\n".join(f"  {tool.name}: {tool.description}" for tool in self.registry)
            hints = (
                "- Add hints to each description about which tools suit it. Available tools:\n" + listing
            )
        response = self.invoke(
            request=request,
            resource_types=", ".join(f'"{name}"' for name in RESOURCE_TYPES),
            domains=", ".join(f'"{name}"' for name in DOMAINS),
            hints=hints,
        )
        return extract_solution_block(response)
