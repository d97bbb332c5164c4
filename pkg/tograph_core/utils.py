from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Any, Dict, Sequence

PROMPT_KEYS = [
    "decomposition",
    "tool_assessment",
    "solution_expert",
    "resource_expert",
    "response",
]

_SLOT_RE = re.compile(r"\{\{\s*([A-Za-z_][A-Za-z0-9_]*)\s*\}\}")


def load_prompts(prompts_dir: str) -> Dict[str, str]:
    """
    Load prompt templates from a directory containing .txt files.
    Missing prompts fall back to empty strings.
    """
    prompts = {key: "" for key in PROMPT_KEYS}
    base_path = Path(prompts_dir)
    if not base_path.exists():
        raise FileNotFoundError(f"Prompts directory not found: {prompts_dir}")

    for path in base_path.glob("*.txt"):
        prompts[path.stem] = path.read_text(encoding="utf-8")
    return prompts


def render_prompt(template: str, **values: Any) -> str:
    """Fill ``{{name}}`` slots; unknown slots are left as they are."""

    def _sub(match: re.Match) -> str:
        key = match.group(1)
        if key not in values:
            return match.group(0)
        return str(values[key])

    return _SLOT_RE.sub(_sub, template)


def extract_solution_block(text: str) -> str:
    """
    Return the content between ``<Solution>`` and ``</Solution>``. Falls back to
    the raw text when the tags are missing.
    """
    if not text:
        return ""
    matches = re.findall(r"<Solution>(.*?)</Solution>", text, re.DOTALL | re.IGNORECASE)
    if matches:
        return matches[-1].strip()
    return text.strip()


def parse_solution_json(text: str) -> Any:
    """Decode the JSON payload of a ``<Solution>`` block, tolerating markdown fences."""
    block = extract_solution_block(text)
    fenced = re.match(r"```(?:json)?\s*(.*?)```\s*$", block, re.DOTALL)
    if fenced:
        block = fenced.group(1).strip()
    return json.loads(block)


def format_tool_args(args: Sequence) -> str:
    return "\n".join(f"- {arg.name} ({arg.rtype.name})" for arg in args)


def shorten(text: str, limit: int = 80) -> str:
    text = " ".join(text.split())
    if len(text) <= limit:
        return text
    return text[: limit - 3].rstrip() + "..."
