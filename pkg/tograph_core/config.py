"""
Engine configuration: a JSON file validated by pydantic, overridden by CLI
flags. Environment variables only supply secrets and the workspace path.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigError, RegistryFrozen
from .resources import DOMAINS, RESOURCE_TYPES
from .search import SearchConfig, SearchStrategy

PROMPTS_DIR = Path(__file__).resolve().parent.parent / "prompts"

WORKSPACE_ENV = "TOGRAPH_WORKSPACE"


class SearchSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    strategy: SearchStrategy = SearchStrategy.ADAPTIVE
    beam_width: int = Field(default=3, ge=1)
    adaptive_threshold: int = Field(default=3, ge=1, le=5)
    max_path_len: int = Field(default=10, ge=1)
    allow_tool_reuse: bool = False
    prune_redundant: bool = False
    domain_filter: bool = True

    def to_search_config(self) -> SearchConfig:
        return SearchConfig(**self.model_dump())


class ExpertSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    backend: Literal["mock", "remote"] = "mock"
    provider: str = "openrouter"
    model: str = "openai/gpt-4o-mini"
    base_url: Optional[str] = None
    api_key_env: str = "OPENROUTER_API_KEY"
    temperature: float = Field(default=0.0, ge=0.0, le=2.0)
    max_tokens: int = Field(default=1000, ge=1)
    retries: int = Field(default=2, ge=0)


class EndpointSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["local", "remote"] = "local"
    url: Optional[str] = None
    latency_ms: float = Field(default=0.0, ge=0.0)
    max_in_flight: int = Field(default=4, ge=1)
    fail: bool = False

    @model_validator(mode="after")
    def _remote_needs_url(self) -> "EndpointSettings":
        if self.kind == "remote" and not self.url:
            raise ValueError("remote endpoints need a url")
        return self


class EngineConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    tool_registry: Optional[Path] = None
    # Used when no registry file is given.
    builtin_toolbox: Literal["full", "desk"] = "full"
    extra_resource_types: List[str] = Field(default_factory=list)
    extra_domains: List[str] = Field(default_factory=list)
    search: SearchSettings = Field(default_factory=SearchSettings)
    experts: ExpertSettings = Field(default_factory=ExpertSettings)
    decomposer: Literal["rule", "remote"] = "rule"
    decomposition_retries: int = Field(default=2, ge=0)
    prior_knowledge: bool = False
    responder: Literal["template", "remote"] = "template"
    endpoints: Dict[str, EndpointSettings] = Field(default_factory=dict)
    default_endpoint: EndpointSettings = Field(default_factory=EndpointSettings)
    workspace: Path = Path("workspace")
    parallelism: int = Field(default=4, ge=1)
    trace_path: Optional[Path] = None
    prompts_dir: Path = PROMPTS_DIR
    log_level: str = "WARNING"
    log_file: Optional[str] = None

    @field_validator("tool_registry")
    @classmethod
    def _registry_exists(cls, value: Optional[Path]) -> Optional[Path]:
        if value is not None and not Path(value).is_file():
            raise ValueError(f"tool registry file not found: {value}")
        return value

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        if value.upper() not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"unknown log level {value!r}")
        return value.upper()

    def api_key(self) -> Optional[str]:
        return os.getenv(self.experts.api_key_env)


def _with_env(data: Dict[str, Any]) -> Dict[str, Any]:
    workspace = os.getenv(WORKSPACE_ENV)
    if workspace and "workspace" not in data:
        data = {**data, "workspace": workspace}
    return data


def load_config(path: Optional[str | Path] = None, overrides: Optional[Dict[str, Any]] = None) -> EngineConfig:
    """
    Defaults < config file < ``overrides`` (CLI flags). Nested sections in
    ``overrides`` are merged key by key. ``None`` override values are ignored.
    """
    data: Dict[str, Any] = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if isinstance(value, dict):
            section = dict(data.get(key) or {})
            section.update({k: v for k, v in value.items() if v is not None})
            data[key] = section
        else:
            data[key] = value

    try:
        return EngineConfig.model_validate(_with_env(data))
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(part) for part in first.get("loc", ()))
        raise ConfigError(f"invalid configuration at {where or 'root'}: {first.get('msg')}") from exc


def configure_registries(config: EngineConfig, freeze: bool = True) -> None:
    """Add configured resource types and domains, then freeze both registries."""
    try:
        RESOURCE_TYPES.extend(config.extra_resource_types)
        DOMAINS.extend(config.extra_domains)
    except (RegistryFrozen, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if freeze:
        RESOURCE_TYPES.freeze()
        DOMAINS.freeze()
