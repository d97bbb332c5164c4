"""
Where tools run: in-process mocks or remote HTTP services, looked up through a
static name -> endpoint table with a default.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from threading import BoundedSemaphore
from typing import Collection, Dict, Mapping, Optional

import requests

from .errors import ToolExecutionError
from .models import ToolSpec
from .resources import Resource, parse_resource_type
from .toolbox import run_mock_tool


class EndpointKind(str, Enum):
    LOCAL = "local"
    REMOTE = "remote"


class ToolEndpoint:
    kind: EndpointKind

    def call(self, tool: ToolSpec, inputs: Mapping[str, Resource], output_id: str) -> Resource:
        raise NotImplementedError("Implement this method in subclass")


@dataclass
class LocalEndpoint(ToolEndpoint):
    """In-process mock tools with optional simulated latency and failure injection."""

    workspace: Path = Path("workspace")
    latency_ms: float = 0.0
    fail: bool = False
    fail_tools: Collection[str] = field(default_factory=frozenset)
    kind: EndpointKind = field(default=EndpointKind.LOCAL, init=False)

    def __post_init__(self) -> None:
        if self.latency_ms < 0:
            raise ValueError(f"latency_ms must be >= 0, got {self.latency_ms}")
        self.workspace = Path(self.workspace)

    def call(self, tool: ToolSpec, inputs: Mapping[str, Resource], output_id: str) -> Resource:
        if self.latency_ms:
            time.sleep(self.latency_ms / 1000.0)
        if self.fail or tool.name in self.fail_tools:
            raise ToolExecutionError(tool.name, "injected failure")
        return run_mock_tool(tool, inputs, output_id, self.workspace)


@dataclass
class RemoteEndpoint(ToolEndpoint):
    """
    JSON over HTTP: POST ``{tool, inputs: [{name, type, value}]}`` and expect
    ``{output: {type, value}}``. At most ``max_in_flight`` requests run at once.
    """

    url: str = ""
    max_in_flight: int = 4
    timeout: float = 60.0
    kind: EndpointKind = field(default=EndpointKind.REMOTE, init=False)

    def __post_init__(self) -> None:
        if not self.url:
            raise ValueError("remote endpoints need a url")
        if self.max_in_flight < 1:
            raise ValueError(f"max_in_flight must be >= 1, got {self.max_in_flight}")
        self._slots = BoundedSemaphore(self.max_in_flight)

    def call(self, tool: ToolSpec, inputs: Mapping[str, Resource], output_id: str) -> Resource:
        payload = {
            "tool": tool.name,
            "inputs": [
                {"name": name, "type": inputs[name].rtype.name, "value": inputs[name].value}
                for name in (arg.name for arg in tool.args)
                if name in inputs
            ],
        }
        with self._slots:
            try:
                response = requests.post(self.url, json=payload, timeout=self.timeout)
                response.raise_for_status()
                data = response.json()
            except requests.RequestException as exc:
                raise ToolExecutionError(tool.name, f"remote endpoint {self.url} failed: {exc}") from exc
            except ValueError as exc:
                raise ToolExecutionError(tool.name, f"remote endpoint {self.url} returned invalid JSON") from exc

        try:
            output = data["output"]
            rtype = parse_resource_type(output["type"])
            value = output["value"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ToolExecutionError(tool.name, f"malformed response from {self.url}: {exc}") from exc
        return Resource(id=output_id, rtype=rtype, value=None if value is None else str(value))


@dataclass
class EndpointTable:
    """Static tool -> endpoint mapping with a default for unlisted tools."""

    default: ToolEndpoint
    overrides: Dict[str, ToolEndpoint] = field(default_factory=dict)

    def for_tool(self, name: str) -> ToolEndpoint:
        return self.overrides.get(name, self.default)

    @classmethod
    def local(cls, workspace: Path, latency_ms: float = 0.0) -> "EndpointTable":
        return cls(default=LocalEndpoint(workspace=workspace, latency_ms=latency_ms))


def build_endpoint(
    kind: str,
    workspace: Path,
    url: Optional[str] = None,
    latency_ms: float = 0.0,
    max_in_flight: int = 4,
    fail: bool = False,
) -> ToolEndpoint:
    if EndpointKind(kind) is EndpointKind.REMOTE:
        return RemoteEndpoint(url=url or "", max_in_flight=max_in_flight)
    return LocalEndpoint(workspace=workspace, latency_ms=latency_ms, fail=fail)
