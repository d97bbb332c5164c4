"""
Bipartite tool graph: resource-type nodes and tool nodes.

A tool is linked to the type it returns (tool -> resource) and every type it
accepts is linked to the tool (resource -> tool). There are no tool-tool or
resource-resource edges.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import networkx as nx

from .errors import DuplicateTool, InvalidToolSpec
from .models import ToolSpec
from .resources import ResourceType

RESOURCE = "resource"
TOOL = "tool"


def _rnode(rtype: ResourceType) -> tuple:
    return (RESOURCE, rtype.name)


def _tnode(name: str) -> tuple:
    return (TOOL, name)


class ToolGraph:
    """Immutable view over a ``networkx.DiGraph`` holding the bipartite structure."""

    def __init__(self, graph: nx.DiGraph, tools: Dict[str, ToolSpec]):
        self._graph = nx.freeze(graph)
        self._tools = tools

    # Nodes -----------------------------------------------------------------
    @property
    def tools(self) -> List[ToolSpec]:
        return [self._tools[name] for name in sorted(self._tools)]

    @property
    def resource_nodes(self) -> List[ResourceType]:
        return sorted(
            ResourceType(key[1]) for key in self._graph.nodes if key[0] == RESOURCE
        )

    def tool(self, name: str) -> ToolSpec:
        return self._tools[name]

    def __contains__(self, name: object) -> bool:
        return name in self._tools

    def __len__(self) -> int:
        return len(self._tools)

    # Edges -----------------------------------------------------------------
    def tool_returns(self, tool: ToolSpec, rtype: ResourceType) -> bool:
        """G(T, R): the tool-resource relation."""
        return self._graph.has_edge(_tnode(tool.name), _rnode(rtype))

    def feeds(self, rtype: ResourceType, tool: ToolSpec) -> bool:
        """G(R, T): the resource-tool relation."""
        return self._graph.has_edge(_rnode(rtype), _tnode(tool.name))

    def consumers(self, rtype: ResourceType) -> List[ToolSpec]:
        node = _rnode(rtype)
        if node not in self._graph:
            return []
        return sorted((self._tools[key[1]] for key in self._graph.successors(node)), key=lambda t: t.name)

    def producers(self, rtype: ResourceType) -> List[ToolSpec]:
        node = _rnode(rtype)
        if node not in self._graph:
            return []
        return sorted((self._tools[key[1]] for key in self._graph.predecessors(node)), key=lambda t: t.name)

    @property
    def edges(self) -> List[tuple]:
        return sorted(self._graph.edges)

    @property
    def edge_count(self) -> int:
        return self._graph.number_of_edges()

    @property
    def node_count(self) -> int:
        return self._graph.number_of_nodes()


def build_graph(tools: Iterable[ToolSpec]) -> ToolGraph:
    """Build the tool graph; the result does not depend on input order."""
    registry: Dict[str, ToolSpec] = {}
    for tool in tools:
        if tool.name in registry:
            raise DuplicateTool(tool.name)
        registry[tool.name] = tool

    graph = nx.DiGraph()
    for name in sorted(registry):
        tool = registry[name]
        graph.add_node(_tnode(name), kind=TOOL)
        for arg in tool.args:
            graph.add_node(_rnode(arg.rtype), kind=RESOURCE)
            graph.add_edge(_rnode(arg.rtype), _tnode(name))
        graph.add_node(_rnode(tool.ret_type), kind=RESOURCE)
        graph.add_edge(_tnode(name), _rnode(tool.ret_type))
    return ToolGraph(graph, registry)


def applicable_tools(
    graph: ToolGraph,
    available: Iterable[ResourceType],
    domains: Sequence[str] = (),
) -> List[ToolSpec]:
    """
    Tools whose every argument type is available and whose domains intersect
    ``domains`` (an empty filter admits every domain), sorted by name.
    """
    have = frozenset(available)
    wanted = set(domains)
    seen: Dict[str, ToolSpec] = {}
    for rtype in have:
        for tool in graph.consumers(rtype):
            if tool.name in seen:
                continue
            if not tool.arg_types <= have:
                continue
            if wanted and not wanted.intersection(tool.domains):
                continue
            seen[tool.name] = tool
    return [seen[name] for name in sorted(seen)]


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(graph: ToolGraph, name: str = "tool_graph") -> str:
    """Render the graph as deterministic Graphviz DOT text."""
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    for rtype in graph.resource_nodes:
        lines.append(f"  {_quote('R:' + rtype.name)} [label={_quote(rtype.name)}, shape=ellipse];")
    for tool in graph.tools:
        lines.append(f"  {_quote('T:' + tool.name)} [label={_quote(tool.name)}, shape=box];")
    for source, target in graph.edges:
        lines.append(f"  {_quote(source[0][0].upper() + ':' + source[1])} -> "
                     f"{_quote(target[0][0].upper() + ':' + target[1])};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def load_tool_registry(path: str | Path) -> List[ToolSpec]:
    """Load a tool registry JSON document (an array of tool records)."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidToolSpec(f"tool registry {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise InvalidToolSpec(f"tool registry {path} must be a JSON array")
    return [ToolSpec.from_dict(record) for record in data]


def dump_tool_registry(tools: Sequence[ToolSpec], indent: Optional[int] = 2) -> str:
    return json.dumps([tool.to_dict() for tool in sorted(tools, key=lambda t: t.name)], indent=indent)
