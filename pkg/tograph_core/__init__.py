"""Shared engine for the ToGraph tool planner."""

from .decomposition import parse_decomposition, serialize_decomposition
from .graph import ToolGraph, applicable_tools, build_graph, export_dot
from .resources import DOMAINS, RESOURCE_TYPES, Resource, ResourceType, parse_resource_type
from .search import SearchConfig, SearchStrategy, dfs_search, plan_subtask
from .utils import load_prompts, render_prompt

__all__ = [
    "DOMAINS",
    "RESOURCE_TYPES",
    "Resource",
    "ResourceType",
    "SearchConfig",
    "SearchStrategy",
    "ToolGraph",
    "applicable_tools",
    "build_graph",
    "dfs_search",
    "export_dot",
    "load_prompts",
    "parse_decomposition",
    "parse_resource_type",
    "plan_subtask",
    "render_prompt",
    "serialize_decomposition",
]
