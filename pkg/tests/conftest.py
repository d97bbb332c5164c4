import random
from pathlib import Path
from typing import Callable, List, Sequence

import pytest

from tograph_agents import AgentBundle
from tograph_core.config import EngineConfig
from tograph_core.models import Subtask, ToolArg, ToolAssessment, ToolSpec, TypedValue
from tograph_core.resources import GenPlaceholder, ResourceType
from tograph_core.toolbox import default_registry, desk_toolbox

FIXTURES = Path(__file__).parent / "fixtures"
RANDOM_TYPES = ("text", "image", "audio", "video", "edge", "mask", "bbox", "tags")


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def edge_task_path() -> Path:
    return FIXTURES / "edge_task.json"


@pytest.fixture
def desk_tools() -> List[ToolSpec]:
    return desk_toolbox()


@pytest.fixture
def full_tools() -> List[ToolSpec]:
    return default_registry()


@pytest.fixture
def mock_agents() -> AgentBundle:
    return AgentBundle.create(registry=default_registry())


@pytest.fixture
def engine_config(tmp_path) -> EngineConfig:
    return EngineConfig(workspace=tmp_path / "workspace", parallelism=2)


def make_tool(name: str, args: Sequence[str], ret: str, domains=("image-processing",), description="") -> ToolSpec:
    return ToolSpec(
        name=name,
        description=description or f"{name} tool",
        domains=tuple(domains),
        args=tuple(ToolArg(f"{rtype}_{i}", ResourceType(rtype)) for i, rtype in enumerate(args)),
        ret=ToolArg("out", ResourceType(ret)),
    )


def make_subtask(args: Sequence[str], ret: str, description: str = "task", domains=(), subtask_id: int = 0) -> Subtask:
    return Subtask(
        id=subtask_id,
        description=description,
        domains=tuple(domains),
        dep=(),
        args=tuple(TypedValue(ResourceType(rtype), f"{rtype}_input") for rtype in args),
        returns=(GenPlaceholder(task_id=subtask_id, rtype=ResourceType(ret)),),
    )


def random_instance(rng: random.Random, max_tools: int = 12):
    """A random registry plus a subtask over the same small type vocabulary."""
    tools = []
    for index in range(rng.randint(3, max_tools)):
        args = rng.sample(RANDOM_TYPES, rng.randint(1, 2))
        tools.append(make_tool(f"t{index:02d}", args, rng.choice(RANDOM_TYPES)))
    subtask = make_subtask(rng.sample(RANDOM_TYPES, rng.randint(1, 2)), rng.choice(RANDOM_TYPES))
    return tools, subtask


class TableAssessor:
    """Fixed per-tool scores; unknown tools score 1."""

    name = "TableAssessor"

    def __init__(self, scores):
        self.scores = dict(scores)

    def assess(self, task, tool):
        return ToolAssessment(tool=tool.name, score=self.scores.get(tool.name, 1))


@pytest.fixture
def tool_factory() -> Callable[..., ToolSpec]:
    return make_tool


@pytest.fixture
def subtask_factory() -> Callable[..., Subtask]:
    return make_subtask
