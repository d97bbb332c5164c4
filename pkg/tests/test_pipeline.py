import json
from pathlib import Path

import pytest

from tograph import ToGraph, endpoint_table, resolve_tools
from tograph_core.config import EngineConfig, EndpointSettings
from tograph_core.decomposition import parse_decomposition
from tograph_core.endpoints import LocalEndpoint, RemoteEndpoint
from tograph_core.errors import ConfigError
from tograph_core.execution import CANNOT_FINISH
from tograph_core.logging_config import ActivityType, get_activity_tracker, setup_logging
from tograph_core.models import ActionStatus
from tograph_core.resources import Resource


@pytest.fixture
def desk_engine(tmp_path):
    config = EngineConfig(builtin_toolbox="desk", workspace=tmp_path / "ws", parallelism=2)
    return ToGraph(config, enable_logging=False)


@pytest.fixture
def edge_task(edge_task_path):
    data = json.loads(edge_task_path.read_text(encoding="utf-8"))
    resources = [Resource.from_dict(item) for item in data["resources"]]
    return parse_decomposition(data["subtasks"], source_request=data["request"]), resources


def test_authored_decomposition_runs_end_to_end(desk_engine, edge_task):
    decomposition, resources = edge_task
    state = desk_engine.solve(resources=resources, decomposition=decomposition)

    assert state["request"] == "Extract the edge of image_2.png"
    assert state["report"].statuses == [ActionStatus.OK]
    assert [action.tool.name for action in state["actions"]] == ["image_to_edge"]
    assert "edge_image_2.png" in state["response"]
    assert desk_engine.trace_path.is_file()


def test_request_text_is_decomposed(desk_engine):
    state = desk_engine.solve("Extract the edge of image_2.png")
    assert len(state["decomposition"]) == 1
    assert state["report"].statuses == [ActionStatus.OK]


def test_dry_run_stops_after_planning(desk_engine, edge_task):
    decomposition, resources = edge_task
    state = desk_engine.solve(resources=resources, decomposition=decomposition, dry_run=True)
    assert 0 in state["plans"]
    assert "report" not in state
    assert "response" not in state


def test_failed_decomposition_names_the_stage(desk_engine):
    state = desk_engine.solve("hum a tune backwards")
    assert state["failed_stage"] == "decompose"
    assert state["response"].startswith(f"{CANNOT_FINISH}: the decompose stage failed")


def test_failed_planning_names_the_stage(desk_engine):
    decomposition = parse_decomposition([
        {"description": "make a clip", "task": ["video-generation"], "id": 0, "dep": [],
         "args": [{"type": "image", "value": "a.png"}], "returns": [{"type": "video", "value": "<GEN>-0"}]},
    ])
    state = desk_engine.solve("make a clip from a.png", decomposition=decomposition)
    assert state["failed_stage"] == "plan"
    assert "subtask 0" in state["error"]
    assert state["response"].startswith(f"{CANNOT_FINISH}: the plan stage failed")


def test_partial_plan_still_executes(desk_engine):
    decomposition = parse_decomposition([
        {"description": "extract the edge", "task": ["image-processing"], "id": 0, "dep": [],
         "args": [{"type": "image", "value": "a.png"}], "returns": [{"type": "edge", "value": "<GEN>-0"}]},
        {"description": "make a clip", "task": ["video-generation"], "id": 1, "dep": [],
         "args": [{"type": "image", "value": "a.png"}], "returns": [{"type": "video", "value": "<GEN>-1"}]},
    ])
    state = desk_engine.solve("two things", decomposition=decomposition)
    assert sorted(state["plans"]) == [0]
    assert 1 in state["planning_errors"]
    assert state["report"].statuses == [ActionStatus.OK]


def test_stages_are_logged_in_order(tmp_path, edge_task):
    tracker = get_activity_tracker()
    tracker.reset()
    config = EngineConfig(builtin_toolbox="desk", workspace=tmp_path / "ws")
    engine = ToGraph(config, logger=setup_logging(console_output=False))
    decomposition, resources = edge_task
    engine.solve(resources=resources, decomposition=decomposition)

    stages = [a.node_name for a in tracker.get_by_type(ActivityType.STAGE_TRANSITION)]
    assert stages == ["decompose", "plan", "execute", "respond"]
    assert tracker.get_by_type(ActivityType.SEARCH_END)
    tracker.reset()


def test_resolve_tools_follows_config(tmp_path):
    assert len(resolve_tools(EngineConfig(builtin_toolbox="desk"))) == 8
    registry = tmp_path / "tools.json"
    registry.write_text(json.dumps([{
        "name": "sketcher", "description": "draw", "domains": ["image-generation"],
        "args": [{"name": "prompt", "type": "text"}], "returns": {"name": "image", "type": "image"},
    }]), encoding="utf-8")
    assert [tool.name for tool in resolve_tools(EngineConfig(tool_registry=registry))] == ["sketcher"]


def test_endpoint_table_from_config(tmp_path):
    config = EngineConfig(
        workspace=tmp_path,
        endpoints={"text_to_speech": EndpointSettings(kind="remote", url="http://tts.local/run")},
    )
    table = endpoint_table(config)
    assert isinstance(table.for_tool("text_to_speech"), RemoteEndpoint)
    assert isinstance(table.for_tool("image_to_edge"), LocalEndpoint)


def test_remote_backend_without_key_is_a_config_error(tmp_path, monkeypatch):
    monkeypatch.delenv("OPENROUTER_API_KEY", raising=False)
    prompts = Path(__file__).resolve().parent.parent / "prompts"
    config = EngineConfig(workspace=tmp_path, prompts_dir=prompts, experts={"backend": "remote"})
    with pytest.raises(ConfigError):
        ToGraph(config, enable_logging=False)
