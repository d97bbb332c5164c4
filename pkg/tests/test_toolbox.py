from pathlib import Path

import pytest

from tograph_core import endpoints as endpoints_module
from tograph_core.endpoints import EndpointTable, LocalEndpoint, RemoteEndpoint, build_endpoint
from tograph_core.errors import ToolExecutionError, TypeMismatch
from tograph_core.resources import Resource, ResourceType
from tograph_core.toolbox import DESK_TOOLS, default_registry, desk_toolbox, invoke, synthetic_inputs, tool_table


@pytest.mark.parametrize("tool", default_registry(), ids=lambda tool: tool.name)
def test_every_tool_runs_deterministically(tool, tmp_path):
    endpoint = LocalEndpoint(workspace=tmp_path)
    first = invoke(tool, synthetic_inputs(tool), endpoint, "<GEN>-0.0")
    second = invoke(tool, synthetic_inputs(tool), endpoint, "<GEN>-0.0")

    assert first.output.rtype == tool.ret_type
    assert first.output == second.output
    assert first.output.value
    if not tool.ret_type.inline:
        path = Path(first.output.value)
        assert path.is_file()
        assert path.read_bytes().startswith(b"TOGRAPH-MOCK " + tool.ret_type.name.encode())


def test_catalog_is_sorted_and_unique():
    names = [tool.name for tool in default_registry()]
    assert names == sorted(set(names))
    assert [tool.name for tool in desk_toolbox()] == sorted(DESK_TOOLS)


def test_edge_output_is_named_after_the_input(tmp_path):
    tool = next(tool for tool in default_registry() if tool.name == "image_to_edge")
    image = Resource(id="image_2.png", rtype=ResourceType("image"), value="image_2.png")
    result = invoke(tool, {"image": image}, LocalEndpoint(workspace=tmp_path), "<GEN>-0.0")
    assert Path(result.output.value).name == "edge_image_2.png"
    assert result.output.id == "<GEN>-0.0"


class WrongTypeEndpoint:
    def call(self, tool, inputs, output_id):
        return Resource(id=output_id, rtype=ResourceType("audio"), value="x.wav")


def test_invoke_checks_declared_return_type():
    tool = next(tool for tool in default_registry() if tool.name == "image_captioning")
    with pytest.raises(TypeMismatch):
        invoke(tool, synthetic_inputs(tool), WrongTypeEndpoint(), "<GEN>-0.0")


def test_local_endpoint_failure_injection(tmp_path):
    tool = next(tool for tool in default_registry() if tool.name == "image_captioning")
    with pytest.raises(ToolExecutionError):
        LocalEndpoint(workspace=tmp_path, fail_tools={"image_captioning"}).call(tool, synthetic_inputs(tool), "x")
    with pytest.raises(ValueError):
        LocalEndpoint(workspace=tmp_path, latency_ms=-1)


class FakeResponse:
    def __init__(self, data):
        self.data = data

    def raise_for_status(self):
        pass

    def json(self):
        return self.data


def test_remote_endpoint_posts_inputs(monkeypatch):
    sent = {}

    def fake_post(url, json, timeout):
        sent.update(url=url, payload=json)
        return FakeResponse({"output": {"type": "text", "value": "a dog on a sofa"}})

    monkeypatch.setattr(endpoints_module.requests, "post", fake_post)
    tool = next(tool for tool in default_registry() if tool.name == "image_captioning")
    image = Resource(id="dog.png", rtype=ResourceType("image"), value="dog.png")
    output = RemoteEndpoint(url="http://tools.local/run").call(tool, {"image": image}, "<GEN>-0.0")

    assert sent["payload"] == {"tool": "image_captioning", "inputs": [{"name": "image", "type": "image", "value": "dog.png"}]}
    assert output == Resource(id="<GEN>-0.0", rtype=ResourceType("text"), value="a dog on a sofa")


def test_remote_endpoint_rejects_malformed_answers(monkeypatch):
    monkeypatch.setattr(endpoints_module.requests, "post", lambda url, json, timeout: FakeResponse({"result": 1}))
    tool = next(tool for tool in default_registry() if tool.name == "image_captioning")
    with pytest.raises(ToolExecutionError):
        RemoteEndpoint(url="http://tools.local/run").call(tool, synthetic_inputs(tool), "x")


def test_endpoint_table_overrides(tmp_path):
    remote = build_endpoint("remote", tmp_path, url="http://tools.local/run")
    table = EndpointTable(default=build_endpoint("local", tmp_path), overrides={"text_to_speech": remote})
    assert table.for_tool("text_to_speech") is remote
    assert isinstance(table.for_tool("image_captioning"), LocalEndpoint)
    with pytest.raises(ValueError):
        build_endpoint("remote", tmp_path)


def test_tool_table_is_aligned():
    lines = tool_table(desk_toolbox()).splitlines()
    assert len(lines) == len(DESK_TOOLS)
    assert lines[0].startswith("edge_text_to_image")
    assert lines[0].endswith("edge, text -> image")
    assert len({line.index("image-") for line in lines if "image-" in line}) == 1
    assert tool_table([]) == ""
