import json
from pathlib import Path

import pytest

from main import EXIT_IO, EXIT_OK, EXIT_PLANNING, EXIT_PROTOCOL, build_parser, config_from_args, exit_code_for, main
from tograph_core.errors import ConfigError, EmptyDecomposition, MemoryWriteConflict, ProtocolViolation
from tograph_core.execution import CANNOT_FINISH


@pytest.fixture
def desk_config(tmp_path) -> Path:
    path = tmp_path / "desk.json"
    path.write_text(json.dumps({"builtin_toolbox": "desk"}), encoding="utf-8")
    return path


@pytest.fixture
def workspace(tmp_path) -> Path:
    return tmp_path / "ws"


def write_task(tmp_path, subtasks, name="task.json"):
    path = tmp_path / name
    path.write_text(json.dumps({"request": "test request", "subtasks": subtasks}), encoding="utf-8")
    return path


def test_plan_fixture_finds_edge_tool(edge_task_path, desk_config, workspace, capsys):
    code = main(["plan", "--task", str(edge_task_path), "--strategy", "exhaustive",
                 "--config", str(desk_config), "--workspace", str(workspace)])
    out = capsys.readouterr().out
    assert code == EXIT_OK
    assert "Subtask 0: Extract the edge of image_2.png" in out
    assert "    image_to_edge(image=image_2.png) -> <GEN>-0.0" in out
    assert "Solutions found: 1" in out


def test_plan_unreachable_goal(tmp_path, desk_config, workspace, capsys):
    task = write_task(tmp_path, [
        {"description": "turn it into sound", "task": ["image-processing"], "id": 0, "dep": [],
         "args": [{"type": "image", "value": "a.png"}], "returns": [{"type": "audio", "value": "<GEN>-0"}]},
    ])
    code = main(["plan", "--task", str(task), "--strategy", "greedy",
                 "--config", str(desk_config), "--workspace", str(workspace)])
    assert code == EXIT_PLANNING
    assert "no solution" in capsys.readouterr().out


def test_malformed_task_file(tmp_path, desk_config, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    assert main(["plan", "--task", str(bad), "--config", str(desk_config)]) == EXIT_PROTOCOL

    wrong_type = write_task(tmp_path, [
        {"description": "x", "task": ["image-processing"], "id": 0, "dep": [],
         "args": [{"type": "photo", "value": "a.png"}], "returns": [{"type": "edge", "value": "<GEN>-0"}]},
    ], name="wrong.json")
    assert main(["plan", "--task", str(wrong_type), "--config", str(desk_config)]) == EXIT_PROTOCOL
    assert "args[0].type" in capsys.readouterr().err


def test_run_reports_edge_file(edge_task_path, desk_config, workspace, capsys):
    code = main(["run", "--task", str(edge_task_path), "--config", str(desk_config), "--workspace", str(workspace)])
    out = capsys.readouterr().out
    assert code == EXIT_OK
    assert str((workspace / "edge_image_2.png").resolve()) in out
    assert f"Trace: {workspace / 'trace.jsonl'}" in out
    assert (workspace / "trace.jsonl").is_file()


def test_run_from_request_text(desk_config, workspace, capsys):
    code = main(["run", "Extract", "the", "edge", "of", "image_2.png",
                 "--config", str(desk_config), "--workspace", str(workspace)])
    assert code == EXIT_OK
    assert "edge_image_2.png" in capsys.readouterr().out


def test_dry_run_executes_nothing(edge_task_path, desk_config, workspace, capsys):
    code = main(["run", "--dry-run", "--task", str(edge_task_path),
                 "--config", str(desk_config), "--workspace", str(workspace)])
    out = capsys.readouterr().out
    assert code == EXIT_OK
    assert "image_to_edge" in out
    assert "Response" not in out
    assert not (workspace / "trace.jsonl").exists()


def test_undecomposable_request(desk_config, workspace, capsys):
    code = main(["run", "hum", "a", "tune", "backwards", "--config", str(desk_config), "--workspace", str(workspace)])
    out = capsys.readouterr().out
    assert code != EXIT_OK
    assert CANNOT_FINISH in out
    assert "decompose stage failed" in out


def test_missing_request_is_a_usage_error(desk_config, capsys):
    assert main(["plan", "--config", str(desk_config)]) == 2


def test_graph_stats(desk_config, capsys):
    assert main(["graph", "--stats", "--config", str(desk_config)]) == EXIT_OK
    assert capsys.readouterr().out.splitlines() == ["tools: 8", "resource types: 5", "nodes: 13", "edges: 18"]


def test_graph_dot_is_deterministic(desk_config, capsys):
    main(["graph", "--config", str(desk_config)])
    first = capsys.readouterr().out
    main(["graph", "--config", str(desk_config)])
    assert capsys.readouterr().out == first
    assert first.startswith("digraph tool_graph {")


def test_graph_with_empty_registry(tmp_path, capsys):
    registry = tmp_path / "empty.json"
    registry.write_text("[]", encoding="utf-8")
    assert main(["graph", "--stats", "--registry", str(registry)]) == EXIT_OK
    assert "edges: 0" in capsys.readouterr().out


def test_bad_registry_file(tmp_path, capsys):
    registry = tmp_path / "bad.json"
    registry.write_text(json.dumps([{"name": "x", "args": []}]), encoding="utf-8")
    assert main(["graph", "--registry", str(registry)]) == EXIT_PROTOCOL


def test_missing_registry_is_a_config_error(tmp_path, capsys):
    assert main(["graph", "--registry", str(tmp_path / "nope.json")]) == 3


def test_tools_json(desk_config, capsys):
    assert main(["tools", "--json", "--config", str(desk_config)]) == EXIT_OK
    names = [tool["name"] for tool in json.loads(capsys.readouterr().out)]
    assert names[0] == "edge_text_to_image" and len(names) == 8


def test_bench_missing_suite(tmp_path, desk_config, capsys):
    assert main(["bench", str(tmp_path / "missing.jsonl"), "--config", str(desk_config)]) == EXIT_IO


def test_bench_smoke_corpus(workspace, capsys):
    assert main(["bench", "--smoke", "--workspace", str(workspace)]) == EXIT_OK
    assert capsys.readouterr().out.splitlines()[-1].startswith("Decomposed: ")


def test_plan_output_is_byte_identical(edge_task_path, desk_config, workspace, capsys):
    argv = ["plan", "--task", str(edge_task_path), "--config", str(desk_config), "--workspace", str(workspace)]
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == first


def test_exit_code_table():
    assert exit_code_for(ConfigError("x")) == 3
    assert exit_code_for(EmptyDecomposition("x")) == EXIT_PLANNING
    assert exit_code_for(ProtocolViolation("f", "r")) == EXIT_PROTOCOL
    assert exit_code_for(FileNotFoundError("x")) == EXIT_IO
    assert exit_code_for(MemoryWriteConflict("x")) == 7


def test_summary_lists_recent_activity(edge_task_path, desk_config, workspace, capsys):
    code = main(["run", "--task", str(edge_task_path), "--config", str(desk_config),
                 "--workspace", str(workspace), "--summary", "--recent", "3"])
    err = capsys.readouterr().err
    assert code == EXIT_OK
    assert "RUN SUMMARY" in err
    assert "Ok: 1  Failed: 0  Skipped: 0" in err
    assert "Recent Activities (last 3):" in err


def test_allow_tool_reuse_flag_reaches_the_search(tmp_path, desk_config, workspace, capsys):
    task = write_task(tmp_path, [
        {"description": "what is the capital of France?", "task": ["question-answering"], "id": 0, "dep": [],
         "args": [{"type": "text", "value": "what is the capital of France?"}],
         "returns": [{"type": "text", "value": "<GEN>-0"}]},
    ])
    common = ["plan", "--task", str(task), "--strategy", "exhaustive", "--max-path-len", "2",
              "--config", str(desk_config), "--workspace", str(workspace)]

    assert main(common) == EXIT_OK
    assert "Solutions found: 1" in capsys.readouterr().out

    assert main(common + ["--allow-tool-reuse"]) == EXIT_OK
    assert "Solutions found: 2" in capsys.readouterr().out


def test_no_allow_tool_reuse_overrides_the_config(tmp_path):
    config_path = tmp_path / "reuse.json"
    config_path.write_text(json.dumps({"search": {"allow_tool_reuse": True}}), encoding="utf-8")
    parser = build_parser()

    assert config_from_args(parser.parse_args(["tools", "--config", str(config_path)])).search.allow_tool_reuse
    args = parser.parse_args(["tools", "--config", str(config_path), "--no-allow-tool-reuse"])
    assert config_from_args(args).search.allow_tool_reuse is False
