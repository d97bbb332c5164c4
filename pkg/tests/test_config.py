import json

import pytest

from tograph_core import config as config_module
from tograph_core.config import WORKSPACE_ENV, configure_registries, load_config
from tograph_core.errors import ConfigError
from tograph_core.resources import DOMAINS, RESOURCE_TYPES
from tograph_core.search import SearchStrategy

def write(tmp_path, data):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return path

def test_defaults(monkeypatch):
    monkeypatch.delenv(WORKSPACE_ENV, raising=False)
    config = load_config()
    assert config.search.strategy is SearchStrategy.ADAPTIVE
    assert config.experts.backend == "mock"
    assert config.parallelism == 4
    assert str(config.workspace) == "workspace"

def test_flags_override_file(tmp_path):
    path = write(tmp_path, {"search": {"strategy": "beam", "beam_width": 5}, "parallelism": 3})
    config = load_config(path, {"search": {"strategy": "greedy", "beam_width": None}, "parallelism": None})
    assert config.search.strategy is SearchStrategy.GREEDY
    assert config.search.beam_width == 5
    assert config.parallelism == 3

def test_workspace_from_environment(monkeypatch):
    monkeypatch.setenv(WORKSPACE_ENV, "/tmp/tograph-ws")
    assert str(load_config().workspace) == "/tmp/tograph-ws"
    assert str(load_config(overrides={"workspace": "elsewhere"}).workspace) == "elsewhere"

def test_to_search_config():
    cfg = load_config(overrides={"search": {"strategy": "exhaustive", "max_path_len": 4}}).search.to_search_config()
    assert cfg.strategy is SearchStrategy.EXHAUSTIVE
    assert cfg.max_path_len == 4

def test_prompts_dir_does_not_depend_on_the_working_directory(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    config = load_config()
    assert config.prompts_dir.is_absolute()
    assert (config.prompts_dir / "tool_assessment.txt").is_file()
    assert config.search.prune_redundant is False

@pytest.mark.parametrize(
    "data",
    [
        {"parallelism": 0},
        {"unknown_key": 1},
        {"search": {"adaptive_threshold": 9}},
        {"default_endpoint": {"kind": "remote"}},
        {"log_level": "chatty"},
        {"experts": {"backend": "oracle"}},
    ],
)
def test_invalid_configs(tmp_path, data):
    with pytest.raises(ConfigError):
        load_config(write(tmp_path, data))

def test_invalid_json(tmp_path):
    path = tmp_path / "config.json"
    path.write_text("{", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(path)
    path.write_text("[]", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(path)

def test_missing_registry_file(tmp_path):
    with pytest.raises(ConfigError, match="tool_registry"):
        load_config(overrides={"tool_registry": str(tmp_path / "missing.json")})

def test_configure_registries_extends_then_freezes(monkeypatch):
    types, domains = RESOURCE_TYPES.copy(), DOMAINS.copy()
    monkeypatch.setattr(config_module, "RESOURCE_TYPES", types)
    monkeypatch.setattr(config_module, "DOMAINS", domains)

    configure_registries(load_config(overrides={"extra_resource_types": ["point_cloud"], "extra_domains": ["robotics"]}))
    assert "point_cloud" in types and "robotics" in domains
    assert types.frozen and domains.frozen
    with pytest.raises(ConfigError):
        configure_registries(load_config(overrides={"extra_resource_types": ["voxel"]}))

def test_bad_identifier_is_a_config_error(monkeypatch):
    monkeypatch.setattr(config_module, "RESOURCE_TYPES", RESOURCE_TYPES.copy())
    monkeypatch.setattr(config_module, "DOMAINS", DOMAINS.copy())
    with pytest.raises(ConfigError):
        configure_registries(load_config(overrides={"extra_resource_types": ["Not Valid"]}))
