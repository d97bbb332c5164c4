import pytest

from tograph_core.errors import MalformedPlaceholder, RegistryFrozen, UnknownResourceType
from tograph_core.resources import (
    RESOURCE_TYPES,
    GenPlaceholder,
    NameRegistry,
    Resource,
    ResourceType,
    format_placeholder,
    is_generated,
    is_placeholder,
    parse_placeholder,
    parse_resource_type,
)


def test_parse_known_type():
    assert parse_resource_type("image") == ResourceType("image")
    assert parse_resource_type("edge").name == "edge"


@pytest.mark.parametrize("name", ["Image", "images", "", "photo", None])
def test_unknown_type_is_rejected(name):
    with pytest.raises(UnknownResourceType):
        parse_resource_type(name)


def test_parse_honours_the_given_registry():
    custom = NameRegistry(["text", "hologram"], "resource type")
    assert parse_resource_type("hologram", custom).name == "hologram"
    assert parse_resource_type("hologram", custom) == parse_resource_type("hologram", custom)
    with pytest.raises(UnknownResourceType):
        parse_resource_type("hologram")
    with pytest.raises(UnknownResourceType):
        parse_resource_type("image", custom)


def test_inline_types():
    assert ResourceType("text").inline
    assert ResourceType("bbox").inline
    assert not ResourceType("image").inline


@pytest.mark.parametrize(
    "raw, expected",
    [("<GEN>-0", 0), ("<GEN>-12", 12), ("<GEN>-detr-bbox-3", 3), ("<GEN>-image_to_edge-1", 1)],
)
def test_parse_placeholder(raw, expected):
    assert parse_placeholder(raw) == expected


@pytest.mark.parametrize(
    "raw", ["<GEN>", "<GEN>-", "<GEN>--1", "GEN-1", "<GEN>-x", "<gen>-1", 3, "<GEN>-\u0663", "<GEN>-detr-\uff11"]
)
def test_malformed_placeholder(raw):
    with pytest.raises(MalformedPlaceholder):
        parse_placeholder(raw)
    assert not is_placeholder(raw)


def test_format_placeholder():
    assert format_placeholder(4) == "<GEN>-4"
    with pytest.raises(MalformedPlaceholder):
        format_placeholder(-1)


def test_placeholder_resource_ids():
    raw = GenPlaceholder(task_id=2, rtype=ResourceType("image"))
    step = GenPlaceholder(task_id=2, rtype=ResourceType("image"), tool="text_to_image", step=1)
    assert raw.raw == raw.resource_id == "<GEN>-2"
    assert step.raw == "<GEN>-2"
    assert step.resource_id == "<GEN>-2.1"
    assert is_generated(step.resource_id)
    assert not is_generated("image_1.png")


def test_compound_placeholder_normalizes():
    placeholder = GenPlaceholder.parse("<GEN>-detr-bbox-0", ResourceType("bbox"))
    assert placeholder.raw == "<GEN>-0"


def test_resource_from_dict_defaults_value_to_id():
    resource = Resource.from_dict({"id": "a.png", "type": "image"})
    assert resource.value == "a.png"
    assert resource.to_dict() == {"id": "a.png", "type": "image", "value": "a.png"}


def test_registry_extend_and_freeze():
    registry = RESOURCE_TYPES.copy()
    registry.extend(["point_cloud"])
    assert "point_cloud" in registry
    registry.freeze()
    registry.extend(["point_cloud"])  # already known: no error
    with pytest.raises(RegistryFrozen):
        registry.extend(["voxel"])
    assert "point_cloud" not in RESOURCE_TYPES


def test_registry_rejects_bad_identifier():
    registry = RESOURCE_TYPES.copy()
    with pytest.raises(ValueError):
        registry.extend(["Bad Name"])

