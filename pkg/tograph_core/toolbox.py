"""
Built-in tool catalog and the deterministic mock implementations behind it.

Signatures are engine-defined (see README for the full table). Mock tools
never look at pixels: media outputs are small tagged files whose names and
bytes are pure functions of the tool and its inputs.
"""

from __future__ import annotations

import hashlib
import json
import re
import time
from pathlib import Path
from typing import Dict, List, Mapping, Sequence, Tuple

from .errors import TypeMismatch
from .models import ToolArg, ToolResult, ToolSpec
from .resources import Resource, parse_resource_type
from .utils import shorten

# name, description, domains, [(arg name, type)], (ret name, type)
_CATALOG: List[Tuple[str, str, Tuple[str, ...], List[Tuple[str, str]], Tuple[str, str]]] = [
    # question answering
    ("question_answering", "Answer a question in natural language using general knowledge.",
     ("question-answering",), [("text", "text")], ("answer", "text")),
    ("image_question_answering", "Answer a question about the content of an image (visual question answering).",
     ("question-answering", "visual-question-answering"), [("image", "image"), ("text", "text")], ("answer", "text")),
    # natural language processing
    ("summarization", "Summarize a long text into a short summary paragraph.",
     ("natural-language-processing",), [("text", "text")], ("summary", "text")),
    ("title_generation", "Generate a short title or headline for a text.",
     ("natural-language-processing",), [("text", "text")], ("title", "text")),
    ("text_to_tags", "Extract keywords and tags from a text.",
     ("natural-language-processing",), [("text", "text")], ("tags", "tags")),
    ("text_to_text_generation", "Generate or rewrite text, such as translation, continuation or paraphrase.",
     ("natural-language-processing",), [("text", "text")], ("text", "text")),
    ("sentiment_analysis", "Classify the sentiment of a text as positive, negative or neutral.",
     ("natural-language-processing",), [("text", "text")], ("sentiment", "category")),
    # image perception
    ("object_detection", "Detect objects in an image and return their bounding boxes.",
     ("image-perception",), [("image", "image")], ("bbox", "bbox")),
    ("image_captioning", "Describe an image with a caption sentence.",
     ("image-perception",), [("image", "image")], ("caption", "text")),
    ("visual_grounding", "Locate the object mentioned by a phrase in an image and return its bounding box.",
     ("image-perception",), [("image", "image"), ("text", "text")], ("bbox", "bbox")),
    ("image_classification", "Classify an image into a category label.",
     ("image-perception",), [("image", "image")], ("category", "category")),
    ("segment_anything", "Segment everything in an image into a segmentation map.",
     ("image-perception",), [("image", "image")], ("segmentation", "segmentation")),
    ("instance_segmentation", "Segment the object named by a phrase in an image and return its mask.",
     ("image-perception",), [("image", "image"), ("text", "text")], ("mask", "mask")),
    ("segment_by_points", "Segment the object at a clicked point in an image and return its mask.",
     ("image-perception",), [("image", "image"), ("point", "point")], ("mask", "mask")),
    # image generation
    ("text_to_image", "Generate an image from a text prompt.",
     ("image-generation",), [("text", "text")], ("image", "image")),
    ("image_to_image", "Generate a new variation of an image.",
     ("image-generation",), [("image", "image")], ("image", "image")),
    # image editing
    ("text_image_editing", "Edit an image following a text instruction, such as replace or change objects.",
     ("image-editing",), [("image", "image"), ("text", "text")], ("image", "image")),
    ("image_inpainting", "Inpaint and remove the masked region of an image.",
     ("image-editing",), [("image", "image"), ("mask", "mask")], ("image", "image")),
    ("image_cropping", "Crop an image to a bounding box region.",
     ("image-editing",), [("image", "image"), ("bbox", "bbox")], ("image", "image")),
    ("mask_image", "Apply a mask to an image and keep only the masked region.",
     ("image-editing",), [("image", "image"), ("mask", "mask")], ("image", "image")),
    ("highlight_object_on_image", "Highlight an object on an image by drawing its bounding box.",
     ("image-editing",), [("image", "image"), ("bbox", "bbox")], ("image", "image")),
    # video perception
    ("video_classification", "Classify a video into a category label.",
     ("video-perception",), [("video", "video")], ("category", "category")),
    ("video_captioning", "Describe the content of a video with a caption.",
     ("video-perception",), [("video", "video")], ("caption", "text")),
    # video processing
    ("dub_video", "Dub a video with an audio track.",
     ("video-processing",), [("video", "video"), ("audio", "audio")], ("video", "video")),
    ("video_to_webpage", "Build an html web page presenting a video.",
     ("video-processing",), [("video", "video")], ("html", "html")),
    # video generation
    ("image_audio_to_video", "Generate a video from an image and an audio soundtrack.",
     ("video-generation",), [("image", "image"), ("audio", "audio")], ("video", "video")),
    ("image_to_video", "Animate an image into a short video.",
     ("video-generation",), [("image", "image")], ("video", "video")),
    ("text_to_video", "Generate a video from a text prompt.",
     ("video-generation",), [("text", "text")], ("video", "video")),
    # audio perception
    ("audio_classification", "Classify an audio clip into a sound category label.",
     ("audio-perception",), [("audio", "audio")], ("category", "category")),
    # audio generation
    ("text_to_music", "Compose music from a text description.",
     ("audio-generation",), [("text", "text")], ("music", "audio")),
    ("text_to_speech", "Convert text into spoken voice audio.",
     ("audio-generation",), [("text", "text")], ("speech", "audio")),
    ("audio_to_audio", "Enhance or transform an audio clip, such as denoising.",
     ("audio-generation", "audio-editing"), [("audio", "audio")], ("audio", "audio")),
]

# image processing: image -> condition map
_CONDITIONS = {
    "edge": "Extract the edge map of an image (canny edge detection).",
    "line": "Extract the straight line map of an image.",
    "hed": "Extract the soft hed boundary map of an image.",
    "scribble": "Extract a scribble sketch from an image.",
    "pose": "Estimate the human pose skeleton in an image.",
    "depth": "Estimate the depth map of an image.",
    "normal": "Estimate the surface normal map of an image.",
}
for _cond, _desc in _CONDITIONS.items():
    _CATALOG.append((f"image_to_{_cond}", _desc, ("image-processing",), [("image", "image")], (_cond, _cond)))
    _CATALOG.append((
        f"{_cond}_text_to_image",
        f"Generate an image from a {_cond} map and a text prompt.",
        ("image-generation",),
        [(_cond, _cond), ("text", "text")],
        ("image", "image"),
    ))
_CATALOG.append((
    "segmentation_text_to_image",
    "Generate an image from a segmentation map and a text prompt.",
    ("image-generation",),
    [("segmentation", "segmentation"), ("text", "text")],
    ("image", "image"),
))

DESK_TOOLS = (
    "edge_text_to_image",
    "image_captioning",
    "image_cropping",
    "image_to_edge",
    "object_detection",
    "question_answering",
    "text_to_image",
    "text_to_speech",
)

MEDIA_EXTENSIONS = {"video": ".mp4", "audio": ".wav", "html": ".html"}
CATEGORIES = ("animal", "building", "landscape", "music", "person", "speech", "vehicle")


def _spec(record) -> ToolSpec:
    name, description, domains, args, (ret_name, ret_type) = record
    return ToolSpec(
        name=name,
        description=description,
        domains=tuple(domains),
        args=tuple(ToolArg(arg_name, parse_resource_type(arg_type)) for arg_name, arg_type in args),
        ret=ToolArg(ret_name, parse_resource_type(ret_type)),
    )


def default_registry() -> List[ToolSpec]:
    """The full built-in catalog, sorted by name."""
    return sorted((_spec(record) for record in _CATALOG), key=lambda tool: tool.name)


def desk_toolbox() -> List[ToolSpec]:
    """An eight-tool subset for small, hand-checkable graphs."""
    return [tool for tool in default_registry() if tool.name in DESK_TOOLS]


# Mock implementations --------------------------------------------------------


def _digest(tool: ToolSpec, inputs: Mapping[str, Resource]) -> str:
    payload = [tool.name, [[name, res.rtype.name, res.value] for name, res in sorted(inputs.items())]]
    return hashlib.sha256(json.dumps(payload).encode("utf-8")).hexdigest()


def _words(text: str) -> List[str]:
    return re.findall(r"[a-z][a-z0-9]+", (text or "").lower())


def _first(inputs: Mapping[str, Resource], tool: ToolSpec, inline: bool):
    for arg in tool.args:
        resource = inputs.get(arg.name)
        if resource is not None and resource.rtype.inline is inline:
            return resource
    return None


def _inline_payload(tool: ToolSpec, inputs: Mapping[str, Resource], digest: str) -> str:
    rtype = tool.ret_type.name
    text = _first(inputs, tool, inline=True)
    media = _first(inputs, tool, inline=False)
    subject = Path(media.value).stem if media is not None and media.value else ""
    words = _words(text.value) if text is not None else []

    if rtype == "bbox":
        x0, y0 = int(digest[0:2], 16), int(digest[2:4], 16)
        return f"{x0},{y0},{x0 + 16 + int(digest[4:6], 16)},{y0 + 16 + int(digest[6:8], 16)}"
    if rtype == "point":
        return f"{int(digest[0:2], 16)},{int(digest[2:4], 16)}"
    if rtype == "category":
        return CATEGORIES[int(digest[:8], 16) % len(CATEGORIES)]
    if rtype == "tags":
        unique = list(dict.fromkeys(word for word in words if len(word) > 3))
        return ", ".join(unique[:5] or [subject or "untagged"])

    # text
    if tool.name == "summarization":
        return "Summary: " + " ".join(words[:12])
    if tool.name == "title_generation":
        return "Title: " + " ".join(word.capitalize() for word in words[:6])
    if tool.name in ("image_captioning", "video_captioning"):
        return f"A caption of {subject}"
    if tool.name == "question_answering":
        return f"Answer to '{shorten(text.value if text else '', 60)}'"
    if tool.name == "image_question_answering":
        return f"Answer about {subject}: '{shorten(text.value if text else '', 60)}'"
    parts = [res.value or res.id for _, res in sorted(inputs.items())]
    return f"{tool.name}: " + shorten(" | ".join(parts), 80)


def _media_name(tool: ToolSpec, inputs: Mapping[str, Resource], digest: str) -> str:
    rtype = tool.ret_type.name
    prefix = rtype if tool.name.startswith("image_to_") else tool.name
    media = _first(inputs, tool, inline=False)
    stem = Path(media.value).stem if media is not None and media.value else digest[:8]
    if len(inputs) > 1 and media is not None:
        stem = f"{stem}_{digest[:6]}"
    return f"{prefix}_{stem}{MEDIA_EXTENSIONS.get(rtype, '.png')}"


def run_mock_tool(tool: ToolSpec, inputs: Mapping[str, Resource], output_id: str, workspace: Path) -> Resource:
    """Deterministic stand-in for a real tool: same inputs, same output bytes."""
    digest = _digest(tool, inputs)
    rtype = tool.ret_type
    if rtype.inline:
        return Resource(id=output_id, rtype=rtype, value=_inline_payload(tool, inputs, digest))

    workspace = Path(workspace)
    workspace.mkdir(parents=True, exist_ok=True)
    path = (workspace / _media_name(tool, inputs, digest)).resolve()
    marker = f"TOGRAPH-MOCK {rtype.name} {tool.name} {digest}\n".encode("utf-8")
    path.write_bytes(marker)
    return Resource(id=output_id, rtype=rtype, value=str(path))


def invoke(tool: ToolSpec, inputs: Mapping[str, Resource], endpoint, output_id: str) -> ToolResult:
    """
    Run one tool call through its endpoint and check the declared return type.

    Raises ``ToolExecutionError`` from the endpoint and ``TypeMismatch`` when an
    implementation answers with a resource of the wrong type.
    """
    started = time.perf_counter()
    output = endpoint.call(tool, inputs, output_id)
    elapsed = time.perf_counter() - started
    if output.rtype != tool.ret_type:
        raise TypeMismatch(f"output of {tool.name}", tool.ret_type.name, output.rtype.name)
    return ToolResult(output=output, elapsed=elapsed, tool=tool.name)


def synthetic_inputs(tool: ToolSpec) -> Dict[str, Resource]:
    """One plausible input per argument; used to smoke-test every registry tool."""
    values = {
        "text": "a red car parked near the river",
        "tags": "car, river",
        "category": "vehicle",
        "point": "10,20",
        "bbox": "4,4,40,40",
    }
    inputs = {}
    for arg in tool.args:
        name = arg.rtype.name
        value = values.get(name, f"{name}_1{MEDIA_EXTENSIONS.get(name, '.png')}")
        inputs[arg.name] = Resource(id=f"input:{arg.name}", rtype=arg.rtype, value=value)
    return inputs


def tool_table(tools: Sequence[ToolSpec]) -> str:
    """Aligned name / domains / signature listing for the ``tools`` command."""
    rows = [
        (
            tool.name,
            ",".join(tool.domains),
            f"{', '.join(arg.rtype.name for arg in tool.args)} -> {tool.ret_type.name}",
        )
        for tool in sorted(tools, key=lambda t: t.name)
    ]
    if not rows:
        return ""
    widths = [max(len(row[i]) for row in rows) for i in range(2)]
    return "\n".join(f"{r[0]:<{widths[0]}}  {r[1]:<{widths[1]}}  {r[2]}" for r in rows)
