import json

import pytest

import llm_clients
from conftest import make_subtask, make_tool
from llm_clients import ChatCompletionClient, create_llm_client
from tograph_agents import (
    AgentBundle,
    HeuristicSolutionExpert,
    KeywordToolAssessor,
    LLMDecomposer,
    LLMResourceExpert,
    LLMResponder,
    LLMSolutionExpert,
    LLMToolAssessor,
    RuleBasedDecomposer,
    keyword_overlap,
    keywords,
)
from tograph_agents.decomposer import find_files, split_clauses
from tograph_core.config import PROMPTS_DIR
from tograph_core.decomposition import decompose
from tograph_core.errors import AssessorProtocolError, EmptyDecomposition, ExpertProtocolError
from tograph_core.models import SolutionPath, SolutionStep
from tograph_core.resources import GenPlaceholder, Resource, ResourceType
from tograph_core.toolbox import default_registry
from tograph_core.utils import load_prompts, render_prompt


class FakeClient:
    def __init__(self, *responses):
        self.responses = list(responses)
        self.calls = []

    def generate(self, prompt, **kwargs):
        self.calls.append((prompt, kwargs))
        return self.responses[min(len(self.calls), len(self.responses)) - 1]


def tool_named(name):
    return next(tool for tool in default_registry() if tool.name == name)


def single_step(tool):
    output = GenPlaceholder(task_id=0, rtype=tool.ret_type, tool=tool.name, step=0)
    return SolutionPath(subtask_id=0, steps=(SolutionStep(tool, output),), terminal_type=tool.ret_type)


def chain(*names):
    tools = [tool_named(name) for name in names]
    steps = tuple(
        SolutionStep(tool, GenPlaceholder(task_id=0, rtype=tool.ret_type, tool=tool.name, step=index))
        for index, tool in enumerate(tools)
    )
    return SolutionPath(subtask_id=0, steps=steps, terminal_type=tools[-1].ret_type)


def test_keywords_drop_stopwords_and_media_words():
    assert keywords("Crop the dog in image.png and describe it") == ["crop", "dog", "describe"]


def test_keyword_overlap_matches_shared_stems():
    assert keyword_overlap("crop the dog", "image cropping: Crop an image to a bounding box region.") == ["crop"]
    assert keyword_overlap("detect the cat", "object detection") == ["detect"]


def test_keyword_assessor_rewards_matching_return_type():
    assessor = KeywordToolAssessor()
    subtask = make_subtask(["image"], "edge", description="extract the edge map")
    assert assessor.assess(subtask, tool_named("image_to_edge")).score == 5
    assert assessor.assess(subtask, tool_named("image_captioning")).score == 2


def test_find_files_and_clauses():
    assert find_files("dub clip.mp4 with song.wav then show clip.mp4") == [("clip.mp4", "video"), ("song.wav", "audio")]
    assert split_clauses("Detect the dog in photo.png, then caption it") == ["Detect the dog in photo.png", "caption it"]


def test_rule_decomposer_single_clause():
    result = decompose("Extract the edge of image_2.png", RuleBasedDecomposer())
    (subtask,) = result.subtasks
    assert subtask.domains == ("image-processing",)
    assert subtask.args[0].value == "image_2.png"
    assert subtask.return_types == (ResourceType("edge"),)


def test_rule_decomposer_chains_back_references():
    result = decompose("Detect the dog in photo.png, then caption it", RuleBasedDecomposer())
    first, second = result.subtasks
    assert first.return_types == (ResourceType("bbox"),)
    assert second.dep == (0,)
    assert second.args[0].value == "<GEN>-0"
    assert second.return_types == (ResourceType("text"),)


def test_rule_decomposer_adds_tool_hints():
    decomposer = RuleBasedDecomposer(registry=default_registry())
    doc = json.loads(decomposer.decompose("Extract the edge of image_2.png", prior_knowledge=True))
    assert "consider tools: image_to_edge" in doc[0]["description"]


def test_rule_decomposer_gives_up_on_unknown_requests():
    assert RuleBasedDecomposer().decompose("hum a tune backwards") == "[]"
    with pytest.raises(EmptyDecomposition):
        decompose("hum a tune backwards", RuleBasedDecomposer())


def test_llm_assessor_parses_solution_block():
    client = FakeClient('<Solution>{"Thought": "fits", "Score": "4"}</Solution>')
    assessor = LLMToolAssessor(client, prompt="assess {{task}}")
    assessment = assessor.assess(make_subtask(["image"], "text"), tool_named("image_captioning"))
    assert assessment.score == 4
    assert assessment.thought == "fits"
    assert client.calls[0][1]["tool_name"] == "image_captioning"


def test_llm_assessor_rejects_garbage():
    assessor = LLMToolAssessor(FakeClient("no idea"), prompt="assess")
    with pytest.raises(AssessorProtocolError):
        assessor.assess(make_subtask(["image"], "text"), tool_named("image_captioning"))


def test_heuristic_solution_expert_scores_by_extra_steps():
    expert = HeuristicSolutionExpert()
    paths = [
        chain("image_to_edge"),
        chain("image_captioning", "question_answering", "image_to_edge"),
        chain("image_captioning", "text_to_image", "image_to_edge"),
    ]
    scores = expert.score_solutions(make_subtask(["image"], "edge"), "", paths, ["", "", ""])
    assert [item.score for item in scores] == [5, 3, 3]


def test_heuristic_solution_expert_floors_at_one():
    expert = HeuristicSolutionExpert()
    long_path = chain(
        "image_captioning", "question_answering", "text_to_image", "object_detection", "image_cropping", "image_to_edge"
    )
    scores = expert.score_solutions(make_subtask(["image"], "edge"), "", [long_path, chain("image_to_edge")], ["", ""])
    assert [item.score for item in scores] == [1, 5]



def test_llm_solution_expert_scores_each_candidate():
    client = FakeClient('<Solution>{"Score": 5}</Solution>', '<Solution>{"Score": 2}</Solution>')
    expert = LLMSolutionExpert(client, prompt="rank")
    paths = [single_step(tool_named("image_captioning")), single_step(tool_named("image_question_answering"))]
    scores = expert.score_solutions(make_subtask(["image"], "text"), "describe", paths, ["a", "b"])
    assert [item.score for item in scores] == [5, 2]
    assert [call[1]["solution"] for call in client.calls] == ["a", "b"]


def test_llm_resource_expert_maps_values_to_refs_and_text():
    client = FakeClient('<Solution>[{"image": "photo.png"}, {"text": "what is the dog doing"}]</Solution>')
    expert = LLMResourceExpert(client, prompt="bind")
    photo = Resource(id="photo.png", rtype=ResourceType("image"), value="photo.png")
    binding = expert.bind(None, "ask", single_step(tool_named("image_question_answering")), [photo])
    image, text = binding.steps[0].inputs
    assert image.ref == "photo.png"
    assert text.inline and text.text == "what is the dog doing"


def test_llm_resource_expert_checks_argument_count():
    expert = LLMResourceExpert(FakeClient('<Solution>[{"image": "photo.png"}]</Solution>'), prompt="bind")
    with pytest.raises(ExpertProtocolError):
        expert.bind(None, "ask", single_step(tool_named("image_question_answering")), [])


def test_llm_decomposer_returns_solution_block():
    client = FakeClient('Plan:\n<Solution>[{"id": 0}]</Solution>')
    decomposer = LLMDecomposer(client, prompt="decompose {{request}}", registry=default_registry())
    assert decomposer.decompose("edge of a.png", prior_knowledge=True) == '[{"id": 0}]'
    kwargs = client.calls[0][1]
    assert '"edge"' in kwargs["resource_types"]
    assert "image_to_edge" in kwargs["hints"]


@pytest.fixture
def bundled_prompts():
    return load_prompts(str(PROMPTS_DIR))


def test_bundled_prompts_keep_the_reference_wording(bundled_prompts):
    assert bundled_prompts["decomposition"].startswith(
        "The following is a friendly conversation between a human and an AI."
    )
    assert "Score is in [1, 2, 3, 4, 5]" in bundled_prompts["tool_assessment"]
    assert "the greater the likelihood of the solution solving the given task" in bundled_prompts["solution_expert"]
    assert "the AI assistant should never fake the resources that do not exist" in bundled_prompts["resource_expert"]
    assert "you need to tell the user you can not finish the task" in bundled_prompts["response"]


def test_decomposition_prompt_slots_are_filled(bundled_prompts):
    client = FakeClient("<Solution>[]</Solution>")
    LLMDecomposer(client, prompt=bundled_prompts["decomposition"]).decompose("Extract the edge of a.png")
    prompt, kwargs = client.calls[0]
    rendered = render_prompt(prompt, **kwargs)
    assert 'The type of resource must be in ["text", "tags",' in rendered
    assert '"image-processing"' in rendered
    assert rendered.rstrip().endswith("Extract the edge of a.png")
    assert "{{" not in rendered


def test_response_prompt_names_the_assistant(bundled_prompts):
    client = FakeClient("Done.")
    LLMResponder(client, prompt=bundled_prompts["response"]).respond("make a cat", [], None)
    prompt, kwargs = client.calls[0]
    rendered = render_prompt(prompt, **kwargs)
    assert rendered.startswith("Your name is ToGraph, an AI-powered assistant.")
    assert "## User Request\n\nmake a cat" in rendered



def test_llm_agent_without_prompt_refuses():
    with pytest.raises(ValueError):
        LLMToolAssessor(FakeClient("x")).invoke(task="t")


def test_bundle_defaults_to_deterministic_agents():
    bundle = AgentBundle.create()
    assert isinstance(bundle.assessor, KeywordToolAssessor)
    assert isinstance(bundle.decomposer, RuleBasedDecomposer)
    with pytest.raises(ValueError):
        bundle.update_prompt("tool_assessment", "new prompt")


def test_bundle_remote_roles_need_a_client():
    with pytest.raises(ValueError):
        AgentBundle.create(experts="remote")


def test_bundle_update_prompt():
    bundle = AgentBundle.create(FakeClient("x"), {"tool_assessment": "old"}, experts="remote", decomposer="remote")
    assert isinstance(bundle.assessor, LLMToolAssessor)
    bundle.update_prompt("tool_assessment", "new")
    assert bundle.assessor.prompt == "new"
    with pytest.raises(ValueError):
        bundle.update_prompt("nonexistent", "x")


def test_create_llm_client_rejects_unknown_provider():
    with pytest.raises(ValueError):
        create_llm_client("carrier-pigeon")


def test_openrouter_needs_a_key(monkeypatch):
    monkeypatch.delenv("OPENROUTER_API_KEY", raising=False)
    with pytest.raises(ValueError):
        create_llm_client("openrouter")


def test_chat_completion_client_renders_prompt(monkeypatch):
    sent = {}

    class Response:
        def raise_for_status(self):
            pass

        def json(self):
            return {"choices": [{"message": {"content": "<Solution>{}</Solution>"}}]}

    def fake_post(url, headers, json, timeout):
        sent.update(url=url, headers=headers, payload=json)
        return Response()

    monkeypatch.setattr(llm_clients.requests, "post", fake_post)
    client = ChatCompletionClient(base_url="http://localhost:8000/v1/", api_key="k")
    assert client.generate("Task: {{task}}", task="crop it") == "<Solution>{}</Solution>"
    assert sent["url"] == "http://localhost:8000/v1/chat/completions"
    assert sent["headers"]["Authorization"] == "Bearer k"
    assert sent["payload"]["messages"][1]["content"] == "Task: crop it"
