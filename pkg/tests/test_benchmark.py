from dataclasses import replace
from fractions import Fraction

import pytest

from main import DEFAULT_SUITE, main
from tograph import ToGraph, run_benchmark
from tograph_core.config import EngineConfig
from tograph_core.evaluation import Difficulty, load_suite
from tograph_core.search import SearchStrategy


@pytest.fixture(scope="module")
def engine(tmp_path_factory):
    workspace = tmp_path_factory.mktemp("bench")
    return ToGraph(EngineConfig(builtin_toolbox="desk", workspace=workspace, parallelism=2), enable_logging=False)


@pytest.fixture(scope="module")
def cases(engine):
    return load_suite(DEFAULT_SUITE, registry=[tool.name for tool in engine.tools])


@pytest.fixture(scope="module")
def reports(engine, cases):
    return {strategy: run_benchmark(engine, cases, strategy=strategy) for strategy in SearchStrategy}


def test_bundled_suite_shape(cases):
    assert len(cases) == 20
    tiers = [case.difficulty for case in cases]
    assert tiers.count(Difficulty.EASY) == 5
    assert tiers.count(Difficulty.MEDIUM) == 10
    assert tiers.count(Difficulty.HARD) == 5


def test_exhaustive_solves_every_case(reports):
    report = reports[SearchStrategy.EXHAUSTIVE]
    assert [record.case_id for record in report.records if not record.W] == []
    assert report.SE == 1
    assert report.HR == 0
    assert report.CR == 1
    assert all(record.error is None for record in report.records)
    assert set(report.se_by_difficulty.values()) == {Fraction(1)}


def test_pruned_strategies_do_not_beat_exhaustive(reports):
    greedy = reports[SearchStrategy.GREEDY]
    beam = reports[SearchStrategy.BEAM]
    full = reports[SearchStrategy.EXHAUSTIVE]
    assert greedy.SE <= beam.SE <= full.SE
    assert reports[SearchStrategy.ADAPTIVE].SE <= full.SE


def test_visited_tools_ordering(reports):
    visited = {strategy: report.mean_visited_tools for strategy, report in reports.items()}
    assert visited[SearchStrategy.GREEDY] <= visited[SearchStrategy.BEAM] <= visited[SearchStrategy.EXHAUSTIVE]
    assert visited[SearchStrategy.ADAPTIVE] <= visited[SearchStrategy.EXHAUSTIVE]


def test_adaptive_threshold_drops_the_low_scored_crop_chain(reports):
    adaptive = {record.case_id: record for record in reports[SearchStrategy.ADAPTIVE].records}
    greedy = {record.case_id: record for record in reports[SearchStrategy.GREEDY].records}
    assert not adaptive["h01"].W
    assert "object_detection" not in adaptive["h01"].predicted_tools
    assert greedy["h01"].W


def test_every_instruction_goes_through_the_decomposer(engine, cases, monkeypatch):
    decomposer = engine.decomposition_service.decomposer
    seen = []
    original = decomposer.decompose

    def recording(request, prior_knowledge=False):
        seen.append(request)
        return original(request, prior_knowledge=prior_knowledge)

    monkeypatch.setattr(decomposer, "decompose", recording)
    report = run_benchmark(engine, cases[:6], strategy="greedy")
    assert seen == [case.instruction for case in cases[:6]]
    assert [record.case_id for record in report.records if not record.W] == []


def test_undecomposable_instruction_is_a_miss_not_an_error(engine, cases):
    case = replace(cases[0], id="x01", instruction="Hmm.")
    record = run_benchmark(engine, [case], strategy="greedy").records[0]
    assert not record.W
    assert record.error is None


def test_benchmark_is_deterministic(engine, cases):
    first = run_benchmark(engine, cases[:5], strategy="beam")
    second = run_benchmark(engine, cases[:5], strategy="beam")
    assert first.to_dict() == second.to_dict()


@pytest.mark.slow
def test_bench_command_writes_reports(tmp_path, capsys):
    out_dir = tmp_path / "reports"
    code = main(["bench", "--strategy", "exhaustive", "--workspace", str(tmp_path / "ws"), "--report-dir", str(out_dir)])
    table = capsys.readouterr().out
    assert code == 0
    row = table.splitlines()[1].split()
    assert row[0] == "exhaustive"
    assert row[2:6] == ["1.00", "0.00", "1.00", "1.00"]
    assert (out_dir / "report.json").is_file()
    assert (out_dir / "report.txt").read_text(encoding="utf-8") == table
