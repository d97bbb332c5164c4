"""
ToGraph command line: plan, run, bench, graph and tools.

Results go to stdout; logs and activity summaries go to stderr.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from tograph import ToGraph, resolve_tools, run_benchmark
from tograph_core.config import EngineConfig, configure_registries, load_config
from tograph_core.decomposition import parse_decomposition
from tograph_core.errors import (
    BenchmarkFormatError,
    ConfigError,
    DecompositionFailed,
    DuplicateTool,
    EmptyDecomposition,
    InvalidToolSpec,
    MalformedPlaceholder,
    PlanningFailed,
    ProtocolViolation,
    ToGraphError,
    UnknownGoldTool,
    UnknownResourceType,
)
from tograph_core.evaluation import format_table, load_suite
from tograph_core.execution import CANNOT_FINISH
from tograph_core.graph import build_graph, dump_tool_registry, export_dot
from tograph_core.logging_config import get_activity_tracker
from tograph_core.models import DecompositionResult, RankedPlan
from tograph_core.resources import Resource
from tograph_core.search import SearchStrategy
from tograph_core.toolbox import tool_table
from tograph_core.tui import ActivitySummary, print_recent_activities

CONSOLE_WIDTH = 72
DEFAULT_SUITE = Path(__file__).parent / "data" / "benchmark_suite.jsonl"
DEFAULT_SMOKE = Path(__file__).parent / "data" / "smoke_instructions.jsonl"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_IO = 4
EXIT_PROTOCOL = 5
EXIT_PLANNING = 6
EXIT_EXECUTION = 7
EXIT_HARNESS = 8

# First match wins.
EXIT_CODES: Tuple[Tuple[type, int], ...] = (
    (ConfigError, EXIT_CONFIG),
    (EmptyDecomposition, EXIT_PLANNING),
    (PlanningFailed, EXIT_PLANNING),
    (ProtocolViolation, EXIT_PROTOCOL),
    (DecompositionFailed, EXIT_PROTOCOL),
    (BenchmarkFormatError, EXIT_PROTOCOL),
    (UnknownGoldTool, EXIT_PROTOCOL),
    (InvalidToolSpec, EXIT_PROTOCOL),
    (DuplicateTool, EXIT_PROTOCOL),
    (UnknownResourceType, EXIT_PROTOCOL),
    (MalformedPlaceholder, EXIT_PROTOCOL),
    (OSError, EXIT_IO),
    (ToGraphError, EXIT_EXECUTION),
)


def exit_code_for(exc: BaseException) -> int:
    for error_type, code in EXIT_CODES:
        if isinstance(exc, error_type):
            return code
    raise exc


def print_rule(char: str = "-", title: Optional[str] = None) -> None:
    if title:
        print(f" {title} ".center(CONSOLE_WIDTH, char))
    else:
        print(char * CONSOLE_WIDTH)


# Inputs


def read_task(path: Path) -> Tuple[str, Any, List[Resource]]:
    """
    A task file is either a bare decomposition array or an object with
    ``request``, ``subtasks`` and optional ``resources``.
    """
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProtocolViolation("document", f"{path} is not valid JSON: {exc.msg}") from exc

    if isinstance(data, list):
        return "", data, []
    if not isinstance(data, dict) or "subtasks" not in data:
        raise ProtocolViolation("document", f"{path} must hold a subtask array or an object with 'subtasks'")
    try:
        resources = [Resource.from_dict(item) for item in data.get("resources", [])]
    except (KeyError, TypeError) as exc:
        raise ProtocolViolation("resources", f"malformed resource entry: {exc}") from exc
    return str(data.get("request", "")), data["subtasks"], resources


def request_inputs(args: argparse.Namespace) -> Tuple[str, Optional[DecompositionResult], List[Resource]]:
    if args.task:
        request, doc, resources = read_task(Path(args.task))
        return request, parse_decomposition(doc, source_request=request), resources
    request = " ".join(args.request).strip()
    if not request:
        raise SystemExit(_usage(args, "give a request or --task FILE"))
    return request, None, []


def _usage(args: argparse.Namespace, message: str) -> int:
    print(f"{args.command}: error: {message}", file=sys.stderr)
    return EXIT_USAGE


def config_from_args(args: argparse.Namespace) -> EngineConfig:
    overrides: Dict[str, Any] = {
        "search": {
            "strategy": args.strategy,
            "beam_width": args.beam_width,
            "adaptive_threshold": args.adaptive_threshold,
            "max_path_len": args.max_path_len,
            "allow_tool_reuse": args.allow_tool_reuse,
        },
        "parallelism": args.parallelism,
        "workspace": args.workspace,
        "tool_registry": args.registry,
        "log_level": args.log_level,
        "log_file": args.log_file,
    }
    config = load_config(args.config, overrides)
    configure_registries(config)
    return config


# Output


def describe_bound(plan: RankedPlan) -> List[str]:
    lines = []
    for bound in plan.solutions:
        names = " -> ".join(bound.path.tool_names)
        lines.append(f"  optimal (score {bound.score}): {names}")
        for step in bound.binding.steps:
            inputs = ", ".join(
                f"{item.name}={item.ref}" if item.ref is not None else f"{item.name}={json.dumps(item.text)}"
                for item in step.inputs
            )
            lines.append(f"    {step.tool.name}({inputs}) -> {step.output.resource_id}")
    if plan.alternatives:
        lines.append("  alternatives:")
        for alternative in plan.alternatives:
            names = " -> ".join(alternative.solution.tool_names)
            lines.append(f"    - (score {alternative.score}) {names}")
    return lines


def print_plan(decomposition: DecompositionResult, plans: Dict[int, RankedPlan], errors: Dict[int, str]) -> None:
    for subtask in decomposition.subtasks:
        print(f"Subtask {subtask.id}: {subtask.description}")
        if subtask.id in plans:
            for line in describe_bound(plans[subtask.id]):
                print(line)
        else:
            print(f"  no solution: {errors.get(subtask.id, 'not planned')}")
    visited = sum(plan.stats.visited_tools for plan in plans.values())
    found = sum(plan.stats.solutions_found for plan in plans.values())
    print(f"Visited tools: {visited}")
    print(f"Solutions found: {found}")


def print_activity_summary(recent: int = 0) -> None:
    ActivitySummary().print_summary(stream=sys.stderr)
    if recent:
        print_recent_activities(recent, stream=sys.stderr)


# Commands


def cmd_plan(args: argparse.Namespace, config: EngineConfig) -> int:
    request, decomposition, resources = request_inputs(args)
    engine = ToGraph(config)
    if decomposition is None:
        decomposition = engine.decomposition_service.decompose(request)
    outcome = engine.planning_service.plan(decomposition, resources, request)
    print_plan(decomposition, outcome.plans, outcome.errors)
    return EXIT_OK if outcome.plans else EXIT_PLANNING


def cmd_run(args: argparse.Namespace, config: EngineConfig) -> int:
    request, decomposition, resources = request_inputs(args)
    engine = ToGraph(config)
    state = engine.solve(request, resources, decomposition=decomposition, dry_run=args.dry_run)

    if "decomposition" in state and state.get("plans") is not None:
        print_plan(state["decomposition"], state.get("plans", {}), state.get("planning_errors", {}))
    if args.dry_run and not state.get("failed_stage"):
        return EXIT_OK

    print_rule("-", "Response")
    print(state.get("response", "").rstrip("\n"))
    if state.get("report") is not None:
        print(f"Trace: {engine.trace_path}")

    stage = state.get("failed_stage")
    if stage == "plan":
        return EXIT_PLANNING
    if stage or state.get("response", "").startswith(CANNOT_FINISH):
        return EXIT_EXECUTION
    return EXIT_OK


def cmd_bench(args: argparse.Namespace, config: EngineConfig) -> int:
    if args.suite is None and not args.smoke and config.tool_registry is None:
        # The bundled suite is written against the desk toolbox.
        config = config.model_copy(update={"builtin_toolbox": "desk"})
    engine = ToGraph(config)
    names = [tool.name for tool in engine.tools]

    if args.smoke:
        return run_smoke(engine, Path(args.suite or DEFAULT_SMOKE))

    cases = load_suite(Path(args.suite or DEFAULT_SUITE), registry=names)
    if args.compare_strategies:
        strategies = [strategy.value for strategy in SearchStrategy]
    else:
        strategies = [engine.search_config.strategy.value]

    reports = [run_benchmark(engine, cases, strategy=strategy) for strategy in strategies]
    print(format_table(reports), end="")

    if args.report_dir:
        out = Path(args.report_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(
            json.dumps([report.to_dict() for report in reports], indent=2) + "\n", encoding="utf-8"
        )
        (out / "report.txt").write_text(format_table(reports), encoding="utf-8")

    errored = [record for report in reports for record in report.records if record.error]
    for record in errored:
        print(f"harness error in case {record.case_id}: {record.error}", file=sys.stderr)
    return EXIT_HARNESS if errored else EXIT_OK


def run_smoke(engine: ToGraph, path: Path) -> int:
    """Decompose every instruction of the smoke corpus; nothing is scored."""
    failures = 0
    total = 0
    with path.open("r", encoding="utf-8") as handle:
        for number, line in enumerate(handle, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                record = json.loads(line)
                case_id, instruction = str(record["id"]), record["instruction"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise BenchmarkFormatError(f"{path}:{number}: {exc}") from exc
            total += 1
            try:
                decomposition = engine.decomposition_service.decompose(instruction)
            except ToGraphError as exc:
                failures += 1
                print(f"{case_id}: {type(exc).__name__}")
                continue
            domains = ",".join(domain for subtask in decomposition.subtasks for domain in subtask.domains)
            print(f"{case_id}: {len(decomposition)} subtask(s) [{domains}]")
    print(f"Decomposed: {total - failures}/{total}")
    return EXIT_OK


def cmd_graph(args: argparse.Namespace, config: EngineConfig) -> int:
    graph = build_graph(resolve_tools(config))
    if args.stats:
        print(f"tools: {len(graph.tools)}")
        print(f"resource types: {len(graph.resource_nodes)}")
        print(f"nodes: {graph.node_count}")
        print(f"edges: {graph.edge_count}")
    else:
        print(export_dot(graph), end="")
    return EXIT_OK


def cmd_tools(args: argparse.Namespace, config: EngineConfig) -> int:
    tools = resolve_tools(config)
    if args.json:
        print(dump_tool_registry(tools))
    else:
        table = tool_table(tools)
        if table:
            print(table)
    return EXIT_OK


COMMANDS = {
    "plan": cmd_plan,
    "run": cmd_run,
    "bench": cmd_bench,
    "graph": cmd_graph,
    "tools": cmd_tools,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--registry", help="tool registry JSON file (overrides the config)")
    common.add_argument("--strategy", choices=[strategy.value for strategy in SearchStrategy])
    common.add_argument("--beam-width", type=int)
    common.add_argument("--adaptive-threshold", type=int)
    common.add_argument("--max-path-len", type=int)
    common.add_argument(
        "--allow-tool-reuse",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="let a tool appear more than once on one search path",
    )
    common.add_argument("--parallelism", type=int)
    common.add_argument("--workspace")
    common.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    common.add_argument("--log-file")
    common.add_argument("--summary", action="store_true", help="print an activity summary to stderr")
    common.add_argument("--recent", type=int, default=0, metavar="N", help="with --summary, also list the last N activities")

    parser = argparse.ArgumentParser(prog="tograph", description="Graph-based tool planning and execution.")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (("plan", "search and rank tool solutions"), ("run", "plan, execute and respond")):
        command = sub.add_parser(name, parents=[common], help=help_text)
        command.add_argument("request", nargs="*", help="request text")
        command.add_argument("--task", help="decomposition file used instead of the decomposer")
        if name == "run":
            command.add_argument("--dry-run", action="store_true", help="plan only; execute nothing")

    bench = sub.add_parser("bench", parents=[common], help="score the benchmark suite")
    bench.add_argument(
        "suite", nargs="?", help="JSON-lines suite (defaults to the bundled one, run over the desk toolbox)"
    )
    bench.add_argument("--compare-strategies", action="store_true", help="one report row per strategy")
    bench.add_argument("--report-dir", help="write report.json and report.txt here")
    bench.add_argument("--smoke", action="store_true", help="decompose the smoke corpus only")

    graph = sub.add_parser("graph", parents=[common], help="print the tool graph as DOT")
    graph.add_argument("--stats", action="store_true", help="print node and edge counts instead")

    tools = sub.add_parser("tools", parents=[common], help="list the tool registry")
    tools.add_argument("--json", action="store_true", help="print the registry as JSON")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    get_activity_tracker().reset()

    try:
        config = config_from_args(args)
        code = COMMANDS[args.command](args, config)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except (ToGraphError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = exit_code_for(exc)

    if args.summary:
        print_activity_summary(args.recent)
    return code


if __name__ == "__main__":
    sys.exit(main())
