"""Exception hierarchy for the ToGraph engine."""

from __future__ import annotations

from typing import Optional


class ToGraphError(Exception):
    """Base class for every error raised by the engine."""


# Types and placeholders


class UnknownResourceType(ToGraphError, ValueError):
    def __init__(self, name: str):
        super().__init__(f"Unknown resource type: {name!r}")
        self.name = name


class MalformedPlaceholder(ToGraphError, ValueError):
    def __init__(self, raw: str):
        super().__init__(f"Malformed placeholder: {raw!r}")
        self.raw = raw


class RegistryFrozen(ToGraphError, RuntimeError):
    """Raised when a registry is extended after configuration time."""


# Tool graph


class DuplicateTool(ToGraphError, ValueError):
    def __init__(self, name: str):
        super().__init__(f"Duplicate tool name: {name!r}")
        self.name = name


class InvalidToolSpec(ToGraphError, ValueError):
    pass


# Decomposition


class ProtocolViolation(ToGraphError, ValueError):
    def __init__(self, field: str, reason: str):
        super().__init__(f"{field}: {reason}")
        self.field = field
        self.reason = reason


class DecompositionFailed(ToGraphError, RuntimeError):
    pass


class EmptyDecomposition(ToGraphError, ValueError):
    pass


# Search and planning


class InvalidSubtask(ToGraphError, ValueError):
    pass


class PlanningFailed(ToGraphError, RuntimeError):
    def __init__(self, subtask_id: int, reason: str = "no solution found"):
        super().__init__(f"Planning failed for subtask {subtask_id}: {reason}")
        self.subtask_id = subtask_id
        self.reason = reason


# Experts


class AssessorUnavailable(ToGraphError, RuntimeError):
    pass


class AssessorProtocolError(ToGraphError, ValueError):
    pass


class ExpertUnavailable(ToGraphError, RuntimeError):
    pass


class ExpertProtocolError(ToGraphError, ValueError):
    pass


class UnbindableArgument(ToGraphError, ValueError):
    def __init__(self, tool: str, arg: str, rtype: str):
        super().__init__(f"No resource of type {rtype!r} for argument {arg!r} of {tool!r}")
        self.tool = tool
        self.arg = arg
        self.rtype = rtype


class BindingHallucination(ToGraphError, ValueError):
    def __init__(self, tool: str, resource_id: str):
        super().__init__(f"Binding for {tool!r} references unknown resource {resource_id!r}")
        self.tool = tool
        self.resource_id = resource_id


# Execution


class ToolExecutionError(ToGraphError, RuntimeError):
    def __init__(self, tool: str, reason: str):
        super().__init__(f"Tool {tool!r} failed: {reason}")
        self.tool = tool
        self.reason = reason


class TypeMismatch(ToGraphError, ValueError):
    def __init__(self, subject: str, expected: str, actual: str):
        super().__init__(f"{subject}: expected type {expected!r}, got {actual!r}")
        self.subject = subject
        self.expected = expected
        self.actual = actual


class UnresolvedReference(ToGraphError, ValueError):
    def __init__(self, reference: str, subtask_id: Optional[int] = None):
        where = f" in subtask {subtask_id}" if subtask_id is not None else ""
        super().__init__(f"Unresolved reference {reference!r}{where}")
        self.reference = reference
        self.subtask_id = subtask_id


class MissingInput(ToGraphError, RuntimeError):
    def __init__(self, tool: str, arg: str, rtype: str):
        super().__init__(f"Missing input {arg!r} ({rtype}) for {tool!r}")
        self.tool = tool
        self.arg = arg
        self.rtype = rtype


class MemoryWriteConflict(ToGraphError, RuntimeError):
    def __init__(self, resource_id: str):
        super().__init__(f"Resource {resource_id!r} already written")
        self.resource_id = resource_id


# Evaluation and configuration


class UnknownGoldTool(ToGraphError, ValueError):
    def __init__(self, tool: str):
        super().__init__(f"Gold annotation references unregistered tool {tool!r}")
        self.tool = tool


class EmptyBenchmark(ToGraphError, ValueError):
    pass


class BenchmarkFormatError(ToGraphError, ValueError):
    pass


class ConfigError(ToGraphError, ValueError):
    pass
