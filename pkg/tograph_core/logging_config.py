"""
Logging configuration and activity tracking for ToGraph.

Every notable event goes two ways:
- the stdlib ``logging`` logger (console on stderr, optional file at DEBUG)
- the process-wide ``ActivityTracker`` used by the run summary
"""

import logging
import sys
from collections import deque
from dataclasses import asdict, dataclass, field
from datetime import datetime
from enum import Enum
from threading import Lock
from typing import Any, Dict, List, Optional


class LogLevel(Enum):
    DEBUG = logging.DEBUG
    INFO = logging.INFO
    WARNING = logging.WARNING
    ERROR = logging.ERROR
    CRITICAL = logging.CRITICAL

    @classmethod
    def parse(cls, name: str) -> "LogLevel":
        return cls[name.upper()]


class ActivityType(Enum):
    STAGE_TRANSITION = "stage_transition"
    AGENT_START = "agent_start"
    AGENT_END = "agent_end"
    LLM_CALL_START = "llm_call_start"
    LLM_CALL_END = "llm_call_end"
    SEARCH_START = "search_start"
    SEARCH_END = "search_end"
    ACTION_START = "action_start"
    ACTION_END = "action_end"
    CORRECTION = "correction"
    RETRY = "retry"
    ERROR = "error"


@dataclass(frozen=True)
class Activity:
    """A single tracked event."""

    activity_type: ActivityType
    message: str
    agent_name: Optional[str] = None
    node_name: Optional[str] = None
    details: Dict[str, Any] = field(default_factory=dict)
    timestamp: datetime = field(default_factory=datetime.now)

    def __str__(self) -> str:
        tags = "".join(f" [{name}]" for name in (self.agent_name, self.node_name) if name)
        return f"[{self.timestamp:%H:%M:%S}]{tags} {self.message}"

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["activity_type"] = self.activity_type.value
        data["timestamp"] = self.timestamp.isoformat()
        return data


class ActivityTracker:
    """
    Process-wide, thread-safe ring buffer of activities. Planner threads and
    executor workers all report here; the oldest entries drop off first.
    """

    MAX_ACTIVITIES = 5000

    _instance: Optional["ActivityTracker"] = None
    _instance_lock = Lock()

    def __new__(cls) -> "ActivityTracker":
        with cls._instance_lock:
            if cls._instance is None:
                instance = super().__new__(cls)
                instance._lock = Lock()
                instance._activities = deque(maxlen=cls.MAX_ACTIVITIES)
                instance._status = {"current_agent": None, "current_node": None}
                cls._instance = instance
        return cls._instance

    def log_activity(self, activity: Activity) -> None:
        with self._lock:
            self._activities.append(activity)
            if activity.agent_name:
                self._status["current_agent"] = activity.agent_name
            if activity.node_name:
                self._status["current_node"] = activity.node_name

    def get_recent(self, n: int = 10) -> List[Activity]:
        with self._lock:
            return list(self._activities)[-n:] if n > 0 else []

    def get_all(self) -> List[Activity]:
        with self._lock:
            return list(self._activities)

    def get_by_type(self, activity_type: ActivityType) -> List[Activity]:
        with self._lock:
            return [a for a in self._activities if a.activity_type is activity_type]

    def get_current_status(self) -> Dict[str, Any]:
        with self._lock:
            return {**self._status, "total_activities": len(self._activities)}

    def reset(self) -> None:
        with self._lock:
            self._activities.clear()
            self._status = {"current_agent": None, "current_node": None}


class ToGraphLogger:
    """
    Wraps a stdlib logger and mirrors each event into the activity tracker.
    Console output goes to stderr so command output on stdout stays clean.
    """

    def __init__(
        self,
        name: str,
        log_level: LogLevel = LogLevel.WARNING,
        log_file: Optional[str] = None,
        console_output: bool = True,
    ):
        self.name = name
        self.logger = logging.getLogger(name)
        self.logger.setLevel(logging.DEBUG if log_file else log_level.value)
        self.logger.handlers.clear()
        self.logger.propagate = False

        self.activity_tracker = ActivityTracker()

        if console_output:
            console_handler = logging.StreamHandler(sys.stderr)
            console_handler.setLevel(log_level.value)
            console_handler.setFormatter(
                logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s", datefmt="%H:%M:%S")
            )
            self.logger.addHandler(console_handler)

        if log_file:
            file_handler = logging.FileHandler(log_file)
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(
                logging.Formatter(
                    "%(asctime)s - %(name)s - %(levelname)s - %(threadName)s - %(message)s",
                    datefmt="%Y-%m-%d %H:%M:%S",
                )
            )
            self.logger.addHandler(file_handler)

    def _log_and_track(
        self,
        level: int,
        message: str,
        activity_type: ActivityType,
        agent_name: Optional[str] = None,
        node_name: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None,
    ) -> None:
        self.logger.log(level, message)
        self.activity_tracker.log_activity(
            Activity(
                activity_type=activity_type,
                message=message,
                agent_name=agent_name,
                node_name=node_name,
                details=details or {},
            )
        )

    def state_transition(self, node_name: str, details: Optional[Dict[str, Any]] = None) -> None:
        self._log_and_track(
            logging.INFO,
            f"Entering stage '{node_name}'",
            ActivityType.STAGE_TRANSITION,
            node_name=node_name,
            details=details,
        )

    def agent_start(self, agent_name: str, details: Optional[Dict[str, Any]] = None) -> None:
        self._log_and_track(
            logging.DEBUG,
            f"Agent '{agent_name}' started",
            ActivityType.AGENT_START,
            agent_name=agent_name,
            details=details,
        )

    def agent_end(self, agent_name: str, details: Optional[Dict[str, Any]] = None) -> None:
        self._log_and_track(
            logging.DEBUG,
            f"Agent '{agent_name}' completed",
            ActivityType.AGENT_END,
            agent_name=agent_name,
            details=details,
        )

    def llm_call_start(self, agent_name: str, details: Optional[Dict[str, Any]] = None) -> None:
        self._log_and_track(
            logging.DEBUG,
            f"LLM call started for '{agent_name}'",
            ActivityType.LLM_CALL_START,
            agent_name=agent_name,
            details=details,
        )

    def llm_call_end(self, agent_name: str, details: Optional[Dict[str, Any]] = None) -> None:
        self._log_and_track(
            logging.DEBUG,
            f"LLM call completed for '{agent_name}'",
            ActivityType.LLM_CALL_END,
            agent_name=agent_name,
            details=details,
        )

    def search_start(self, subtask_id: int, details: Optional[Dict[str, Any]] = None) -> None:
        self._log_and_track(
            logging.DEBUG,
            f"Search started for subtask {subtask_id}",
            ActivityType.SEARCH_START,
            node_name="plan",
            details={"subtask": subtask_id, **(details or {})},
        )

    def search_end(self, subtask_id: int, details: Optional[Dict[str, Any]] = None) -> None:
        details = {"subtask": subtask_id, **(details or {})}
        self._log_and_track(
            logging.INFO,
            f"Search for subtask {subtask_id} found {details.get('solutions_found', 0)} solution(s), "
            f"visited {details.get('visited_tools', 0)} tool(s)",
            ActivityType.SEARCH_END,
            node_name="plan",
            details=details,
        )

    def action_start(self, seq: int, tool: str, details: Optional[Dict[str, Any]] = None) -> None:
        self._log_and_track(
            logging.DEBUG,
            f"Action {seq} ({tool}) started",
            ActivityType.ACTION_START,
            node_name="execute",
            details={"seq": seq, "tool": tool, **(details or {})},
        )

    def action_end(self, seq: int, tool: str, status: str, details: Optional[Dict[str, Any]] = None) -> None:
        level = logging.INFO if status == "ok" else logging.WARNING
        self._log_and_track(
            level,
            f"Action {seq} ({tool}) {status}",
            ActivityType.ACTION_END,
            node_name="execute",
            details={"seq": seq, "tool": tool, "status": status, **(details or {})},
        )

    def correction(self, tool: str, stale_ref: str, substituted_ref: str) -> None:
        self._log_and_track(
            logging.WARNING,
            f"Corrected input of '{tool}': {stale_ref} -> {substituted_ref}",
            ActivityType.CORRECTION,
            node_name="execute",
            details={"tool": tool, "stale": stale_ref, "substituted": substituted_ref},
        )

    def retry(self, operation: str, attempt: int, max_retries: int, details: Optional[Dict[str, Any]] = None) -> None:
        self._log_and_track(
            logging.WARNING,
            f"Retrying {operation} ({attempt}/{max_retries})",
            ActivityType.RETRY,
            details={"operation": operation, "attempt": attempt, **(details or {})},
        )

    def error(self, message: str, details: Optional[Dict[str, Any]] = None) -> None:
        self._log_and_track(logging.ERROR, message, ActivityType.ERROR, details=details)

    def info(self, message: str) -> None:
        self.logger.info(message)

    def debug(self, message: str) -> None:
        self.logger.debug(message)

    def warning(self, message: str) -> None:
        self.logger.warning(message)


def setup_logging(
    log_level: LogLevel = LogLevel.WARNING,
    log_file: Optional[str] = None,
    console_output: bool = True,
) -> ToGraphLogger:
    return ToGraphLogger(
        name="tograph",
        log_level=log_level,
        log_file=log_file,
        console_output=console_output,
    )


def get_activity_tracker() -> ActivityTracker:
    """The process-wide activity tracker."""
    return ActivityTracker()
