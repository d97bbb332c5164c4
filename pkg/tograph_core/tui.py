"""
Post-run summaries of tracked activity.
"""

import sys
from typing import Dict, Optional, TextIO

from .logging_config import ActivityTracker, ActivityType


class ActivitySummary:
    """Counts of expert calls, searches, actions and corrections for one process."""

    def __init__(self):
        self.tracker = ActivityTracker()

    def get_agent_summary(self) -> Dict[str, object]:
        activities = self.tracker.get_all()
        starts = [a for a in activities if a.activity_type == ActivityType.AGENT_START]
        ends = [a for a in activities if a.activity_type == ActivityType.AGENT_END]

        agent_counts: Dict[str, int] = {}
        for activity in starts:
            if activity.agent_name:
                agent_counts[activity.agent_name] = agent_counts.get(activity.agent_name, 0) + 1

        return {
            "total_agent_calls": len(starts),
            "completed_agent_calls": len(ends),
            "retries": sum(1 for a in activities if a.activity_type == ActivityType.RETRY),
            "errors": sum(1 for a in activities if a.activity_type == ActivityType.ERROR),
            "agent_counts": agent_counts,
        }

    def get_search_summary(self) -> Dict[str, int]:
        ends = self.tracker.get_by_type(ActivityType.SEARCH_END)
        return {
            "searches": len(ends),
            "solutions_found": sum(a.details.get("solutions_found", 0) for a in ends),
            "visited_tools": sum(a.details.get("visited_tools", 0) for a in ends),
            "assessor_calls": sum(a.details.get("assessor_calls", 0) for a in ends),
            "cache_hits": sum(a.details.get("cache_hits", 0) for a in ends),
        }

    def get_execution_summary(self) -> Dict[str, int]:
        ends = self.tracker.get_by_type(ActivityType.ACTION_END)
        statuses = [a.details.get("status") for a in ends]
        return {
            "total_actions": len(ends),
            "ok": statuses.count("ok"),
            "failed": statuses.count("failed"),
            "skipped": statuses.count("skipped"),
            "corrections": len(self.tracker.get_by_type(ActivityType.CORRECTION)),
        }

    def print_summary(self, stream: Optional[TextIO] = None) -> None:
        stream = stream or sys.stderr
        agents = self.get_agent_summary()
        search = self.get_search_summary()
        execution = self.get_execution_summary()

        def out(line: str = "") -> None:
            print(line, file=stream)

        out()
        out("=" * 72)
        out("RUN SUMMARY".center(72))
        out("=" * 72)
        out()
        out("Experts:")
        out(f"  Total calls: {agents['total_agent_calls']}")
        out(f"  Completed calls: {agents['completed_agent_calls']}")
        out(f"  Retries: {agents['retries']}")
        out(f"  Errors: {agents['errors']}")
        if agents["agent_counts"]:
            out("  Usage:")
            for agent, count in sorted(agents["agent_counts"].items()):
                out(f"    {agent}: {count}")
        out()
        out("Search:")
        out(f"  Searches: {search['searches']}")
        out(f"  Solutions found: {search['solutions_found']}")
        out(f"  Visited tools: {search['visited_tools']}")
        out(f"  Assessor calls: {search['assessor_calls']} (cache hits: {search['cache_hits']})")
        out()
        out("Execution:")
        out(f"  Actions: {execution['total_actions']}")
        out(f"  Ok: {execution['ok']}  Failed: {execution['failed']}  Skipped: {execution['skipped']}")
        out(f"  Corrections: {execution['corrections']}")
        out()


def print_recent_activities(n: int = 10, stream: Optional[TextIO] = None) -> None:
    stream = stream or sys.stderr
    activities = ActivityTracker().get_recent(n)
    if not activities:
        print("No activities logged yet.", file=stream)
        return

    print(file=stream)
    print(f"Recent Activities (last {len(activities)}):", file=stream)
    print("-" * 72, file=stream)
    for activity in activities:
        print(str(activity), file=stream)
    print(file=stream)
