"""Scheduler-visible trace events and their text/JSON-lines renderings.

Event names: the machine's control events (allocate, configure, create,
sync, release, read, write, put, get) plus the extended set (thread-start,
thread-end, print, serialize-fallback, allocate-wait, deadlock).  Events are
recorded in nondecreasing step order; identical (program, config, seed) runs
produce byte-identical renderings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class TraceEvent:
    step: int
    event: str
    core: int
    family: int
    thread: Optional[int]
    detail: str


def to_json_line(ev: TraceEvent) -> str:
    return json.dumps(
        {
            "step": ev.step,
            "event": ev.event,
            "core": ev.core,
            "family": ev.family,
            "thread": ev.thread,
            "detail": ev.detail,
        },
        separators=(",", ":"),
    )


def to_text_line(ev: TraceEvent) -> str:
    thread = "-" if ev.thread is None else str(ev.thread)
    return (
        f"step={ev.step} event={ev.event} core={ev.core} "
        f"family={ev.family} thread={thread} detail={ev.detail}"
    )


def format_trace(events: list[TraceEvent], fmt: str) -> str:
    if fmt == "json":
        return "".join(to_json_line(ev) + "\n" for ev in events)
    if fmt == "text":
        return "".join(to_text_line(ev) + "\n" for ev in events)
    raise ValueError(f"unknown trace format {fmt!r}")
