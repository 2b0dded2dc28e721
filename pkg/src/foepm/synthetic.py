"""Synthetic event logs with planted, feature-detectable behaviour.

``pingpong``
    Half of the cases concern product "Hardware". Those cases hand over to
    another support group at a random step through a "Forward" event, which
    is a team ping-pong for every prefix that has not reached the Forward
    event yet. The other cases change group only right after a "Queued"
    event, which does not count as ping-pong.
``remaining-time``
    Two case types with their own activity names. Every activity has a
    fixed duration, and type B cases repeat a rework activity 0-2 times.
``showcase``
    A small mixed log that exercises every bundled rule: resource and group
    changes, hand-backs, queueing, lifecycle transitions, expected
    durations, short and long gaps, missing attributes and 1- or 2-event
    cases.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .events import EventLog, Event, Trace, Timestamp, parse_iso8601

START = parse_iso8601("2013-01-07T08:00:00Z")  # a Monday
MINUTE = 60_000
HOUR = 60 * MINUTE


def _trace(tid: str, events: list[dict]) -> Trace:
    return Trace(tid, tuple(Event(e) for e in events))


def _pingpong_case(rng: np.random.Generator, j: int, planted: bool) -> Trace:
    n = int(rng.integers(5, 11))
    groups = ["G1", "G2", "G3"]
    group = groups[int(rng.integers(0, 3))]
    other = groups[(groups.index(group) + 1 + int(rng.integers(0, 2))) % 3]
    names: list[str] = []
    grps: list[str] = []
    if planted:
        # first group up to and including the Forward event, the new group after it
        forward_at = int(rng.integers(2, n))
        for i in range(1, n + 1):
            if i == 1:
                names.append("Accepted")
            elif i == forward_at:
                names.append("Forward")
            elif i == n:
                names.append("Completed")
            else:
                names.append(["In Progress", "Wait", "Accepted"][int(rng.integers(0, 3))])
            grps.append(group if i <= forward_at else other)
    else:
        queued_at = int(rng.integers(2, n)) if rng.random() < 0.6 else None
        for i in range(1, n + 1):
            if i == 1:
                names.append("Accepted")
            elif i == queued_at:
                names.append("Queued")
            elif i == n:
                names.append("Completed")
            else:
                names.append(["In Progress", "Wait", "Accepted"][int(rng.integers(0, 3))])
            grps.append(other if queued_at is not None and i > queued_at else group)
    t = START + j * 2 * HOUR + int(rng.integers(0, 30)) * MINUTE
    events = []
    for i in range(n):
        g = grps[i]
        events.append(
            {
                "concept:name": names[i],
                "org:group": g,
                "org:resource": f"{g}-r{int(rng.integers(1, 4))}",
                "lifecycle:transition": "complete" if names[i] == "Completed" else "start",
                "product": "Hardware" if planted else "Software",
                "time:timestamp": Timestamp(t),
            }
        )
        t += int(rng.choice([2, 5, 30, 90, 240])) * MINUTE
    return _trace(f"case-{j + 1:04d}", events)


def pingpong_log(n_traces: int = 200, seed: int = 42) -> EventLog:
    rng = np.random.default_rng(seed)
    planted = np.zeros(n_traces, dtype=bool)
    planted[rng.permutation(n_traces)[: n_traces // 2]] = True
    return EventLog(tuple(_pingpong_case(rng, j, bool(planted[j])) for j in range(n_traces)))


ACTIVITY_MINUTES = {
    "A-Register": 20,
    "A-Check": 45,
    "A-Approve": 90,
    "B-Register": 30,
    "B-Inspect": 120,
    "B-Rework": 240,
    "B-Approve": 60,
    "Archive": 10,
}


def remaining_time_log(n_traces: int = 200, seed: int = 42) -> EventLog:
    """Each event's successor follows after the event's fixed activity duration."""
    rng = np.random.default_rng(seed)
    traces = []
    for j in range(n_traces):
        if rng.random() < 0.5:
            names = ["A-Register", "A-Check", "A-Approve", "Archive"]
        else:
            names = ["B-Register", "B-Inspect", *["B-Rework"] * int(rng.integers(0, 3)), "B-Approve", "Archive"]
        t = START + j * 3 * HOUR + int(rng.integers(0, 60)) * MINUTE
        events = []
        for name in names:
            events.append({"concept:name": name, "org:resource": f"r{int(rng.integers(1, 5))}", "time:timestamp": Timestamp(t)})
            t += ACTIVITY_MINUTES[name] * MINUTE
        traces.append(_trace(f"case-{j + 1:04d}", events))
    return EventLog(tuple(traces))


def showcase_log(n_traces: int = 20, seed: int = 7) -> EventLog:
    rng = np.random.default_rng(seed)
    activities = ["Accepted", "In Progress", "Queued", "Forward", "Wait"]
    gaps = [MINUTE // 2, MINUTE + MINUTE // 2, 2 * MINUTE, 3 * MINUTE, 2 * HOUR, 4 * HOUR]
    gap_weights = [0.35, 0.3, 0.1, 0.05, 0.1, 0.1]
    traces = []
    for j in range(n_traces):
        n = [1, 2][j] if j < 2 else int(rng.integers(3, 10))
        group = f"G{int(rng.integers(1, 4))}"
        resource = f"{group}-r{int(rng.integers(1, 4))}"
        prev_resource = resource
        t = START + j * HOUR
        events = []
        for i in range(n):
            if i > 0:
                u = rng.random()
                if u < 0.15:
                    resource, prev_resource = prev_resource, resource  # hand back
                elif u < 0.45:
                    prev_resource = resource
                    resource = f"{group}-r{int(rng.integers(1, 4))}"
                elif u < 0.6:
                    group = f"G{int(rng.integers(1, 4))}"
                    prev_resource = resource
                    resource = f"{group}-r{int(rng.integers(1, 4))}"
            e = {
                "concept:name": "Accepted" if i == 0 else activities[int(rng.integers(0, len(activities)))],
                "org:resource": resource,
                "org:group": group,
                "lifecycle:transition": ["start", "complete"][int(rng.integers(0, 2))],
                "time:timestamp": Timestamp(t),
            }
            if i == 0 and rng.random() < 0.8:
                e["expectedDuration"] = float(int(rng.choice([1, 3, 6])) * HOUR)
            if rng.random() < 0.07:
                del e["org:group"]
            if rng.random() < 0.05:
                del e["lifecycle:transition"]
            events.append(e)
            t += int(rng.choice(gaps, p=gap_weights))
        traces.append(_trace(f"show-{j + 1:02d}", events))
    return EventLog(tuple(traces))


SCENARIOS: dict[str, Callable[..., EventLog]] = {
    "pingpong": pingpong_log,
    "remaining-time": remaining_time_log,
    "showcase": showcase_log,
}


def generate(scenario: str, n_traces: int | None = None, seed: int | None = None) -> EventLog:
    try:
        fn = SCENARIOS[scenario]
    except KeyError:
        raise ValueError(f"unknown scenario {scenario!r}; expected one of {', '.join(SCENARIOS)}") from None
    kwargs = {}
    if n_traces is not None:
        kwargs["n_traces"] = n_traces
    if seed is not None:
        kwargs["seed"] = seed
    return fn(**kwargs)
