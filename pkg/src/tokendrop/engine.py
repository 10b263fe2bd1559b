"""Synchronous LOCAL-model round engine.

A node program is an object with two transitions::

    init(view) -> Step
    step(state, round, inbox, ports) -> Step

``view`` is the node's :class:`LocalView` (its id, neighbor ids with edge
tags, and an input payload).  ``inbox`` is a tuple of ``(sender, message)``
pairs sorted by sender; ``ports`` is the frozenset of neighbor ids whose
link is still live.  Messages are addressed by neighbor id.

Rounds use snapshot semantics: everything sent in round r is delivered at
the start of round r + 1, and init counts as round 0.  Edge consumption and
node termination are applied at the barrier that closes the round in which
they were requested.

Programs may implement two optional hooks:

``wake(state, round)``
    Earliest round >= round + 1 at which the node must be stepped even with
    an empty inbox and unchanged ports.  The engine skips the node before
    that round, which must be indistinguishable from stepping it (no state
    change, no output).  Default: always step.

``quiescent(state)``
    True when the node has nothing left to do unless a message arrives.
    The run halts as soon as every live node is quiescent and no message is
    in flight.  This is an out-of-band global check; it never influences
    what nodes compute.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Mapping

from .errors import ProgramBug

NEVER = math.inf


@dataclass(frozen=True)
class LocalView:
    node: int
    ports: tuple[int, ...]
    tags: Mapping[int, Any] = field(default_factory=dict)
    payload: Any = None


@dataclass
class Step:
    state: Any
    send: Mapping[int, Any] = field(default_factory=dict)
    consume: tuple[int, ...] = ()
    terminated: bool = False


@dataclass
class SimReport:
    rounds: int = 0
    messages: int = 0
    sent: int = 0
    dropped: int = 0
    max_message_size: int = 0
    terminated: int = 0
    nodes: int = 0
    cap_exceeded: bool = False
    halted: bool = False
    deadlock: bool = False
    trace: list[str] | None = None
    phases: list[Any] = field(default_factory=list)

    def as_dict(self) -> dict[str, Any]:
        return {
            "rounds": self.rounds,
            "messages": self.messages,
            "sent": self.sent,
            "dropped": self.dropped,
            "max_message_size": self.max_message_size,
            "terminated": self.terminated,
            "nodes": self.nodes,
            "cap_exceeded": self.cap_exceeded,
            "halted": self.halted,
            "deadlock": self.deadlock,
            "phases": len(self.phases),
        }

    def to_keyvalue(self) -> str:
        return "".join(f"{k} {_kv(v)}\n" for k, v in self.as_dict().items())


def _kv(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def message_size(msg) -> int:
    """Number of scalar fields in a (possibly nested) tuple message."""
    if isinstance(msg, (tuple, list, frozenset, set)):
        return sum(message_size(m) for m in msg)
    return 1


class Topology:
    """Port-labelled communication graph: one :class:`LocalView` per node."""

    def __init__(self, views: Mapping[int, LocalView]):
        self.views = dict(sorted(views.items()))
        for v, view in self.views.items():
            for w in view.ports:
                if w not in self.views or v not in self.views[w].ports:
                    raise ProgramBug(f"link {v}-{w} is not bidirectional")

    @classmethod
    def from_graph(cls, graph, payload: Callable[[int], Any] | None = None,
                   tags: Callable[[int, int], Any] | None = None) -> "Topology":
        views = {}
        for v in graph.nodes:
            ports = graph.neighbors(v)
            views[v] = LocalView(
                v, ports,
                {w: tags(v, w) for w in ports} if tags else {},
                payload(v) if payload else None,
            )
        return cls(views)

    @property
    def nodes(self):
        return tuple(self.views)


def run_sync(topology: Topology, program, round_cap: int, *, trace: bool = False,
             observer: Callable[[int, Mapping[int, Any]], None] | None = None):
    """Run ``program`` on every node of ``topology`` until all terminate.

    Returns ``(states, report)``.  If the cap is reached first the report has
    ``cap_exceeded`` set and ``states`` holds the partial states.  The
    observer, if given, is called after init (round 0) and after every
    executed round with the current state map; it must not mutate states.
    """
    if round_cap < 1:
        raise ValueError("round_cap must be >= 1")
    wake_hook = getattr(program, "wake", None)
    quiet_hook = getattr(program, "quiescent", None)
    report = SimReport(nodes=len(topology.views), trace=[] if trace else None)

    states: dict[int, Any] = {}
    live: dict[int, set[int]] = {v: set(view.ports) for v, view in topology.views.items()}
    alive = set(topology.views)
    consumed: set[tuple[int, int]] = set()
    outbox: dict[int, list[tuple[int, Any]]] = {}
    touched: set[int] = set()
    wake_at: dict[int, float] = {}

    def emit(v, r, result: Step, kill_list, consume_list):
        states[v] = result.state
        for w, msg in result.send.items():
            if w not in live[v]:
                raise ProgramBug(f"node {v} sent on masked or unknown port {w} in round {r}")
            report.sent += 1
            report.max_message_size = max(report.max_message_size, message_size(msg))
            outbox.setdefault(w, []).append((v, msg))
        for w in result.consume:
            if w not in live[v]:
                raise ProgramBug(f"node {v} consumed masked or unknown edge to {w} in round {r}")
            consume_list.append((v, w))
        if result.terminated:
            kill_list.append(v)
        elif wake_hook is not None:
            wake_at[v] = wake_hook(result.state, r)
        else:
            wake_at[v] = r + 1

    def barrier(r, kill_list, consume_list):
        for v, w in consume_list:
            key = (v, w) if v < w else (w, v)
            if key in consumed:
                raise ProgramBug(f"edge {key} consumed twice (round {r})")
            consumed.add(key)
            live[v].discard(w)
            live[w].discard(v)
            touched.update((v, w))
        for v in kill_list:
            alive.discard(v)
            wake_at.pop(v, None)
            report.terminated += 1
            for w in live[v]:
                live[w].discard(v)
                touched.add(w)
            live[v] = set()
        # undeliverable mail to nodes that terminated this round
        for w in list(outbox):
            if w not in alive:
                report.dropped += len(outbox.pop(w))

    def settled():
        if not alive:
            return True
        if quiet_hook is None or outbox or touched:
            return False
        return all(quiet_hook(states[v]) for v in alive)

    kills, cons = [], []
    for v, view in topology.views.items():
        emit(v, 0, program.init(view), kills, cons)
    barrier(0, kills, cons)
    if observer:
        observer(0, states)

    r = 0
    while True:
        if settled():
            report.halted = bool(alive)
            break
        if r >= round_cap:
            report.cap_exceeded = True
            break
        if not outbox and not touched:
            nxt = min(wake_at.values(), default=NEVER)
            if nxt == NEVER:
                report.deadlock = True
                report.cap_exceeded = True
                if report.trace is not None:
                    report.trace.append(f"deadlock after round {r}")
                r = round_cap
                break
            nxt = int(nxt)
            if nxt > round_cap:
                report.cap_exceeded = True
                r = round_cap
                break
            if report.trace is not None:
                for skipped in range(r + 1, nxt):
                    report.trace.append(f"round {skipped} active {len(alive)} messages 0")
            r = nxt - 1
        r += 1
        inbox, outbox = outbox, {}
        woken, touched = touched, set()
        delivered = sum(len(m) for m in inbox.values())
        report.messages += delivered
        kills, cons = [], []
        active = 0
        for v in sorted(alive):
            mail = inbox.get(v)
            if mail is None and v not in woken and wake_at.get(v, r) > r:
                continue
            active += 1
            mail = tuple(sorted(mail, key=_sender)) if mail else ()
            emit(v, r, program.step(states[v], r, mail, frozenset(live[v])), kills, cons)
        barrier(r, kills, cons)
        if report.trace is not None:
            report.trace.append(f"round {r} active {len(alive) + len(kills)} messages {delivered}")
        if observer:
            observer(r, states)
    report.rounds = r
    return states, report


def _sender(item):
    return item[0]


def state_fingerprint(states: Mapping[Hashable, Any]) -> str:
    """Stable text rendering of a state map, for byte-level determinism checks."""
    return "\n".join(f"{k!r}: {states[k]!r}" for k in sorted(states))
