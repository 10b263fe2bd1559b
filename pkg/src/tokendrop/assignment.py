"""Stable assignments of customers to servers.

Customers are hyperedges over their adjacent servers; the server a customer
is assigned to is the head of that hyperedge.  This module holds the
hypergraph token dropping game, the phase algorithm built on it, the relaxed
2-bounded variant, and the matching reduction that uses it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from . import _game
from ._phased import run_phased
from .engine import NEVER, LocalView, SimReport, Step, Topology, run_sync
from .errors import InvariantViolation, RoundBudgetExceeded, UnassignedCustomer
from .graphs import AssignmentInstance, TokenDropInstance, UndirectedGraph, edge_key
from .token_dropping import (
    NodeOutput, Traversal, TraversalSet, ValidationReport, derive_traversals, proposal_round_bound,
)


# ------------------------------------------------------------------ state


@dataclass(frozen=True)
class HyperOrientation:
    instance: AssignmentInstance
    head: Mapping[int, int | None] = field(default_factory=dict)

    def __post_init__(self):
        full = {c.id: None for c in self.instance.customers}
        for cid, s in dict(self.head).items():
            if cid not in full:
                raise InvariantViolation(f"unknown customer {cid}")
            if s is not None and s not in self.instance.customer(cid).servers:
                raise InvariantViolation(f"customer {cid} cannot be assigned to non-adjacent server {s}")
            full[cid] = s
        object.__setattr__(self, "head", full)

    def loads(self) -> dict[int, int]:
        out = {s: 0 for s in self.instance.servers}
        for s in self.head.values():
            if s is not None:
                out[s] += 1
        return out

    def load(self, s: int) -> int:
        return sum(1 for h in self.head.values() if h == s)

    @property
    def complete(self) -> bool:
        return all(h is not None for h in self.head.values())


def _assigned(h: HyperOrientation, cid: int) -> int:
    s = h.head.get(cid)
    if s is None:
        raise UnassignedCustomer(f"customer {cid} is not assigned")
    return s


def hyper_badness(h: HyperOrientation, cid: int, loads: Mapping[int, int] | None = None) -> int:
    head = _assigned(h, cid)
    loads = loads if loads is not None else h.loads()
    others = [s for s in h.instance.customer(cid).servers if s != head]
    if not others:
        return 0
    return loads[head] - min(loads[s] for s in others)


def is_stable_assignment(h: HyperOrientation) -> bool:
    loads = h.loads()
    return all(hyper_badness(h, c.id, loads) <= 1 for c in h.instance.customers)


def is_k_bounded_happy(h: HyperOrientation, cid: int, k: int, loads: Mapping[int, int] | None = None) -> bool:
    if k < 2:
        raise ValueError("k must be at least 2")
    head = _assigned(h, cid)
    loads = loads if loads is not None else h.loads()
    limit = min(k, loads[head]) - 2
    return all(loads[s] > limit for s in h.instance.customer(cid).servers)


def unhappy_customers(h: HyperOrientation, k: int = 2) -> frozenset[int]:
    loads = h.loads()
    return frozenset(c.id for c in h.instance.customers if not is_k_bounded_happy(h, c.id, k, loads))


# ------------------------------------------------------- hypergraph game


@dataclass(frozen=True)
class HyperEdge:
    key: int
    head: int
    members: tuple[int, ...]


@dataclass(frozen=True)
class HyperTokenInstance:
    servers: tuple[int, ...]
    level: Mapping[int, int]
    hyperedges: tuple[HyperEdge, ...]
    tokens: frozenset

    def __post_init__(self):
        servers = tuple(sorted(self.servers))
        known = set(servers)
        if len(known) != len(servers):
            raise InvariantViolation("duplicate server id")
        if set(self.level) != known:
            raise InvariantViolation("every server needs exactly one level")
        edges = []
        keys = set()
        for e in self.hyperedges:
            mem = tuple(sorted(set(e.members)))
            if e.key in keys:
                raise InvariantViolation(f"duplicate hyperedge key {e.key}")
            keys.add(e.key)
            if e.head not in mem or any(s not in known for s in mem):
                raise InvariantViolation(f"hyperedge {e.key} has an invalid head or member")
            others = [self.level[s] for s in mem if s != e.head]
            if others and self.level[e.head] != min(others) + 1:
                raise InvariantViolation(f"hyperedge {e.key}: head level must be one above the lowest member")
            edges.append(HyperEdge(e.key, e.head, mem))
        if not set(self.tokens) <= known:
            raise InvariantViolation("token on unknown server")
        object.__setattr__(self, "servers", servers)
        object.__setattr__(self, "hyperedges", tuple(sorted(edges, key=lambda e: e.key)))
        object.__setattr__(self, "tokens", frozenset(self.tokens))

    def children(self, e: HyperEdge) -> tuple[int, ...]:
        top = self.level[e.head]
        return tuple(s for s in e.members if s != e.head and self.level[s] == top - 1)

    @property
    def height(self) -> int:
        return max(self.level.values(), default=0) - min(self.level.values(), default=0)

    @property
    def max_degree(self) -> int:
        """Largest number of hyperedges at one server."""
        count = {s: 0 for s in self.servers}
        for e in self.hyperedges:
            for s in e.members:
                count[s] += 1
        return max(count.values(), default=0)

    @classmethod
    def from_token_instance(cls, inst: TokenDropInstance) -> "HyperTokenInstance":
        """Rank-2 view of a graph game; hyperedge keys are edge indices."""
        edges = tuple(HyperEdge(i, p, (c, p)) for i, (c, p) in enumerate(inst.edges))
        return cls(inst.nodes, dict(inst.level), edges, inst.tokens)


class HyperProposalProgram:
    """Proposal algorithm over hyperedges; only heads may pass tokens."""

    def init(self, view: LocalView) -> Step:
        has_token, parents, children = view.payload
        gs = _game.GameState(has_token, has_token,
                             {p: set(k) for p, k in parents.items()},
                             {c: set(k) for c, k in children.items()})
        out = _game.game_init(gs)
        return Step((gs, frozenset(view.ports)), _game.pack(out), (), gs.done)

    def step(self, st, r, inbox, ports) -> Step:
        gs, before = st
        gs = gs.copy()
        out, _ = _game.game_step(gs, r, inbox, before - ports)
        return Step((gs, ports), _game.pack(out), (), gs.done)

    def wake(self, st, r):
        return NEVER


def hyper_round_bound(height: int, max_degree: int) -> int:
    return proposal_round_bound(height, max_degree)


def run_hyper_token_drop(instance: HyperTokenInstance, round_cap: int | None = None, *,
                         trace: bool = False) -> tuple[TraversalSet, SimReport]:
    parents = {s: {} for s in instance.servers}
    children = {s: {} for s in instance.servers}
    for e in instance.hyperedges:
        for c in instance.children(e):
            children[e.head].setdefault(c, set()).add(e.key)
            parents[c].setdefault(e.head, set()).add(e.key)
    views = {}
    for s in instance.servers:
        ports = tuple(sorted(set(parents[s]) | set(children[s])))
        views[s] = LocalView(s, ports, {}, (s in instance.tokens, parents[s], children[s]))
    bound = hyper_round_bound(instance.height, instance.max_degree)
    cap = round_cap if round_cap is not None else 2 * bound + 10
    states, report = run_sync(Topology(views), HyperProposalProgram(), cap, trace=trace)
    if report.cap_exceeded:
        raise RoundBudgetExceeded(f"hypergraph game did not finish within {cap} rounds")
    outputs = {}
    for s, (gs, _) in states.items():
        o = _game.node_output(gs)
        if o != (None, (), None, False):
            outputs[s] = NodeOutput(*o)
    return TraversalSet(tuple(derive_traversals(outputs))), report


def validate_hyper_traversals(instance: HyperTokenInstance, out: TraversalSet) -> ValidationReport:
    """Rules of the game with hyperedges in place of edges."""
    by_key = {e.key: e for e in instance.hyperedges}
    kids = {e.key: set(instance.children(e)) for e in instance.hyperedges}
    origins = []
    used = {}
    for t in out.traversals:
        origins.append(t.origin)
        if len(t.via) != len(t.path) - 1:
            return ValidationReport(False, "path", t, "traversal needs one hyperedge per step")
        for a, b, key in zip(t.path, t.path[1:], t.via):
            e = by_key.get(key)
            if e is None or e.head != a or b not in kids[key]:
                return ValidationReport(False, "path", key, f"no pass from {a} to {b} over hyperedge {key}")
            if key in used:
                return ValidationReport(False, "rule1", key, f"hyperedge {key} used twice")
            used[key] = t.origin
    if sorted(origins) != sorted(instance.tokens):
        return ValidationReport(False, "coverage", None, "traversal origins must be exactly the tokens")
    dests = set()
    for t in out.traversals:
        if t.destination in dests:
            return ValidationReport(False, "rule2", t.destination, "two tokens share a destination")
        dests.add(t.destination)
    for e in instance.hyperedges:
        if e.head in dests and e.key not in used:
            for c in sorted(kids[e.key]):
                if c not in dests:
                    return ValidationReport(False, "rule3", e.key,
                                            f"token at {e.head} could still move to {c} over hyperedge {e.key}")
    return ValidationReport(True)


# ------------------------------------------------------- stable assignment


def assignment_max_phases(C: int, S: int) -> int:
    return C * (S - 1) + 1


def assignment_round_bound(C: int, S: int) -> int:
    return 4 * C * S ** 4


def assignment_period(C: int, S: int) -> int:
    C, S = max(C, 1), max(S, 1)
    full = proposal_round_bound(S - 1, S) + 2
    return min(full, assignment_round_bound(C, S) // assignment_max_phases(C, S))


def run_stable_assignment(instance: AssignmentInstance, round_cap: int | None = None, *, trace: bool = False
                          ) -> tuple[HyperOrientation, SimReport]:
    """Assign every customer so that no hyperedge has badness above 1.

    Servers accept the proposing customer with the smallest id; per-phase
    records are in ``report.phases``.
    """
    C, S = instance.C, instance.S
    period = assignment_period(C, S)
    members = {c.id: c.servers for c in instance.customers}
    cap = round_cap if round_cap is not None else 2 * (assignment_max_phases(C, S) + 1) * period
    head, report = run_phased(members, instance.servers, lambda s, c: c, period, cap, trace=trace)
    return HyperOrientation(instance, head), report


# ------------------------------------------------------------- 2-bounded


@dataclass(frozen=True)
class IterationRecord:
    """Assignment after ``iteration`` decision rounds (0 is the initial one)."""

    iteration: int
    head: Mapping[int, int]
    loads: Mapping[int, int]
    redirected: frozenset


@dataclass
class _TBState:
    node: int
    customers: Mapping[int, tuple[int, ...]]
    mine: frozenset
    nbr_load: dict
    settled: bool
    moved: frozenset = frozenset()


class TwoBoundedProgram:
    """Odd rounds exchange loads, even rounds redirect unhappy customers."""

    def init(self, view: LocalView) -> Step:
        customers = dict(view.payload)
        me = view.node
        mine = frozenset(c for c, ss in customers.items() if ss[0] == me)
        return Step(_TBState(me, customers, mine, {}, len(mine) <= 1), {}, (), False)

    def quiescent(self, st: _TBState) -> bool:
        return st.settled

    def step(self, st: _TBState, r: int, inbox, ports) -> Step:
        st = _TBState(st.node, st.customers, st.mine, dict(st.nbr_load), st.settled)
        send = {}
        if r % 2 == 1:
            gained = {c for _, m in inbox if m[0] == "MOVE" for c in m[1]}
            if gained:
                st.mine = st.mine | gained
                st.settled = False
            for w in sorted(ports):
                send[w] = ("LOAD", len(st.mine))
            return Step(st, send, (), False)
        for w, m in inbox:
            if m[0] == "LOAD":
                st.nbr_load[w] = m[1]
        load = len(st.mine)
        unhappy = []
        for c in sorted(st.mine):
            zero = [s for s in st.customers[c] if s != st.node and st.nbr_load[s] == 0]
            if load >= 2 and zero:
                unhappy.append((c, zero[0]))
        if len(unhappy) == load and unhappy:
            unhappy = unhappy[1:]
        moves = {}
        for c, t in unhappy:
            moves.setdefault(t, []).append(c)
        st.moved = frozenset(c for c, _ in unhappy)
        st.mine = st.mine - st.moved
        for t, cs in moves.items():
            send[t] = ("MOVE", tuple(cs))
        st.settled = not unhappy
        return Step(st, send, (), False)


def two_bounded_round_bound(C: int) -> int:
    return 2 * (C + 2) + 1


def run_two_bounded(instance: AssignmentInstance, round_cap: int | None = None, *, trace: bool = False
                    ) -> tuple[HyperOrientation, SimReport]:
    """2-bounded stable assignment; ``report.phases`` holds one record per iteration.

    Customers start at their smallest-id server.  Iteration records are
    taken after every load exchange, so each shows a consistent assignment.
    """
    views = {}
    for s in instance.servers:
        cs = {c: instance.customer(c).servers for c in instance.customers_of(s)}
        ports = sorted({w for ss in cs.values() for w in ss if w != s})
        views[s] = LocalView(s, tuple(ports), {}, tuple(sorted(cs.items())))
    records = []
    moved = set()

    def snapshot(states):
        head = {c: s for s, st in states.items() for c in st.mine}
        loads = {s: len(st.mine) for s, st in states.items()}
        return head, loads

    def observe(r, states):
        if r % 2 == 0:
            moved.clear()
            for st in states.values():
                moved.update(st.moved)
            if r == 0:
                head, loads = snapshot(states)
                records.append(IterationRecord(0, head, loads, frozenset()))
            return
        if moved:
            head, loads = snapshot(states)
            records.append(IterationRecord(len(records), head, loads, frozenset(moved)))

    cap = round_cap if round_cap is not None else 4 * two_bounded_round_bound(instance.C) + 10
    states, report = run_sync(Topology(views), TwoBoundedProgram(), cap, trace=trace, observer=observe)
    if report.cap_exceeded:
        raise RoundBudgetExceeded(f"2-bounded algorithm did not finish within {cap} rounds")
    head, _ = snapshot(states)
    report.phases = records
    return HyperOrientation(instance, head), report


def two_bounded_iterations(report: SimReport) -> int:
    """Number of iterations in which at least one customer was redirected."""
    return max(len(report.phases) - 1, 0)


# ------------------------------------------------------------- reduction


def maximal_matching_via_two_bounded(graph: UndirectedGraph, U: Iterable[int]) -> frozenset[tuple[int, int]]:
    """Maximal matching: ``U`` are customers, every server keeps its smallest customer."""
    return matching_via_two_bounded_run(graph, U)[0]


def matching_via_two_bounded_run(graph: UndirectedGraph, U: Iterable[int], round_cap: int | None = None):
    """Same as :func:`maximal_matching_via_two_bounded`, also returning the run report."""
    inst = AssignmentInstance.from_bipartite(graph, U)
    h, report = run_two_bounded(inst, round_cap)
    keep = {}
    for c, s in sorted(h.head.items()):
        keep.setdefault(s, c)
    return frozenset(edge_key(c, s) for s, c in keep.items()), report
