"""Phase-driven node program shared by stable orientation and stable assignment.

Every node is a server; every "customer" is a hyperedge over servers.  A
graph edge is a customer with exactly two servers.  All nodes know the phase
length ``P`` and run phases of exactly that many rounds:

    k = 1        send LOAD to every neighbor
    k = 2        read loads; accept one proposal; build the local part of the
                 token dropping game on badness-1 hyperedges; game init
    k = 3 .. P   game rounds 1 .. P-2; a token passed over customer c moves
                 the head of c to the receiver
    k = P        the game must be finished; commit accepted customers

Round 0 (init) sends nothing; phase p occupies rounds (p-1)P+1 .. pP.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from . import _game
from .engine import NEVER, LocalView, Step
from .errors import InvariantViolation, RoundBudgetExceeded


@dataclass
class PhaseStats:
    load_before: int = 0
    proposals: int = 0
    accepted: object = None
    flips: int = 0
    game_messages: int = 0
    game_done_round: int | None = None
    destination: bool = False
    max_badness_start: int = 0


@dataclass
class ServerState:
    node: int
    period: int
    members: dict            # customer -> sorted tuple of servers
    rank: dict               # customer -> acceptance priority at this node
    head: dict               # customer -> server or None
    nbr_load: dict = field(default_factory=dict)
    game: _game.GameState | None = None
    pending: dict = field(default_factory=dict)   # customer -> head to commit
    stats: PhaseStats = field(default_factory=PhaseStats)

    @property
    def load(self) -> int:
        me = self.node
        return sum(1 for h in self.head.values() if h == me)

    def copy(self) -> "ServerState":
        return ServerState(
            self.node, self.period, self.members, self.rank, dict(self.head),
            dict(self.nbr_load), self.game.copy() if self.game else None,
            dict(self.pending), PhaseStats(**vars(self.stats)),
        )


def phase_position(r: int, period: int) -> int:
    return (r - 1) % period + 1


class PhasedProgram:
    """Node program; payload is ``(period, members, rank)``."""

    def init(self, view: LocalView) -> Step:
        period, members, rank = view.payload
        st = ServerState(view.node, period, dict(members), dict(rank), {c: None for c in members})
        return Step(st, {}, (), False)

    def wake(self, st: ServerState, r: int):
        P = st.period
        base = r - phase_position(r, P) if r >= 1 else -P
        for cand in (base + 1, base + 2, base + P, base + P + 1):
            if cand > r:
                return cand
        return NEVER

    def quiescent(self, st: ServerState) -> bool:
        return not st.pending and all(h is not None for h in st.head.values())

    def step(self, st: ServerState, r: int, inbox, ports) -> Step:
        st = st.copy()
        k = phase_position(r, st.period)
        out: dict = {}
        game_in = []
        for sender, items in inbox:
            rest = []
            for item in items:
                tag = item[0]
                if tag == "LOAD":
                    st.nbr_load[sender] = item[1]
                elif tag == "ACCEPT":
                    st.pending[item[1]] = sender
                elif tag == "HEAD":
                    st.head[item[1]] = item[2]
                else:
                    if tag == "TOKEN":
                        st.head[item[1]] = st.node
                    rest.append(item)
            if rest:
                game_in.append((sender, tuple(rest)))

        if k == 1:
            st.stats = PhaseStats(load_before=st.load)
            st.game = None
            for w in sorted(ports):
                _add(out, w, ("LOAD", st.load))
        elif k == 2:
            self._open_phase(st, r, out)
        elif st.game is not None:
            gout, passed = _game.game_step(st.game, r, game_in, (), bye=True)
            if passed is not None:
                w, c = passed
                st.head[c] = w
                st.stats.flips += 1
                for x in st.members[c]:
                    if x != w and x != st.node:
                        _add(gout, x, ("HEAD", c, w))
            if k < st.period:
                st.stats.game_messages += sum(len(v) for v in gout.values())
                for w, items in gout.items():
                    for it in items:
                        _add(out, w, it)
        if k == st.period:
            self._close_phase(st, r)
        return Step(st, _game.pack(out), (), False)

    def _open_phase(self, st: ServerState, r: int, out: dict) -> None:
        me = st.node
        load = st.load
        loads = dict(st.nbr_load)
        loads[me] = load
        proposals = []
        gs = _game.GameState(has_token=False, origin=False)
        worst = 0
        for c, mem in st.members.items():
            h = st.head[c]
            if h is None:
                target = min(mem, key=lambda s: (loads[s], s))
                if target == me:
                    proposals.append(c)
                continue
            if len(mem) < 2:
                continue
            low = min(loads[s] for s in mem if s != h)
            bad = loads[h] - low
            if h == me:
                worst = max(worst, bad)
                if bad > 1:
                    raise InvariantViolation(f"customer {c} at head {me} has badness {bad} at phase start")
            if bad != 1:
                continue
            if h == me:
                for w in mem:
                    if w != me and loads[w] == load - 1:
                        gs.children.setdefault(w, set()).add(c)
            elif load == loads[h] - 1:
                gs.parents.setdefault(h, set()).add(c)
        st.stats.proposals = len(proposals)
        st.stats.max_badness_start = worst
        if proposals:
            c = min(proposals, key=lambda x: (st.rank[x], x))
            st.stats.accepted = c
            st.pending[c] = me
            gs.has_token = gs.origin = True
            for w in st.members[c]:
                if w != me:
                    _add(out, w, ("ACCEPT", c))
        st.game = gs
        gout = _game.game_init(gs, bye=True)
        st.stats.game_messages += sum(len(v) for v in gout.values())
        for w, items in gout.items():
            for it in items:
                _add(out, w, it)

    def _close_phase(self, st: ServerState, r: int) -> None:
        gs = st.game
        if gs is not None:
            if not gs.done:
                raise RoundBudgetExceeded(
                    f"node {st.node}: token dropping game unfinished at end of phase (round {r})")
            st.stats.game_done_round = gs.done_round
            st.stats.destination = gs.has_token
        for c, h in st.pending.items():
            st.head[c] = h
        st.pending = {}


def _add(out: dict, port: int, item: tuple) -> None:
    out.setdefault(port, []).append(item)


@dataclass(frozen=True)
class GameSummary:
    """Token dropping sub-run inside one phase; rounds are relative to game init."""

    rounds: int
    messages: int


@dataclass(frozen=True)
class PhaseRecord:
    phase: int
    proposals_made: int
    proposals_accepted: int
    game: GameSummary
    flips: int
    newly_oriented: int
    loads_before: dict
    loads_after: dict
    destinations: frozenset
    max_badness_start: int
    max_badness_after: int


def max_badness(members: dict, head: dict, load: dict) -> int:
    worst = 0
    for c, mem in members.items():
        h = head.get(c)
        if h is None or len(mem) < 2:
            continue
        worst = max(worst, load[h] - min(load[s] for s in mem if s != h))
    return worst


def run_phased(members: dict, servers, rank_of, period: int, round_cap: int, *,
               trace: bool = False):
    """Run the phased program; ``members`` maps customer -> servers.

    ``rank_of(server, customer)`` gives the acceptance priority.  Returns
    ``(head, report)`` with one :class:`PhaseRecord` per phase in
    ``report.phases``.
    """
    from .engine import Topology, run_sync

    servers = tuple(sorted(servers))
    local = {s: {} for s in servers}
    for c, mem in members.items():
        for s in mem:
            local[s][c] = mem
    views = {}
    for s in servers:
        ports = sorted({w for mem in local[s].values() for w in mem if w != s})
        rank = {c: rank_of(s, c) for c in local[s]}
        views[s] = LocalView(s, tuple(ports), {}, (period, local[s], rank))
    records = []

    def observe(r, states):
        if r == 0 or r % period:
            return
        records.append(_phase_record(r // period, r - period + 2, members, states))

    states, report = run_sync(Topology(views), PhasedProgram(), round_cap, trace=trace, observer=observe)
    if report.cap_exceeded:
        raise RoundBudgetExceeded(f"phased algorithm did not finish within {round_cap} rounds")
    report.phases = records
    head = _agreed_heads(members, states)
    return head, report


def _agreed_heads(members: dict, states: dict) -> dict:
    head = {}
    for c, mem in members.items():
        seen = {states[s].head[c] for s in mem}
        if len(seen) != 1:
            raise InvariantViolation(f"servers of customer {c} disagree on its head: {sorted(seen, key=repr)}")
        head[c] = seen.pop()
    return head


def _phase_record(phase: int, game_start: int, members: dict, states: dict) -> PhaseRecord:
    head = _agreed_heads(members, states)
    loads = {s: st.load for s, st in states.items()}
    stats = {s: st.stats for s, st in states.items()}
    done = [x.game_done_round for x in stats.values() if x.game_done_round is not None]
    accepted = sum(1 for x in stats.values() if x.accepted is not None)
    return PhaseRecord(
        phase=phase,
        proposals_made=sum(x.proposals for x in stats.values()),
        proposals_accepted=accepted,
        game=GameSummary(max(done, default=game_start) - game_start,
                         sum(x.game_messages for x in stats.values())),
        flips=sum(x.flips for x in stats.values()),
        newly_oriented=accepted,
        loads_before={s: x.load_before for s, x in stats.items()},
        loads_after=loads,
        destinations=frozenset(s for s, x in stats.items() if x.destination),
        max_badness_start=max((x.max_badness_start for x in stats.values()), default=0),
        max_badness_after=max_badness(members, head, loads),
    )
