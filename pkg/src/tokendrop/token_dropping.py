"""Token dropping: node programs, traversal bookkeeping and validation."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from . import _game
from .engine import NEVER, LocalView, SimReport, Step, Topology, run_sync
from .errors import InconsistentOutput, LevelOutOfRange, RoundBudgetExceeded
from .graphs import TokenDropInstance, UndirectedGraph, edge_key


def proposal_round_bound(height: int, max_degree: int) -> int:
    """Raw communication rounds allowed for the proposal algorithm."""
    return 2 * height * max_degree ** 2 + 2 * height + 4


def three_level_round_bound(max_degree: int) -> int:
    return 2 * max_degree + 6


@dataclass(frozen=True)
class Traversal:
    """Downward path of one token: ``path[0]`` is the origin, ``path[-1]`` the destination.

    ``via[i]`` is the link used between ``path[i]`` and ``path[i+1]``; for
    graph instances it is the ``(child, parent)`` edge.
    """

    path: tuple[int, ...]
    via: tuple = ()

    @property
    def origin(self) -> int:
        return self.path[0]

    @property
    def destination(self) -> int:
        return self.path[-1]


@dataclass(frozen=True)
class NodeOutput:
    """Node-centered output: links are ``(neighbor, key)`` pairs."""

    origin_out: tuple | None = None
    through: tuple = ()
    dest_in: tuple | None = None
    stays: bool = False


@dataclass(frozen=True)
class TraversalSet:
    traversals: tuple[Traversal, ...]

    def __post_init__(self):
        object.__setattr__(self, "traversals", tuple(sorted(self.traversals, key=lambda t: t.path)))

    @property
    def destinations(self) -> tuple[int, ...]:
        return tuple(t.destination for t in self.traversals)

    def node_centered(self) -> dict[int, NodeOutput]:
        parts: dict[int, dict] = {}

        def rec(v):
            return parts.setdefault(v, {"origin_out": None, "through": [], "dest_in": None, "stays": False})

        for t in self.traversals:
            p = t.path
            if len(p) == 1:
                rec(p[0])["stays"] = True
                continue
            rec(p[0])["origin_out"] = (p[1], t.via[0])
            for i in range(1, len(p) - 1):
                rec(p[i])["through"].append(((p[i - 1], t.via[i - 1]), (p[i + 1], t.via[i])))
            rec(p[-1])["dest_in"] = (p[-2], t.via[-1])
        return {
            v: NodeOutput(d["origin_out"], tuple(sorted(d["through"])), d["dest_in"], d["stays"])
            for v, d in sorted(parts.items())
        }


def derive_traversals(node_outputs: Mapping[int, NodeOutput], instance=None) -> list[Traversal]:
    """Rebuild per-token paths from the node-centered form.

    Raises :class:`InconsistentOutput` on dangling links, leftover pairs, or
    links that are not edges of ``instance`` (when given).
    """
    edges = frozenset(instance.edges) if isinstance(instance, TokenDropInstance) else None
    unused = {v: list(o.through) for v, o in node_outputs.items()}
    dest_used = set()
    result = []
    for v in sorted(node_outputs):
        o = node_outputs[v]
        if o.stays:
            if o.origin_out is not None:
                raise InconsistentOutput(f"node {v} both keeps and passes its own token")
            result.append(Traversal((v,)))
            continue
        if o.origin_out is None:
            continue
        path = [v]
        via = []
        prev, (nxt, key) = v, o.origin_out
        while True:
            if edges is not None and (nxt, prev) not in edges:
                raise InconsistentOutput(f"link {prev}->{nxt} is not a parent-child edge")
            path.append(nxt)
            via.append(key)
            here = node_outputs.get(nxt)
            if here is None:
                raise InconsistentOutput(f"node {nxt} has no output but receives a token from {prev}")
            if here.dest_in == (prev, key) and nxt not in dest_used:
                dest_used.add(nxt)
                break
            pairs = unused.get(nxt, [])
            match = next((pr for pr in pairs if pr[0] == (prev, key)), None)
            if match is None:
                raise InconsistentOutput(f"dangling incoming link {prev}->{nxt} at node {nxt}")
            pairs.remove(match)
            prev, (nxt, key) = nxt, match[1]
            if len(path) > len(node_outputs) + 1:
                raise InconsistentOutput("cycle in node-centered output")
        result.append(Traversal(tuple(path), tuple(via)))
    for v, pairs in unused.items():
        if pairs:
            raise InconsistentOutput(f"node {v} has pair {pairs[0]} not reachable from any origin")
    for v, o in node_outputs.items():
        if o.dest_in is not None and v not in dest_used:
            raise InconsistentOutput(f"node {v} claims an arrival from {o.dest_in[0]} that no path delivers")
    return result


# ------------------------------------------------------------------ validation


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    rule: str | None = None
    witness: object = None
    message: str = ""

    def __bool__(self):
        return self.ok


def _reject(rule, witness, message):
    return ValidationReport(False, rule, witness, message)


def validate_traversals(instance: TokenDropInstance, out: TraversalSet) -> ValidationReport:
    """Check path validity and the three rules of the game."""
    edges = set(instance.edges)
    origins = []
    for t in out.traversals:
        if not t.path:
            return _reject("path", t, "empty traversal")
        origins.append(t.origin)
        for v in t.path:
            if v not in instance.level:
                return _reject("path", v, f"unknown node {v}")
        for a, b in zip(t.path, t.path[1:]):
            if (b, a) not in edges:
                return _reject("path", (b, a), f"{a} is not a parent of {b}")
    if sorted(origins) != sorted(instance.tokens):
        extra = set(origins) ^ set(instance.tokens)
        return _reject("coverage", min(extra) if extra else None,
                       "traversal origins must be exactly the token positions, once each")

    used = {}
    for t in out.traversals:
        for a, b in zip(t.path, t.path[1:]):
            e = (b, a)
            if e in used:
                return _reject("rule1", e, f"edge {e} used by traversals from {used[e]} and {t.origin}")
            used[e] = t.origin

    dests = {}
    for t in out.traversals:
        if t.destination in dests:
            return _reject("rule2", t.destination, f"node {t.destination} is the destination of two tokens")
        dests[t.destination] = t.origin

    for v in dests:
        for u in instance.children(v):
            if (u, v) not in used and u not in dests:
                return _reject("rule3", (u, v),
                               f"token at {v} could still move to unoccupied child {u} over unused edge")
    return ValidationReport(True)


# -------------------------------------------------------------- proposal program


@dataclass
class _ProposalState:
    game: _game.GameState
    ports: frozenset


class ProposalProgram:
    """Standalone proposal algorithm on a layered instance (levels hidden)."""

    def init(self, view: LocalView) -> Step:
        gs = _game.GameState(has_token=bool(view.payload), origin=bool(view.payload))
        for w in view.ports:
            if view.tags[w] == "parent":
                gs.parents[w] = {(view.node, w)}
            else:
                gs.children[w] = {(w, view.node)}
        out = _game.game_init(gs)
        return Step(_ProposalState(gs, frozenset(view.ports)), _game.pack(out), (), gs.done)

    def step(self, st: _ProposalState, r: int, inbox, ports) -> Step:
        gs = st.game.copy()
        out, passed = _game.game_step(gs, r, inbox, st.ports - ports)
        consume = (passed[0],) if passed else ()
        return Step(_ProposalState(gs, ports), _game.pack(out), consume, gs.done)

    def wake(self, st, r):
        return NEVER


def _topology(instance: TokenDropInstance, payload) -> Topology:
    views = {}
    for v in instance.nodes:
        tags = {p: "parent" for p in instance.parents(v)}
        tags.update({c: "child" for c in instance.children(v)})
        views[v] = LocalView(v, tuple(sorted(tags)), tags, payload(v))
    return Topology(views)


def collect_traversals(states: Mapping[int, object], get_game=lambda s: s.game) -> TraversalSet:
    outputs = {}
    for v, st in states.items():
        o = _game.node_output(get_game(st))
        if o != (None, (), None, False):
            outputs[v] = NodeOutput(*o)
    return TraversalSet(tuple(derive_traversals(outputs)))


def run_proposal(instance: TokenDropInstance, round_cap: int | None = None, *, trace: bool = False,
                 observer=None) -> tuple[TraversalSet, SimReport]:
    bound = proposal_round_bound(instance.height, instance.max_degree)
    cap = round_cap if round_cap is not None else 2 * bound + 10
    topo = _topology(instance, lambda v: v in instance.tokens)
    states, report = run_sync(topo, ProposalProgram(), cap, trace=trace, observer=observer)
    if report.cap_exceeded:
        raise RoundBudgetExceeded(f"proposal algorithm did not finish within {cap} rounds")
    return collect_traversals(states), report


# ------------------------------------------------------------- three levels


@dataclass
class _TLState:
    level: int
    has_token: bool
    origin: bool
    parents: frozenset
    children: frozenset
    outstanding: int | None = None
    events: tuple = ()
    done: bool = False


class ThreeLevelProgram:
    """Algorithm for games with levels 0, 1, 2; level-1 nodes drive every move.

    Every node is told its own level.  Level 1 nodes alternate between
    requesting a token from a parent and proposing their token to a child;
    each such action makes a neighbor leave the game.
    """

    def init(self, view: LocalView) -> Step:
        has_token, level = view.payload
        st = _TLState(
            level, has_token, has_token,
            frozenset(w for w in view.ports if view.tags[w] == "parent"),
            frozenset(w for w in view.ports if view.tags[w] == "child"),
        )
        st.done = self._finished(st)
        return Step(st, {}, (), st.done)

    @staticmethod
    def _finished(st: _TLState) -> bool:
        if st.level == 2:
            return not st.has_token or not st.children
        if st.level == 0:
            return st.has_token or not st.parents
        return (st.has_token and not st.children) or (not st.has_token and not st.parents)

    def step(self, st: _TLState, r: int, inbox, ports) -> Step:
        st = _TLState(st.level, st.has_token, st.origin, st.parents & ports, st.children & ports,
                      st.outstanding, st.events, st.done)
        send = {}
        consume = ()
        if st.outstanding is not None and st.outstanding not in ports:
            st.outstanding = None
        msgs = {w: m for w, m in inbox}
        if st.level == 2:
            reqs = [w for w, m in inbox if m == "REQ" and w in st.children]
            if reqs and st.has_token:
                c = min(reqs)
                send[c] = "TOKEN"
                consume = (c,)
                st.has_token = False
                st.events = st.events + (("out", c, None, r),)
                st.children = st.children - {c}
        elif st.level == 0:
            props = [w for w, m in inbox if m == "PROP" and w in st.parents]
            if props:
                p = min(props)
                send[p] = "ACC"
                consume = (p,)
                st.has_token = True
                st.events = st.events + (("in", p, None, r),)
                st.parents = st.parents - {p}
        else:
            for w, m in msgs.items():
                if m == "TOKEN":
                    st.has_token = True
                    st.events = st.events + (("in", w, None, r),)
                    st.parents = st.parents - {w}
                    st.outstanding = None
                elif m == "ACC":
                    st.has_token = False
                    st.events = st.events + (("out", w, None, r),)
                    st.children = st.children - {w}
                    st.outstanding = None
        st.done = self._finished(st)
        if not st.done and st.level == 1 and st.outstanding is None:
            if st.has_token:
                target = min(st.children)
                send[target] = "PROP"
            else:
                target = min(st.parents)
                send[target] = "REQ"
            st.outstanding = target
        return Step(st, send, consume, st.done)

    def wake(self, st: _TLState, r: int):
        # Level-1 nodes look at their neighborhood once after the init barrier.
        if r == 0 and st.level == 1:
            return 1
        return NEVER


def run_three_level(instance: TokenDropInstance, round_cap: int | None = None, *,
                    trace: bool = False) -> tuple[TraversalSet, SimReport]:
    if instance.height > 2:
        raise LevelOutOfRange(f"three-level algorithm needs levels 0..2, instance has height {instance.height}")
    bound = three_level_round_bound(instance.max_degree)
    cap = round_cap if round_cap is not None else 2 * bound + 10
    topo = _topology(instance, lambda v: (v in instance.tokens, instance.level[v]))
    states, report = run_sync(topo, ThreeLevelProgram(), cap, trace=trace)
    if report.cap_exceeded:
        raise RoundBudgetExceeded(f"three-level algorithm did not finish within {cap} rounds")
    outputs = {}
    for v, st in states.items():
        gs = _game.GameState(has_token=st.has_token, origin=st.origin,
                             events=[(kind, w, (v, w) if kind == "in" else (w, v), rr)
                                     for kind, w, _, rr in st.events])
        o = _game.node_output(gs)
        if o != (None, (), None, False):
            outputs[v] = NodeOutput(*o)
    return TraversalSet(tuple(derive_traversals(outputs))), report


# ----------------------------------------------------------------- reduction


def matching_via_token_drop(graph: UndirectedGraph, U: Iterable[int]) -> frozenset[tuple[int, int]]:
    """Maximal matching of a bipartite graph through a two-level game.

    Nodes of ``U`` sit on level 1 holding a token, the other side on level 0;
    every token that moves marks one matching edge.
    """
    return matching_via_token_drop_run(graph, U)[0]


def matching_instance(graph: UndirectedGraph, U: Iterable[int]) -> TokenDropInstance:
    """Two-level game: ``U`` on level 1 with a token each, the other side on level 0."""
    U = frozenset(U)
    level = {v: (1 if v in U else 0) for v in graph.nodes}
    edges = []
    for a, b in graph.edges:
        u, v = (a, b) if a in U else (b, a)
        if v in U or u not in U:
            raise ValueError(f"edge {a}-{b} does not cross the bipartition")
        edges.append((v, u))
    return TokenDropInstance(graph.nodes, tuple(edges), level, U)


def matching_via_token_drop_run(graph: UndirectedGraph, U: Iterable[int], round_cap: int | None = None):
    """Same as :func:`matching_via_token_drop`, also returning the run report."""
    tset, report = run_proposal(matching_instance(graph, U), round_cap)
    return frozenset(edge_key(t.path[0], t.path[1]) for t in tset.traversals if len(t.path) == 2), report
