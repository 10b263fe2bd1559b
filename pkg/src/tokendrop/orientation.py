"""Stable orientations: predicates and the phase-based distributed algorithm."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from ._phased import PhaseRecord, run_phased
from .engine import SimReport
from .errors import IncompleteOrientation, InvariantViolation, UnorientedEdge
from .graphs import UndirectedGraph, edge_key
from .token_dropping import proposal_round_bound

__all__ = [
    "OrientationState", "PhaseRecord", "is_happy", "badness", "is_stable",
    "orientation_period", "orientation_max_phases", "orientation_round_bound",
    "run_stable_orientation",
]


@dataclass(frozen=True)
class OrientationState:
    """Per-edge status over ``base``: ``toward[e]`` is an endpoint of e or None."""

    base: UndirectedGraph
    toward: Mapping[tuple[int, int], int | None] = field(default_factory=dict)

    def __post_init__(self):
        status = {e: None for e in self.base.edges}
        for e, t in dict(self.toward).items():
            key = edge_key(*e)
            if key not in status:
                raise InvariantViolation(f"{e} is not an edge of the base graph")
            if t is not None and t not in key:
                raise InvariantViolation(f"edge {key} cannot point to non-endpoint {t}")
            status[key] = t
        object.__setattr__(self, "toward", status)

    @classmethod
    def from_arcs(cls, base: UndirectedGraph, arcs) -> "OrientationState":
        """Build from ``(u, v)`` pairs meaning "oriented toward v"."""
        return cls(base, {edge_key(u, v): v for u, v in arcs})

    def indegree(self, v: int) -> int:
        return sum(1 for w in self.base.neighbors(v) if self.toward[edge_key(v, w)] == v)

    def loads(self) -> dict[int, int]:
        out = {v: 0 for v in self.base.nodes}
        for t in self.toward.values():
            if t is not None:
                out[t] += 1
        return out

    def arcs(self) -> list[tuple[int, int]]:
        """Oriented edges as ``(tail, head)`` sorted by edge."""
        return [(e[0] if t == e[1] else e[1], t) for e, t in sorted(self.toward.items()) if t is not None]

    @property
    def complete(self) -> bool:
        return all(t is not None for t in self.toward.values())

    def flipped(self, e) -> "OrientationState":
        key = edge_key(*e)
        t = self.toward[key]
        if t is None:
            raise UnorientedEdge(f"edge {key} is not oriented")
        status = dict(self.toward)
        status[key] = key[0] if t == key[1] else key[1]
        return OrientationState(self.base, status)


def _oriented(o: OrientationState, e) -> tuple[int, int]:
    key = edge_key(*e)
    if key not in o.toward:
        raise InvariantViolation(f"{e} is not an edge of the base graph")
    v = o.toward[key]
    if v is None:
        raise UnorientedEdge(f"edge {key} is not oriented")
    u = key[0] if v == key[1] else key[1]
    return u, v


def badness(o: OrientationState, e) -> int:
    u, v = _oriented(o, e)
    return o.indegree(v) - o.indegree(u)


def is_happy(o: OrientationState, e) -> bool:
    return badness(o, e) <= 1


def is_stable(o: OrientationState) -> bool:
    if not o.complete:
        missing = next(e for e, t in sorted(o.toward.items()) if t is None)
        raise IncompleteOrientation(f"edge {missing} is not oriented")
    load = o.loads()
    for e, v in o.toward.items():
        u = e[0] if v == e[1] else e[1]
        if load[v] > load[u] + 1:
            return False
    return True


def orientation_max_phases(max_degree: int) -> int:
    return max(2 * max_degree - 1, 0)


def orientation_round_bound(max_degree: int) -> int:
    return 4 * max_degree ** 4


def orientation_period(max_degree: int) -> int:
    """Fixed phase length: load exchange, acceptance, then a padded game.

    The game slot covers the proposal algorithm on height Δ-1 and degree Δ;
    the period is capped so that the worst-case phase count fits in 4Δ⁴.
    """
    d = max(max_degree, 1)
    full = proposal_round_bound(d - 1, d) + 2
    return min(full, orientation_round_bound(d) // orientation_max_phases(d))


def run_stable_orientation(g: UndirectedGraph, round_cap: int | None = None, *, trace: bool = False
                           ) -> tuple[OrientationState, list[PhaseRecord], SimReport]:
    """Orient every edge of ``g`` so that all edges are happy.

    Each edge is a two-server customer; a node accepting proposals prefers
    the neighbor with the smallest id.
    """
    delta = g.max_degree
    period = orientation_period(delta)
    members = {e: e for e in g.edges}

    def rank(s, e):
        return e[1] if e[0] == s else e[0]

    cap = round_cap if round_cap is not None else 2 * (orientation_max_phases(delta) + 1) * period
    head, report = run_phased(members, g.nodes, rank, period, cap, trace=trace)
    return OrientationState(g, head), list(report.phases), report
