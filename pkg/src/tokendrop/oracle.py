"""Centralized baselines and brute-force references."""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from .assignment import HyperOrientation
from .errors import IncompleteOrientation, NotAMatching, TooLarge
from .graphs import AssignmentInstance, TokenDropInstance, UndirectedGraph, edge_key
from .orientation import OrientationState, is_stable
from .token_dropping import Traversal, TraversalSet

ENUMERATION_EDGE_LIMIT = 24
SEMI_MATCHING_LIMIT = 10 ** 7


def f(x: int) -> int:
    """Cost of a server with load x: 1 + 2 + ... + x."""
    return x * (x + 1) // 2


@dataclass(frozen=True)
class CostProfile:
    loads: tuple[int, ...]
    cost: int

    @classmethod
    def of(cls, loads: Iterable[int]) -> "CostProfile":
        ls = tuple(sorted(loads, reverse=True))
        return cls(ls, sum(f(x) for x in ls))

    def check(self) -> bool:
        return self.cost == sum(f(x) for x in self.loads)


def semi_matching_cost(h: HyperOrientation) -> int:
    return CostProfile.of(h.loads().values()).cost


def squared_potential(o: OrientationState) -> int:
    return sum(x * x for x in o.loads().values())


# ----------------------------------------------------------- orientations


@dataclass(frozen=True)
class FlipLog:
    """Sequence of flipped edges and the potential before each flip plus the final one."""

    flips: tuple[tuple[int, int], ...]
    potentials: tuple[int, ...]


def sequential_stable_orientation(g: UndirectedGraph, initial: OrientationState,
                                  log: list | None = None) -> OrientationState:
    """Flip the smallest unhappy edge until none is left.

    Each flip must lower the sum of squared indegrees; a violation raises
    AssertionError.  ``log``, if given, receives one :class:`FlipLog`.
    """
    if not initial.complete:
        raise IncompleteOrientation("initial orientation must orient every edge")
    status = dict(initial.toward)
    load = initial.loads()
    pot = sum(x * x for x in load.values())
    flips, pots = [], [pot]
    while True:
        target = None
        for e in g.edges:
            v = status[e]
            u = e[0] if v == e[1] else e[1]
            if load[v] > load[u] + 1:
                target = (e, u, v)
                break
        if target is None:
            break
        e, u, v = target
        status[e] = u
        load[v] -= 1
        load[u] += 1
        new = sum(x * x for x in load.values())
        assert new < pot, f"potential did not drop on flipping {e}: {pot} -> {new}"
        pot = new
        flips.append(e)
        pots.append(pot)
    if log is not None:
        log.append(FlipLog(tuple(flips), tuple(pots)))
    return OrientationState(g, status)


def enumerate_stable_orientations(g: UndirectedGraph) -> list[OrientationState]:
    m = len(g.edges)
    if m > ENUMERATION_EDGE_LIMIT:
        raise TooLarge(f"{m} edges exceed the enumeration limit of {ENUMERATION_EDGE_LIMIT}")
    out = []
    for bits in itertools.product((0, 1), repeat=m):
        o = OrientationState(g, {e: e[b] for e, b in zip(g.edges, bits)})
        if is_stable(o):
            out.append(o)
    return out


def stable_orientation_count(g: UndirectedGraph) -> int:
    """Count stable orientations without materializing them (small graphs)."""
    m = len(g.edges)
    if m > ENUMERATION_EDGE_LIMIT:
        raise TooLarge(f"{m} edges exceed the enumeration limit of {ENUMERATION_EDGE_LIMIT}")
    edges = g.edges
    count = 0
    for bits in itertools.product((0, 1), repeat=m):
        load = Counter(e[b] for e, b in zip(edges, bits))
        if all(load[e[b]] <= load[e[1 - b]] + 1 for e, b in zip(edges, bits)):
            count += 1
    return count


# ------------------------------------------------------------ token game


def sequential_token_drop(instance: TokenDropInstance) -> TraversalSet:
    """Move the smallest-id movable token to its smallest free child, repeatedly."""
    at = {v: v for v in instance.tokens}      # current position -> origin
    paths = {v: [v] for v in instance.tokens}
    used = set()
    while True:
        move = None
        for v in sorted(at):
            for c in instance.children(v):
                if (c, v) not in used and c not in at:
                    move = (v, c)
                    break
            if move:
                break
        if move is None:
            break
        v, c = move
        used.add((c, v))
        origin = at.pop(v)
        at[c] = origin
        paths[origin].append(c)
    return TraversalSet(tuple(
        Traversal(tuple(p), tuple((p[i + 1], p[i]) for i in range(len(p) - 1))) for p in paths.values()
    ))


def is_stuck(instance: TokenDropInstance, destinations: Iterable[int], used_edges: Iterable) -> bool:
    """No token can move: every child edge of an occupied node is used or leads to a token."""
    occ = set(destinations)
    used = set(used_edges)
    return all((c, v) in used or c in occ for v in occ for c in instance.children(v))


# ------------------------------------------------------------ semi-matching


def brute_force_optimal_semi_matching(instance: AssignmentInstance) -> tuple[dict[int, int], CostProfile]:
    sizes = [len(c.servers) for c in instance.customers]
    if math.prod(sizes) > SEMI_MATCHING_LIMIT:
        raise TooLarge(f"{math.prod(sizes)} assignments exceed the limit of {SEMI_MATCHING_LIMIT}")
    ids = [c.id for c in instance.customers]
    best = None
    best_cost = None
    for choice in itertools.product(*(c.servers for c in instance.customers)):
        load = Counter(choice)
        cost = sum(f(x) for x in load.values())
        if best_cost is None or cost < best_cost:
            best, best_cost = choice, cost
    assignment = dict(zip(ids, best or ()))
    loads = Counter(assignment.values())
    return assignment, CostProfile.of(loads.get(s, 0) for s in instance.servers)


# ---------------------------------------------------------------- matching


def maximality_check(matching: Iterable[tuple[int, int]], g: UndirectedGraph) -> bool:
    """True iff ``matching`` is a maximal matching of ``g``.

    Raises :class:`NotAMatching` naming a node covered twice or a non-edge.
    """
    covered = {}
    for u, v in matching:
        if not g.has_edge(u, v):
            raise NotAMatching(f"{edge_key(u, v)} is not an edge", witness=edge_key(u, v))
        for x in (u, v):
            if x in covered:
                raise NotAMatching(f"node {x} is matched twice", witness=x)
            covered[x] = edge_key(u, v)
    return all(u in covered or v in covered for u, v in g.edges)


def greedy_maximal_matching(g: UndirectedGraph) -> frozenset[tuple[int, int]]:
    """Scan edges in sorted order and keep each one whose endpoints are free."""
    covered = set()
    out = []
    for u, v in g.edges:
        if u not in covered and v not in covered:
            covered.update((u, v))
            out.append((u, v))
    return frozenset(out)
