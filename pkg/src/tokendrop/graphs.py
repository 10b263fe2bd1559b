"""Graph and instance types plus seed-deterministic generators.

All types are immutable once built.  Node ids are non-negative integers.
Generators take an explicit integer seed and never touch global random
state, so repeated calls with the same arguments give identical instances.
"""
from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import GenerationFailure, InvalidParameters, InvariantViolation

RANDOM_REGULAR_RETRIES = 100


def edge_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class UndirectedGraph:
    nodes: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    _adj: Mapping[int, tuple[int, ...]] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        nodes = tuple(sorted(self.nodes))
        if len(set(nodes)) != len(nodes):
            dup = next(v for i, v in enumerate(nodes[1:]) if v == nodes[i])
            raise InvariantViolation(f"duplicate node id {dup}")
        if any((not isinstance(v, int)) or v < 0 for v in nodes):
            raise InvariantViolation("node ids must be non-negative integers")
        known = set(nodes)
        edges = set()
        for u, v in self.edges:
            if u == v:
                raise InvariantViolation(f"self-loop at node {u}")
            if u not in known or v not in known:
                raise InvariantViolation(f"edge ({u}, {v}) has an endpoint outside the node set")
            key = edge_key(u, v)
            if key in edges:
                raise InvariantViolation(f"parallel edge {key}")
            edges.add(key)
        adj = {v: [] for v in nodes}
        for u, v in edges:
            adj[u].append(v)
            adj[v].append(u)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", tuple(sorted(edges)))
        object.__setattr__(self, "_adj", {v: tuple(sorted(ns)) for v, ns in adj.items()})

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int]], nodes: Iterable[int] = ()) -> "UndirectedGraph":
        edges = list(edges)
        all_nodes = set(nodes)
        for u, v in edges:
            all_nodes.update((u, v))
        return cls(tuple(all_nodes), tuple(edges))

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def max_degree(self) -> int:
        return max((len(ns) for ns in self._adj.values()), default=0)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj.get(u, ())

    def degree_audit(self) -> dict[int, int]:
        """Histogram degree -> number of nodes with that degree."""
        hist: dict[int, int] = defaultdict(int)
        for v in self.nodes:
            hist[self.degree(v)] += 1
        return dict(hist)


@dataclass(frozen=True)
class TokenDropInstance:
    """Layered DAG for the token dropping game.

    ``edges`` holds ``(child, parent)`` pairs; a parent sits exactly one
    level above its child.  Levels are kept for generators and validators;
    node programs never see them.
    """

    nodes: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    level: Mapping[int, int]
    tokens: frozenset[int]
    _parents: Mapping[int, tuple[int, ...]] = field(default=None, repr=False, compare=False)
    _children: Mapping[int, tuple[int, ...]] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        nodes = tuple(sorted(self.nodes))
        if len(set(nodes)) != len(nodes):
            dup = next(v for i, v in enumerate(nodes[1:]) if v == nodes[i])
            raise InvariantViolation(f"duplicate node id {dup}")
        known = set(nodes)
        level = dict(self.level)
        if set(level) != known:
            missing = sorted(known - set(level))
            extra = sorted(set(level) - known)
            raise InvariantViolation(f"level map mismatch: missing {missing}, unknown {extra}")
        for v, lv in level.items():
            if not isinstance(lv, int) or lv < 0:
                raise InvariantViolation(f"node {v} has invalid level {lv!r}")
        tokens = frozenset(self.tokens)
        if not tokens <= known:
            raise InvariantViolation(f"token on unknown node {min(tokens - known)}")
        parents = {v: [] for v in nodes}
        children = {v: [] for v in nodes}
        seen = set()
        for child, parent in self.edges:
            if child not in known or parent not in known:
                raise InvariantViolation(f"edge ({child}, {parent}) has an endpoint outside the node set")
            if level[parent] != level[child] + 1:
                raise InvariantViolation(
                    f"edge ({child}, {parent}) joins levels {level[child]} and {level[parent]}; "
                    "parent must be exactly one level above child"
                )
            if (child, parent) in seen:
                raise InvariantViolation(f"parallel edge ({child}, {parent})")
            seen.add((child, parent))
            parents[child].append(parent)
            children[parent].append(child)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", tuple(sorted(seen)))
        object.__setattr__(self, "level", level)
        object.__setattr__(self, "tokens", tokens)
        object.__setattr__(self, "_parents", {v: tuple(sorted(p)) for v, p in parents.items()})
        object.__setattr__(self, "_children", {v: tuple(sorted(c)) for v, c in children.items()})

    def parents(self, v: int) -> tuple[int, ...]:
        return self._parents[v]

    def children(self, v: int) -> tuple[int, ...]:
        return self._children[v]

    @property
    def height(self) -> int:
        return max(self.level.values(), default=0)

    @property
    def max_degree(self) -> int:
        return max((len(self._parents[v]) + len(self._children[v]) for v in self.nodes), default=0)

    def underlying_graph(self) -> UndirectedGraph:
        return UndirectedGraph(self.nodes, self.edges)


@dataclass(frozen=True)
class RegularTree:
    """Perfect d-regular tree of depth k rooted at ``root``.

    ``height[v]`` is the distance from v to its closest leaf.
    """

    graph: UndirectedGraph
    degree: int
    depth: int
    root: int
    height: Mapping[int, int]


@dataclass(frozen=True)
class Customer:
    id: int
    servers: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "servers", tuple(sorted(set(self.servers))))


@dataclass(frozen=True)
class AssignmentInstance:
    """Bipartite customers/servers instance; customers act as hyperedges."""

    servers: tuple[int, ...]
    customers: tuple[Customer, ...]
    _by_server: Mapping[int, tuple[int, ...]] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        servers = tuple(sorted(self.servers))
        if len(set(servers)) != len(servers):
            raise InvariantViolation("duplicate server id")
        customers = tuple(sorted(self.customers, key=lambda c: c.id))
        ids = [c.id for c in customers]
        if len(set(ids)) != len(ids):
            raise InvariantViolation("duplicate customer id")
        if set(ids) & set(servers):
            raise InvariantViolation(f"id {min(set(ids) & set(servers))} used for both a customer and a server")
        known = set(servers)
        by_server = {s: [] for s in servers}
        for c in customers:
            if not c.servers:
                raise InvariantViolation(f"customer {c.id} has no adjacent server")
            for s in c.servers:
                if s not in known:
                    raise InvariantViolation(f"customer {c.id} references unknown server {s}")
                by_server[s].append(c.id)
        object.__setattr__(self, "servers", servers)
        object.__setattr__(self, "customers", customers)
        object.__setattr__(self, "_by_server", {s: tuple(cs) for s, cs in by_server.items()})

    def customers_of(self, server: int) -> tuple[int, ...]:
        return self._by_server[server]

    def customer(self, cid: int) -> Customer:
        for c in self.customers:
            if c.id == cid:
                return c
        raise KeyError(cid)

    @property
    def C(self) -> int:
        return max((len(c.servers) for c in self.customers), default=0)

    @property
    def S(self) -> int:
        return max((len(cs) for cs in self._by_server.values()), default=0)

    def bipartite_graph(self) -> UndirectedGraph:
        edges = [(c.id, s) for c in self.customers for s in c.servers]
        return UndirectedGraph(tuple(self.servers) + tuple(c.id for c in self.customers), tuple(edges))

    @classmethod
    def from_bipartite(cls, graph: UndirectedGraph, customers: Iterable[int]) -> "AssignmentInstance":
        """View a bipartite graph as an assignment instance.

        ``customers`` is one side of the bipartition; isolated customers are
        dropped since they cannot be assigned anywhere.
        """
        cset = set(customers)
        servers = tuple(v for v in graph.nodes if v not in cset)
        recs = []
        for u in sorted(cset):
            nbrs = graph.neighbors(u)
            if any(w in cset for w in nbrs):
                raise InvariantViolation(f"edge between two customers at {u}")
            if nbrs:
                recs.append(Customer(u, nbrs))
        return cls(servers, tuple(recs))


# ---------------------------------------------------------------- generators


def gen_layered_dag(levels: int, max_degree: int, nodes_per_level: int, edge_density: float,
                    token_density: float, seed: int) -> TokenDropInstance:
    """Random layered token dropping instance with levels 0..``levels``.

    Node ids are assigned level by level.  ``edge_density`` is measured
    against the degree budget: between two adjacent levels the generator aims
    for ``edge_density * nodes_per_level * min(max_degree, nodes_per_level)``
    edges, the most a layer pair can hold when every node has at most
    ``max_degree`` parents and at most ``max_degree`` children.  Pairs are
    scanned in random order and skipped once an endpoint is full, so near
    density 1 the target can be missed by a few edges.  Exactly
    ``round(token_density * n)`` nodes get a token.
    """
    if levels < 1 or max_degree < 1 or nodes_per_level < 1:
        raise InvalidParameters("need levels >= 1, max_degree >= 1, nodes_per_level >= 1")
    if not (0.0 <= edge_density <= 1.0 and 0.0 <= token_density <= 1.0):
        raise InvalidParameters("densities must lie in [0, 1]")
    per_layer = round(edge_density * nodes_per_level * min(max_degree, nodes_per_level))
    rng = random.Random(seed)
    level = {}
    for lv in range(levels + 1):
        for i in range(nodes_per_level):
            level[lv * nodes_per_level + i] = lv
    edges = []
    for lv in range(levels):
        lo = [lv * nodes_per_level + i for i in range(nodes_per_level)]
        hi = [(lv + 1) * nodes_per_level + i for i in range(nodes_per_level)]
        cands = [(c, p) for c in lo for p in hi]
        rng.shuffle(cands)
        up = defaultdict(int)
        down = defaultdict(int)
        taken = 0
        for c, p in cands:
            if taken == per_layer:
                break
            if up[c] < max_degree and down[p] < max_degree:
                edges.append((c, p))
                up[c] += 1
                down[p] += 1
                taken += 1
    nodes = sorted(level)
    k = round(token_density * len(nodes))
    tokens = frozenset(rng.sample(nodes, k))
    return TokenDropInstance(tuple(nodes), tuple(edges), level, tokens)


def gen_perfect_regular_tree(degree: int, depth: int) -> RegularTree:
    if degree < 2 or depth < 1:
        raise InvalidParameters("need degree >= 2 and depth >= 1")
    edges = []
    dist = {0: 0}
    frontier = [0]
    nxt = 1
    for d in range(depth):
        new = []
        for v in frontier:
            fan = degree if v == 0 else degree - 1
            for _ in range(fan):
                edges.append((v, nxt))
                dist[nxt] = d + 1
                new.append(nxt)
                nxt += 1
        frontier = new
    graph = UndirectedGraph(tuple(dist), tuple(edges))
    height = {v: depth - dv for v, dv in dist.items()}
    return RegularTree(graph, degree, depth, 0, height)


def perfect_tree_size(degree: int, depth: int) -> int:
    """Closed-form node count of a perfect d-regular tree of depth k."""
    if degree == 2:
        return 2 * depth + 1
    return 1 + degree * ((degree - 1) ** depth - 1) // (degree - 2)


def _pair_stubs(n: int, d: int, rng: random.Random):
    # One pairing attempt: pair shuffled stubs, keep simple pairs, re-pair the rest.
    edges = set()
    stubs = [v for v in range(n) for _ in range(d)]
    while stubs:
        leftover = defaultdict(int)
        rng.shuffle(stubs)
        it = iter(stubs)
        for a, b in zip(it, it):
            key = edge_key(a, b)
            if a != b and key not in edges:
                edges.add(key)
            else:
                leftover[a] += 1
                leftover[b] += 1
        if not leftover:
            break
        pending = sorted(leftover)
        if not any(edge_key(a, b) not in edges
                   for i, a in enumerate(pending) for b in pending[i + 1:]):
            return None
        stubs = [v for v in pending for _ in range(leftover[v])]
    return edges


def gen_random_regular(n: int, d: int, seed: int) -> UndirectedGraph:
    """Simple d-regular graph on nodes 0..n-1 (configuration model with re-pairing)."""
    if n < 1 or d < 0 or d >= n or (n * d) % 2:
        raise InvalidParameters("need 0 <= d < n and n*d even")
    rng = random.Random(seed)
    for _ in range(RANDOM_REGULAR_RETRIES):
        edges = _pair_stubs(n, d, rng)
        if edges is not None:
            return UndirectedGraph(tuple(range(n)), tuple(edges))
    raise GenerationFailure(f"no simple {d}-regular pairing on {n} nodes after {RANDOM_REGULAR_RETRIES} attempts")


def gen_random_graph(n: int, max_degree: int, edge_prob: float, seed: int) -> UndirectedGraph:
    """G(n, p) restricted to maximum degree ``max_degree`` (edges scanned in random order)."""
    if n < 1 or max_degree < 0:
        raise InvalidParameters("need n >= 1 and max_degree >= 0")
    rng = random.Random(seed)
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    rng.shuffle(pairs)
    deg = [0] * n
    edges = []
    for u, v in pairs:
        if deg[u] < max_degree and deg[v] < max_degree and rng.random() < edge_prob:
            edges.append((u, v))
            deg[u] += 1
            deg[v] += 1
    return UndirectedGraph(tuple(range(n)), tuple(edges))


def gen_bipartite_assignment(num_customers: int, num_servers: int, C: int, S: int,
                             seed: int) -> AssignmentInstance:
    """Random assignment instance: servers are 0..m-1, customers m..m+k-1.

    Every customer gets between 1 and ``C`` servers and no server gets more
    than ``S`` customers.
    """
    if num_customers < 0 or num_servers < 1 or C < 1 or S < 1:
        raise InvalidParameters("need num_customers >= 0, num_servers >= 1, C >= 1, S >= 1")
    if num_customers > num_servers * S:
        raise InvalidParameters(
            f"{num_customers} customers cannot each get a server when {num_servers} servers hold at most {S}"
        )
    rng = random.Random(seed)
    servers = list(range(num_servers))
    cids = [num_servers + i for i in range(num_customers)]
    room = {s: S for s in servers}
    adj = {c: set() for c in cids}
    order = cids[:]
    rng.shuffle(order)
    for c in order:
        s = rng.choice([s for s in servers if room[s] > 0])
        adj[c].add(s)
        room[s] -= 1
    for c in cids:
        extra = rng.randint(1, C) - 1
        for _ in range(extra):
            free = [s for s in servers if room[s] > 0 and s not in adj[c]]
            if not free:
                break
            s = rng.choice(free)
            adj[c].add(s)
            room[s] -= 1
    return AssignmentInstance(tuple(servers), tuple(Customer(c, tuple(adj[c])) for c in cids))


def bipartition(graph: UndirectedGraph) -> tuple[frozenset[int], frozenset[int]] | None:
    """2-colouring with the smallest id of each component on the first side, or None."""
    side = {}
    for root in graph.nodes:
        if root in side:
            continue
        side[root] = 0
        stack = [root]
        while stack:
            v = stack.pop()
            for w in graph.neighbors(v):
                if w not in side:
                    side[w] = 1 - side[v]
                    stack.append(w)
                elif side[w] == side[v]:
                    return None
    return (frozenset(v for v, s in side.items() if s == 0),
            frozenset(v for v, s in side.items() if s == 1))
