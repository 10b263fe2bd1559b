import gzip
import math
import random
from pathlib import Path

import pytest

from tokendrop.graphs import (
    AssignmentInstance, Customer, TokenDropInstance, UndirectedGraph, gen_bipartite_assignment, gen_layered_dag,
    gen_random_graph, gen_random_regular,
)

DATA = Path(__file__).parent / "data"

# criterion number -> (title, outcome)
_ACCEPTANCE: dict[int, list] = {}


def connected_graphs(max_nodes=8):
    """Every connected graph on 1..max_nodes nodes, one per isomorphism class."""
    import networkx as nx

    out = []
    with gzip.open(DATA / "connected_upto8.g6.gz", "rb") as fh:
        for line in fh.read().split():
            h = nx.from_graph6_bytes(line)
            if h.number_of_nodes() <= max_nodes:
                out.append(UndirectedGraph(tuple(h.nodes), tuple(h.edges)))
    return out


def chain_fixture():
    # a (level 2, token) -> b (level 1) -> c (level 0)
    return TokenDropInstance((0, 1, 2), ((1, 0), (2, 1)), {0: 2, 1: 1, 2: 0}, frozenset({0}))


def hand_token_fixtures():
    """Small instances with known answers."""
    return [
        TokenDropInstance((0,), (), {0: 1}, frozenset({0})),
        TokenDropInstance((0, 1), ((1, 0),), {0: 1, 1: 0}, frozenset({0})),
        chain_fixture(),
        # two tokens competing for one child
        TokenDropInstance((0, 1, 2), ((2, 0), (2, 1)), {0: 1, 1: 1, 2: 0}, frozenset({0, 1})),
        # diamond: two paths from the top token
        TokenDropInstance((0, 1, 2, 3), ((1, 0), (2, 0), (3, 1), (3, 2)), {0: 2, 1: 1, 2: 1, 3: 0},
                          frozenset({0, 1})),
        # every node full: nothing moves
        TokenDropInstance((0, 1, 2), ((1, 0), (2, 1)), {0: 2, 1: 1, 2: 0}, frozenset({0, 1, 2})),
        # complete bipartite 3x3 between levels 1 and 0
        TokenDropInstance(tuple(range(6)), tuple((c, p) for p in range(3) for c in range(3, 6)),
                          {**{p: 1 for p in range(3)}, **{c: 0 for c in range(3, 6)}}, frozenset(range(3))),
        # no tokens at all
        TokenDropInstance((0, 1), ((1, 0),), {0: 1, 1: 0}, frozenset()),
    ]


def layered_corpus(count=520, seed=2024):
    """Random layered games with L <= 8, total degree <= 8 and at most 400 nodes."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        L = rng.randint(1, 8)
        cap = rng.randint(1, 4)
        npl = rng.randint(1, 400 // (L + 1))
        density = rng.random()
        inst = gen_layered_dag(L, cap, npl, density, rng.random(), rng.randrange(10 ** 6))
        out.append(inst)
    return out


def three_level_corpus(count=200, seed=77):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        cap = rng.randint(1, 5)
        npl = rng.randint(1, 60)
        density = rng.random()
        levels = rng.choice((1, 2))
        out.append(gen_layered_dag(levels, cap, npl, density, rng.random(), rng.randrange(10 ** 6)))
    return out


def random_graph_corpus(count=210, seed=99):
    """Random graphs with max degree <= 10 and at most 200 nodes."""
    rng = random.Random(seed)
    out = []
    for i in range(count):
        n = rng.randint(2, 200)
        d = rng.randint(1, 10)
        if i % 3 == 0 and d < n and (n * d) % 2 == 0:
            out.append(gen_random_regular(n, d, rng.randrange(10 ** 6)))
        else:
            out.append(gen_random_graph(n, d, rng.uniform(0.05, 1.0), rng.randrange(10 ** 6)))
    return out


def regular_corpus():
    out = []
    for d in range(1, 9):
        for n in (d + 1, d + 3, 2 * d + 2, 30, 61):
            if d < n and (n * d) % 2 == 0:
                out.append((d, gen_random_regular(n, d, 1000 * d + n)))
    return out


def suboptimal_path_fixture():
    # x -> 0 and z -> 0 and y -> 1 is stable with loads 2,1,0; the optimum is 1,1,1
    return AssignmentInstance((0, 1, 2), (Customer(3, (0,)), Customer(4, (0, 1)), Customer(5, (1, 2))))


def small_assignment_corpus(count=150, seed=5, max_customers=12):
    """Small assignment instances with at least two servers, plus one known suboptimal fixture."""
    rng = random.Random(seed)
    out = [suboptimal_path_fixture()]
    while len(out) < count:
        k = rng.randint(2, max_customers)
        m = rng.randint(2, 6)
        C = rng.randint(2, 4)
        S = rng.randint(max(1, -(-k // m)), 12)
        inst = gen_bipartite_assignment(k, m, C, S, rng.randrange(10 ** 6))
        if math.prod(len(c.servers) for c in inst.customers) <= 200_000:
            out.append(inst)
    return out


def assignment_corpus(count=220, seed=11):
    """Assignment instances with C <= 8 and S <= 12."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        C = rng.randint(1, 8)
        S = rng.randint(1, 12)
        m = rng.randint(1, 25)
        k = rng.randint(1, m * S)
        out.append(gen_bipartite_assignment(k, m, C, S, rng.randrange(10 ** 6)))
    return out


# --------------------------------------------------------- acceptance summary


def record_criterion(number: int, title: str):
    _ACCEPTANCE[number] = [title, None]


def pytest_runtest_logreport(report):
    crit = getattr(report, "criterion", None)
    if crit is None:
        for key, value in report.user_properties:
            if key == "criterion":
                crit = value
    if crit is None or crit not in _ACCEPTANCE:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _ACCEPTANCE[crit][1] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        title, outcome = _ACCEPTANCE[num]
        verdict = "PASS" if outcome == "passed" else "FAIL" if outcome else "NOT RUN"
        terminalreporter.write_line(f"criterion {num:2d}: {verdict}  {title}")


@pytest.fixture
def criterion(record_property):
    """Tag the running test with its acceptance criterion number."""

    def tag(number: int, title: str):
        record_criterion(number, title)
        record_property("criterion", number)

    return tag
