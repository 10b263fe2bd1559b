import random

import pytest
from hypothesis import assume, given, settings, strategies as st

from conftest import assignment_corpus, layered_corpus
from tokendrop.assignment import (
    HyperEdge, HyperOrientation, HyperTokenInstance, assignment_max_phases, assignment_round_bound,
    hyper_badness, hyper_round_bound, is_k_bounded_happy, is_stable_assignment, maximal_matching_via_two_bounded,
    run_hyper_token_drop, run_stable_assignment, run_two_bounded, two_bounded_iterations, unhappy_customers,
    validate_hyper_traversals,
)
from tokendrop.errors import InvariantViolation, UnassignedCustomer
from tokendrop.graphs import AssignmentInstance, Customer, UndirectedGraph, gen_bipartite_assignment, gen_random_graph
from tokendrop.oracle import maximality_check
from tokendrop.orientation import OrientationState, badness, is_stable
from tokendrop.token_dropping import run_proposal, validate_traversals


def _inst(servers, customers):
    return AssignmentInstance(tuple(servers), tuple(Customer(c, tuple(ss)) for c, ss in customers.items()))


def _edge_customers(g: UndirectedGraph):
    base = max(g.nodes, default=-1) + 1
    return _inst(g.nodes, {base + i: e for i, e in enumerate(g.edges)}), base


assignments = st.builds(
    lambda k, m, C, S, seed: gen_bipartite_assignment(min(k, m * S), m, C, S, seed),
    st.integers(1, 30), st.integers(1, 10), st.integers(1, 5), st.integers(1, 8), st.integers(0, 10 ** 6),
)


# ------------------------------------------------------------------ badness


def test_hyper_badness_examples():
    # servers 0..3; customer 10 on {0, 1, 2} headed at 0
    inst = _inst((0, 1, 2, 3), {10: (0, 1, 2), 11: (0,), 12: (1,), 13: (2,), 14: (2,), 15: (2, 3)})
    h = HyperOrientation(inst, {10: 0, 11: 0, 12: 1, 13: 2, 14: 2, 15: 2})
    assert h.loads() == {0: 2, 1: 1, 2: 3, 3: 0}
    assert hyper_badness(h, 10) == 1
    assert hyper_badness(h, 11) == 0


def test_hyper_badness_equal_loads():
    inst = _inst((0, 1), {5: (0, 1), 6: (1,)})
    h = HyperOrientation(inst, {5: 0, 6: 1})
    assert hyper_badness(h, 5) == 0


def test_hyper_badness_unassigned():
    inst = _inst((0, 1), {5: (0, 1)})
    with pytest.raises(UnassignedCustomer):
        hyper_badness(HyperOrientation(inst, {}), 5)
    with pytest.raises(InvariantViolation):
        HyperOrientation(inst, {5: 3})


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 15), st.integers(1, 5), st.integers(0, 10 ** 6))
def test_rank_two_badness_is_edge_badness(n, d, seed):
    g = gen_random_graph(n, d, 0.6, seed)
    assume(g.edges)
    rng = random.Random(seed)
    arcs = [(u, v) if rng.random() < 0.5 else (v, u) for u, v in g.edges]
    o = OrientationState.from_arcs(g, arcs)
    inst, base = _edge_customers(g)
    h = HyperOrientation(inst, {base + i: o.toward[e] for i, e in enumerate(g.edges)})
    for i, e in enumerate(g.edges):
        assert hyper_badness(h, base + i) == badness(o, e)


# ---------------------------------------------------------- hypergraph game


def test_single_hyperedge():
    inst = HyperTokenInstance((1, 2, 3), {1: 1, 2: 0, 3: 0}, (HyperEdge(0, 1, (1, 2, 3)),), frozenset({1}))
    out, _ = run_hyper_token_drop(inst)
    assert len(out.traversals) == 1
    t = out.traversals[0]
    assert t.path in ((1, 2), (1, 3)) and t.via == (0,)
    assert validate_hyper_traversals(inst, out)


def test_hyper_no_tokens():
    inst = HyperTokenInstance((1, 2, 3), {1: 1, 2: 0, 3: 0}, (HyperEdge(0, 1, (1, 2, 3)),), frozenset())
    out, _ = run_hyper_token_drop(inst)
    assert out.traversals == ()


def test_hyper_instance_level_rule():
    with pytest.raises(InvariantViolation):
        HyperTokenInstance((1, 2, 3), {1: 2, 2: 0, 3: 1}, (HyperEdge(0, 1, (1, 2, 3)),), frozenset())


def test_hyper_validator_rejects_reuse():
    inst = HyperTokenInstance((1, 2, 3), {1: 1, 2: 0, 3: 0}, (HyperEdge(0, 1, (1, 2, 3)),), frozenset({1}))
    from tokendrop.token_dropping import Traversal, TraversalSet
    parked = TraversalSet((Traversal((1,)),))
    assert validate_hyper_traversals(inst, parked).rule == "rule3"


def test_rank_two_cross_check():
    for inst in layered_corpus(150, seed=41):
        a, _ = run_proposal(inst)
        hyper = HyperTokenInstance.from_token_instance(inst)
        b, _ = run_hyper_token_drop(hyper)
        assert bool(validate_traversals(inst, a)) == bool(validate_hyper_traversals(hyper, b)) is True
        assert [t.path for t in a.traversals] == [t.path for t in b.traversals]


@st.composite
def hyper_games(draw):
    levels = draw(st.integers(1, 4))
    per = draw(st.integers(1, 6))
    servers = list(range((levels + 1) * per))
    level = {s: s // per for s in servers}
    rng = random.Random(draw(st.integers(0, 10 ** 6)))
    edges = []
    for key in range(draw(st.integers(0, 25))):
        head = rng.choice([s for s in servers if level[s] >= 1])
        low = [s for s in servers if level[s] == level[head] - 1]
        same_or_lower = [s for s in servers if level[s] >= level[head] - 1 and s != head]
        members = {head, rng.choice(low)}
        members.update(rng.sample(same_or_lower, min(len(same_or_lower), rng.randint(0, 2))))
        edges.append(HyperEdge(key, head, tuple(members)))
    tokens = frozenset(s for s in servers if rng.random() < 0.5)
    return HyperTokenInstance(tuple(servers), level, tuple(edges), tokens)


@settings(max_examples=120, deadline=None)
@given(hyper_games())
def test_hyper_game_valid_and_bounded(inst):
    out, rep = run_hyper_token_drop(inst)
    assert validate_hyper_traversals(inst, out)
    assert rep.rounds <= hyper_round_bound(inst.height, inst.max_degree)


# ------------------------------------------------------- stable assignment


def test_two_by_two_balanced():
    inst = _inst((0, 1), {2: (0, 1), 3: (0, 1)})
    h, _ = run_stable_assignment(inst)
    assert h.loads() == {0: 1, 1: 1}


def test_single_server_takes_all():
    inst = _inst((0,), {c: (0,) for c in range(1, 6)})
    h, _ = run_stable_assignment(inst)
    assert h.loads() == {0: 5} and is_stable_assignment(h)


def test_degree_two_customers_match_orientation_view():
    for seed in range(15):
        g = gen_random_graph(25, 5, 0.4, seed)
        inst, base = _edge_customers(g)
        h, _ = run_stable_assignment(inst)
        o = OrientationState(g, {g.edges[c - base]: s for c, s in h.head.items()})
        assert is_stable(o)


@settings(max_examples=80, deadline=None)
@given(assignments)
def test_stable_assignment_property(inst):
    h, rep = run_stable_assignment(inst)
    assert h.complete and is_stable_assignment(h)
    assert len(rep.phases) <= 2 * inst.C * inst.S
    assert len(rep.phases) <= assignment_max_phases(inst.C, inst.S)
    assert rep.rounds <= assignment_round_bound(inst.C, inst.S)
    for p in rep.phases:
        assert p.max_badness_start <= 1 and p.max_badness_after <= 1
        for s, before in p.loads_before.items():
            assert p.loads_after[s] - before in (0, 1)


# -------------------------------------------------------------- k-bounded


def test_k_bounded_examples():
    inst = _inst((0, 1, 2), {3: (0, 1), 4: (0,), 5: (1, 2)})
    h = HyperOrientation(inst, {3: 0, 4: 0, 5: 1})
    assert is_k_bounded_happy(h, 3, 2)
    h2 = HyperOrientation(inst, {3: 0, 4: 0, 5: 2})
    assert not is_k_bounded_happy(h2, 3, 2)
    assert is_k_bounded_happy(h2, 5, 2)


def test_k_bounded_load_one_head_is_happy():
    inst = _inst((0, 1), {2: (0, 1)})
    assert is_k_bounded_happy(HyperOrientation(inst, {2: 0}), 2, 2)


def test_k_bounded_heavy_head_without_empty_neighbor():
    customers = {10 + i: (0,) for i in range(4)}
    customers[20] = (0, 1)
    customers[21] = (1,)
    inst = _inst((0, 1), customers)
    h = HyperOrientation(inst, {c: ss[0] for c, ss in customers.items()})
    assert h.load(0) == 5 and h.load(1) == 1
    assert is_k_bounded_happy(h, 20, 2)


def test_k_must_be_at_least_two():
    inst = _inst((0, 1), {2: (0, 1)})
    with pytest.raises(ValueError):
        is_k_bounded_happy(HyperOrientation(inst, {2: 0}), 2, 1)


@settings(max_examples=100, deadline=None)
@given(assignments, st.integers(2, 6), st.integers(0, 10 ** 6))
def test_k_bounded_nesting(inst, k, seed):
    rng = random.Random(seed)
    h = HyperOrientation(inst, {c.id: rng.choice(c.servers) for c in inst.customers})
    loads = h.loads()
    for c in inst.customers:
        if is_k_bounded_happy(h, c.id, k, loads):
            assert is_k_bounded_happy(h, c.id, 2, loads)


# --------------------------------------------------------------- 2-bounded


def test_two_bounded_fixpoint():
    inst = _inst((0, 1), {2: (0, 1), 3: (1,)})
    h, rep = run_two_bounded(inst)
    assert two_bounded_iterations(rep) == 0 and not unhappy_customers(h)


def test_two_bounded_one_redirect():
    # both customers start on server 0; customer 3 can use the empty server 1
    inst = _inst((0, 1), {2: (0,), 3: (0, 1)})
    h, rep = run_two_bounded(inst)
    assert h.loads() == {0: 1, 1: 1}
    assert two_bounded_iterations(rep) == 1
    assert rep.phases[1].redirected == frozenset({3})


@pytest.mark.parametrize("C", [1, 2, 4, 7])
def test_two_bounded_star(C):
    # customers share server 0 and each has a private alternative
    inst = _inst(range(C + 1), {100 + i: (0, i + 1) for i in range(C)})
    h, rep = run_two_bounded(inst)
    assert not unhappy_customers(h)
    assert two_bounded_iterations(rep) <= C


def _zero_neighbors(inst, record, cid):
    return sum(1 for s in inst.customer(cid).servers if record.loads[s] == 0)


def test_two_bounded_traces():
    for inst in assignment_corpus(150, seed=17):
        h, rep = run_two_bounded(inst)
        assert not unhappy_customers(h)
        assert two_bounded_iterations(rep) <= inst.C + 2
        for prev, cur in zip(rep.phases, rep.phases[1:]):
            hp, hc = HyperOrientation(inst, prev.head), HyperOrientation(inst, cur.head)
            assert all(cur.loads[s] >= 1 for s in inst.servers if prev.loads[s] >= 1)
            before, after = unhappy_customers(hp), unhappy_customers(hc)
            assert after <= before
            for c in after:
                assert _zero_neighbors(inst, cur, c) < _zero_neighbors(inst, prev, c)


# ---------------------------------------------------------------- reduction


def test_two_bounded_matching_single_edge():
    g = UndirectedGraph.from_edges([(0, 1)])
    assert maximal_matching_via_two_bounded(g, {0}) == frozenset({(0, 1)})


def test_two_bounded_matching_k22():
    g = UndirectedGraph.from_edges([(0, 2), (0, 3), (1, 2), (1, 3)])
    m = maximal_matching_via_two_bounded(g, {0, 1})
    assert len(m) == 2 and maximality_check(m, g)


def test_two_bounded_matching_star():
    g = UndirectedGraph.from_edges([(0, 1), (0, 2), (0, 3)])
    m = maximal_matching_via_two_bounded(g, {1, 2, 3})
    assert m == frozenset({(0, 1)})
    assert maximality_check(m, g)
