"""Acceptance criteria, one test each; a summary line per criterion is printed at the end."""
import math
import os
import random
import subprocess
import sys
import time

from conftest import (
    assignment_corpus, connected_graphs, hand_token_fixtures, layered_corpus, random_graph_corpus,
    regular_corpus, small_assignment_corpus, three_level_corpus,
)
from tokendrop.assignment import (
    HyperOrientation, is_k_bounded_happy, maximal_matching_via_two_bounded, run_stable_assignment,
    run_two_bounded, two_bounded_iterations, unhappy_customers,
)
from tokendrop.graphs import UndirectedGraph, bipartition, gen_perfect_regular_tree, gen_random_graph
from tokendrop.oracle import (
    brute_force_optimal_semi_matching, maximality_check, semi_matching_cost, sequential_stable_orientation,
)
from tokendrop.orientation import OrientationState, is_stable, orientation_round_bound, run_stable_orientation
from tokendrop.token_dropping import (
    matching_via_token_drop, proposal_round_bound, run_proposal, run_three_level, three_level_round_bound,
    validate_traversals,
)


def _line(num, ok, detail):
    print(f"criterion {num}: {'PASS' if ok else 'FAIL'} ({detail})")


def test_criterion_01_token_dropping_validity(criterion):
    criterion(1, "proposal algorithm output is valid on 520 generated games plus hand fixtures, < 60 s")
    start = time.perf_counter()
    corpus = layered_corpus() + hand_token_fixtures()
    failures = []
    for i, inst in enumerate(corpus):
        assert inst.height <= 8 and inst.max_degree <= 8 and len(inst.nodes) <= 400
        tset, _ = run_proposal(inst)
        rep = validate_traversals(inst, tset)
        if not rep.ok:
            failures.append((i, rep.rule, rep.witness))
    elapsed = time.perf_counter() - start
    _line(1, not failures and elapsed < 60, f"{len(corpus)} instances, {len(failures)} failures, {elapsed:.1f} s")
    assert not failures, failures[:5]
    assert len(corpus) >= 500
    assert elapsed < 60


def test_criterion_02_round_bounds(criterion):
    criterion(2, "proposal rounds <= 2LΔ²+2L+4 and three-level rounds <= 2Δ+6 on every corpus instance")
    worst = 0.0
    over = []
    fixtures = hand_token_fixtures()
    for inst in layered_corpus() + fixtures:
        _, rep = run_proposal(inst)
        bound = proposal_round_bound(inst.height, inst.max_degree)
        worst = max(worst, rep.rounds / bound)
        if rep.rounds > bound:
            over.append(("proposal", inst.height, inst.max_degree, rep.rounds, bound))
    three = three_level_corpus() + [i for i in layered_corpus() + fixtures if i.height <= 2]
    worst3 = 0.0
    for inst in three:
        tset, rep = run_three_level(inst)
        assert validate_traversals(inst, tset).ok
        bound = three_level_round_bound(inst.max_degree)
        worst3 = max(worst3, rep.rounds / bound)
        if rep.rounds > bound:
            over.append(("three-level", inst.max_degree, rep.rounds, bound))
    _line(2, not over, f"worst ratio proposal {worst:.3f}, three-level {worst3:.3f}, {len(three)} three-level runs")
    assert not over, over[:5]


def test_criterion_03_stable_orientation(criterion):
    criterion(3, "stable orientation on all connected graphs <= 8 nodes and 210 random graphs")
    graphs = connected_graphs(8) + random_graph_corpus()
    problems = []
    worst = 0.0
    for g in graphs:
        o, phases, rep = run_stable_orientation(g)
        d = g.max_degree
        if not is_stable(o):
            problems.append(("unstable", g.edges[:5]))
        if len(phases) > 2 * d:
            problems.append(("phases", len(phases), d))
        if any(p.max_badness_after > 1 or p.max_badness_start > 1 for p in phases):
            problems.append(("badness", g.n, d))
        bound = orientation_round_bound(d)
        if rep.rounds > bound:
            problems.append(("rounds", rep.rounds, bound))
        if d:
            worst = max(worst, rep.rounds / bound)
    _line(3, not problems, f"{len(graphs)} graphs, worst round ratio {worst:.3f}")
    assert len([g for g in graphs if g.n == 8]) == 11117
    assert not problems, problems[:5]


def test_criterion_04_tree_invariant(criterion):
    criterion(4, "indegree(v) <= h(v)+1 on perfect d-regular trees, d in {3,4,5}, depth <= 5")
    checked = 0
    bad = []
    rng = random.Random(4)
    for d in (3, 4, 5):
        for k in range(1, 6):
            tree = gen_perfect_regular_tree(d, k)
            g = tree.graph
            outs = [run_stable_orientation(g)[0]]
            for _ in range(2):
                start = OrientationState(g, {e: rng.choice(e) for e in g.edges})
                outs.append(sequential_stable_orientation(g, start))
            for o in outs:
                assert is_stable(o)
                load = o.loads()
                for v in g.nodes:
                    checked += 1
                    if load[v] > tree.height[v] + 1:
                        bad.append((d, k, v, load[v], tree.height[v]))
    _line(4, not bad, f"{checked} node checks")
    assert not bad, bad[:5]


def test_criterion_05_heavy_node(criterion):
    criterion(5, "every produced full orientation of a d-regular graph has max indegree >= ceil(d/2)")
    rng = random.Random(5)
    bad = []
    count = 0
    for d, g in regular_corpus():
        outs = [run_stable_orientation(g)[0]]
        start = OrientationState(g, {e: rng.choice(e) for e in g.edges})
        outs.append(start)
        outs.append(sequential_stable_orientation(g, start))
        for o in outs:
            count += 1
            if max(o.loads().values()) < math.ceil(d / 2):
                bad.append((d, g.n))
    _line(5, not bad, f"{count} orientations")
    assert not bad


def test_criterion_06_two_approximation(criterion):
    criterion(6, "stable assignment cost <= 2 x brute-force optimum on >= 100 small instances, some ratio > 1")
    corpus = small_assignment_corpus()
    worst = 0.0
    above_one = 0
    violations = []
    for inst in corpus:
        assert len(inst.customers) <= 12
        h, _ = run_stable_assignment(inst)
        cost = semi_matching_cost(h)
        _, opt = brute_force_optimal_semi_matching(inst)
        ratio = cost / opt.cost if opt.cost else 1.0
        worst = max(worst, ratio)
        above_one += ratio > 1
        if cost > 2 * opt.cost:
            violations.append((cost, opt.cost))
    _line(6, not violations and above_one >= 1,
          f"{len(corpus)} instances, worst ratio {worst:.3f}, {above_one} with ratio > 1")
    assert len(corpus) >= 100
    assert not violations
    assert above_one >= 1


def test_criterion_07_two_bounded(criterion):
    criterion(7, "2-bounded algorithm: no unhappy customer within C+2 iterations, monotone traces")
    corpus = assignment_corpus()
    problems = []
    most = 0
    for inst in corpus:
        assert inst.C <= 8 and inst.S <= 12
        h, rep = run_two_bounded(inst)
        it = two_bounded_iterations(rep)
        most = max(most, it - inst.C)
        if unhappy_customers(h):
            problems.append(("unhappy", sorted(unhappy_customers(h))[:3]))
        if it > inst.C + 2:
            problems.append(("iterations", it, inst.C))
        snaps = [HyperOrientation(inst, r.head) for r in rep.phases]
        for prev, cur in zip(snaps, snaps[1:]):
            lp, lc = prev.loads(), cur.loads()
            if any(lp[s] >= 1 and lc[s] < 1 for s in inst.servers):
                problems.append(("load dropped to 0",))
            for c in inst.customers:
                if is_k_bounded_happy(prev, c.id, 2, lp) and not is_k_bounded_happy(cur, c.id, 2, lc):
                    problems.append(("happy became unhappy", c.id))
    _line(7, not problems, f"{len(corpus)} instances, max iterations - C = {most}")
    assert len(corpus) >= 200
    assert not problems, problems[:5]


def _bipartite_corpus():
    out = []
    for inst in assignment_corpus(80, seed=8):
        g = inst.bipartite_graph()
        out.append((g, frozenset(c.id for c in inst.customers)))
    for g in connected_graphs(7):
        sides = bipartition(g)
        if sides is not None:
            out.append((g, sides[0]))
    rng = random.Random(8)
    for _ in range(60):
        g = gen_random_graph(rng.randint(2, 80), rng.randint(1, 8), rng.random(), rng.randrange(10 ** 6))
        sides = bipartition(g)
        if sides is None:
            # keep only the edges across a random split
            left = frozenset(v for v in g.nodes if rng.random() < 0.5)
            g = UndirectedGraph(g.nodes, tuple(e for e in g.edges if (e[0] in left) != (e[1] in left)))
            sides = (left, frozenset(g.nodes) - left)
        out.append((g, sides[0]))
    return out


def test_criterion_08_reductions(criterion):
    criterion(8, "both matching reductions give maximal matchings on all bipartite corpus graphs")
    corpus = _bipartite_corpus()
    bad = []
    for g, U in corpus:
        m1 = matching_via_token_drop(g, U)
        if not maximality_check(m1, g):
            bad.append(("token-drop", g.n))
        m2 = maximal_matching_via_two_bounded(g, U)
        if not maximality_check(m2, g):
            bad.append(("two-bounded", g.n))
    _line(8, not bad, f"{len(corpus)} bipartite graphs")
    assert not bad, bad[:5]


def test_criterion_09_potential(criterion):
    criterion(9, "every flip of the sequential oracle lowers the sum of squared indegrees (>= 50 runs)")
    rng = random.Random(9)
    logs = []
    for i in range(60):
        g = gen_random_graph(rng.randint(2, 60), rng.randint(1, 9), rng.random(), i)
        start = OrientationState(g, {e: rng.choice(e) for e in g.edges})
        sequential_stable_orientation(g, start, logs)
    flips = sum(len(x.flips) for x in logs)
    ok = all(all(a > b for a, b in zip(x.potentials, x.potentials[1:])) for x in logs)
    _line(9, ok and len(logs) >= 50, f"{len(logs)} runs, {flips} flips")
    assert len(logs) >= 50 and flips > 0
    assert ok


def _cli(args, cwd, hashseed):
    env = dict(os.environ, PYTHONHASHSEED=str(hashseed))
    return subprocess.run([sys.executable, "-m", "tokendrop.cli", *args], cwd=cwd, env=env,
                          capture_output=True, check=True)


def test_criterion_10_determinism(criterion, tmp_path):
    criterion(10, "repeated end-to-end runs give byte-identical solution files and CSV rows")
    outputs = []
    for rep, seed in enumerate((0, 12345)):
        d = tmp_path / f"run{rep}"
        d.mkdir()
        files = {}
        for algo in ("token-drop", "token-drop-3", "stable-orient", "stable-assign", "bounded-2",
                     "reduce-matching-td", "reduce-matching-2b"):
            _cli(["gen", "--algo", algo, "--n", "40", "--seed", "7", "--out", "inst.txt"], d, seed)
            run = _cli(["run", "--algo", algo, "--in", "inst.txt", "--out", "sol.txt"], d, seed)
            files[algo] = ((d / "inst.txt").read_bytes(), (d / "sol.txt").read_bytes(), run.stdout)
        bench = _cli(["bench", "--algo", "stable-orient", "--delta", "2..4", "--n", "30", "--seeds", "2"], d, seed)
        bench2 = _cli(["bench", "--algo", "stable-assign", "--c-deg", "2..3", "--s-deg", "3", "--n", "20",
                       "--seeds", "2"], d, seed)
        outputs.append((files, bench.stdout, bench2.stdout))
    same = outputs[0] == outputs[1]
    _line(10, same, "7 algorithms end to end plus two sweeps, two hash seeds")
    assert same
