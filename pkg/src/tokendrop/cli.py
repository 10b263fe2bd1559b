"""Command-line front end: gen | run | validate | bench | oracle."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bench
from .assignment import run_stable_assignment
from .errors import ParseError, RoundBudgetExceeded, TooLarge
from .graphs import gen_perfect_regular_tree
from .instance_io import format_solution, read_instance, read_solution, write_instance, write_solution
from .oracle import (
    brute_force_optimal_semi_matching, greedy_maximal_matching, semi_matching_cost, sequential_stable_orientation,
    sequential_token_drop,
)
from .orientation import OrientationState


def _range(text: str) -> list[int]:
    """``A..B`` (inclusive) or a single integer."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
            if lo > hi:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or A..B range, got {text!r}") from None


def _seeds(text: str) -> list[int]:
    """A count ``N`` (seeds 0..N-1) or an explicit ``A..B`` range."""
    if ".." in text:
        return _range(text)
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a seed count or A..B range, got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("seed count must be positive")
    return list(range(n))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tokendrop", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    algo = dict(choices=bench.ALGORITHMS, required=True, help="algorithm name")

    g = sub.add_parser("gen", help="write a random instance file")
    g.add_argument("--algo", **algo)
    g.add_argument("--out", required=True)
    g.add_argument("--n", type=int, default=30, help="nodes (graphs, layered games) or customers")
    g.add_argument("--delta", type=int, default=3)
    g.add_argument("--levels", type=int, default=2)
    g.add_argument("--c-deg", type=int, default=2)
    g.add_argument("--s-deg", type=int, default=4)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--family", choices=("regular", "random", "tree"), help="graph family for stable-orient")
    g.add_argument("--depth", type=int, default=3, help="tree depth for --family tree")

    r = sub.add_parser("run", help="run an algorithm, validate, write the solution")
    r.add_argument("--algo", **algo)
    r.add_argument("--in", dest="inp", required=True)
    r.add_argument("--out", help="solution file (default: stdout only gets the report)")
    r.add_argument("--cap-multiplier", type=float, help="round cap as a multiple of the bound")
    r.add_argument("--trace", action="store_true", help="print one line per round to stderr")

    v = sub.add_parser("validate", help="check a solution file against an instance")
    v.add_argument("--algo", **algo)
    v.add_argument("--in", dest="inp", required=True)
    v.add_argument("--sol", required=True)

    b = sub.add_parser("bench", help="sweep a parameter grid and emit CSV rows")
    b.add_argument("--algo", **algo)
    b.add_argument("--n", type=int, default=50)
    b.add_argument("--delta", type=_range, default=[3])
    b.add_argument("--levels", type=_range, default=[2])
    b.add_argument("--c-deg", type=_range, default=[2])
    b.add_argument("--s-deg", type=_range, default=[4])
    b.add_argument("--seeds", type=_seeds, default=[0], help="count N or range A..B")
    b.add_argument("--seed", type=int, help="single seed (overrides --seeds)")
    b.add_argument("--cap-multiplier", type=float)
    b.add_argument("--bound-c", type=int, help="leading constant for the quartic bounds (default 4)")
    b.add_argument("--csv", help="output path (default stdout)")
    b.add_argument("--jobs", type=int, default=1)

    o = sub.add_parser("oracle", help="run a centralized baseline")
    o.add_argument("--algo", **algo)
    o.add_argument("--in", dest="inp", required=True)
    o.add_argument("--out")
    return p


def _fail(msg: str, code: int = 1) -> int:
    print(msg, file=sys.stderr)
    return code


def _load(path: str, algo: str):
    inst = read_instance(path)
    want = bench.instance_kind(algo)
    got = type(inst).__name__
    expected = {"tokendrop": "TokenDropInstance", "graph": "UndirectedGraph", "assignment": "AssignmentInstance"}
    if expected[want] != got:
        raise ParseError(f"algorithm {algo} needs a '{want}' instance")
    return inst


def cmd_gen(a) -> int:
    if a.family == "tree":
        inst = gen_perfect_regular_tree(a.delta, a.depth).graph
    else:
        inst = bench.generate(a.algo, n=a.n, delta=a.delta, levels=a.levels, c_deg=a.c_deg, s_deg=a.s_deg,
                              seed=a.seed, family=a.family)
    write_instance(inst, a.out)
    return 0


def cmd_run(a) -> int:
    inst = _load(a.inp, a.algo)
    cap = None
    if a.cap_multiplier:
        params = bench.instance_params(a.algo, inst)
        bound = bench.round_bound(a.algo, **{k: params[k] for k in ("delta", "levels", "c_deg", "s_deg")})
        cap = max(1, int(a.cap_multiplier * bound))
    try:
        res = bench.run_algorithm(a.algo, inst, cap, trace=a.trace)
    except RoundBudgetExceeded as exc:
        return _fail(f"round budget exceeded: {exc}")
    if a.trace:
        for line in res.report.trace:
            print(line, file=sys.stderr)
    if a.out:
        write_solution(a.out, res.kind, res.rows)
    verdict = bench.check_solution(a.algo, inst, res.rows)
    sys.stdout.write(res.report.to_keyvalue())
    print(f"valid {'true' if verdict.ok else 'false'}")
    if not verdict.ok:
        return _fail(f"invalid output: {verdict.message}")
    return 0


SOLUTION_KIND = {
    "token-drop": "traversal", "token-drop-3": "traversal", "stable-orient": "orient",
    "stable-assign": "assign", "bounded-2": "assign", "reduce-matching-td": "match", "reduce-matching-2b": "match",
}


def cmd_validate(a) -> int:
    inst = _load(a.inp, a.algo)
    rows = read_solution(a.sol, SOLUTION_KIND[a.algo])
    verdict = bench.check_solution(a.algo, inst, rows)
    if verdict.ok:
        print("valid")
        return 0
    return _fail(f"invalid: {verdict.message}")


def cmd_bench(a) -> int:
    seeds = [a.seed] if a.seed is not None else a.seeds
    constants = {"orient": a.bound_c, "assign": a.bound_c} if a.bound_c else None
    rows = bench.sweep(a.algo, n=a.n, deltas=a.delta, levels=a.levels, c_degs=a.c_deg, s_degs=a.s_deg,
                       seeds=seeds, cap_multiplier=a.cap_multiplier, constants=constants, jobs=a.jobs)
    text = bench.rows_to_csv(rows)
    if a.csv:
        Path(a.csv).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    bad = [r for r in rows if not r.valid or r.ratio > 1]
    if bad:
        r = bad[0]
        return _fail(f"{len(bad)} row(s) failed; first: seed {r.seed} rounds {r.rounds} bound {r.bound} "
                     f"valid {r.valid}")
    return 0


def cmd_oracle(a) -> int:
    inst = _load(a.inp, a.algo)
    if a.algo in ("token-drop", "token-drop-3"):
        kind, rows = "traversal", [t.path for t in sequential_token_drop(inst).traversals]
    elif a.algo == "stable-orient":
        start = OrientationState(inst, {e: e[1] for e in inst.edges})
        log = []
        o = sequential_stable_orientation(inst, start, log)
        kind, rows = "orient", o.arcs()
        print(f"flips {len(log[0].flips)}")
    elif a.algo in ("stable-assign", "bounded-2"):
        try:
            assignment, profile = brute_force_optimal_semi_matching(inst)
        except TooLarge as exc:
            return _fail(str(exc))
        kind, rows = "assign", sorted(assignment.items())
        print(f"optimal_cost {profile.cost}")
        if a.algo == "stable-assign":
            h, _ = run_stable_assignment(inst)
            print(f"stable_cost {semi_matching_cost(h)}")
    else:
        g = inst.bipartite_graph()
        U = {c.id for c in inst.customers}
        kind, rows = "match", sorted((a_, b_) if a_ in U else (b_, a_) for a_, b_ in greedy_maximal_matching(g))
    if a.out:
        write_solution(a.out, kind, rows)
    else:
        sys.stdout.write(format_solution(kind, rows))
    # optimal semi-matchings are stable, so every baseline passes the same checks
    verdict = bench.check_solution(a.algo, inst, rows)
    return 0 if verdict.ok else _fail(f"invalid: {verdict.message}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"gen": cmd_gen, "run": cmd_run, "validate": cmd_validate, "bench": cmd_bench, "oracle": cmd_oracle}
    try:
        return handlers[args.command](args)
    except (ParseError, ValueError, OSError) as exc:
        return _fail(f"error: {exc}", 2)


if __name__ == "__main__":
    sys.exit(main())
