"""Algorithm registry, solution checking and parameter sweeps with bound comparison."""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Iterable

from .assignment import (
    HyperOrientation, hyper_badness, is_k_bounded_happy, matching_via_two_bounded_run,
    run_stable_assignment, run_two_bounded, two_bounded_iterations,
)
from .errors import InvariantViolation, NotAMatching, RoundBudgetExceeded
from .graphs import (
    AssignmentInstance, TokenDropInstance, UndirectedGraph, gen_bipartite_assignment, gen_layered_dag,
    gen_random_graph, gen_random_regular,
)
from .oracle import maximality_check
from .orientation import OrientationState, run_stable_orientation
from .token_dropping import (
    Traversal, TraversalSet, matching_via_token_drop_run, run_proposal, run_three_level, validate_traversals,
)

ALGORITHMS = (
    "token-drop", "token-drop-3", "stable-orient", "stable-assign", "bounded-2",
    "reduce-matching-td", "reduce-matching-2b",
)

# Leading constants of the round bounds; change here (or with --bound-c) to tighten.
BOUND_CONSTANTS = {"orient": 4, "assign": 4}

CSV_HEADER = ("algo", "n", "delta", "c_deg", "s_deg", "levels", "seed", "rounds", "bound", "ratio", "phases", "valid")


def round_bound(algo: str, *, delta: int = 0, levels: int = 0, c_deg: int = 0, s_deg: int = 0,
                constants: dict | None = None) -> int:
    k = dict(BOUND_CONSTANTS, **(constants or {}))
    if algo == "token-drop":
        return 2 * levels * delta ** 2 + 2 * levels + 4
    if algo == "token-drop-3":
        return 2 * delta + 6
    if algo == "stable-orient":
        return k["orient"] * delta ** 4
    if algo == "stable-assign":
        return k["assign"] * c_deg * s_deg ** 4
    if algo == "bounded-2":
        return 2 * (c_deg + 2) + 1
    if algo == "reduce-matching-td":
        return 2 * delta ** 2 + 6
    if algo == "reduce-matching-2b":
        return 2 * (c_deg + 2) + 1
    raise ValueError(f"unknown algorithm {algo!r}")


def instance_kind(algo: str) -> str:
    if algo in ("token-drop", "token-drop-3"):
        return "tokendrop"
    if algo == "stable-orient":
        return "graph"
    return "assignment"


# ---------------------------------------------------------------- checks


@dataclass(frozen=True)
class Verdict:
    ok: bool
    message: str = ""


def _traversal_set(rows) -> TraversalSet:
    return TraversalSet(tuple(Traversal(tuple(p), tuple((p[i + 1], p[i]) for i in range(len(p) - 1)))
                              for p in rows))


def _customers_side(inst: AssignmentInstance):
    g = inst.bipartite_graph()
    return g, frozenset(c.id for c in inst.customers)


def check_solution(algo: str, instance, rows) -> Verdict:
    """Validate solution records against an instance."""
    rows = [tuple(r) for r in rows]
    if algo in ("token-drop", "token-drop-3"):
        rep = validate_traversals(instance, _traversal_set(rows))
        return Verdict(rep.ok, "" if rep.ok else f"{rep.rule} violated at {rep.witness}: {rep.message}")
    if algo == "stable-orient":
        status = {}
        for u, v in rows:
            key = (min(u, v), max(u, v))
            if not instance.has_edge(u, v):
                return Verdict(False, f"orient {u} {v} is not an edge")
            if key in status:
                return Verdict(False, f"edge {u} {v} oriented twice")
            status[key] = v
        o = OrientationState(instance, status)
        missing = [e for e, t in sorted(o.toward.items()) if t is None]
        if missing:
            return Verdict(False, f"edge {missing[0][0]} {missing[0][1]} is not oriented")
        load = o.loads()
        for u, v in o.arcs():
            if load[v] > load[u] + 1:
                return Verdict(False, f"unhappy edge {u} {v}: indegree {load[v]} > {load[u]} + 1")
        return Verdict(True)
    if algo in ("stable-assign", "bounded-2"):
        head = {}
        for c, s in rows:
            if c in head:
                return Verdict(False, f"customer {c} assigned twice")
            head[c] = s
        try:
            h = HyperOrientation(instance, head)
        except InvariantViolation as exc:
            return Verdict(False, str(exc))
        unassigned = [c for c, s in h.head.items() if s is None]
        if unassigned:
            return Verdict(False, f"customer {unassigned[0]} is not assigned")
        loads = h.loads()
        for c in sorted(h.head):
            if algo == "stable-assign" and hyper_badness(h, c, loads) > 1:
                return Verdict(False, f"customer {c} at server {h.head[c]} has badness {hyper_badness(h, c, loads)}")
            if algo == "bounded-2" and not is_k_bounded_happy(h, c, 2, loads):
                return Verdict(False, f"customer {c} at server {h.head[c]} is 2-bounded unhappy")
        return Verdict(True)
    if algo in ("reduce-matching-td", "reduce-matching-2b"):
        g, _ = _customers_side(instance)
        try:
            ok = maximality_check(rows, g)
        except NotAMatching as exc:
            return Verdict(False, f"{exc} (witness {exc.witness})")
        return Verdict(ok, "" if ok else "matching is not maximal")
    raise ValueError(f"unknown algorithm {algo!r}")


# ---------------------------------------------------------------- running


@dataclass
class RunResult:
    kind: str            # solution record name
    rows: list
    report: object
    phases: int


def run_algorithm(algo: str, instance, round_cap: int | None = None, *, trace: bool = False) -> RunResult:
    if algo == "token-drop":
        tset, rep = run_proposal(instance, round_cap, trace=trace)
        return RunResult("traversal", [t.path for t in tset.traversals], rep, 0)
    if algo == "token-drop-3":
        tset, rep = run_three_level(instance, round_cap, trace=trace)
        return RunResult("traversal", [t.path for t in tset.traversals], rep, 0)
    if algo == "stable-orient":
        o, phases, rep = run_stable_orientation(instance, round_cap, trace=trace)
        return RunResult("orient", o.arcs(), rep, len(phases))
    if algo == "stable-assign":
        h, rep = run_stable_assignment(instance, round_cap, trace=trace)
        return RunResult("assign", sorted(h.head.items()), rep, len(rep.phases))
    if algo == "bounded-2":
        h, rep = run_two_bounded(instance, round_cap, trace=trace)
        return RunResult("assign", sorted(h.head.items()), rep, two_bounded_iterations(rep))
    if algo == "reduce-matching-td":
        g, U = _customers_side(instance)
        m, rep = matching_via_token_drop_run(g, U, round_cap)
        return RunResult("match", sorted(_customer_first(m, U)), rep, 0)
    if algo == "reduce-matching-2b":
        g, U = _customers_side(instance)
        m, rep = matching_via_two_bounded_run(g, U, round_cap)
        return RunResult("match", sorted(_customer_first(m, U)), rep, two_bounded_iterations(rep))
    raise ValueError(f"unknown algorithm {algo!r}")


def _customer_first(edges, U):
    return [(a, b) if a in U else (b, a) for a, b in edges]


def instance_params(algo: str, instance) -> dict:
    """Size parameters the bound formulas are evaluated on."""
    if isinstance(instance, TokenDropInstance):
        return {"n": len(instance.nodes), "delta": instance.max_degree, "levels": instance.height,
                "c_deg": 0, "s_deg": 0}
    if isinstance(instance, UndirectedGraph):
        return {"n": instance.n, "delta": instance.max_degree, "levels": 0, "c_deg": 0, "s_deg": 0}
    g = instance.bipartite_graph()
    return {"n": len(instance.customers), "delta": g.max_degree, "levels": 1 if algo == "reduce-matching-td" else 0,
            "c_deg": instance.C, "s_deg": instance.S}


# ---------------------------------------------------------------- generation


def generate(algo: str, *, n: int, delta: int = 3, levels: int = 2, c_deg: int = 2, s_deg: int = 4,
             seed: int = 0, family: str | None = None):
    """Instance for ``algo`` from size parameters (the sweep's cell generator)."""
    kind = instance_kind(algo)
    if kind == "tokendrop":
        L = 2 if algo == "token-drop-3" else levels
        npl = max(1, n // (L + 1))
        return gen_layered_dag(L, delta, npl, 1.0, 0.5, seed)
    if kind == "graph":
        fam = family or "regular"
        if fam == "regular" and delta < n and (n * delta) % 2 == 0:
            return gen_random_regular(n, delta, seed)
        return gen_random_graph(n, delta, 0.5, seed)
    servers = max(1, math.ceil(n * (c_deg + 1) / (2 * s_deg)))
    return gen_bipartite_assignment(n, servers, c_deg, s_deg, seed)


@dataclass(frozen=True)
class BenchRow:
    algo: str
    n: int
    delta: int
    c_deg: int
    s_deg: int
    levels: int
    seed: int
    rounds: int
    bound: int
    ratio: float
    phases: int
    valid: bool

    def csv_fields(self) -> list[str]:
        d = asdict(self)
        d["ratio"] = f"{self.ratio:.4f}"
        d["valid"] = "true" if self.valid else "false"
        return [str(d[k]) for k in CSV_HEADER]


def bench_cell(algo: str, instance, seed: int, *, cap_multiplier: float | None = None,
               constants: dict | None = None) -> BenchRow:
    params = instance_params(algo, instance)
    bound = round_bound(algo, constants=constants, **{k: params[k] for k in ("delta", "levels", "c_deg", "s_deg")})
    cap = math.ceil(cap_multiplier * bound) if cap_multiplier else None
    if cap is not None:
        cap = max(cap, 1)
    try:
        res = run_algorithm(algo, instance, cap)
        rounds, phases = res.report.rounds, res.phases
        valid = check_solution(algo, instance, res.rows).ok
    except RoundBudgetExceeded:
        rounds, phases, valid = cap or 0, 0, False
    ratio = rounds / bound if bound else 0.0
    return BenchRow(algo, params["n"], params["delta"], params["c_deg"], params["s_deg"], params["levels"],
                    seed, rounds, bound, ratio, phases, valid)


def _cell(args) -> BenchRow:
    algo, gen_kwargs, seed, cap_multiplier, constants = args
    inst = generate(algo, seed=seed, **gen_kwargs)
    return bench_cell(algo, inst, seed, cap_multiplier=cap_multiplier, constants=constants)


def sweep(algo: str, *, n: int, deltas: Iterable[int] = (3,), levels: Iterable[int] = (2,),
          c_degs: Iterable[int] = (2,), s_degs: Iterable[int] = (4,), seeds: Iterable[int] = (0,),
          cap_multiplier: float | None = None, constants: dict | None = None, jobs: int = 1) -> list[BenchRow]:
    """One row per grid cell; rows come back sorted by their parameters."""
    kind = instance_kind(algo)
    cells = []
    for seed in seeds:
        if kind == "tokendrop":
            for d in deltas:
                for L in (levels if algo == "token-drop" else (2,)):
                    cells.append((algo, {"n": n, "delta": d, "levels": L}, seed, cap_multiplier, constants))
        elif kind == "graph":
            for d in deltas:
                cells.append((algo, {"n": n, "delta": d}, seed, cap_multiplier, constants))
        else:
            for c in c_degs:
                for s in s_degs:
                    cells.append((algo, {"n": n, "c_deg": c, "s_deg": s}, seed, cap_multiplier, constants))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_cell, cells))
    else:
        rows = [_cell(c) for c in cells]
    return sorted(rows, key=lambda r: (r.algo, r.n, r.delta, r.c_deg, r.s_deg, r.levels, r.seed))


def rows_to_csv(rows: Iterable[BenchRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.csv_fields())
    return buf.getvalue()
