"""Stable assignment against the optimum, the 2-bounded variant, and matchings built from both.

    python3 demos/assignment_and_matching.py
"""
from tokendrop.assignment import (
    is_stable_assignment, maximal_matching_via_two_bounded, run_stable_assignment, run_two_bounded,
    two_bounded_iterations, unhappy_customers,
)
from tokendrop.graphs import gen_bipartite_assignment
from tokendrop.oracle import brute_force_optimal_semi_matching, maximality_check, semi_matching_cost
from tokendrop.token_dropping import matching_via_token_drop


def main() -> None:
    inst = gen_bipartite_assignment(9, 4, 3, 5, seed=32)
    h, rep = run_stable_assignment(inst)
    _, best = brute_force_optimal_semi_matching(inst)
    cost = semi_matching_cost(h)
    print(f"{len(inst.customers)} customers, {len(inst.servers)} servers (C={inst.C}, S={inst.S})")
    print(f"stable assignment: {len(rep.phases)} phases, {rep.rounds} rounds, stable {is_stable_assignment(h)}")
    print(f"cost {cost} vs optimum {best.cost} (ratio {cost / best.cost:.3f})")

    h2, rep2 = run_two_bounded(inst)
    print(f"2-bounded: {two_bounded_iterations(rep2)} iterations, unhappy left {len(unhappy_customers(h2))}")

    g = inst.bipartite_graph()
    U = {c.id for c in inst.customers}
    m1 = matching_via_token_drop(g, U)
    m2 = maximal_matching_via_two_bounded(g, U)
    print(f"matching via token dropping: {len(m1)} edges, maximal {maximality_check(m1, g)}")
    print(f"matching via 2-bounded assignment: {len(m2)} edges, maximal {maximality_check(m2, g)}")


if __name__ == "__main__":
    main()
