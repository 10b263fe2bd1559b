"""Orient a random regular graph phase by phase and watch the loads settle.

    python3 demos/stable_orientation_phases.py
"""
from tokendrop.graphs import gen_random_regular
from tokendrop.oracle import sequential_stable_orientation, squared_potential
from tokendrop.orientation import (
    OrientationState, is_stable, orientation_max_phases, orientation_round_bound, run_stable_orientation,
)


def main() -> None:
    g = gen_random_regular(40, 4, seed=1)
    o, phases, rep = run_stable_orientation(g)
    print(f"4-regular graph on {g.n} nodes: {len(phases)} phases "
          f"(at most {orientation_max_phases(4)}), {rep.rounds} rounds (bound {orientation_round_bound(4)})")
    for p in phases:
        hist = sorted(p.loads_after.values())
        print(f"  phase {p.phase}: {p.proposals_accepted:2d} edges oriented, {p.flips:2d} flips, "
              f"max load {hist[-1]}, max badness {p.max_badness_after}")
    print("stable:", is_stable(o), "| potential", squared_potential(o))

    # starting from an arbitrary orientation, sequential flips also reach a stable state
    start = OrientationState(g, {e: e[1] for e in g.edges})
    log = []
    seq = sequential_stable_orientation(g, start, log)
    print(f"sequential flips: {len(log[0].flips)}, potential {log[0].potentials[0]} -> {log[0].potentials[-1]}, "
          f"stable {is_stable(seq)}")


if __name__ == "__main__":
    main()
