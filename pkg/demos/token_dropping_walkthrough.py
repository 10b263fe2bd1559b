"""Walk through one token dropping game and compare it with the sequential baseline.

    python3 demos/token_dropping_walkthrough.py
"""
from tokendrop.graphs import gen_layered_dag
from tokendrop.oracle import sequential_token_drop
from tokendrop.token_dropping import proposal_round_bound, run_proposal, run_three_level, validate_traversals


def main() -> None:
    inst = gen_layered_dag(4, 3, 8, 0.6, 0.5, seed=7)
    print(f"layered game: {len(inst.nodes)} nodes, {len(inst.edges)} edges, "
          f"{len(inst.tokens)} tokens, height {inst.height}, max degree {inst.max_degree}")

    out, rep = run_proposal(inst)
    bound = proposal_round_bound(inst.height, inst.max_degree)
    moved = [t for t in out.traversals if len(t.path) > 1]
    print(f"proposal algorithm: {rep.rounds} rounds (bound {bound}), {rep.messages} messages")
    print(f"{len(moved)} of {len(out.traversals)} tokens moved; longest path {max(len(t.path) for t in out.traversals)}")
    for t in moved[:5]:
        print("  ", " -> ".join(map(str, t.path)))
    print("valid:", bool(validate_traversals(inst, out)))

    # the sequential baseline reaches a different but equally valid final state
    base = sequential_token_drop(inst)
    print("sequential baseline valid:", bool(validate_traversals(inst, base)),
          "| same destinations:", sorted(base.destinations) == sorted(out.destinations))

    short = gen_layered_dag(2, 4, 12, 0.7, 0.5, seed=3)
    out3, rep3 = run_three_level(short)
    print(f"three-level game: {rep3.rounds} rounds, {len(out3.traversals)} tokens, "
          f"valid {bool(validate_traversals(short, out3))}")


if __name__ == "__main__":
    main()
