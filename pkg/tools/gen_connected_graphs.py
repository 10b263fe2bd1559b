"""Write every connected graph on 1..8 nodes (up to isomorphism) as gzipped graph6.

Graphs on up to 7 nodes come from the networkx atlas.  Every connected graph
on 8 nodes has a vertex whose removal keeps it connected, so adding one
vertex to each connected 7-node graph in all possible ways reaches every
8-node class; duplicates are removed with an isomorphism check inside
Weisfeiler-Lehman hash buckets.

    python3 tools/gen_connected_graphs.py [out_path]
"""
from __future__ import annotations

import gzip
import itertools
import sys
from collections import defaultdict
from pathlib import Path

import networkx as nx

EXPECTED = {1: 1, 2: 1, 3: 2, 4: 6, 5: 21, 6: 112, 7: 853, 8: 11117}
DEFAULT_OUT = Path(__file__).resolve().parent.parent / "tests" / "data" / "connected_upto8.g6.gz"


def connected_atlas() -> dict[int, list[nx.Graph]]:
    by_n = defaultdict(list)
    for g in nx.graph_atlas_g():
        if g.number_of_nodes() >= 1 and nx.is_connected(g):
            by_n[g.number_of_nodes()].append(g)
    return by_n


def extend_by_one(graphs: list[nx.Graph]) -> list[nx.Graph]:
    buckets: dict[str, list[nx.Graph]] = defaultdict(list)
    out = []
    for g in graphs:
        n = g.number_of_nodes()
        for k in range(1, n + 1):
            for nbrs in itertools.combinations(range(n), k):
                h = g.copy()
                h.add_edges_from((n, v) for v in nbrs)
                key = nx.weisfeiler_lehman_graph_hash(h, iterations=4)
                if any(nx.is_isomorphic(h, other) for other in buckets[key]):
                    continue
                buckets[key].append(h)
                out.append(h)
    return out


def main(argv: list[str]) -> int:
    out = Path(argv[1]) if len(argv) > 1 else DEFAULT_OUT
    by_n = connected_atlas()
    by_n[8] = extend_by_one(by_n[7])
    for n, want in EXPECTED.items():
        got = len(by_n[n])
        if got != want:
            print(f"{n} nodes: expected {want} classes, found {got}", file=sys.stderr)
            return 1
    out.parent.mkdir(parents=True, exist_ok=True)
    with gzip.open(out, "wb") as fh:
        for n in sorted(by_n):
            for g in by_n[n]:
                g = nx.convert_node_labels_to_integers(g, ordering="sorted")
                fh.write(nx.to_graph6_bytes(g, header=False))
    print(f"wrote {sum(map(len, by_n.values()))} graphs to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
