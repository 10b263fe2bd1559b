"""Token dropping, stable orientations and stable assignments in a simulated LOCAL model.

Every distributed algorithm here is a node program run by the synchronous
round engine in :mod:`tokendrop.engine`; validators and centralized
references live next to them.
"""
from .assignment import (
    HyperEdge, HyperOrientation, HyperTokenInstance, hyper_badness, is_k_bounded_happy, is_stable_assignment,
    maximal_matching_via_two_bounded, run_hyper_token_drop, run_stable_assignment, run_two_bounded,
    validate_hyper_traversals,
)
from .engine import LocalView, SimReport, Step, Topology, run_sync
from .graphs import (
    AssignmentInstance, Customer, RegularTree, TokenDropInstance, UndirectedGraph, gen_bipartite_assignment,
    gen_layered_dag, gen_perfect_regular_tree, gen_random_graph, gen_random_regular,
)
from .instance_io import read_instance, write_instance
from .oracle import (
    CostProfile, brute_force_optimal_semi_matching, enumerate_stable_orientations, maximality_check,
    semi_matching_cost, sequential_stable_orientation, sequential_token_drop,
)
from .orientation import OrientationState, PhaseRecord, badness, is_happy, is_stable, run_stable_orientation
from .token_dropping import (
    NodeOutput, Traversal, TraversalSet, derive_traversals, matching_via_token_drop, run_proposal,
    run_three_level, validate_traversals,
)

__all__ = [name for name in dir() if not name.startswith("_")]
