from .exact import (
    BranchAndBound,
    SearchSpaceTooLargeError,
    best_enumerated,
    enumerate_all,
    iter_placements,
    plain_enumeration_nodes,
    search_space_size,
    solve_exact,
)
from .heuristics import (
    balance_scores,
    greedy_place,
    performance_order,
    place_cost_aware,
    place_load_balance,
    place_performance_aware,
    place_random,
)
from .solver import SolveResult, check_result, finish_result, infeasible_result
