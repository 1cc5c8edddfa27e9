"""Pluggable sub-MIP backend with a reference branch-and-bound implementation.

The reference backend is a deterministic single-threaded best-bound search
with depth-first plunging until the first incumbent, most-fractional
branching (ties to the lowest index), and cooperative cancellation checked
at node boundaries. ``thread_hint`` is carried for core accounting by the
orchestrator; the reference backend ignores it.
"""

import heapq
import math
from dataclasses import dataclass
from typing import Callable

from .clock import WallClock
from .lp import LP_INFEASIBLE, LP_OPTIMAL, build_relaxation, solve_relaxation
from .model import INF, INTEGRALITY_TOL, DimensionMismatch, MipModel, Solution, evaluate

OPTIMAL = "optimal"
FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
UNKNOWN = "unknown"

_PRUNE_TOL = 1e-9


@dataclass(frozen=True)
class SolveBudget:
    """Limits for one sub-MIP solve; at least one of the wall/node caps is finite."""

    wall_seconds: float = INF
    node_limit: int | None = None
    gap_limit: float = 1e-6
    thread_hint: int = 1

    def __post_init__(self):
        if self.wall_seconds < 0:
            raise ValueError("wall_seconds must be >= 0")
        if self.wall_seconds == INF and self.node_limit is None:
            raise ValueError("at least one of wall_seconds/node_limit must be finite")
        if self.node_limit is not None and self.node_limit < 0:
            raise ValueError("node_limit must be >= 0")
        if self.gap_limit < 0:
            raise ValueError("gap_limit must be >= 0")
        if self.thread_hint < 1:
            raise ValueError("thread_hint must be >= 1")


@dataclass(frozen=True)
class MipResult:
    status: str
    incumbent: Solution | None
    dual_bound: float
    nodes: int
    elapsed: float


def solve_mip(
    model: MipModel,
    warm_start: Solution | None = None,
    budget: SolveBudget | None = None,
    seed: int = 0,
    *,
    clock=None,
    cancel=None,
    on_incumbent: Callable[[float, Solution], None] | None = None,
) -> MipResult:
    """Branch-and-bound solve within a budget.

    Never returns an incumbent worse than the warm start. ``seed`` is part of
    the backend interface; the reference implementation is deterministic and
    does not consume it.
    """
    return _branch_and_bound(
        model, warm_start, budget, clock=clock, cancel=cancel,
        on_incumbent=on_incumbent, stop_at_first=False,
    )


def find_first_feasible(
    model: MipModel,
    budget: SolveBudget,
    seed: int = 0,
    *,
    clock=None,
    cancel=None,
    on_incumbent: Callable[[float, Solution], None] | None = None,
) -> MipResult:
    """Like solve_mip but stops at the first integral feasible solution."""
    return _branch_and_bound(
        model, None, budget, clock=clock, cancel=cancel,
        on_incumbent=on_incumbent, stop_at_first=True,
    )


def _most_fractional(values, int_indices):
    best_j = None
    best_score = None
    for j in int_indices:
        frac = values[j] - math.floor(values[j])
        dist = min(frac, 1.0 - frac)
        if dist <= INTEGRALITY_TOL:
            continue
        score = abs(frac - 0.5)
        if best_score is None or score < best_score:
            best_j, best_score = j, score
    return best_j


def _branch_and_bound(model, warm_start, budget, *, clock, cancel, on_incumbent, stop_at_first):
    if budget is None:
        raise ValueError("a SolveBudget is required")
    clock = clock or WallClock()
    start = clock.now()
    deadline = start + budget.wall_seconds
    relax = build_relaxation(model)
    ints = model.integer_indices()

    incumbent = None
    if warm_start is not None:
        if len(warm_start.values) != model.n_vars:
            raise DimensionMismatch("warm start length does not match model")
        checked = evaluate(model, warm_start.values)
        if checked.feasible and checked.integral:
            incumbent = checked
    best_obj = incumbent.objective if incumbent is not None else INF

    seq = 0
    stack = []  # LIFO plunge while no incumbent exists
    heap = []  # (estimate, seq, lower, upper) best-bound afterwards
    root = (-INF, seq, relax.lower.copy(), relax.upper.copy())
    if incumbent is None:
        stack.append(root)
    else:
        heapq.heappush(heap, root)

    nodes = 0
    interrupted = False
    proven = False
    proven_dual = INF

    def open_dual():
        cands = [entry[0] for entry in heap] + [entry[0] for entry in stack]
        return min(cands) if cands else None

    def gap_met():
        dual = open_dual()
        if dual is None:
            return True
        return best_obj - dual <= budget.gap_limit * max(abs(best_obj), 1e-10)

    while True:
        if cancel is not None and cancel.is_set():
            interrupted = True
            break
        if clock.now() >= deadline:
            interrupted = True
            break
        if budget.node_limit is not None and nodes >= budget.node_limit:
            interrupted = True
            break
        if stack:
            node = stack.pop()
        elif heap:
            node = heapq.heappop(heap)
        else:
            break
        estimate, _, lower, upper = node
        if estimate >= best_obj - _PRUNE_TOL:
            continue

        res = solve_relaxation(relax, lower, upper)
        nodes += 1
        clock.charge_nodes(1)
        if res.status == LP_INFEASIBLE:
            continue
        if res.status != LP_OPTIMAL:
            # unbounded or numerically stuck relaxation: nothing provable here
            interrupted = True
            break
        if res.objective >= best_obj - _PRUNE_TOL:
            continue

        branch_j = _most_fractional(res.values, ints)
        if branch_j is None:
            rounded = list(res.values)
            for j in ints:
                rounded[j] = float(round(rounded[j]))
            candidate = evaluate(model, rounded)
            if not (candidate.feasible and candidate.integral):
                candidate = evaluate(model, res.values)
            if candidate.feasible and candidate.integral and candidate.objective < best_obj:
                incumbent = candidate
                best_obj = candidate.objective
                if on_incumbent is not None:
                    on_incumbent(clock.now() - start, candidate)
                if stack:
                    for entry in stack:
                        heapq.heappush(heap, entry)
                    stack = []
                if stop_at_first:
                    break
                if gap_met():
                    proven = True
                    dual = open_dual()
                    proven_dual = best_obj if dual is None else min(dual, best_obj)
                    break
            continue

        x = res.values[branch_j]
        floor_child_upper = upper.copy()
        floor_child_upper[branch_j] = math.floor(x)
        ceil_child_lower = lower.copy()
        ceil_child_lower[branch_j] = math.ceil(x)
        seq += 1
        floor_child = (res.objective, seq, lower, floor_child_upper)
        seq += 1
        ceil_child = (res.objective, seq, ceil_child_lower, upper)
        prefer_ceil = (x - math.floor(x)) >= 0.5
        if incumbent is None:
            first, second = (floor_child, ceil_child) if prefer_ceil else (ceil_child, floor_child)
            stack.append(first)
            stack.append(second)  # popped first: plunge toward the rounding
        else:
            heapq.heappush(heap, floor_child)
            heapq.heappush(heap, ceil_child)

    elapsed = clock.now() - start
    open_empty = not stack and not heap
    if incumbent is not None:
        if proven:
            return MipResult(OPTIMAL, incumbent, proven_dual, nodes, elapsed)
        if open_empty and not interrupted:
            return MipResult(OPTIMAL, incumbent, best_obj, nodes, elapsed)
        dual = open_dual()
        return MipResult(FEASIBLE, incumbent, -INF if dual is None else dual, nodes, elapsed)
    if open_empty and not interrupted:
        return MipResult(INFEASIBLE, None, INF, nodes, elapsed)
    dual = open_dual()
    return MipResult(UNKNOWN, None, -INF if dual is None else dual, nodes, elapsed)


@dataclass(frozen=True)
class Backend:
    """A sub-MIP solver pair; implementations must be safe to run in
    separate workers and honor cooperative cancellation."""

    name: str
    solve_mip: Callable
    find_first_feasible: Callable


_BACKENDS: dict[str, Backend] = {
    "reference": Backend("reference", solve_mip, find_first_feasible),
}


def get_backend(name: str = "reference") -> Backend:
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"unknown backend {name!r}; available: {sorted(_BACKENDS)}"
        ) from None


def register_backend(backend: Backend) -> None:
    _BACKENDS[backend.name] = backend
