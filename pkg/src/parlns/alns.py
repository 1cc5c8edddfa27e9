"""One bandit-guided LNS worker: select-destroy, repair, accept, learn.

The worker finds an initial incumbent with the sub-solver, then loops until
its wall budget expires: the bandit picks a destroy arm, the resulting
sub-MIP is repaired under a small per-iteration budget, the candidate is
scored on the original model, classified into exactly one of
best/better/accept/reject, and the bandit is updated. Every new global best
appends a trace point.
"""

import math
import random
from collections import deque
from dataclasses import dataclass

from . import bandit, operators
from .bandit import REJECT
from .clock import WallClock
from .lp import LP_OPTIMAL, solve_lp
from .metrics import GapTrace, primal_gap
from .model import MipModel, Solution, apply_neighborhood, evaluate
from .subsolver import Backend, SolveBudget, get_backend

ARCHIVE_CAPACITY = 20
INITIAL_TEMPERATURE = 1.0
MIN_TEMPERATURE = 1e-6

HILL_CLIMBING = "hill_climbing"
SIMULATED_ANNEALING = "simulated_annealing"

STATUS_OK = "ok"
STATUS_NO_FEASIBLE = "no_feasible_solution"


class NoFeasibleSolution(RuntimeError):
    """The initial feasibility phase produced no incumbent."""


@dataclass(frozen=True)
class AcceptanceCriterion:
    kind: str
    step: float | None = None
    temperature: float | None = None

    def __post_init__(self):
        if self.kind not in (HILL_CLIMBING, SIMULATED_ANNEALING):
            raise ValueError(f"unknown acceptance kind {self.kind!r}")
        if self.kind == SIMULATED_ANNEALING:
            if self.step is None or not 0.01 <= self.step <= 1.0:
                raise ValueError("simulated annealing step must be in [0.01, 1]")


def initial_criterion(descriptor: AcceptanceCriterion) -> AcceptanceCriterion:
    if descriptor.kind == HILL_CLIMBING:
        return descriptor
    return AcceptanceCriterion(
        SIMULATED_ANNEALING, step=descriptor.step, temperature=INITIAL_TEMPERATURE
    )


def accept(
    criterion: AcceptanceCriterion, candidate_obj: float, current_obj: float, rng
) -> tuple[bool, AcceptanceCriterion]:
    """Acceptance decision plus the evolved criterion (SA cools on each call).

    Hill climbing accepts when the candidate is no worse. Simulated annealing
    always accepts improvements and accepts a worsening with probability
    exp(-delta_rel / T) on the relative-delta scale.
    """
    if criterion.kind == HILL_CLIMBING:
        return candidate_obj <= current_obj, criterion
    if candidate_obj <= current_obj:
        accepted = True
    else:
        delta_rel = (candidate_obj - current_obj) / max(abs(current_obj), 1e-10)
        accepted = rng.random() < math.exp(-delta_rel / criterion.temperature)
    cooled = AcceptanceCriterion(
        SIMULATED_ANNEALING,
        step=criterion.step,
        temperature=max(MIN_TEMPERATURE, criterion.temperature * criterion.step),
    )
    return accepted, cooled


@dataclass(frozen=True)
class WorkerResult:
    config_id: str
    status: str
    best: Solution | None
    trace: GapTrace
    iterations: int
    skipped: int
    pulls: tuple[int, ...]
    outcome_counts: tuple[dict, ...]
    raw_points: tuple[tuple[float, float], ...]  # (t, internal objective)
    seed: int


def _make_policy(descriptor, n_arms: int):
    if descriptor.kind == bandit.EPSILON_GREEDY:
        return bandit.EpsilonGreedy(n_arms, descriptor.epsilon)
    if descriptor.kind == bandit.SOFTMAX:
        return bandit.Softmax(n_arms, descriptor.tau)
    return bandit.ThompsonSampling(n_arms)


def _per_iteration_seconds(wall_seconds: float) -> float:
    return min(max(wall_seconds / 60.0, 0.5), 30.0)


PER_ITERATION_NODE_CAP = 5000


def build_trace(
    model: MipModel,
    raw_points,
    reference_objective: float | None,
    horizon: float,
) -> GapTrace:
    """Map (t, internal objective) improvements to a capped gap trace.

    The recorded gap is the best (running minimum) gap so far, which keeps
    traces monotone even against a reference the run manages to beat.
    """
    if reference_objective is None:
        reference_objective = raw_points[-1][1] if raw_points else 0.0
    points = []
    best_gap = 1.0
    for t, obj in raw_points:
        gap = min(best_gap, primal_gap(obj, reference_objective))
        t = min(t, horizon)
        if points and t <= points[-1][0]:
            points[-1] = (points[-1][0], model.to_external_objective(obj), gap)
        else:
            points.append((t, model.to_external_objective(obj), gap))
        best_gap = gap
    return GapTrace(points=tuple(points), horizon=horizon)


def run_worker(
    model: MipModel,
    config,
    wall_seconds: float,
    seed: int,
    clock=None,
    *,
    reference_objective: float | None = None,
    backend: Backend | None = None,
    collector=None,
    cancel=None,
) -> WorkerResult:
    """Run one configured worker until its wall budget is spent.

    ``reference_objective`` is in internal (minimization) scale; when absent
    the worker's own final best is used for gap reporting.
    """
    if wall_seconds <= 0:
        raise ValueError("wall_seconds must be positive")
    clock = clock or WallClock()
    backend = backend or get_backend()
    rng = random.Random(seed)
    start = clock.now()
    deadline = start + wall_seconds
    n_arms = len(config.destroy_ops)
    pulls = [0] * n_arms
    outcome_counts = [dict.fromkeys(bandit.OUTCOMES, 0) for _ in range(n_arms)]

    def cancelled():
        return cancel is not None and cancel.is_set()

    initial_budget = SolveBudget(wall_seconds=min(0.2 * wall_seconds, 60.0))
    first = backend.find_first_feasible(model, initial_budget, seed=seed, clock=clock, cancel=cancel)
    if first.incumbent is None:
        return WorkerResult(
            config_id=config.id,
            status=STATUS_NO_FEASIBLE,
            best=None,
            trace=GapTrace(points=(), horizon=wall_seconds),
            iterations=0,
            skipped=0,
            pulls=tuple(pulls),
            outcome_counts=tuple(outcome_counts),
            raw_points=(),
            seed=seed,
        )

    current = best = first.incumbent
    raw_points = [(clock.now() - start, best.objective)]
    if collector is not None:
        collector.append(config.id, raw_points[-1][0], best.objective)

    # one root relaxation per worker feeds rens/rins
    root = solve_lp(model)
    clock.charge_nodes(1)
    lp_values = root.values if root.status == LP_OPTIMAL else None

    policy = _make_policy(config.policy, n_arms)
    criterion = initial_criterion(config.acceptance)
    archive: deque[Solution] = deque(maxlen=ARCHIVE_CAPACITY)
    archive.append(best)
    per_iter = _per_iteration_seconds(wall_seconds)
    iterations = 0
    skipped = 0

    while clock.now() < deadline and not cancelled():
        arm = policy.select_arm(rng)
        op = config.destroy_ops[arm]
        clock.charge_nodes(1)  # iteration overhead; guarantees progress on skips
        ctx = operators.OperatorContext(
            incumbent=current,
            archive=tuple(archive),
            lp_values=lp_values,
            rng=rng,
        )
        try:
            spec = operators.build_neighborhood(op, ctx, model)
        except (operators.EmptyNeighborhood, operators.MissingRelaxation):
            skipped += 1
            continue
        sub = apply_neighborhood(model, spec)
        warm = None
        probe = evaluate(sub, current.values)
        if probe.feasible and probe.integral:
            warm = current
        remaining = deadline - clock.now()
        if remaining <= 0:
            break
        budget = SolveBudget(
            wall_seconds=min(per_iter, remaining),
            node_limit=PER_ITERATION_NODE_CAP,
        )
        repair = backend.solve_mip(
            sub, warm, budget, seed=rng.randrange(2**31), clock=clock, cancel=cancel
        )
        iterations += 1
        pulls[arm] += 1

        if repair.incumbent is None:
            outcome = REJECT
        else:
            candidate = evaluate(model, repair.incumbent.values)
            if not (candidate.feasible and candidate.integral):
                outcome = REJECT
            else:
                accepted, criterion = accept(
                    criterion, candidate.objective, current.objective, rng
                )
                if candidate.objective < best.objective:
                    outcome = bandit.BEST
                elif candidate.objective < current.objective:
                    outcome = bandit.BETTER
                elif accepted:
                    outcome = bandit.ACCEPT
                else:
                    outcome = REJECT
                if accepted:
                    current = candidate
                    archive.append(candidate)
                if outcome == bandit.BEST:
                    best = candidate
                    raw_points.append((clock.now() - start, best.objective))
                    if collector is not None:
                        collector.append(config.id, raw_points[-1][0], best.objective)
        outcome_counts[arm][outcome] += 1
        policy.update(arm, outcome, config.rewards)

    trace = build_trace(model, raw_points, reference_objective, wall_seconds)
    return WorkerResult(
        config_id=config.id,
        status=STATUS_OK,
        best=best,
        trace=trace,
        iterations=iterations,
        skipped=skipped,
        pulls=tuple(pulls),
        outcome_counts=tuple(outcome_counts),
        raw_points=tuple(raw_points),
        seed=seed,
    )
