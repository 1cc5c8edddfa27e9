"""Shared test oracles and fixtures.

The oracles here are deliberately independent of the solver code paths they
check: full assignment enumeration for binary MIPs, active-set vertex
enumeration for LPs, and hand-rolled step-function traces.
"""

import itertools
import random

import numpy as np

from parlns.metrics import GapTrace
from parlns.model import (
    BINARY,
    CONTINUOUS,
    EQ,
    GE,
    LE,
    MINIMIZE,
    LinearConstraint,
    MipModel,
    Variable,
    make_model,
)


def binary_optimum(model: MipModel) -> float | None:
    """Exact internal-scale optimum of an all-binary model by enumerating
    every assignment; None when infeasible."""
    n = model.n_vars
    assert all(v.kind == BINARY for v in model.variables)
    masks = np.array(list(itertools.product((0.0, 1.0), repeat=n)))
    # respect fixed bounds if any
    lower = np.array([v.lower for v in model.variables])
    upper = np.array([v.upper for v in model.variables])
    feasible = np.all((masks >= lower - 1e-9) & (masks <= upper + 1e-9), axis=1)
    for con in model.constraints:
        a = np.zeros(n)
        for j, coef in con.coefficients.items():
            a[j] = coef
        activity = masks @ a
        if con.relation == LE:
            feasible &= activity <= con.rhs + 1e-7
        elif con.relation == GE:
            feasible &= activity >= con.rhs - 1e-7
        else:
            feasible &= np.abs(activity - con.rhs) <= 1e-7
    if not feasible.any():
        return None
    c = np.zeros(n)
    for j, coef in model.objective.items():
        c[j] = coef
    objective = masks @ c + model.objective_offset
    return float(objective[feasible].min())


def lp_vertex_optimum(model: MipModel) -> float | None:
    """LP optimum by enumerating vertices as intersections of n active
    hyperplanes drawn from constraint rows and bound planes. Requires a
    bounded box; returns None when no feasible vertex exists."""
    n = model.n_vars
    planes = []
    for con in model.constraints:
        a = np.zeros(n)
        for j, coef in con.coefficients.items():
            a[j] = coef
        planes.append((a, con.rhs))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        planes.append((e, model.variables[j].lower))
        planes.append((e.copy(), model.variables[j].upper))
    c = np.zeros(n)
    for j, coef in model.objective.items():
        c[j] = coef
    best = None
    for combo in itertools.combinations(range(len(planes)), n):
        A = np.array([planes[k][0] for k in combo])
        rhs = np.array([planes[k][1] for k in combo])
        try:
            x = np.linalg.solve(A, rhs)
        except np.linalg.LinAlgError:
            continue
        if not _point_feasible(model, x):
            continue
        value = float(c @ x + model.objective_offset)
        if best is None or value < best:
            best = value
    return best


def _point_feasible(model: MipModel, x, tol: float = 1e-7) -> bool:
    for j, var in enumerate(model.variables):
        if x[j] < var.lower - tol or x[j] > var.upper + tol:
            return False
    for con in model.constraints:
        activity = sum(coef * x[j] for j, coef in con.coefficients.items())
        if con.relation == LE and activity > con.rhs + tol:
            return False
        if con.relation == GE and activity < con.rhs - tol:
            return False
        if con.relation == EQ and abs(activity - con.rhs) > tol:
            return False
    return True


def random_lp(rng: random.Random, max_vars: int = 6, max_cons: int = 8) -> MipModel:
    """Random bounded-box LP with moderate coefficients."""
    n = rng.randint(2, max_vars)
    m = rng.randint(1, max_cons)
    variables = [
        Variable(f"x{j}", CONTINUOUS, round(rng.uniform(-3.0, 0.0), 3), round(rng.uniform(0.5, 3.0), 3))
        for j in range(n)
    ]
    constraints = []
    for i in range(m):
        coefs = {
            j: round(rng.uniform(-5.0, 5.0), 3)
            for j in range(n)
            if rng.random() < 0.8
        }
        coefs = {j: v for j, v in coefs.items() if v != 0.0}
        if not coefs:
            coefs = {rng.randrange(n): 1.0}
        relation = rng.choice((LE, GE))
        constraints.append(
            LinearConstraint(f"c{i}", coefs, relation, round(rng.uniform(-4.0, 4.0), 3))
        )
    objective = {j: round(rng.uniform(-5.0, 5.0), 3) for j in range(n)}
    return make_model(f"lp_{rng.random()}", MINIMIZE, variables, constraints, objective)


def random_step_trace(rng: random.Random, horizon: float = 100.0, max_points: int = 5) -> GapTrace:
    """Random strictly-improving step trace (gaps strictly decreasing)."""
    points = []
    t = 0.0
    gap = 1.0
    objective = rng.uniform(50.0, 150.0)
    for _ in range(rng.randint(0, max_points)):
        t += rng.uniform(1.0, horizon / (max_points + 1))
        if t >= horizon:
            break
        gap *= rng.uniform(0.05, 0.9)
        objective *= rng.uniform(0.7, 0.99)
        points.append((t, objective, gap))
    return GapTrace(points=tuple(points), horizon=horizon)


def tiny_cover_model() -> MipModel:
    """min x + y subject to x + y >= 1, both binary."""
    return make_model(
        "tiny_cover",
        MINIMIZE,
        [Variable("x", BINARY), Variable("y", BINARY)],
        [LinearConstraint("c1", {0: 1.0, 1: 1.0}, GE, 1.0)],
        {0: 1.0, 1: 1.0},
    )
