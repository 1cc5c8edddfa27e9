"""Seeded generators for small binary benchmark instances.

Used by the test oracles and the desk-scale reproduction driver. All
coefficients are integers so enumeration oracles can assert exact equality.
"""

import random

from .model import BINARY, GE, LE, MAXIMIZE, MINIMIZE, LinearConstraint, MipModel, Variable, make_model


def knapsack(n_items: int = 12, seed: int = 0, name: str | None = None) -> MipModel:
    """0/1 knapsack: maximize profit under one capacity row."""
    rng = random.Random(seed)
    profits = [rng.randint(5, 40) for _ in range(n_items)]
    weights = [rng.randint(2, 25) for _ in range(n_items)]
    capacity = max(1, sum(weights) // 2)
    variables = [Variable(f"x{i}", BINARY) for i in range(n_items)]
    constraints = [
        LinearConstraint(
            "capacity", {i: float(weights[i]) for i in range(n_items)}, LE, float(capacity)
        )
    ]
    objective = {i: float(profits[i]) for i in range(n_items)}
    return make_model(
        name or f"knapsack_{n_items}_{seed}", MAXIMIZE, variables, constraints, objective
    )


def set_cover(
    n_elements: int = 20, n_sets: int = 15, seed: int = 0, name: str | None = None
) -> MipModel:
    """Minimum-cost set cover; every element is guaranteed coverable."""
    rng = random.Random(seed)
    costs = [rng.randint(1, 20) for _ in range(n_sets)]
    members: list[set[int]] = [set() for _ in range(n_sets)]
    for element in range(n_elements):
        # each element lands in a few random sets, at least one
        k = rng.randint(1, max(1, n_sets // 4))
        for j in rng.sample(range(n_sets), k):
            members[j].add(element)
    variables = [Variable(f"s{j}", BINARY) for j in range(n_sets)]
    constraints = [
        LinearConstraint(
            f"cover_{element}",
            {j: 1.0 for j in range(n_sets) if element in members[j]},
            GE,
            1.0,
        )
        for element in range(n_elements)
    ]
    objective = {j: float(costs[j]) for j in range(n_sets)}
    return make_model(
        name or f"setcover_{n_elements}x{n_sets}_{seed}", MINIMIZE, variables, constraints, objective
    )


def independent_set(
    n_nodes: int = 15, edge_prob: float = 0.3, seed: int = 0, name: str | None = None
) -> MipModel:
    """Maximum-weight independent set on a random graph."""
    rng = random.Random(seed)
    weights = [rng.randint(1, 15) for _ in range(n_nodes)]
    edges = [
        (u, v)
        for u in range(n_nodes)
        for v in range(u + 1, n_nodes)
        if rng.random() < edge_prob
    ]
    variables = [Variable(f"v{u}", BINARY) for u in range(n_nodes)]
    constraints = [
        LinearConstraint(f"edge_{u}_{v}", {u: 1.0, v: 1.0}, LE, 1.0) for u, v in edges
    ]
    objective = {u: float(weights[u]) for u in range(n_nodes)}
    return make_model(
        name or f"indepset_{n_nodes}_{seed}", MAXIMIZE, variables, constraints, objective
    )
