"""Immutable MIP data model: variables, constraints, solutions, sub-problem specs.

Models are normalized to minimization on construction; objectives stated as
maximization are negated once and un-negated only at reporting boundaries
(see :meth:`MipModel.to_external_objective`).
"""

from dataclasses import dataclass, field

INF = float("inf")

MINIMIZE = "minimize"
MAXIMIZE = "maximize"

CONTINUOUS = "continuous"
INTEGER = "integer"
BINARY = "binary"

LE = "<="
GE = ">="
EQ = "="

# Standard solver defaults; activity tolerance is absolute.
FEASIBILITY_TOL = 1e-7
BOUND_TOL = 1e-9
INTEGRALITY_TOL = 1e-6


class ModelError(ValueError):
    """Invalid model data."""


class DimensionMismatch(ModelError):
    """Value vector length does not match the model's variable count."""


class ConflictingFixing(ModelError):
    """A neighborhood fixing falls outside the variable's original bounds."""


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str = CONTINUOUS
    lower: float = 0.0
    upper: float = INF


@dataclass(frozen=True)
class LinearConstraint:
    name: str
    coefficients: dict[int, float]
    relation: str
    rhs: float


@dataclass(frozen=True)
class Solution:
    values: tuple[float, ...]
    objective: float
    feasible: bool
    integral: bool


@dataclass(frozen=True)
class NeighborhoodSpec:
    """A sub-problem description applied on top of a base model.

    Fixings and bound overrides are keyed by variable index; fixed values must
    respect the variable's original bounds and integrality.
    """

    fixings: dict[int, float] = field(default_factory=dict)
    bound_overrides: dict[int, tuple[float, float]] = field(default_factory=dict)
    extra_constraints: tuple[LinearConstraint, ...] = ()
    objective_override: tuple[dict[int, float], float] | None = None
    tag: str = ""


@dataclass(frozen=True)
class MipModel:
    """Linear model in minimization form.

    ``objective`` maps variable index to coefficient and is always minimized;
    ``sense`` records the user-facing sense for reporting.
    """

    name: str
    sense: str
    variables: tuple[Variable, ...]
    constraints: tuple[LinearConstraint, ...]
    objective: dict[int, float]
    objective_offset: float = 0.0

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    def integer_indices(self) -> list[int]:
        """Indices of integer and binary variables."""
        return [i for i, v in enumerate(self.variables) if v.kind != CONTINUOUS]

    def binary_indices(self) -> list[int]:
        return [i for i, v in enumerate(self.variables) if v.kind == BINARY]

    def to_external_objective(self, value: float) -> float:
        """Map an internal (minimization) objective value to the stated sense."""
        return -value if self.sense == MAXIMIZE else value

    def to_internal_objective(self, value: float) -> float:
        return -value if self.sense == MAXIMIZE else value

    def to_json_dict(self) -> dict:
        """Debug dump with names instead of indices, objective in user sense."""
        sign = -1.0 if self.sense == MAXIMIZE else 1.0

        def num(x):
            if x == INF:
                return "inf"
            if x == -INF:
                return "-inf"
            return x

        names = [v.name for v in self.variables]
        return {
            "name": self.name,
            "sense": self.sense,
            "variables": [
                {"name": v.name, "kind": v.kind, "lower": num(v.lower), "upper": num(v.upper)}
                for v in self.variables
            ],
            "constraints": [
                {
                    "name": c.name,
                    "relation": c.relation,
                    "rhs": c.rhs,
                    "coefficients": {names[i]: coef for i, coef in sorted(c.coefficients.items())},
                }
                for c in self.constraints
            ],
            "objective": {
                "coefficients": {
                    names[i]: sign * coef for i, coef in sorted(self.objective.items())
                },
                "offset": sign * self.objective_offset,
            },
        }


def _strip_zeros(coefficients: dict[int, float]) -> dict[int, float]:
    return {i: c for i, c in coefficients.items() if c != 0.0}


def _normalize_variable(var: Variable) -> Variable:
    lower, upper, kind = var.lower, var.upper, var.kind
    if kind == BINARY:
        lower = max(lower, 0.0)
        upper = min(upper, 1.0)
    elif kind == INTEGER and lower >= -BOUND_TOL and upper <= 1.0 + BOUND_TOL:
        kind = BINARY
        lower = max(lower, 0.0)
        upper = min(upper, 1.0)
    if lower != var.lower or upper != var.upper or kind != var.kind:
        return Variable(var.name, kind, lower, upper)
    return var


def _validate(model: MipModel) -> MipModel:
    if model.sense not in (MINIMIZE, MAXIMIZE):
        raise ModelError(f"unknown sense {model.sense!r}")
    seen = set()
    for var in model.variables:
        if var.name in seen:
            raise ModelError(f"duplicate variable name {var.name!r}")
        seen.add(var.name)
        if var.kind not in (CONTINUOUS, INTEGER, BINARY):
            raise ModelError(f"variable {var.name!r}: unknown kind {var.kind!r}")
        if var.lower > var.upper + BOUND_TOL:
            raise ModelError(f"variable {var.name!r}: lower {var.lower} > upper {var.upper}")
    n = len(model.variables)
    seen = set()
    for con in model.constraints:
        if con.name in seen:
            raise ModelError(f"duplicate constraint name {con.name!r}")
        seen.add(con.name)
        if con.relation not in (LE, GE, EQ):
            raise ModelError(f"constraint {con.name!r}: unknown relation {con.relation!r}")
        if not con.coefficients:
            raise ModelError(f"constraint {con.name!r} has no nonzero coefficient")
        for i in con.coefficients:
            if not 0 <= i < n:
                raise ModelError(f"constraint {con.name!r} references variable index {i}")
    for i in model.objective:
        if not 0 <= i < n:
            raise ModelError(f"objective references variable index {i}")
    return model


def make_model(
    name: str,
    sense: str,
    variables: list[Variable] | tuple[Variable, ...],
    constraints: list[LinearConstraint] | tuple[LinearConstraint, ...],
    objective: dict[int, float],
    offset: float = 0.0,
) -> MipModel:
    """Validate and normalize a model stated in its natural sense.

    The objective is given in the stated sense and stored negated when the
    sense is maximize. Integer variables contained in [0, 1] are normalized
    to binaries; binary bounds are clamped into [0, 1].
    """
    sign = -1.0 if sense == MAXIMIZE else 1.0
    variables = tuple(_normalize_variable(v) for v in variables)
    constraints = tuple(
        LinearConstraint(c.name, _strip_zeros(dict(c.coefficients)), c.relation, c.rhs)
        for c in constraints
    )
    model = MipModel(
        name=name,
        sense=sense,
        variables=variables,
        constraints=constraints,
        objective=_strip_zeros({i: sign * c for i, c in objective.items()}),
        objective_offset=sign * offset,
    )
    return _validate(model)


def evaluate(model: MipModel, values) -> Solution:
    """Score a full assignment: objective, feasibility, integrality.

    Never raises on an infeasible point; only the vector length is enforced.
    """
    if len(values) != model.n_vars:
        raise DimensionMismatch(
            f"expected {model.n_vars} values, got {len(values)}"
        )
    values = tuple(float(v) for v in values)
    objective = model.objective_offset + sum(
        coef * values[i] for i, coef in model.objective.items()
    )
    feasible = True
    for i, var in enumerate(model.variables):
        if values[i] < var.lower - BOUND_TOL or values[i] > var.upper + BOUND_TOL:
            feasible = False
            break
    if feasible:
        for con in model.constraints:
            activity = sum(coef * values[i] for i, coef in con.coefficients.items())
            if con.relation == LE and activity > con.rhs + FEASIBILITY_TOL:
                feasible = False
            elif con.relation == GE and activity < con.rhs - FEASIBILITY_TOL:
                feasible = False
            elif con.relation == EQ and abs(activity - con.rhs) > FEASIBILITY_TOL:
                feasible = False
            if not feasible:
                break
    integral = all(
        abs(values[i] - round(values[i])) <= INTEGRALITY_TOL
        for i in model.integer_indices()
    )
    return Solution(values=values, objective=objective, feasible=feasible, integral=integral)


def apply_neighborhood(model: MipModel, spec: NeighborhoodSpec) -> MipModel:
    """Materialize a sub-problem: fixings become equal bounds, overrides and
    extra constraints are applied, the objective is replaced if requested.

    Pure: the input model is never modified. Raises :class:`ConflictingFixing`
    when a fixed value violates the variable's original bounds or integrality.
    """
    variables = list(model.variables)
    for i, value in spec.fixings.items():
        var = variables[i]
        if value < var.lower - BOUND_TOL or value > var.upper + BOUND_TOL:
            raise ConflictingFixing(
                f"fixing {var.name!r} at {value} outside bounds [{var.lower}, {var.upper}]"
            )
        if var.kind != CONTINUOUS and abs(value - round(value)) > INTEGRALITY_TOL:
            raise ConflictingFixing(f"fixing integer {var.name!r} at fractional {value}")
        variables[i] = Variable(var.name, var.kind, value, value)
    for i, (lower, upper) in spec.bound_overrides.items():
        if i in spec.fixings:
            continue
        var = variables[i]
        new_lower = max(lower, var.lower)
        new_upper = min(upper, var.upper)
        if new_lower > new_upper + BOUND_TOL:
            raise ConflictingFixing(
                f"override for {var.name!r} yields empty range [{new_lower}, {new_upper}]"
            )
        variables[i] = Variable(var.name, var.kind, new_lower, new_upper)

    constraints = list(model.constraints)
    if spec.extra_constraints:
        used = {c.name for c in constraints}
        for con in spec.extra_constraints:
            name = con.name
            k = 1
            while name in used:
                name = f"{con.name}_{k}"
                k += 1
            used.add(name)
            constraints.append(
                LinearConstraint(name, _strip_zeros(dict(con.coefficients)), con.relation, con.rhs)
            )

    if spec.objective_override is not None:
        coefficients, offset = spec.objective_override
        objective = _strip_zeros(dict(coefficients))
        objective_offset = offset
        sense = MINIMIZE  # override objectives are stated directly in minimization form
    else:
        objective = model.objective
        objective_offset = model.objective_offset
        sense = model.sense

    derived = MipModel(
        name=model.name,
        sense=sense,
        variables=tuple(variables),
        constraints=tuple(constraints),
        objective=objective,
        objective_offset=objective_offset,
    )
    return _validate(derived)
