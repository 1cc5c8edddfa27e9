"""Bounded-variable primal simplex for LP relaxations.

Dense two-phase simplex: phase 1 drives artificial variables out of an
all-artificial start basis, phase 2 optimizes the real costs. Nonbasic
variables sit exactly at a bound (free ones at zero), the ratio test allows
bound flips, and the entering rule switches from Dantzig to Bland's rule
after 1000 degenerate pivots so the method terminates.
"""

from dataclasses import dataclass

import numpy as np

from .model import EQ, GE, INF, LE, MipModel

LP_OPTIMAL = "optimal"
LP_INFEASIBLE = "infeasible"
LP_UNBOUNDED = "unbounded"
LP_ITERATION_LIMIT = "iteration_limit"

_COST_TOL = 1e-9
_PIVOT_TOL = 1e-9
_DEGENERATE_TOL = 1e-9
_FEAS_TOL = 1e-7
_BLAND_AFTER = 1000
_REFACTOR_EVERY = 200

# variable position codes
_AT_LOWER, _AT_UPPER, _BASIC, _FREE = 0, 1, 2, 3


@dataclass(frozen=True)
class LpResult:
    status: str
    values: tuple[float, ...] | None = None
    objective: float | None = None
    iterations: int = 0


@dataclass(frozen=True)
class LpRelaxation:
    """Dense arrays for a model's LP relaxation (integrality dropped).

    ``A_full`` carries one slack column per row so branch-and-bound nodes can
    reuse it and only swap variable bounds.
    """

    c: np.ndarray
    offset: float
    A_full: np.ndarray
    b: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    slack_lower: np.ndarray
    slack_upper: np.ndarray
    n_structural: int


def build_relaxation(model: MipModel) -> LpRelaxation:
    n = model.n_vars
    m = len(model.constraints)
    c = np.zeros(n)
    for j, coef in model.objective.items():
        c[j] = coef
    A = np.zeros((m, n))
    b = np.zeros(m)
    slack_lower = np.zeros(m)
    slack_upper = np.zeros(m)
    for i, con in enumerate(model.constraints):
        for j, coef in con.coefficients.items():
            A[i, j] = coef
        b[i] = con.rhs
        if con.relation == LE:
            slack_lower[i], slack_upper[i] = 0.0, INF
        elif con.relation == GE:
            slack_lower[i], slack_upper[i] = -INF, 0.0
        else:
            slack_lower[i], slack_upper[i] = 0.0, 0.0
    lower = np.array([v.lower for v in model.variables], dtype=float)
    upper = np.array([v.upper for v in model.variables], dtype=float)
    A_full = np.hstack([A, np.eye(m)]) if m else np.zeros((0, n))
    return LpRelaxation(
        c=c,
        offset=model.objective_offset,
        A_full=A_full,
        b=b,
        lower=lower,
        upper=upper,
        slack_lower=slack_lower,
        slack_upper=slack_upper,
        n_structural=n,
    )


def solve_lp(model: MipModel, iteration_limit: int = 10000) -> LpResult:
    """Solve the LP relaxation of a model."""
    return solve_relaxation(build_relaxation(model), iteration_limit=iteration_limit)


def solve_relaxation(
    relax: LpRelaxation,
    lower: np.ndarray | None = None,
    upper: np.ndarray | None = None,
    iteration_limit: int = 10000,
) -> LpResult:
    """Solve a relaxation, optionally overriding the structural bounds.

    Bound overrides let a branch-and-bound caller reuse the constraint matrix
    across nodes.
    """
    n = relax.n_structural
    m = relax.A_full.shape[0]
    lo = relax.lower if lower is None else lower
    up = relax.upper if upper is None else upper
    if np.any(lo > up + 1e-12):
        return LpResult(LP_INFEASIBLE)

    if m == 0:
        return _solve_box_only(relax.c, relax.offset, lo, up)

    c_full = np.concatenate([relax.c, np.zeros(m)])
    lower_full = np.concatenate([lo, relax.slack_lower])
    upper_full = np.concatenate([up, relax.slack_upper])

    status, x, iterations = _two_phase(
        c_full, relax.A_full, relax.b, lower_full, upper_full, iteration_limit
    )
    if status != LP_OPTIMAL:
        return LpResult(status, iterations=iterations)

    # sanity: a reported optimum must actually satisfy the system
    residual = float(np.max(np.abs(relax.A_full @ x - relax.b)))
    off_bounds = max(
        float(np.max(np.maximum(lower_full - x, 0.0), initial=0.0)),
        float(np.max(np.maximum(x - upper_full, 0.0), initial=0.0)),
    )
    if residual > _FEAS_TOL or off_bounds > 1e-6:
        return LpResult(LP_ITERATION_LIMIT, iterations=iterations)

    values = tuple(float(v) for v in x[:n])
    objective = float(relax.c @ x[:n] + relax.offset)
    return LpResult(LP_OPTIMAL, values=values, objective=objective, iterations=iterations)


def _solve_box_only(c, offset, lo, up):
    values = np.zeros_like(c)
    for j in range(c.shape[0]):
        if c[j] > 0:
            if lo[j] == -INF:
                return LpResult(LP_UNBOUNDED)
            values[j] = lo[j]
        elif c[j] < 0:
            if up[j] == INF:
                return LpResult(LP_UNBOUNDED)
            values[j] = up[j]
        else:
            values[j] = lo[j] if lo[j] > -INF else (up[j] if up[j] < INF else 0.0)
    return LpResult(
        LP_OPTIMAL,
        values=tuple(float(v) for v in values),
        objective=float(c @ values + offset),
        iterations=0,
    )


class _Tableau:
    """Mutable simplex state over a fixed column set."""

    def __init__(self, A, b, lower, upper):
        self.A = A
        self.b = b
        self.lower = lower
        self.upper = upper
        self.m, self.n_cols = A.shape
        self.x = np.zeros(self.n_cols)
        self.pos = np.full(self.n_cols, _AT_LOWER, dtype=np.int8)
        finite_lower = lower > -INF
        finite_upper = upper < INF
        at_upper = ~finite_lower & finite_upper
        self.x[finite_lower] = lower[finite_lower]
        self.x[at_upper] = upper[at_upper]
        self.pos[at_upper] = _AT_UPPER
        self.pos[~finite_lower & ~finite_upper] = _FREE
        # fixed columns (equality slacks) may never enter the basis
        self.enterable = (upper - lower) > _PIVOT_TOL
        self.basis = np.empty(0, dtype=int)
        self.binv = np.empty((self.m, self.m))

    def set_basis(self, basis):
        self.basis = np.asarray(basis, dtype=int)
        self.pos[self.basis] = _BASIC
        self.refactor()

    def refactor(self):
        B = self.A[:, self.basis]
        self.binv = np.linalg.inv(B)
        nonbasic_part = self.b - self.A @ self.x + B @ self.x[self.basis]
        self.x[self.basis] = self.binv @ nonbasic_part

    def solution_value(self, c):
        return float(c @ self.x)


def _two_phase(c, A, b, lower, upper, iteration_limit):
    m, n_real = A.shape
    finite_lower = lower > -INF
    finite_upper = upper < INF
    x0 = np.where(finite_lower, lower, np.where(finite_upper, upper, 0.0))
    residual = b - A @ x0

    art_signs = np.where(residual >= 0, 1.0, -1.0)
    A1 = np.hstack([A, np.diag(art_signs)])
    lower1 = np.concatenate([lower, np.zeros(m)])
    upper1 = np.concatenate([upper, np.full(m, INF)])
    c1 = np.concatenate([np.zeros(n_real), np.ones(m)])

    tab = _Tableau(A1, b, lower1, upper1)
    tab.set_basis(np.arange(n_real, n_real + m))

    state = {"iterations": 0, "degenerate": 0, "since_refactor": 0}
    status = _optimize(tab, c1, n_real, state, iteration_limit)
    if status == LP_ITERATION_LIMIT:
        return status, tab.x[:n_real], state["iterations"]
    if tab.solution_value(c1) > _FEAS_TOL:
        return LP_INFEASIBLE, tab.x[:n_real], state["iterations"]

    keep_rows = _evict_artificials(tab, n_real)
    if len(keep_rows) < m:
        A = A[keep_rows]
        b = b[keep_rows]
        m = len(keep_rows)
        if m == 0:
            # every row was redundant; optimize over bounds alone
            box = _solve_box_only(c, 0.0, lower, upper)
            if box.status != LP_OPTIMAL:
                return box.status, x0, state["iterations"]
            return LP_OPTIMAL, np.array(box.values), state["iterations"]

    tab2 = _Tableau(A, b, lower, upper)
    tab2.x[:] = tab.x[:n_real]
    tab2.pos[:] = tab.pos[:n_real]
    basis2 = [j for j in tab.basis if j < n_real]
    tab2.basis = np.asarray(basis2, dtype=int)
    tab2.refactor()

    status = _optimize(tab2, c, n_real, state, iteration_limit)
    return status, tab2.x, state["iterations"]


def _evict_artificials(tab, n_real):
    """Pivot zero-level artificials out of the basis; report surviving rows."""
    keep = []
    for r in range(tab.m):
        jb = tab.basis[r]
        if jb < n_real:
            keep.append(r)
            continue
        row = tab.binv[r] @ tab.A[:, :n_real]
        row_abs = np.abs(row)
        row_abs[tab.pos[:n_real] == _BASIC] = 0.0
        j = int(np.argmax(row_abs))
        if row_abs[j] <= _PIVOT_TOL:
            continue  # redundant row
        w = tab.binv @ tab.A[:, j]
        _pivot(tab, j, r, w, entering_value=tab.x[j])
        keep.append(r)
    return keep


def _pivot(tab, j_enter, r_leave, w, entering_value):
    wr = w[r_leave]
    tab.binv[r_leave] /= wr
    others = w.copy()
    others[r_leave] = 0.0
    tab.binv -= np.outer(others, tab.binv[r_leave])
    tab.basis[r_leave] = j_enter
    tab.pos[j_enter] = _BASIC
    tab.x[j_enter] = entering_value


def _optimize(tab, c, n_eligible, state, iteration_limit):
    """Run pivots until optimal; columns >= n_eligible never enter."""
    neg_inf = -INF
    while True:
        if state["iterations"] >= iteration_limit:
            return LP_ITERATION_LIMIT
        if state["since_refactor"] >= _REFACTOR_EVERY:
            tab.refactor()
            state["since_refactor"] = 0

        y = c[tab.basis] @ tab.binv
        d = c - y @ tab.A
        bland = state["degenerate"] >= _BLAND_AFTER

        dn = d[:n_eligible]
        pos = tab.pos[:n_eligible]
        score = np.full(n_eligible, neg_inf)
        at_lower = (pos == _AT_LOWER) & tab.enterable[:n_eligible]
        at_upper = (pos == _AT_UPPER) & tab.enterable[:n_eligible]
        free = pos == _FREE
        score[at_lower] = -dn[at_lower]
        score[at_upper] = dn[at_upper]
        score[free] = np.abs(dn[free])
        if bland:
            eligible = np.where(score > _COST_TOL)[0]
            if eligible.size == 0:
                return LP_OPTIMAL
            j = int(eligible[0])
        else:
            j = int(np.argmax(score))
            if score[j] <= _COST_TOL:
                return LP_OPTIMAL
        direction = 1.0 if (tab.pos[j] == _AT_LOWER or d[j] < 0) else -1.0

        w = tab.binv @ tab.A[:, j]
        t, r_leave = _ratio_test(tab, j, direction, w, bland)
        if t == INF:
            return LP_UNBOUNDED

        if t <= _DEGENERATE_TOL:
            state["degenerate"] += 1
        state["iterations"] += 1
        state["since_refactor"] += 1

        tab.x[tab.basis] -= direction * t * w
        if r_leave < 0:
            # bound flip, no basis change
            tab.x[j] = tab.upper[j] if direction > 0 else tab.lower[j]
            tab.pos[j] = _AT_UPPER if direction > 0 else _AT_LOWER
        else:
            entering_value = tab.x[j] + direction * t
            leaving = tab.basis[r_leave]
            delta = -direction * w[r_leave]
            if delta < 0:
                tab.x[leaving] = tab.lower[leaving]
                tab.pos[leaving] = _AT_LOWER
            else:
                tab.x[leaving] = tab.upper[leaving]
                tab.pos[leaving] = _AT_UPPER
            _pivot(tab, j, r_leave, w, entering_value)


def _ratio_test(tab, j_enter, direction, w, bland):
    """Max step for the entering variable; returns (t, leaving row or -1)."""
    delta = -direction * w
    xb = tab.x[tab.basis]
    lb = tab.lower[tab.basis]
    ub = tab.upper[tab.basis]
    limits = np.full(tab.m, INF)
    dec = delta < -_PIVOT_TOL
    inc = delta > _PIVOT_TOL
    with np.errstate(invalid="ignore"):
        limits[dec] = (xb[dec] - lb[dec]) / (-delta[dec])
        limits[inc] = (ub[inc] - xb[inc]) / delta[inc]
    np.nan_to_num(limits, copy=False, nan=INF, posinf=INF)
    np.maximum(limits, 0.0, out=limits)

    flip = tab.upper[j_enter] - tab.lower[j_enter]
    t_row = float(limits.min()) if tab.m else INF
    if flip <= t_row:
        # bound flip is at least as tight (inf == inf signals unboundedness)
        return flip, -1

    ties = np.where(limits <= t_row + _PIVOT_TOL)[0]
    if bland:
        basis_ids = tab.basis[ties]
        r = int(ties[int(np.argmin(basis_ids))])
    else:
        r = int(ties[int(np.argmax(np.abs(delta[ties])))])
    return t_row, r
