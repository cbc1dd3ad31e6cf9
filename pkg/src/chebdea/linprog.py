"""Dense two-phase primal simplex for small linear programs.

Problems are stated as maximization over variables with finite lower bounds
(default 0) and optional upper bounds; rows may mix <=, >= and = senses.
The solver is deterministic: identical inputs take identical pivot paths.
Dantzig pricing is used until a stall is detected, after which Bland's rule
takes over, guaranteeing termination on degenerate instances.

Scope is deliberately small: dense tableaus sized for DEA multiplier
programs (tens of rows and columns). No presolve, no sparsity, no MILP.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import NumericalError

# Conventional tolerances for dense simplex on well-scaled data.
FEASIBILITY_TOL = 1e-9
REDUCED_COST_TOL = 1e-9
PIVOT_TOL = 1e-10

_STALL_LIMIT = 40  # consecutive non-improving pivots before Bland's rule

LESS_EQUAL = "<="
GREATER_EQUAL = ">="
EQUAL = "="
_SENSES = (LESS_EQUAL, GREATER_EQUAL, EQUAL)


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpProblem:
    """A linear program: maximize objective @ x subject to row constraints.

    Parameters
    ----------
    objective : (n,) coefficients of the maximized linear objective.
    constraints : (m, n) row coefficient matrix.
    senses : m row senses, each one of "<=", ">=", "=".
    rhs : (m,) right-hand sides.
    lower_bounds : scalar or (n,); finite variable lower bounds, default 0.
        Free variables are not supported; split them into differences of
        two nonnegative variables instead.
    upper_bounds : optional scalar or (n,); np.inf marks an unbounded
        variable, which is the default.
    """

    objective: np.ndarray
    constraints: np.ndarray
    senses: tuple
    rhs: np.ndarray
    lower_bounds: np.ndarray = None
    upper_bounds: np.ndarray = None

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.objective, dtype=float))
        A = np.asarray(self.constraints, dtype=float)
        if A.size == 0:
            A = A.reshape(0, c.size)
        A = np.atleast_2d(A)
        b = np.atleast_1d(np.asarray(self.rhs, dtype=float))
        senses = tuple(self.senses)
        if c.ndim != 1 or A.ndim != 2:
            raise ValueError("objective must be a vector and constraints a matrix")
        m, n = A.shape
        if c.size != n:
            raise ValueError(f"objective has {c.size} coefficients, constraints have {n} columns")
        if b.size != m:
            raise ValueError(f"rhs has {b.size} entries for {m} constraint rows")
        if len(senses) != m:
            raise ValueError(f"{len(senses)} senses given for {m} constraint rows")
        for s in senses:
            if s not in _SENSES:
                raise ValueError(f"unknown row sense {s!r}")
        lb = self.lower_bounds
        lb = np.zeros(n) if lb is None else np.broadcast_to(np.asarray(lb, dtype=float), (n,)).copy()
        if not np.all(np.isfinite(lb)):
            raise ValueError("lower bounds must be finite")
        ub = self.upper_bounds
        ub = np.full(n, np.inf) if ub is None else np.broadcast_to(np.asarray(ub, dtype=float), (n,)).copy()
        if np.any(ub < lb):
            raise ValueError("upper bounds must not be below lower bounds")
        if not np.all(np.isfinite(c)) or not np.all(np.isfinite(A)) or not np.all(np.isfinite(b)):
            raise ValueError("objective, constraints and rhs must be finite")
        for name, arr in (("objective", c), ("constraints", A), ("rhs", b),
                          ("lower_bounds", lb), ("upper_bounds", ub)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "senses", senses)

    @property
    def n_variables(self) -> int:
        return self.objective.size

    @property
    def n_constraints(self) -> int:
        return self.rhs.size


@dataclass(frozen=True)
class LpSolution:
    """Certified outcome of a solve.

    `objective` and `x` are populated only when status is OPTIMAL.
    """

    status: LpStatus
    objective: float | None
    x: np.ndarray | None
    iterations: int

    @property
    def is_optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


def max_constraint_violation(problem: LpProblem, x: np.ndarray) -> float:
    """Largest violation of rows and bounds at x (0 means feasible)."""
    x = np.asarray(x, dtype=float)
    worst = 0.0
    row_values = problem.constraints @ x
    for value, sense, b in zip(row_values, problem.senses, problem.rhs):
        if sense == LESS_EQUAL:
            worst = max(worst, value - b)
        elif sense == GREATER_EQUAL:
            worst = max(worst, b - value)
        else:
            worst = max(worst, abs(value - b))
    worst = max(worst, float(np.max(problem.lower_bounds - x, initial=0.0)))
    finite = np.isfinite(problem.upper_bounds)
    if np.any(finite):
        worst = max(worst, float(np.max((x - problem.upper_bounds)[finite], initial=0.0)))
    return float(worst)


class _Tableau:
    """Mutable simplex state for one solve; rows are [B^-1 A | B^-1 b]."""

    def __init__(self, body: np.ndarray, basis: list, n_structural: int):
        self.body = body
        self.basis = basis
        self.n_structural = n_structural
        self.iterations = 0
        self.bland = False
        self._stall = 0

    def pivot(self, row: int, col: int, obj_row: np.ndarray):
        body = self.body
        body[row] /= body[row, col]
        factors = body[:, col].copy()
        factors[row] = 0.0
        body -= np.outer(factors, body[row])
        obj_row -= obj_row[col] * body[row]
        self.basis[row] = col
        self.iterations += 1

    def _entering(self, obj_row: np.ndarray, allowed: np.ndarray) -> int:
        reduced = obj_row[:-1]
        candidates = np.flatnonzero(allowed & (reduced < -REDUCED_COST_TOL))
        if candidates.size == 0:
            return -1
        if self.bland:
            return int(candidates[0])
        best = candidates[np.argmin(reduced[candidates])]
        return int(best)

    def _leaving(self, col: int) -> int:
        column = self.body[:, col]
        rhs = self.body[:, -1]
        rows = np.flatnonzero(column > PIVOT_TOL)
        if rows.size == 0:
            return -1
        ratios = rhs[rows] / column[rows]
        best = np.min(ratios)
        tied = rows[ratios <= best + 1e-12]
        # lowest basic-variable index among ties: deterministic, cycle-averse
        return int(min(tied, key=lambda i: self.basis[i]))

    def run(self, obj_row: np.ndarray, allowed: np.ndarray, max_iterations: int) -> str:
        while True:
            col = self._entering(obj_row, allowed)
            if col < 0:
                return "optimal"
            row = self._leaving(col)
            if row < 0:
                return "unbounded"
            before = obj_row[-1]
            self.pivot(row, col, obj_row)
            if obj_row[-1] - before <= 1e-12:
                self._stall += 1
                if self._stall >= _STALL_LIMIT:
                    self.bland = True
            else:
                self._stall = 0
            if self.iterations > max_iterations:
                raise NumericalError(
                    "simplex iteration limit exceeded "
                    f"({max_iterations}); last basis {sorted(self.basis)}"
                )


def solve(problem: LpProblem, max_iterations: int | None = None) -> LpSolution:
    """Solve `problem`, returning an LpSolution with a certified status.

    Raises
    ------
    NumericalError
        If the iteration limit is exceeded (reports the last basis).
    """
    n = problem.n_variables
    shift = problem.lower_bounds

    # Shift to x = shift + z with z >= 0; finite upper bounds become rows.
    rows = [problem.constraints]
    senses = list(problem.senses)
    rhs = [problem.rhs - problem.constraints @ shift]
    ub = problem.upper_bounds - shift
    for j in np.flatnonzero(np.isfinite(ub)):
        bound_row = np.zeros(n)
        bound_row[j] = 1.0
        rows.append(bound_row[None, :])
        senses.append(LESS_EQUAL)
        rhs.append(np.array([ub[j]]))
    A = np.vstack(rows)
    b = np.concatenate(rhs)

    # Nonnegative right-hand sides.
    for i in np.flatnonzero(b < 0):
        A[i] = -A[i]
        b[i] = -b[i]
        if senses[i] == LESS_EQUAL:
            senses[i] = GREATER_EQUAL
        elif senses[i] == GREATER_EQUAL:
            senses[i] = LESS_EQUAL

    m = b.size
    n_slack = sum(1 for s in senses if s != EQUAL)
    art_rows = [i for i, s in enumerate(senses) if s != LESS_EQUAL]
    n_art = len(art_rows)
    total = n + n_slack + n_art

    body = np.zeros((m, total + 1))
    body[:, :n] = A
    body[:, -1] = b
    basis = [0] * m
    slack_col = n
    art_col = n + n_slack
    for i, s in enumerate(senses):
        if s == LESS_EQUAL:
            body[i, slack_col] = 1.0
            basis[i] = slack_col
            slack_col += 1
        elif s == GREATER_EQUAL:
            body[i, slack_col] = -1.0
            slack_col += 1
        if s != LESS_EQUAL:
            body[i, art_col] = 1.0
            basis[i] = art_col
            art_col += 1

    if max_iterations is None:
        max_iterations = 1000 + 100 * (m + n)
    tableau = _Tableau(body, basis, n)
    art_start = n + n_slack

    if n_art:
        # Phase 1: minimize the sum of artificials.
        cost1 = np.zeros(total)
        cost1[art_start:] = 1.0
        obj_row = np.zeros(total + 1)
        obj_row[:-1] = cost1
        for i in art_rows:
            obj_row -= body[i]
        allowed = np.ones(total, dtype=bool)
        tableau.run(obj_row, allowed, max_iterations)
        if -obj_row[-1] > FEASIBILITY_TOL:
            return LpSolution(LpStatus.INFEASIBLE, None, None, tableau.iterations)
        _evict_artificials(tableau, art_start)

    # Phase 2: minimize -objective over structural and slack columns.
    body = tableau.body
    total = body.shape[1] - 1
    cost2 = np.zeros(total)
    cost2[:n] = -problem.objective
    obj_row = np.zeros(total + 1)
    obj_row[:-1] = cost2
    for i, col in enumerate(tableau.basis):
        if cost2[col] != 0.0:
            obj_row -= cost2[col] * body[i]
    allowed = np.ones(total, dtype=bool)
    allowed[art_start:] = False
    tableau.bland = False
    tableau._stall = 0
    outcome = tableau.run(obj_row, allowed, max_iterations)
    if outcome == "unbounded":
        return LpSolution(LpStatus.UNBOUNDED, None, None, tableau.iterations)

    z = np.zeros(total)
    for i, col in enumerate(tableau.basis):
        z[col] = tableau.body[i, -1]
    x = np.maximum(z[:n], 0.0) + shift
    objective = float(problem.objective @ x)
    if max_constraint_violation(problem, x) > 1e-6:
        raise NumericalError("simplex returned an infeasible optimum; ill-conditioned problem")
    return LpSolution(LpStatus.OPTIMAL, objective, x, tableau.iterations)


def _evict_artificials(tableau: _Tableau, art_start: int):
    """Pivot basic artificials out after phase 1, dropping redundant rows."""
    body = tableau.body
    keep = []
    for i in range(body.shape[0]):
        if tableau.basis[i] < art_start:
            keep.append(i)
            continue
        pivots = np.flatnonzero(np.abs(body[i, :art_start]) > PIVOT_TOL)
        if pivots.size == 0:
            continue  # redundant row
        col = int(pivots[0])
        dummy = np.zeros(body.shape[1])
        tableau.pivot(i, col, dummy)
        keep.append(i)
    tableau.body = np.hstack([body[keep][:, :art_start], body[keep][:, -1:]])
    tableau.basis = [tableau.basis[i] for i in keep]
