"""Independent reference routes used to cross-check the library.

Nothing here imports the solver internals: the LP reference enumerates
polytope vertices directly, and the single-input single-output scorers
use closed-form ratio arithmetic derived by hand. Both are slow and
simple on purpose.
"""

import itertools

import numpy as np

from chebdea import linprog


def leq_form(problem):
    """Flatten a problem into (A_ub, b_ub, A_eq, b_eq) with bounds as rows.

    Requires every variable to have a finite upper bound, so the feasible
    set is a polytope and vertex enumeration is exhaustive.
    """
    n = problem.n_variables
    if not np.all(np.isfinite(problem.upper_bounds)):
        raise ValueError("vertex enumeration needs finite upper bounds")
    rows_ub, rhs_ub, rows_eq, rhs_eq = [], [], [], []
    for a, sense, b in zip(problem.constraints, problem.senses, problem.rhs):
        if sense == linprog.LESS_EQUAL:
            rows_ub.append(a)
            rhs_ub.append(b)
        elif sense == linprog.GREATER_EQUAL:
            rows_ub.append(-a)
            rhs_ub.append(-b)
        else:
            rows_eq.append(a)
            rhs_eq.append(b)
    eye = np.eye(n)
    for j in range(n):
        rows_ub.append(-eye[j])
        rhs_ub.append(-problem.lower_bounds[j])
        rows_ub.append(eye[j])
        rhs_ub.append(problem.upper_bounds[j])
    A_ub = np.array(rows_ub)
    b_ub = np.array(rhs_ub)
    A_eq = np.array(rows_eq).reshape(len(rows_eq), n)
    b_eq = np.array(rhs_eq)
    return A_ub, b_ub, A_eq, b_eq


def vertex_optimum(problem, tol=1e-9):
    """Maximum of the objective over all polytope vertices.

    Returns ("optimal", value) or ("infeasible", None). Every vertex of a
    polytope is the solution of n active constraints, so trying all
    combinations of rows is exhaustive for the small sizes used in tests.
    """
    c = problem.objective
    n = c.size
    A_ub, b_ub, A_eq, b_eq = leq_form(problem)
    k = A_eq.shape[0]
    need = n - k
    if need < 0:
        raise ValueError(f"{k} equalities exceed {n} variables")
    combos = list(itertools.combinations(range(A_ub.shape[0]), need))
    M = np.empty((len(combos), n, n))
    R = np.empty((len(combos), n))
    for i, combo in enumerate(combos):
        M[i, :k] = A_eq
        R[i, :k] = b_eq
        M[i, k:] = A_ub[list(combo)]
        R[i, k:] = b_ub[list(combo)]
    keep = np.abs(np.linalg.det(M)) > 1e-12
    if not keep.any():
        return "infeasible", None
    X = np.linalg.solve(M[keep], R[keep][..., None])[..., 0]
    exact = np.abs(np.einsum("qij,qj->qi", M[keep], X) - R[keep]).max(axis=1) < 1e-7
    feasible = (A_ub @ X.T <= b_ub[:, None] + tol).all(axis=0)
    if k:
        feasible &= (np.abs(A_eq @ X.T - b_eq[:, None]) <= tol).all(axis=0)
    X = X[exact & feasible]
    if X.shape[0] == 0:
        return "infeasible", None
    return "optimal", float(np.max(X @ c))


def random_bounded_lp(rng):
    """A random box-bounded LP whose feasibility is known by construction.

    Feasible instances are built around an interior point x0 with row
    margins of at least 0.1, far above solver tolerances; infeasible ones
    append a contradictory row pair with a gap of at least 0.1. Returns
    (problem, expected_feasible).
    """
    n = int(rng.integers(1, 5))
    feasible = bool(rng.uniform() < 0.7)
    m = int(rng.integers(0, 7)) if feasible else int(rng.integers(0, 5))
    x0 = rng.uniform(0.2, 2.0, n)
    upper = x0 + rng.uniform(0.5, 3.0, n)
    A, senses, b = [], [], []
    n_eq = 0
    for _ in range(m):
        a = rng.normal(0.0, 1.0, n)
        margin = rng.uniform(0.1, 2.0)
        kind = rng.uniform()
        if kind < 0.15 and n_eq < n - 1:
            senses.append(linprog.EQUAL)
            b.append(float(a @ x0))
            n_eq += 1
        elif kind < 0.6:
            senses.append(linprog.LESS_EQUAL)
            b.append(float(a @ x0 + margin))
        else:
            senses.append(linprog.GREATER_EQUAL)
            b.append(float(a @ x0 - margin))
        A.append(a)
    if not feasible:
        a = rng.normal(0.0, 1.0, n)
        pivot = float(a @ x0)
        gap = rng.uniform(0.1, 1.0)
        A.extend([a, a])
        senses.extend([linprog.LESS_EQUAL, linprog.GREATER_EQUAL])
        b.extend([pivot, pivot + gap])
    problem = linprog.LpProblem(
        objective=rng.normal(0.0, 1.0, n),
        constraints=np.array(A).reshape(len(b), n),
        senses=tuple(senses),
        rhs=np.array(b),
        upper_bounds=upper,
    )
    return problem, feasible


def ratio_chebyshev(x, y, c):
    """Closed-form scorer for one input and one output.

    With productivity rho = y/x, the best rival ratio q caps the weights,
    and maximizing the perturbation radius gives r = 2*rho_c/(rho_c + q).
    """
    rho = np.asarray(y, dtype=float) / np.asarray(x, dtype=float)
    rival = max(rho[k] for k in range(rho.size) if k != c)
    return 2.0 * rho[c] / (rho[c] + rival)


def ratio_ccr(x, y, c, super_efficiency=False):
    """Closed-form CRS efficiency for one input and one output."""
    rho = np.asarray(y, dtype=float) / np.asarray(x, dtype=float)
    pool = [rho[k] for k in range(rho.size) if not (super_efficiency and k == c)]
    return float(rho[c] / max(pool))


def scipy_chebyshev(X, Y, c):
    """Second route to the robustness radius via scipy's HiGHS solver.

    Same mathematical program, different formulation details: the radius
    stays a single free variable and the data are not rescaled.
    """
    from scipy.optimize import linprog as scipy_linprog

    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    n_units, n_in = X.shape
    n_out = Y.shape[1]
    n = 1 + n_out + n_in
    cost = np.zeros(n)
    cost[0] = -1.0
    rows, rhs = [], []
    row = np.zeros(n)
    row[0] = 2.0
    row[1:1 + n_out] = -Y[c]
    rows.append(row)
    rhs.append(-1.0)
    row = np.zeros(n)
    row[0] = 2.0
    row[1 + n_out:] = X[c]
    rows.append(row)
    rhs.append(1.0)
    for k in range(n_units):
        if k == c:
            continue
        row = np.zeros(n)
        row[1:1 + n_out] = Y[k]
        row[1 + n_out:] = -X[k]
        rows.append(row)
        rhs.append(0.0)
    result = scipy_linprog(
        cost,
        A_ub=np.array(rows),
        b_ub=np.array(rhs),
        bounds=[(None, None)] + [(0, None)] * (n_out + n_in),
        method="highs",
    )
    if result.status != 0:
        raise AssertionError(f"reference LP failed with status {result.status}")
    return 1.0 - 2.0 * result.fun


def scipy_ccr(X, Y, c, super_efficiency=False):
    """Second route to the CRS multiplier-form efficiency via HiGHS."""
    from scipy.optimize import linprog as scipy_linprog

    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    n_units, n_in = X.shape
    n_out = Y.shape[1]
    cost = np.concatenate([-Y[c], np.zeros(n_in)])
    rows, rhs = [], []
    for k in range(n_units):
        if super_efficiency and k == c:
            continue
        rows.append(np.concatenate([Y[k], -X[k]]))
        rhs.append(0.0)
    result = scipy_linprog(
        cost,
        A_ub=np.array(rows),
        b_ub=np.array(rhs),
        A_eq=np.concatenate([np.zeros(n_out), X[c]]).reshape(1, -1),
        b_eq=np.array([1.0]),
        bounds=(0, None),
        method="highs",
    )
    if result.status != 0:
        raise AssertionError(f"reference LP failed with status {result.status}")
    return -result.fun


def random_frontier(rng, min_units=2, max_units=10, max_inputs=3, max_outputs=3):
    """Random strictly positive frontier data spanning three decades of scale."""
    n_units = int(rng.integers(min_units, max_units + 1))
    n_in = int(rng.integers(1, max_inputs + 1))
    n_out = int(rng.integers(1, max_outputs + 1))
    X = 10.0 ** rng.uniform(-1.0, 2.0, (n_units, n_in))
    Y = 10.0 ** rng.uniform(-1.0, 2.0, (n_units, n_out))
    return X, Y
