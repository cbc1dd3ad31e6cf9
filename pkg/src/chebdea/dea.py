"""Chebyshev-distance super-efficiency DEA under constant returns to scale.

Each unit is scored by the largest uniform relative perturbation delta of
its own inputs and outputs that keeps (or first achieves) efficiency
against the frontier spanned by the *other* units; the reported score is
r = 1 + 2*delta. Scores below 1 mean inefficient, scores in [1, 2) mean
efficient, and magnitude measures robustness of that classification.
A classical CRS multiplier-form scorer (`ccr_score`) is included; it is
the reference model whose classification and inefficient-unit ordering
the Chebyshev scores provably reproduce, which the test suite exercises.

Multiplier weights are found by linear programming:

    maximize    delta
    subject to  y_c' mu               >= 1 + 2*delta
                x_c' nu               <= 1 - 2*delta
                Y_rest mu - X_rest nu <= 0
                mu, nu                >= 0

with delta free (split into a difference of nonnegative variables for the
standard-form solver). Columns are rescaled to unit maximum before
solving; by scale invariance this changes no score, and the reported
weights are mapped back to the original data scale.
"""

import csv
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from . import linprog
from ._util import atomic_write, fmt_float
from ._validation import check_frontier_pair, check_unit_labels
from .dataset import DeaConfig, PanelDataset, slice_for_frontier
from .errors import DataError, NumericalError

#: scores within this distance of the efficient boundary classify as efficient
CLASSIFICATION_TOL = 1e-9


@dataclass(frozen=True)
class FrontierInstance:
    """One comparison set: strictly positive inputs (C x I) and outputs (C x J)."""

    inputs: np.ndarray
    outputs: np.ndarray
    units: tuple = None

    def __post_init__(self):
        X, Y = check_frontier_pair(self.inputs, self.outputs)
        X.setflags(write=False)
        Y.setflags(write=False)
        object.__setattr__(self, "inputs", X)
        object.__setattr__(self, "outputs", Y)
        object.__setattr__(self, "units", check_unit_labels(self.units, X.shape[0]))

    @property
    def n_units(self) -> int:
        return self.inputs.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.inputs.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.outputs.shape[1]


@dataclass(frozen=True)
class DeaScore:
    """Score of one unit: robustness radius delta, r = 1 + 2*delta, weights.

    `mu` (output weights) and `nu` (input weights) are expressed on the
    original data scale; they are None on records read back from CSV.
    `efficient` is True iff r >= 1, up to CLASSIFICATION_TOL of roundoff.
    """

    unit: str
    delta: float
    score: float
    efficient: bool
    mu: np.ndarray = None
    nu: np.ndarray = None
    status: str = "optimal"

    @property
    def classification(self) -> str:
        return "efficient" if self.efficient else "inefficient"


def _column_scales(instance: FrontierInstance):
    return instance.inputs.max(axis=0), instance.outputs.max(axis=0)


def _solve_or_raise(problem: linprog.LpProblem, what: str) -> linprog.LpSolution:
    solution = linprog.solve(problem)
    if not solution.is_optimal:
        # cannot happen for valid strictly positive instances; a bug signal
        raise NumericalError(f"{what} LP ended {solution.status.value}; this indicates a solver bug")
    return solution


def chebyshev_score(instance: FrontierInstance, c: int) -> DeaScore:
    """Score unit c of the instance against the frontier of the other units.

    The evaluated unit's own row is removed from the envelopment block, so
    efficient units are ranked by how far their data can move before they
    stop being efficient (super-efficiency).
    """
    C, I, J = instance.n_units, instance.n_inputs, instance.n_outputs
    if not 0 <= c < C:
        raise ValueError(f"unit index {c} out of range for {C} units")
    x_scale, y_scale = _column_scales(instance)
    X = instance.inputs / x_scale
    Y = instance.outputs / y_scale
    others = [k for k in range(C) if k != c]

    # variables: [delta+, delta-, mu (J), nu (I)]
    n = 2 + J + I
    objective = np.zeros(n)
    objective[0], objective[1] = 1.0, -1.0
    rows, senses, rhs = [], [], []
    row = np.zeros(n)
    row[0], row[1] = -2.0, 2.0
    row[2:2 + J] = Y[c]
    rows.append(row)
    senses.append(linprog.GREATER_EQUAL)
    rhs.append(1.0)
    row = np.zeros(n)
    row[0], row[1] = 2.0, -2.0
    row[2 + J:] = X[c]
    rows.append(row)
    senses.append(linprog.LESS_EQUAL)
    rhs.append(1.0)
    for k in others:
        row = np.zeros(n)
        row[2:2 + J] = Y[k]
        row[2 + J:] = -X[k]
        rows.append(row)
        senses.append(linprog.LESS_EQUAL)
        rhs.append(0.0)

    solution = _solve_or_raise(
        linprog.LpProblem(objective, np.array(rows), tuple(senses), np.array(rhs)),
        f"chebyshev score of unit {instance.units[c]}",
    )
    delta = float(solution.x[0] - solution.x[1])
    mu = solution.x[2:2 + J] / y_scale
    nu = solution.x[2 + J:] / x_scale
    return DeaScore(
        unit=instance.units[c],
        delta=delta,
        score=1.0 + 2.0 * delta,
        efficient=delta >= -CLASSIFICATION_TOL / 2.0,
        mu=mu,
        nu=nu,
    )


def ccr_score(instance: FrontierInstance, c: int, super_efficiency: bool = False) -> float:
    """Classical CRS input-oriented multiplier-form efficiency of unit c.

    maximize y_c' mu  s.t.  x_c' nu = 1,  Y mu - X nu <= 0,  mu, nu >= 0.
    With `super_efficiency` the evaluated row leaves the envelopment block
    and the value may exceed 1; without it the value lies in (0, 1].
    """
    C, I, J = instance.n_units, instance.n_inputs, instance.n_outputs
    if not 0 <= c < C:
        raise ValueError(f"unit index {c} out of range for {C} units")
    x_scale, y_scale = _column_scales(instance)
    X = instance.inputs / x_scale
    Y = instance.outputs / y_scale
    envelopment = [k for k in range(C) if not (super_efficiency and k == c)]

    # variables: [mu (J), nu (I)]
    n = J + I
    objective = np.concatenate([Y[c], np.zeros(I)])
    rows = [np.concatenate([np.zeros(J), X[c]])]
    senses = [linprog.EQUAL]
    rhs = [1.0]
    for k in envelopment:
        rows.append(np.concatenate([Y[k], -X[k]]))
        senses.append(linprog.LESS_EQUAL)
        rhs.append(0.0)
    solution = _solve_or_raise(
        linprog.LpProblem(objective, np.array(rows), tuple(senses), np.array(rhs)),
        f"CCR score of unit {instance.units[c]}",
    )
    return float(solution.objective)


class ChebyshevDEA(BaseEstimator):
    """Estimator computing Chebyshev-distance super-efficiency scores.

    fit(X, Y) scores every row of the (inputs, outputs) pair against the
    frontier of the remaining rows. Fitted attributes:

    - ``delta_`` : (C,) optimal robustness radii;
    - ``scores_`` : (C,) efficiency scores r = 1 + 2*delta, in (0, 2);
    - ``efficient_`` : (C,) boolean classification (r >= 1);
    - ``mu_`` : (C, J) output weights; ``nu_`` : (C, I) input weights;
    - ``units_`` : unit labels.
    """

    def fit(self, X, Y, units=None):
        instance = FrontierInstance(X, Y, units)
        results = [chebyshev_score(instance, c) for c in range(instance.n_units)]
        self.units_ = instance.units
        self.delta_ = np.array([s.delta for s in results])
        self.scores_ = np.array([s.score for s in results])
        self.efficient_ = np.array([s.efficient for s in results])
        self.mu_ = np.vstack([s.mu for s in results])
        self.nu_ = np.vstack([s.nu for s in results])
        self.results_ = tuple(results)
        return self

    def fit_predict(self, X, Y, units=None):
        """Fit and return the scores of the fitted rows."""
        return self.fit(X, Y, units=units).scores_


class CCR(BaseEstimator):
    """Estimator computing classical CRS multiplier-form efficiencies.

    Parameters
    ----------
    super_efficiency : bool
        Exclude each evaluated row from its own envelopment block, letting
        efficient rows score above 1.
    """

    def __init__(self, super_efficiency=False):
        self.super_efficiency = super_efficiency

    def fit(self, X, Y, units=None):
        instance = FrontierInstance(X, Y, units)
        self.units_ = instance.units
        self.scores_ = np.array(
            [ccr_score(instance, c, self.super_efficiency) for c in range(instance.n_units)]
        )
        return self

    def fit_predict(self, X, Y, units=None):
        return self.fit(X, Y, units=units).scores_


@dataclass(frozen=True)
class PanelScoreRow:
    year: int
    score: DeaScore


@dataclass(frozen=True)
class PanelScores:
    """All per-(unit, year) scores of one model variant plus its drop report."""

    label: str
    rows: tuple
    drops: tuple = ()

    def get(self, unit, year) -> DeaScore:
        for row in self.rows:
            if row.year == year and row.score.unit == unit:
                return row.score
        raise KeyError((unit, year))

    @property
    def years(self) -> tuple:
        return tuple(sorted({row.year for row in self.rows}))

    def for_year(self, year) -> tuple:
        return tuple(row.score for row in self.rows if row.year == year)

    def write_csv(self, path):
        with atomic_write(path) as handle:
            writer = csv.writer(handle)
            writer.writerow(["unit", "year", "delta", "r", "classification"])
            for row in self.rows:
                s = row.score
                writer.writerow([s.unit, str(row.year), fmt_float(s.delta), fmt_float(s.score), s.classification])

    def write_drop_report(self, path):
        with atomic_write(path) as handle:
            writer = csv.writer(handle)
            writer.writerow(["unit", "year", "reason"])
            for drop in self.drops:
                writer.writerow([drop.unit, str(drop.year), drop.reason])

    @classmethod
    def read_csv(cls, path, label=None) -> "PanelScores":
        """Rebuild a score table from `write_csv` output (weights omitted)."""
        rows = []
        with open(path, "r", encoding="utf-8", newline="") as handle:
            reader = csv.DictReader(handle)
            expected = {"unit", "year", "delta", "r", "classification"}
            if reader.fieldnames is None or not expected.issubset(reader.fieldnames):
                raise DataError(f"{path}: expected columns {sorted(expected)}, got {reader.fieldnames}")
            for record in reader:
                try:
                    year = int(record["year"])
                    delta = float(record["delta"])
                    score = float(record["r"])
                except ValueError:
                    raise DataError(f"{path}: malformed score row {record}") from None
                rows.append(PanelScoreRow(
                    year,
                    DeaScore(record["unit"], delta, score, record["classification"] == "efficient"),
                ))
        return cls(label=label or "scores", rows=tuple(rows))


def _score_slice(args):
    year, X, Y, units = args
    instance = FrontierInstance(X, Y, units)
    return [PanelScoreRow(year, chebyshev_score(instance, c)) for c in range(instance.n_units)]


def score_panel(data: PanelDataset, config: DeaConfig, jobs: int = 1) -> PanelScores:
    """Score every retained unit of every frontier year the lag allows.

    Frontier years run from ``first year + lag`` through the last year; each
    year's frontier is built independently, so a unit missing data in one
    year is dropped from that year only. Rows are ordered by (year, unit
    order in the dataset) regardless of `jobs`.
    """
    config.validate(data)
    slices = [
        slice_for_frontier(data, config, year)
        for year in data.years[config.lag:]
    ]
    tasks = [(s.year, s.inputs, s.outputs, s.units) for s in slices]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            per_year = list(pool.map(_score_slice, tasks))
    else:
        per_year = [_score_slice(t) for t in tasks]
    rows = [row for year_rows in per_year for row in year_rows]
    drops = [drop for s in slices for drop in s.dropped]
    return PanelScores(label=config.label, rows=tuple(rows), drops=tuple(drops))
