"""Panel regression explaining efficiency scores by external drivers.

Scores r live in the open interval (0, s) where s is the scoring ceiling
(2 for the Chebyshev scorer). The transform w = ln(s/r - 1) maps them to
the whole real line, where a linear model with a shared random effect per
time period applies:

    w[unit, t] = alpha - beta' z[unit, t] + u[t] + v[unit, t]

u[t] is a year-level shock common to all units (variance sigma^2) and v
is observation noise (variance omega^2). `beta` carries a minus sign so
that positive coefficients mean the driver *raises* efficiency.

Estimation is feasible GLS with variance components recovered from the
within (time-demeaned) and between (time-means) regressions, followed by
quasi-demeaning with a per-period weight that adapts to unbalanced
panels. With a zero estimated time-effect variance the fit collapses to
pooled OLS, as it should.
"""

import json
import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from ._util import atomic_write
from ._validation import as_float_matrix, as_float_vector
from .errors import ConfigError, DataError


def logit_transform(scores, ceiling: float = 2.0):
    """Map scores in (0, ceiling) to the real line via w = ln(ceiling/r - 1).

    Raises DataError when any score sits on or outside the open interval,
    since such values come from data, not from caller code.
    """
    if not ceiling > 0:
        raise ValueError(f"ceiling must be positive, got {ceiling}")
    arr = np.asarray(scores, dtype=float)
    bad = ~np.isfinite(arr) | (arr <= 0) | (arr >= ceiling)
    if np.any(bad):
        offenders = np.atleast_1d(arr)[np.atleast_1d(bad)]
        raise DataError(
            f"scores must lie strictly inside (0, {ceiling}); "
            f"offending values: {', '.join(repr(float(v)) for v in offenders[:10])}"
        )
    out = np.log(ceiling / arr - 1.0)
    return float(out) if arr.ndim == 0 else out


def inverse_logistic(w, ceiling: float = 2.0):
    """Inverse of `logit_transform`: r = ceiling / (1 + e^w), overflow-safe."""
    if not ceiling > 0:
        raise ValueError(f"ceiling must be positive, got {ceiling}")
    arr = np.asarray(w, dtype=float)
    out = ceiling * np.exp(-np.logaddexp(0.0, arr))
    return float(out) if arr.ndim == 0 else out


def _group_means(values: np.ndarray, inverse: np.ndarray, counts: np.ndarray) -> np.ndarray:
    sums = np.zeros((counts.shape[0],) + values.shape[1:])
    np.add.at(sums, inverse, values)
    if values.ndim == 1:
        return sums / counts
    return sums / counts[:, None]


class RandomTimeEffectsGLS(BaseEstimator):
    """Linear panel regression with a random intercept shared per time period.

    fit(X, y, times) estimates y = a + X b + u[t] + v with u a mean-zero
    period effect and v observation noise. Variance components come from
    the within/between decomposition; the final stage runs OLS on
    quasi-demeaned data, where each observation subtracts
    theta[t] = 1 - sqrt(omega^2 / (count[t] * sigma^2 + omega^2)) times
    its period mean (intercept column included).

    Fitted attributes: ``intercept_``, ``coef_``, ``stderr_intercept_``,
    ``stderr_coef_``, ``t_intercept_``, ``t_coef_``, ``sigma2_time_``,
    ``sigma2_obs_``, ``theta_`` (dict period -> weight), ``n_obs_``,
    ``n_times_``, ``df_resid_`` and ``warnings_``.
    """

    def fit(self, X, y, times):
        X = as_float_matrix("X", X)
        y = as_float_vector("y", y)
        times = np.asarray(times)
        n, k = X.shape
        if y.shape[0] != n or times.shape[0] != n:
            raise ValueError(
                f"shape mismatch: X has {n} rows, y has {y.shape[0]}, times has {times.shape[0]}"
            )
        unique_times, inverse = np.unique(times, return_inverse=True)
        t = unique_times.shape[0]
        counts = np.bincount(inverse)
        warnings = []

        if n - t - k < 1:
            raise DataError(
                f"{n} observations cannot support a time-demeaned fit with "
                f"{t} periods and {k} regressors"
            )

        x_means = _group_means(X, inverse, counts)
        y_means = _group_means(y, inverse, counts)

        # observation-level variance from the time-demeaned regression
        x_within = X - x_means[inverse]
        y_within = y - y_means[inverse]
        beta_within = np.linalg.lstsq(x_within, y_within, rcond=None)[0]
        resid_within = y_within - x_within @ beta_within
        sigma2_obs = float(resid_within @ resid_within) / (n - t - k)

        # period-level variance from the regression on period means
        sigma2_time = 0.0
        if t - k - 1 >= 1:
            design_between = np.column_stack([np.ones(t), x_means])
            beta_between = np.linalg.lstsq(design_between, y_means, rcond=None)[0]
            resid_between = y_means - design_between @ beta_between
            harmonic_count = t / float(np.sum(1.0 / counts))
            sigma2_time = float(resid_between @ resid_between) / (t - k - 1) - sigma2_obs / harmonic_count
            if sigma2_time < 0.0:
                warnings.append(
                    "estimated time-effect variance was negative and has been truncated to zero"
                )
                sigma2_time = 0.0
        else:
            warnings.append(
                f"{t} periods are too few to separate a time-effect variance "
                f"from {k} regressors; assuming zero (pooled fit)"
            )

        theta = 1.0 - np.sqrt(sigma2_obs / (counts * sigma2_time + sigma2_obs))

        design = np.column_stack([np.ones(n), X])
        design_means = _group_means(design, inverse, counts)
        weight = theta[inverse]
        design_star = design - weight[:, None] * design_means[inverse]
        y_star = y - weight * y_means[inverse]

        gram = design_star.T @ design_star
        if np.linalg.matrix_rank(gram) < k + 1:
            raise DataError("regressors are collinear after the panel transformation")
        params = np.linalg.solve(gram, design_star.T @ y_star)
        resid = y_star - design_star @ params
        df_resid = n - k - 1
        s2 = float(resid @ resid) / df_resid
        cov = s2 * np.linalg.inv(gram)
        stderr = np.sqrt(np.diag(cov))

        self.intercept_ = float(params[0])
        self.coef_ = params[1:].copy()
        self.stderr_intercept_ = float(stderr[0])
        self.stderr_coef_ = stderr[1:].copy()
        self.t_intercept_ = self.intercept_ / self.stderr_intercept_
        self.t_coef_ = self.coef_ / self.stderr_coef_
        self.cov_params_ = cov
        self.sigma2_time_ = sigma2_time
        self.sigma2_obs_ = sigma2_obs
        self.theta_ = {period.item() if hasattr(period, "item") else period: float(th)
                       for period, th in zip(unique_times, theta)}
        self.n_obs_ = n
        self.n_times_ = t
        self.df_resid_ = df_resid
        self.warnings_ = tuple(warnings)
        return self

    def predict(self, X):
        X = as_float_matrix("X", X)
        return self.intercept_ + X @ self.coef_


class LogisticEfficiencyModel(BaseEstimator):
    """Random-time-effects regression of bounded scores on external drivers.

    Combines `logit_transform` with `RandomTimeEffectsGLS` and reports the
    driver coefficients with the sign flipped, so ``beta_[j] > 0`` means
    driver j is associated with *higher* scores. ``predict`` returns the
    score a unit with given driver values would get in an average period.

    Parameters
    ----------
    ceiling : float
        Upper end of the open score interval (0, ceiling).
    """

    def __init__(self, ceiling=2.0):
        self.ceiling = ceiling

    def fit(self, Z, scores, times):
        w = logit_transform(np.asarray(scores, dtype=float), self.ceiling)
        gls = RandomTimeEffectsGLS().fit(Z, w, times)
        self.gls_ = gls
        self.alpha_ = gls.intercept_
        self.beta_ = -gls.coef_
        self.se_alpha_ = gls.stderr_intercept_
        self.se_beta_ = gls.stderr_coef_.copy()
        self.t_alpha_ = self.alpha_ / self.se_alpha_
        self.t_beta_ = self.beta_ / self.se_beta_
        self.sigma_ = math.sqrt(gls.sigma2_time_)
        self.omega_ = math.sqrt(gls.sigma2_obs_)
        self.n_obs_ = gls.n_obs_
        self.n_times_ = gls.n_times_
        self.warnings_ = gls.warnings_
        return self

    def predict(self, Z):
        Z = as_float_matrix("Z", Z)
        w = self.alpha_ - Z @ self.beta_
        return inverse_logistic(w, self.ceiling)


@dataclass(frozen=True)
class RegressionSpec:
    """Configuration of one second-stage regression run."""

    ceiling: float = 2.0
    regressors: tuple = ()
    excluded: frozenset = frozenset()

    def __post_init__(self):
        try:
            ceiling = float(self.ceiling)
        except (TypeError, ValueError):
            raise ConfigError(f"regression ceiling must be a number, got {self.ceiling!r}") from None
        if not ceiling > 0:
            raise ConfigError(f"regression ceiling must be positive, got {ceiling}")
        object.__setattr__(self, "ceiling", ceiling)
        object.__setattr__(self, "regressors", tuple(str(r) for r in self.regressors))
        object.__setattr__(self, "excluded", frozenset(str(u) for u in self.excluded))

    def validate(self, data) -> None:
        if not self.regressors:
            raise ConfigError("regression needs at least one regressor variable")
        if len(set(self.regressors)) != len(self.regressors):
            raise ConfigError(f"duplicate regressor in {self.regressors}")
        for name in self.regressors:
            var = data.variables.get(name)
            if var is None:
                raise ConfigError(f"regressor {name!r} is not a dataset variable")
            if var.role != "regressor":
                raise ConfigError(f"variable {name!r} has role {var.role!r}, not 'regressor'")


_FIT_FLOAT_FIELDS = ("alpha", "se_alpha", "t_alpha", "sigma", "omega", "ceiling")
_FIT_LIST_FIELDS = ("beta", "se_beta", "t_beta")


@dataclass(frozen=True)
class RegressionFit:
    """Second-stage estimates for one model variant, JSON round-trippable."""

    model: str
    alpha: float
    beta: tuple
    se_alpha: float
    se_beta: tuple
    t_alpha: float
    t_beta: tuple
    sigma: float
    omega: float
    n_obs: int
    n_units: int
    n_times: int
    excluded: tuple = ()
    warnings: tuple = ()
    ceiling: float = 2.0
    regressors: tuple = ()

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "alpha": self.alpha,
            "beta": list(self.beta),
            "se_alpha": self.se_alpha,
            "se_beta": list(self.se_beta),
            "t_alpha": self.t_alpha,
            "t_beta": list(self.t_beta),
            "sigma": self.sigma,
            "omega": self.omega,
            "n_obs": self.n_obs,
            "n_units": self.n_units,
            "n_times": self.n_times,
            "excluded": list(self.excluded),
            "warnings": list(self.warnings),
            "ceiling": self.ceiling,
            "regressors": list(self.regressors),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def write_json(self, path) -> None:
        with atomic_write(path) as handle:
            handle.write(self.to_json())

    @classmethod
    def from_dict(cls, obj: dict) -> "RegressionFit":
        try:
            return cls(
                model=str(obj["model"]),
                alpha=float(obj["alpha"]),
                beta=tuple(float(b) for b in obj["beta"]),
                se_alpha=float(obj["se_alpha"]),
                se_beta=tuple(float(b) for b in obj["se_beta"]),
                t_alpha=float(obj["t_alpha"]),
                t_beta=tuple(float(b) for b in obj["t_beta"]),
                sigma=float(obj["sigma"]),
                omega=float(obj["omega"]),
                n_obs=int(obj["n_obs"]),
                n_units=int(obj["n_units"]),
                n_times=int(obj["n_times"]),
                excluded=tuple(str(u) for u in obj.get("excluded", ())),
                warnings=tuple(str(w) for w in obj.get("warnings", ())),
                ceiling=float(obj.get("ceiling", 2.0)),
                regressors=tuple(str(r) for r in obj.get("regressors", ())),
            )
        except KeyError as missing:
            raise DataError(f"regression fit JSON lacks required key {missing}") from None

    @classmethod
    def from_json(cls, text: str) -> "RegressionFit":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DataError(f"regression fit is not valid JSON: {exc}") from None
        if not isinstance(obj, dict):
            raise DataError("regression fit JSON must be an object")
        return cls.from_dict(obj)

    @classmethod
    def read_json(cls, path) -> "RegressionFit":
        with open(path, "r", encoding="utf-8") as handle:
            return cls.from_json(handle.read())


def fit_random_time_effects(scores, data, spec: RegressionSpec) -> RegressionFit:
    """Regress a scored panel's transformed scores on dataset regressors.

    `scores` is a PanelScores table, `data` the panel the regressor values
    come from, `spec` the run configuration. Score rows for excluded units
    are skipped; rows lacking a regressor value are dropped with a warning;
    scores outside (0, ceiling) abort with a DataError naming the rows.
    """
    spec.validate(data)
    warnings = []
    scored_units = {row.score.unit for row in scores.rows}
    for unit in sorted(spec.excluded - scored_units):
        warnings.append(f"excluded unit {unit!r} does not appear in the scored panel")

    z_rows, r_values, times, kept_units = [], [], [], set()
    offenders = []
    for row in scores.rows:
        unit = row.score.unit
        if unit in spec.excluded:
            continue
        if unit not in data._unit_index:
            raise DataError(f"scored unit {unit!r} is not in the regression dataset")
        missing = [name for name in spec.regressors if data.is_missing(unit, row.year, name)]
        if missing:
            warnings.append(
                f"dropped {unit!r} year {row.year} from the regression: "
                f"missing {', '.join(missing)}"
            )
            continue
        r = row.score.score
        if not (0.0 < r < spec.ceiling):
            offenders.append(f"({unit!r}, {row.year}, r={r!r})")
            continue
        z_rows.append([data.value(unit, row.year, name) for name in spec.regressors])
        r_values.append(r)
        times.append(row.year)
        kept_units.add(unit)
    if offenders:
        raise DataError(
            f"scores outside the open interval (0, {spec.ceiling}) cannot be "
            f"transformed: {', '.join(offenders)}"
        )
    if not z_rows:
        raise DataError("no usable observations remain for the regression")

    model = LogisticEfficiencyModel(ceiling=spec.ceiling).fit(
        np.array(z_rows), np.array(r_values), np.array(times)
    )
    return RegressionFit(
        model=scores.label,
        alpha=model.alpha_,
        beta=tuple(float(b) for b in model.beta_),
        se_alpha=model.se_alpha_,
        se_beta=tuple(float(s) for s in model.se_beta_),
        t_alpha=float(model.t_alpha_),
        t_beta=tuple(float(t) for t in model.t_beta_),
        sigma=model.sigma_,
        omega=model.omega_,
        n_obs=model.n_obs_,
        n_units=len(kept_units),
        n_times=model.n_times_,
        excluded=tuple(sorted(spec.excluded)),
        warnings=tuple(warnings) + model.warnings_,
        ceiling=spec.ceiling,
        regressors=spec.regressors,
    )


def fitted_curve(fit: RegressionFit, z_grid) -> np.ndarray:
    """Average-period score curve r(z) of a single-regressor fit.

    Returns an (n, 2) array of (z, predicted score) pairs.
    """
    if len(fit.beta) != 1:
        raise ValueError(
            f"a curve needs exactly one regressor, fit has {len(fit.beta)}"
        )
    z = as_float_vector("z_grid", z_grid)
    w = fit.alpha - fit.beta[0] * z
    return np.column_stack([z, inverse_logistic(w, fit.ceiling)])
