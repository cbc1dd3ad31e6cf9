"""Robustness-based efficiency scores for panels, with a second-stage regression.

The scorer measures, for each decision-making unit, the largest uniform
relative change of its inputs and outputs that flips (or preserves) its
efficiency status against the frontier of the remaining units, and maps
that radius to a score in (0, 2). The second stage explains the scores by
external drivers through a logistic transform and a random-time-effects
panel regression. See the README for the CLI pipeline.
"""

from .dataset import (
    DeaConfig,
    DropRecord,
    FrontierSlice,
    PanelDataset,
    Variable,
    load_csv,
    slice_for_frontier,
)
from .dea import (
    CCR,
    ChebyshevDEA,
    DeaScore,
    FrontierInstance,
    PanelScores,
    ccr_score,
    chebyshev_score,
    score_panel,
)
from .errors import ChebdeaError, ConfigError, DataError, NumericalError
from .linprog import LpProblem, LpSolution, LpStatus, solve
from .report import (
    DensityEstimate,
    Histogram,
    histogram,
    kernel_density,
    silverman_bandwidth,
)
from .secondstage import (
    LogisticEfficiencyModel,
    RandomTimeEffectsGLS,
    RegressionFit,
    RegressionSpec,
    fit_random_time_effects,
    fitted_curve,
    inverse_logistic,
    logit_transform,
)
from .synthetic import example_dataset

__version__ = "0.1.0"

__all__ = [
    "CCR",
    "ChebdeaError",
    "ChebyshevDEA",
    "ConfigError",
    "DataError",
    "DeaConfig",
    "DeaScore",
    "DensityEstimate",
    "DropRecord",
    "FrontierInstance",
    "FrontierSlice",
    "Histogram",
    "LogisticEfficiencyModel",
    "LpProblem",
    "LpSolution",
    "LpStatus",
    "NumericalError",
    "PanelDataset",
    "PanelScores",
    "RandomTimeEffectsGLS",
    "RegressionFit",
    "RegressionSpec",
    "Variable",
    "ccr_score",
    "chebyshev_score",
    "example_dataset",
    "fit_random_time_effects",
    "fitted_curve",
    "histogram",
    "inverse_logistic",
    "kernel_density",
    "load_csv",
    "logit_transform",
    "score_panel",
    "silverman_bandwidth",
    "slice_for_frontier",
    "solve",
    "__version__",
]
