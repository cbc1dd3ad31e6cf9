"""Reproducible synthetic panels for the demo pipeline and the test suite.

Everything here is driven by `numpy.random.default_rng` with an explicit
seed, so a given (function, seed) pair always produces the same data. The
bundled example files under ``chebdea/data`` are a frozen snapshot of
`example_dataset(seed=42)`; the demo subcommand reads the snapshot rather
than regenerating it, keeping runs byte-identical across machines.
"""

import numpy as np

from .dataset import PanelDataset, Variable
from .dea import DeaScore, PanelScoreRow, PanelScores
from .secondstage import inverse_logistic

EXAMPLE_SEED = 23
EXAMPLE_OUTLIER = "C15"


def regression_panel(
    alpha: float,
    beta: float,
    sigma: float,
    omega: float,
    n_units: int,
    n_times: int,
    seed: int,
    ceiling: float = 2.0,
    z_low: float = 0.01,
    z_high: float = 0.09,
):
    """Simulate bounded scores from the logistic random-time-effects model.

    Draws a driver z ~ U(z_low, z_high) per observation, a shared shock
    u[t] ~ N(0, sigma^2) per period and noise v ~ N(0, omega^2), then sets
    r = ceiling / (1 + exp(alpha - beta*z + u[t] + v)). Returns flat
    (z, r, periods) arrays of length n_units * n_times, grouped by period.
    """
    rng = np.random.default_rng(seed)
    z = rng.uniform(z_low, z_high, size=(n_units, n_times))
    u = rng.normal(0.0, sigma, size=n_times)
    v = rng.normal(0.0, omega, size=(n_units, n_times))
    w = alpha - beta * z + u[None, :] + v
    r = inverse_logistic(w, ceiling)
    periods = np.broadcast_to(np.arange(n_times), (n_units, n_times))
    order = np.argsort(periods.ravel(), kind="stable")
    return z.ravel()[order], r.ravel()[order], periods.ravel()[order]


def scored_panel(
    alpha: float,
    beta: float,
    sigma: float,
    omega: float,
    n_units: int,
    n_times: int,
    seed: int,
    ceiling: float = 2.0,
    label: str = "synthetic",
    first_year: int = 2008,
    regressor: str = "driver",
):
    """Wrap `regression_panel` draws into (PanelScores, PanelDataset).

    The score table carries the simulated r values as if a scorer had
    produced them; the dataset holds the matching driver variable. Useful
    for exercising the full second-stage path end to end.
    """
    z, r, periods = regression_panel(
        alpha, beta, sigma, omega, n_units, n_times, seed, ceiling=ceiling
    )
    units = tuple(f"U{i + 1:03d}" for i in range(n_units))
    years = tuple(first_year + t for t in range(n_times))
    values = np.full((n_units, n_times, 1), np.nan)
    rows = []
    # period-major layout from regression_panel: index = t * n_units + unit
    for t in range(n_times):
        for u in range(n_units):
            idx = t * n_units + u
            values[u, t, 0] = z[idx]
            score = float(r[idx])
            rows.append(PanelScoreRow(
                years[t],
                DeaScore(
                    unit=units[u],
                    delta=(score - 1.0) / 2.0,
                    score=score,
                    efficient=score >= 1.0,
                ),
            ))
    data = PanelDataset(
        units=units,
        years=years,
        variables={regressor: Variable(regressor, "regressor")},
        values=values,
    )
    return PanelScores(label=label, rows=tuple(rows)), data


def example_dataset(seed: int = EXAMPLE_SEED) -> PanelDataset:
    """A 28-unit, 2007-2014 research panel with realistic shape.

    Inputs are research spending (TERD, million euro) and research staff
    (SAE, thousand persons); outputs are citation volume (CIT) and patent
    applications (EPO), produced one year after the inputs via a
    constant-returns technology scaled by a unit-year efficiency level
    that rises with GDP per capita (GDP, million euro). A common
    year-level factor stretches or shrinks every unit's efficiency gap,
    so the second stage has a real time effect to find. One unit (C15) is
    a small high-GDP outlier, and one input cell (SAE of C07 in 2009) is
    left missing to exercise the drop path.
    """
    rng = np.random.default_rng(seed)
    n_units, n_years = 28, 8
    units = tuple(f"C{i + 1:02d}" for i in range(n_units))
    years = tuple(range(2007, 2007 + n_years))
    steps = np.arange(n_years)

    gdp_base = rng.uniform(0.010, 0.075, n_units)
    gdp_base[units.index(EXAMPLE_OUTLIER)] = 0.092
    gdp_growth = rng.normal(0.02, 0.008, n_units)
    gdp_noise = rng.normal(0.0, 0.006, (n_units, n_years))
    gdp = gdp_base[:, None] * (1.0 + gdp_growth[:, None]) ** steps * (1.0 + gdp_noise)

    terd_base = rng.lognormal(np.log(1500.0), 1.0, n_units)
    sae_base = rng.lognormal(np.log(35.0), 0.9, n_units)
    input_growth = rng.normal(0.02, 0.01, n_units)
    terd_noise = rng.normal(0.0, 0.03, (n_units, n_years))
    sae_noise = rng.normal(0.0, 0.03, (n_units, n_years))
    terd = terd_base[:, None] * (1.0 + input_growth[:, None]) ** steps * np.exp(terd_noise)
    sae = sae_base[:, None] * (1.0 + input_growth[:, None]) ** steps * np.exp(sae_noise)

    # efficiency rises with GDP per capita; patents react more strongly
    year_spread = np.exp(rng.normal(0.0, 0.16, n_years))
    reach = 1.0 / (1.0 + np.exp(-(gdp - 0.040) / 0.012))
    raw_cit = np.clip(0.30 + 0.55 * reach + rng.normal(0.0, 0.06, (n_units, n_years)), 0.10, 0.97)
    raw_epo = np.clip(0.22 + 0.62 * reach ** 1.3 + rng.normal(0.0, 0.07, (n_units, n_years)), 0.08, 0.97)
    eff_cit = np.maximum(1.0 - year_spread[None, :] * (1.0 - raw_cit), 0.05)
    eff_epo = np.maximum(1.0 - year_spread[None, :] * (1.0 - raw_epo), 0.05)

    lag_idx = np.maximum(steps - 1, 0)
    terd_prev, sae_prev = terd[:, lag_idx], sae[:, lag_idx]
    cit = eff_cit * 0.9 * terd_prev ** 0.55 * sae_prev ** 0.45
    epo = eff_epo * 1.4 * terd_prev ** 0.60 * sae_prev ** 0.40

    values = np.stack([terd, sae, cit, epo, gdp], axis=2)
    values[units.index("C07"), years.index(2009), 1] = np.nan
    return PanelDataset(
        units=units,
        years=years,
        variables={
            "TERD": Variable("TERD", "input", "research spending, million euro"),
            "SAE": Variable("SAE", "input", "research staff, thousand persons"),
            "CIT": Variable("CIT", "output", "citation volume"),
            "EPO": Variable("EPO", "output", "patent applications"),
            "GDP": Variable("GDP", "regressor", "GDP per capita, million euro"),
        },
        values=values,
    )
