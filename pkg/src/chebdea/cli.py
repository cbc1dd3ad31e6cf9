"""Command-line pipeline: score a panel, regress the scores, export figures.

A run is described by one JSON config file and one output directory:

    chebdea score   --config run.json --out results/
    chebdea regress --config run.json --out results/
    chebdea report  --config run.json --out results/
    chebdea demo    --out results/

`score` writes `scores_<label>.csv` and `drops_<label>.csv` per model
variant; `regress` reads those score files back, writes `fit_<label>.json`
and prints a summary table; `report` turns scores and fits into
plot-ready CSVs (`density_<label>.csv`, `hist_<label>.csv`,
`curve_<label>.csv`, `scatter.csv`). `demo` stages a bundled example
dataset and config into the output directory and runs all three stages.

All file writes are atomic (write-then-rename) and byte-deterministic:
running the same config on the same data twice produces identical trees.
Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
error.
"""

import argparse
import json
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import synthetic
from ._util import atomic_write
from .dataset import DeaConfig, PanelDataset, load_csv
from .dea import PanelScores, score_panel
from .errors import ConfigError, DataError, NumericalError
from .report import (
    histogram,
    kernel_density,
    write_curve_csv,
    write_density_csv,
    write_histogram_csv,
    write_scatter_csv,
)
from .secondstage import (
    RegressionFit,
    RegressionSpec,
    fit_random_time_effects,
    fitted_curve,
)

DEFAULT_LAG = 1
DEFAULT_BIN_WIDTH = 0.2
DEFAULT_CURVE_POINTS = 200


@dataclass(frozen=True)
class RunConfig:
    """Parsed and validated run configuration."""

    dataset: Path
    schema: dict
    models: tuple
    regression: RegressionSpec = None
    bin_width: float = DEFAULT_BIN_WIDTH
    curve_points: int = DEFAULT_CURVE_POINTS

    def load_dataset(self) -> PanelDataset:
        if not self.dataset.exists():
            raise DataError(f"dataset file {self.dataset} does not exist")
        return load_csv(self.dataset, self.schema)

    def require_regression(self) -> RegressionSpec:
        if self.regression is None:
            raise ConfigError("config has no 'regression' section")
        return self.regression


def _check_keys(obj: dict, allowed, required, where: str) -> None:
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {unknown}; allowed keys are {sorted(allowed)}")
    missing = sorted(set(required) - set(obj))
    if missing:
        raise ConfigError(f"{where}: missing required key(s) {missing}")


def _string_list(value, where: str) -> tuple:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ConfigError(f"{where} must be a list of strings, got {value!r}")
    return tuple(value)


def load_run_config(path) -> RunConfig:
    """Parse a JSON run config; every problem is reported as a ConfigError."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    _check_keys(obj, ("dataset", "variables", "models", "regression", "report"),
                ("dataset", "variables", "models"), str(path))

    if not isinstance(obj["dataset"], str):
        raise ConfigError("'dataset' must be a path string")
    dataset = (path.parent / obj["dataset"]).resolve()

    schema = obj["variables"]
    if not isinstance(schema, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in schema.items()
    ):
        raise ConfigError("'variables' must map variable names to role strings")

    raw_models = obj["models"]
    if not isinstance(raw_models, list) or not raw_models:
        raise ConfigError("'models' must be a non-empty list")
    models, labels = [], set()
    for i, entry in enumerate(raw_models):
        where = f"models[{i}]"
        if not isinstance(entry, dict):
            raise ConfigError(f"{where} must be an object")
        _check_keys(entry, ("label", "inputs", "outputs", "lag", "exclude"),
                    ("label", "inputs", "outputs"), where)
        label = entry["label"]
        if not isinstance(label, str) or not label:
            raise ConfigError(f"{where}: 'label' must be a non-empty string")
        if label in labels:
            raise ConfigError(f"duplicate model label {label!r}")
        labels.add(label)
        lag = entry.get("lag", DEFAULT_LAG)
        if not isinstance(lag, int) or isinstance(lag, bool) or lag < 0:
            raise ConfigError(f"{where}: 'lag' must be a nonnegative integer, got {lag!r}")
        models.append(DeaConfig(
            label=label,
            inputs=_string_list(entry["inputs"], f"{where}.inputs"),
            outputs=_string_list(entry["outputs"], f"{where}.outputs"),
            lag=lag,
            excluded=frozenset(_string_list(entry.get("exclude", []), f"{where}.exclude")),
        ))

    regression = None
    if "regression" in obj:
        entry = obj["regression"]
        if not isinstance(entry, dict):
            raise ConfigError("'regression' must be an object")
        _check_keys(entry, ("ceiling", "regressors", "exclude"), ("regressors",), "regression")
        ceiling = entry.get("ceiling", 2.0)
        if isinstance(ceiling, bool) or not isinstance(ceiling, (int, float)):
            raise ConfigError(f"regression: 'ceiling' must be a number, got {ceiling!r}")
        regression = RegressionSpec(
            ceiling=float(ceiling),
            regressors=_string_list(entry["regressors"], "regression.regressors"),
            excluded=frozenset(_string_list(entry.get("exclude", []), "regression.exclude")),
        )

    bin_width, curve_points = DEFAULT_BIN_WIDTH, DEFAULT_CURVE_POINTS
    if "report" in obj:
        entry = obj["report"]
        if not isinstance(entry, dict):
            raise ConfigError("'report' must be an object")
        _check_keys(entry, ("bin_width", "curve_points"), (), "report")
        bin_width = entry.get("bin_width", DEFAULT_BIN_WIDTH)
        if isinstance(bin_width, bool) or not isinstance(bin_width, (int, float)) or not bin_width > 0:
            raise ConfigError(f"report: 'bin_width' must be a positive number, got {bin_width!r}")
        curve_points = entry.get("curve_points", DEFAULT_CURVE_POINTS)
        if not isinstance(curve_points, int) or isinstance(curve_points, bool) or curve_points < 2:
            raise ConfigError(f"report: 'curve_points' must be an integer >= 2, got {curve_points!r}")

    return RunConfig(
        dataset=dataset,
        schema=dict(schema),
        models=tuple(models),
        regression=regression,
        bin_width=float(bin_width),
        curve_points=curve_points,
    )


def _prepare_out(out) -> Path:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _scores_path(out: Path, label: str) -> Path:
    return out / f"scores_{label}.csv"


def _read_scores(out: Path, label: str) -> PanelScores:
    path = _scores_path(out, label)
    if not path.exists():
        raise DataError(f"{path} does not exist; run the 'score' subcommand first")
    return PanelScores.read_csv(path, label=label)


def cmd_score(config: RunConfig, out: Path, jobs: int = 1) -> int:
    data = config.load_dataset()
    for model in config.models:
        scores = score_panel(data, model, jobs=jobs)
        scores.write_csv(_scores_path(out, model.label))
        scores.write_drop_report(out / f"drops_{model.label}.csv")
    return 0


def _summary_table(fit: RegressionFit) -> str:
    lines = [
        f"model: {fit.model} "
        f"(n_obs={fit.n_obs}, n_units={fit.n_units}, n_times={fit.n_times})",
        f"  {'parameter':<16}{'estimate':>12}{'std error':>12}{'t-value':>12}",
        f"  {'intercept':<16}{fit.alpha:>12.4f}{fit.se_alpha:>12.4f}{fit.t_alpha:>12.3f}",
    ]
    for name, b, se, t in zip(fit.regressors, fit.beta, fit.se_beta, fit.t_beta):
        lines.append(f"  {name:<16}{b:>12.4f}{se:>12.4f}{t:>12.3f}")
    lines.append(f"  {'year-effect sd':<16}{fit.sigma:>12.4f}")
    lines.append(f"  {'residual sd':<16}{fit.omega:>12.4f}")
    if fit.excluded:
        lines.append(f"  excluded units: {', '.join(fit.excluded)}")
    for warning in fit.warnings:
        lines.append(f"  warning: {warning}")
    return "\n".join(lines)


def cmd_regress(config: RunConfig, out: Path) -> int:
    spec = config.require_regression()
    data = config.load_dataset()
    for model in config.models:
        scores = _read_scores(out, model.label)
        fit = fit_random_time_effects(scores, data, spec)
        fit.write_json(out / f"fit_{model.label}.json")
        print(_summary_table(fit))
        print()
    return 0


def cmd_report(config: RunConfig, out: Path) -> int:
    spec = config.require_regression()
    data = config.load_dataset()
    driver = spec.regressors[0]
    scatter_rows = []
    for model in config.models:
        scores = _read_scores(out, model.label)
        if not scores.rows:
            raise DataError(f"score table for {model.label!r} is empty")
        year = scores.years[-1]
        final = scores.for_year(year)
        values = np.array([s.score for s in final])

        write_density_csv(kernel_density(values), out / f"density_{model.label}.csv")
        write_histogram_csv(
            histogram(values, bin_width=config.bin_width), out / f"hist_{model.label}.csv"
        )

        fit_path = out / f"fit_{model.label}.json"
        if not fit_path.exists():
            raise DataError(f"{fit_path} does not exist; run the 'regress' subcommand first")
        fit = RegressionFit.read_json(fit_path)

        pairs = [
            (s.unit, data.value(s.unit, year, driver), s.score)
            for s in final
            if s.unit in data._unit_index and not data.is_missing(s.unit, year, driver)
        ]
        if len(pairs) < 2:
            raise DataError(
                f"fewer than 2 units have both a score and a {driver!r} value in {year}"
            )
        scatter_rows.extend((unit, z, r, model.label) for unit, z, r in pairs)

        z_values = [z for _, z, _ in pairs]
        grid = np.linspace(min(z_values), max(z_values), config.curve_points)
        write_curve_csv(fitted_curve(fit, grid), out / f"curve_{model.label}.csv")
    write_scatter_csv(scatter_rows, out / "scatter.csv")
    return 0


def _stage_demo_files(out: Path, seed) -> Path:
    """Copy the bundled example into `out`; with a seed, regenerate the panel."""
    package_data = resources.files("chebdea") / "data"
    config_path = out / "example_config.json"
    with atomic_write(config_path) as handle:
        handle.write((package_data / "example_config.json").read_text(encoding="utf-8"))
    panel_path = out / "example_panel.csv"
    if seed is None:
        with atomic_write(panel_path) as handle:
            handle.write((package_data / "example_panel.csv").read_text(encoding="utf-8"))
    else:
        synthetic.example_dataset(seed=seed).write_csv(panel_path)
    return config_path


def cmd_demo(out: Path, seed=None, jobs: int = 1) -> int:
    config = load_run_config(_stage_demo_files(out, seed))
    cmd_score(config, out, jobs=jobs)
    cmd_regress(config, out)
    cmd_report(config, out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chebdea",
        description="Robustness-based efficiency scoring and second-stage panel regression.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, needs_config=True, takes_seed=False, takes_jobs=False):
        p = sub.add_parser(name, help=help_text)
        if needs_config:
            p.add_argument("--config", required=True, help="path to the JSON run config")
        p.add_argument("--out", required=True, help="output directory (created if absent)")
        if takes_seed:
            p.add_argument("--seed", type=int, default=None,
                           help="regenerate the example panel from this seed instead of the bundled snapshot")
        if takes_jobs:
            p.add_argument("--jobs", type=int, default=1,
                           help="worker processes for per-year scoring (default 1)")
        return p

    add("score", "compute efficiency scores for every model variant", takes_jobs=True)
    add("regress", "fit the second-stage regression on existing score files")
    add("report", "export density/histogram/scatter/curve CSVs")
    add("demo", "run the bundled example end to end", needs_config=False,
        takes_seed=True, takes_jobs=True)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if getattr(args, "seed", None) is not None and not 0 <= args.seed < 2 ** 64:
            raise ConfigError(f"--seed must fit in an unsigned 64-bit integer, got {args.seed}")
        if getattr(args, "jobs", 1) < 1:
            raise ConfigError(f"--jobs must be at least 1, got {args.jobs}")
        out = _prepare_out(args.out)
        if args.command == "score":
            return cmd_score(load_run_config(args.config), out, jobs=args.jobs)
        if args.command == "regress":
            return cmd_regress(load_run_config(args.config), out)
        if args.command == "report":
            return cmd_report(load_run_config(args.config), out)
        return cmd_demo(out, seed=args.seed, jobs=args.jobs)
    except ConfigError as exc:
        print(f"chebdea: config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"chebdea: data error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"chebdea: numerical error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
