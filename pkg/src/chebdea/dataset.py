"""Long-format panel data: CSV ingestion, variable roles, lag-aligned slicing.

A panel holds one value per (unit, year, variable) cell; cells may be
explicitly missing. Years are contiguous. Input/output matrices for a
frontier year are extracted with `slice_for_frontier`, which reads outputs
from year t and inputs from year t-h.
"""

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from ._util import atomic_write, fmt_float
from .errors import ConfigError, DataError

ROLES = ("input", "output", "regressor")


@dataclass(frozen=True)
class Variable:
    """A registered panel variable: its name, DEA/regression role, and description."""

    name: str
    role: str
    description: str = ""

    def __post_init__(self):
        if self.role not in ROLES:
            raise ConfigError(f"variable {self.name!r}: unknown role {self.role!r}, expected one of {ROLES}")


def _normalize_registry(schema) -> dict:
    """Accept a mapping name -> role/Variable or an iterable of Variable."""
    registry = {}
    if hasattr(schema, "items"):
        for name, spec in schema.items():
            registry[name] = spec if isinstance(spec, Variable) else Variable(name, str(spec))
    else:
        for var in schema:
            registry[var.name] = var
    if not registry:
        raise ConfigError("variable registry is empty")
    return registry


@dataclass(frozen=True)
class PanelDataset:
    """Immutable unit x year x variable panel with explicit missing flags.

    `values` has shape (n_units, n_years, n_variables); NaN marks a missing
    cell. Index order follows `units` (first appearance in the source),
    ascending contiguous `years`, and registry order for variables.
    """

    units: tuple
    years: tuple
    variables: dict
    values: np.ndarray
    _unit_index: dict = field(init=False, repr=False)
    _year_index: dict = field(init=False, repr=False)
    _var_index: dict = field(init=False, repr=False)

    def __post_init__(self):
        years = self.years
        if any(b - a != 1 for a, b in zip(years, years[1:])):
            raise DataError(f"years must be contiguous integers, got {list(years)}")
        expected = (len(self.units), len(self.years), len(self.variables))
        if self.values.shape != expected:
            raise ValueError(f"values shape {self.values.shape} != {expected}")
        self.values.setflags(write=False)
        object.__setattr__(self, "_unit_index", {u: i for i, u in enumerate(self.units)})
        object.__setattr__(self, "_year_index", {y: i for i, y in enumerate(self.years)})
        object.__setattr__(self, "_var_index", {v: i for i, v in enumerate(self.variables)})

    @property
    def n_units(self) -> int:
        return len(self.units)

    @property
    def n_years(self) -> int:
        return len(self.years)

    def value(self, unit, year, name) -> float:
        """Cell value; NaN when the cell is flagged missing."""
        return float(self.values[self._unit_index[unit], self._year_index[year], self._var_index[name]])

    def is_missing(self, unit, year, name) -> bool:
        return bool(np.isnan(self.value(unit, year, name)))

    @property
    def n_missing(self) -> int:
        return int(np.isnan(self.values).sum())

    def column(self, year, names) -> np.ndarray:
        """Matrix of the named variables for every unit in the given year."""
        yi = self._year_index[year]
        cols = [self._var_index[n] for n in names]
        return self.values[:, yi, :][:, cols]

    def write_csv(self, path):
        """Write the panel back out; exact inverse of load_csv for its cells."""
        with atomic_write(path) as handle:
            writer = csv.writer(handle)
            names = list(self.variables)
            writer.writerow(["unit", "year"] + names)
            for ui, unit in enumerate(self.units):
                for yi, year in enumerate(self.years):
                    row = [unit, str(year)]
                    for vi in range(len(names)):
                        v = self.values[ui, yi, vi]
                        row.append("" if np.isnan(v) else fmt_float(v))
                    writer.writerow(row)


def load_csv(source, schema) -> PanelDataset:
    """Load a long-format panel CSV with header `unit,year,<var1>,...`.

    Parameters
    ----------
    source : path, text stream, or byte stream of UTF-8 CSV.
    schema : variable registry (mapping name -> role or Variable list);
        file columns must match the registered names exactly.

    Raises
    ------
    DataError
        Duplicate (unit, year) rows, non-numeric cells (located by row and
        column), unknown or absent columns, or non-contiguous years.
    """
    registry = _normalize_registry(schema)
    if hasattr(source, "read"):
        raw = source.read()
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
        handle = io.StringIO(text)
        rows = _read_rows(handle)
    else:
        with open(source, "r", encoding="utf-8", newline="") as handle:
            rows = _read_rows(handle)
    if not rows:
        raise DataError("CSV is empty")
    header, body = rows[0], rows[1:]
    if len(header) < 2 or header[0] != "unit" or header[1] != "year":
        raise DataError(f"header must start with 'unit,year', got {header[:2]}")
    names = header[2:]
    unknown = [n for n in names if n not in registry]
    absent = [n for n in registry if n not in names]
    if unknown:
        raise DataError(f"unregistered columns in CSV: {unknown}")
    if absent:
        raise DataError(f"registered variables absent from CSV: {absent}")

    cells = {}
    units, seen_units = [], set()
    years = set()
    for lineno, row in enumerate(body, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise DataError(f"row {lineno}: expected {len(header)} fields, got {len(row)}")
        unit = row[0]
        try:
            year = int(row[1])
        except ValueError:
            raise DataError(f"row {lineno}: year {row[1]!r} is not an integer") from None
        if (unit, year) in cells:
            raise DataError(f"duplicate row for ({unit}, {year})")
        parsed = {}
        for name, cell in zip(names, row[2:]):
            if cell == "":
                continue
            try:
                parsed[name] = float(cell)
            except ValueError:
                raise DataError(f"row {lineno}, column {name!r}: non-numeric value {cell!r}") from None
        cells[(unit, year)] = parsed
        if unit not in seen_units:
            seen_units.add(unit)
            units.append(unit)
        years.add(year)

    if not cells:
        raise DataError("CSV contains a header but no data rows")
    year_list = sorted(years)
    if any(b - a != 1 for a, b in zip(year_list, year_list[1:])):
        raise DataError(f"years must be contiguous integers, got {year_list}")

    values = np.full((len(units), len(year_list), len(names)), np.nan)
    unit_index = {u: i for i, u in enumerate(units)}
    year_index = {y: i for i, y in enumerate(year_list)}
    for (unit, year), parsed in cells.items():
        for vi, name in enumerate(names):
            if name in parsed:
                values[unit_index[unit], year_index[year], vi] = parsed[name]
    variables = {n: registry[n] for n in names}
    return PanelDataset(tuple(units), tuple(year_list), variables, values)


def _read_rows(handle):
    return [row for row in csv.reader(handle)]


@dataclass(frozen=True)
class DeaConfig:
    """One DEA model variant: variable selection, input lag, exclusions."""

    label: str
    inputs: tuple
    outputs: tuple
    lag: int = 0
    excluded: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "excluded", frozenset(self.excluded))

    def validate(self, data: PanelDataset):
        """Check the configuration against a dataset; raises ConfigError."""
        if not self.inputs or not self.outputs:
            raise ConfigError(f"model {self.label!r}: needs at least one input and one output")
        if set(self.inputs) & set(self.outputs):
            raise ConfigError(f"model {self.label!r}: input and output sets overlap")
        for name, want in [(n, "input") for n in self.inputs] + [(n, "output") for n in self.outputs]:
            var = data.variables.get(name)
            if var is None:
                raise ConfigError(f"model {self.label!r}: variable {name!r} is not registered")
            if var.role != want:
                raise ConfigError(f"model {self.label!r}: variable {name!r} has role {var.role!r}, expected {want!r}")
        if self.lag < 0:
            raise ConfigError(f"model {self.label!r}: lag must be nonnegative, got {self.lag}")
        if self.lag >= data.n_years:
            raise ConfigError(
                f"model {self.label!r}: lag {self.lag} leaves no frontier years in {data.years[0]}..{data.years[-1]}"
            )


@dataclass(frozen=True)
class DropRecord:
    """One unit removed from one frontier year, with the reason."""

    unit: str
    year: int
    reason: str


@dataclass(frozen=True)
class FrontierSlice:
    """Aligned input/output matrices for one frontier year.

    Row i of `inputs` (year - lag) and `outputs` (year) belongs to units[i].
    """

    year: int
    inputs: np.ndarray
    outputs: np.ndarray
    units: tuple
    dropped: tuple


def slice_for_frontier(data: PanelDataset, config: DeaConfig, year: int) -> FrontierSlice:
    """Extract the frontier matrices for `year`: outputs at t, inputs at t-h.

    Excluded units and units with any missing selected cell are dropped and
    reported in the slice. Retained values must be strictly positive; a
    nonpositive cell is an error, never silently perturbed or dropped.
    """
    config.validate(data)
    input_year = year - config.lag
    if year not in data._year_index or input_year not in data._year_index:
        raise ConfigError(
            f"frontier year {year} needs inputs from {input_year}; dataset covers {data.years[0]}..{data.years[-1]}"
        )
    retained, dropped = [], []
    for unit in data.units:
        if unit in config.excluded:
            dropped.append(DropRecord(unit, year, "excluded by configuration"))
            continue
        missing = [f"{n}@{input_year}" for n in config.inputs if data.is_missing(unit, input_year, n)]
        missing += [f"{n}@{year}" for n in config.outputs if data.is_missing(unit, year, n)]
        if missing:
            dropped.append(DropRecord(unit, year, "missing " + ", ".join(missing)))
            continue
        retained.append(unit)
    if len(retained) < 2:
        raise DataError(
            f"frontier for year {year} has {len(retained)} unit(s) after drops; at least 2 are required"
        )
    rows = [data._unit_index[u] for u in retained]
    X = data.column(input_year, config.inputs)[rows]
    Y = data.column(year, config.outputs)[rows]
    for matrix, names, y in ((X, config.inputs, input_year), (Y, config.outputs, year)):
        bad = np.argwhere(matrix <= 0)
        if bad.size:
            i, j = bad[0]
            raise DataError(
                f"nonpositive value {float(matrix[i, j])!r} for ({retained[i]}, {y}, {names[j]}); "
                "DEA requires strictly positive inputs and outputs"
            )
    return FrontierSlice(year, X, Y, tuple(retained), tuple(dropped))
