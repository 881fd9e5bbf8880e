"""Parameter sweeps, regime maps, CSV output and 1-D extremum search."""

from __future__ import annotations

import math
import os
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np

from . import __version__
from .cycle import CycleObservables, EngineParams, RegimeLabel, cycle_observables
from .errors import NoExtremumError, ParameterError, ScanSpecError
from .tur import TurEvaluation, verify_tur

PARAMETERS = ("J", "h_i", "h_f", "T_c", "T_h")
AXIS_PARAMETERS = ("T_c", "T_h", "J")
TEMPERATURES = ("T_c", "T_h")
WORKERS_ENV = "IDLEOTTO_WORKERS"


def _log10_abs(x):
    return math.log10(x) if x else None


# name -> (extractor(obs, tur), needs TUR evaluation)
QUANTITIES: dict = {
    "mean_W1": (lambda o, t: o.mean_W1, False),
    "mean_W2": (lambda o, t: o.mean_W2, False),
    "mean_W": (lambda o, t: o.mean_W, False),
    "var_W1": (lambda o, t: o.var_W1, False),
    "var_W2": (lambda o, t: o.var_W2, False),
    "var_W": (lambda o, t: o.var_W, False),
    "sigma_W": (lambda o, t: o.sigma_W, False),
    "mean_Qh": (lambda o, t: o.mean_Qh, False),
    "mean_Qc": (lambda o, t: o.mean_Qc, False),
    "eta_th": (lambda o, t: o.eta_th, False),
    "eta_engine": (lambda o, t: o.eta_engine, False),
    "eta_0": (lambda o, t: o.eta_0, False),
    "eta_C": (lambda o, t: o.eta_C, False),
    "Omega": (lambda o, t: o.Omega, False),
    "mean_Sigma": (lambda o, t: o.mean_Sigma, False),
    "rel_fluct_W": (lambda o, t: o.rel_fluct_W, False),
    "log10_rel_fluct_W": (lambda o, t: None if o.rel_fluct_W is None else _log10_abs(o.rel_fluct_W), False),
    "regime": (lambda o, t: o.regime, False),
    "engine": (lambda o, t: o.is_engine, False),
    "anomalous": (lambda o, t: o.anomalous, False),
    "tur_observed": (lambda o, t: None if t is None else t.observed, True),
    "tur_bound": (lambda o, t: None if t is None else t.bound, True),
    "tur_slack": (lambda o, t: None if t is None else t.slack, True),
    "tur_satisfied": (lambda o, t: None if t is None else t.satisfied, True),
}

DEFAULT_QUANTITIES = ("mean_W", "var_W", "mean_Qh", "eta_th", "mean_Sigma",
                      "rel_fluct_W", "regime", "engine")


@dataclass(frozen=True)
class Axis:
    parameter: str
    min: float
    max: float
    points: int
    spacing: str = "linear"

    def problems(self, prefix="axis"):
        out = []
        if self.parameter not in AXIS_PARAMETERS:
            out.append(f"{prefix}.parameter: {self.parameter!r} not one of {', '.join(AXIS_PARAMETERS)}")
        if not isinstance(self.points, int) or self.points < 2:
            out.append(f"{prefix}.points: need an integer >= 2, got {self.points!r}")
        if not (math.isfinite(self.min) and math.isfinite(self.max)) or not self.min < self.max:
            out.append(f"{prefix}.min/max: need finite min < max, got {self.min!r}, {self.max!r}")
        if self.spacing not in ("linear", "log"):
            out.append(f"{prefix}.spacing: {self.spacing!r} not 'linear' or 'log'")
        elif self.spacing == "log":
            if self.parameter not in TEMPERATURES:
                out.append(f"{prefix}.spacing: log spacing is only allowed for temperatures")
            elif self.min <= 0:
                out.append(f"{prefix}.min: log spacing needs min > 0")
        return out

    def values(self):
        if self.spacing == "log":
            v = np.geomspace(self.min, self.max, self.points)
        else:
            v = np.linspace(self.min, self.max, self.points)
        return tuple(float(x) for x in v)

    # coordinate in which the points are evenly spaced
    def to_unit(self, x):
        return math.log10(x) if self.spacing == "log" else x

    def from_unit(self, t):
        return 10.0 ** t if self.spacing == "log" else t


@dataclass(frozen=True)
class ScanSpec:
    fixed: Mapping[str, float]
    axis1: Axis
    axis2: Optional[Axis] = None
    quantities: tuple = DEFAULT_QUANTITIES

    @property
    def axes(self):
        return (self.axis1,) if self.axis2 is None else (self.axis1, self.axis2)

    @property
    def needs_tur(self):
        return any(QUANTITIES[q][1] for q in self.quantities if q in QUANTITIES)

    def validate(self, dims=None):
        problems = []
        if dims is not None and len(self.axes) != dims:
            problems.append(f"axes: expected {dims} axis/axes, got {len(self.axes)}")
        for k, ax in enumerate(self.axes, 1):
            problems.extend(ax.problems(f"axis{k}"))
        names = [ax.parameter for ax in self.axes]
        if len(set(names)) != len(names):
            problems.append("axis2.parameter: duplicates axis1")
        for name in self.fixed:
            if name not in PARAMETERS:
                problems.append(f"fixed.{name}: unknown parameter")
            elif name in names:
                problems.append(f"fixed.{name}: also used as an axis")
        missing = [n for n in PARAMETERS if n not in self.fixed and n not in names]
        if missing:
            problems.append("fixed: missing " + ", ".join(missing))
        unknown = [q for q in self.quantities if q not in QUANTITIES]
        if unknown:
            problems.append("quantities: unknown " + ", ".join(unknown))
        if not problems:
            try:
                for ax in self.axes:
                    for value in (ax.min, ax.max):
                        EngineParams(**self._params_dict({ax.parameter: value}, fill=True))
            except ParameterError as exc:
                problems.extend(f"fixed.{f}: {exc}" for f in exc.fields)
        if problems:
            raise ScanSpecError(problems)

    def _params_dict(self, coords, fill=False):
        values = dict(self.fixed)
        values.update(coords)
        if fill:
            for ax in self.axes:
                values.setdefault(ax.parameter, ax.min)
        return values

    def params_at(self, coords: Mapping[str, float]) -> EngineParams:
        return EngineParams(**self._params_dict(coords))


@dataclass(frozen=True)
class Cell:
    coords: tuple
    observables: CycleObservables
    tur: Optional[TurEvaluation] = None

    def value(self, name):
        return QUANTITIES[name][0](self.observables, self.tur)

    @property
    def regime(self) -> RegimeLabel:
        return self.observables.regime

    @property
    def is_engine(self):
        return self.observables.is_engine


def evaluate_cell(p: EngineParams, coords=(), with_tur=False) -> Cell:
    obs = cycle_observables(p)
    tur = None
    if with_tur and obs.mean_W != 0.0:
        tur = verify_tur(p)
    return Cell(tuple(coords), obs, tur)


def _evaluate_block(fixed, names, coord_block, with_tur):
    out = []
    for coords in coord_block:
        values = dict(fixed)
        values.update(zip(names, coords))
        out.append(evaluate_cell(EngineParams(**values), coords, with_tur))
    return out


def default_workers():
    raw = os.environ.get(WORKERS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _evaluate_all(spec: ScanSpec, coord_list, workers, progress):
    names = tuple(ax.parameter for ax in spec.axes)
    fixed = dict(spec.fixed)
    with_tur = spec.needs_tur
    total = len(coord_list)
    if workers is None:
        workers = default_workers()
    if workers <= 1 or total < 2:
        cells = []
        step = max(1, total // 20)
        for start in range(0, total, step):
            cells.extend(_evaluate_block(fixed, names, coord_list[start:start + step], with_tur))
            if progress:
                progress(len(cells), total)
        return cells
    # static partition: worker k gets the k-th contiguous block
    size = math.ceil(total / workers)
    blocks = [coord_list[i:i + size] for i in range(0, total, size)]
    cells = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(_evaluate_block, [fixed] * len(blocks), [names] * len(blocks),
                             blocks, [with_tur] * len(blocks)):
            cells.extend(part)
            if progress:
                progress(len(cells), total)
    return cells


@dataclass(frozen=True)
class ScanGrid:
    spec: ScanSpec
    axis_values: tuple
    cells: tuple  # row-major: axis1 index outer, axis2 index inner

    @property
    def shape(self):
        return tuple(len(v) for v in self.axis_values)

    def cell(self, i, j):
        return self.cells[i * self.shape[1] + j]

    def array(self, name):
        """Quantity as a float array; ``None`` becomes ``nan``."""
        raw = [self._as_float(c.value(name)) for c in self.cells]
        return np.array(raw, dtype=float).reshape(self.shape)

    @staticmethod
    def _as_float(v):
        if v is None:
            return math.nan
        if isinstance(v, RegimeLabel):
            return float(list(RegimeLabel).index(v))
        return float(v)

    def engine_mask(self):
        return np.array([c.is_engine for c in self.cells], dtype=bool).reshape(self.shape)

    def regimes(self):
        return [[self.cell(i, j).regime for j in range(self.shape[1])] for i in range(self.shape[0])]


def run_grid(spec: ScanSpec, workers=None, progress: Optional[Callable] = None) -> ScanGrid:
    """Evaluate ``spec`` on the ``axis1 x axis2`` grid in row-major order."""
    spec.validate(dims=2)
    v1, v2 = spec.axis1.values(), spec.axis2.values()
    coords = [(a, b) for a in v1 for b in v2]
    cells = _evaluate_all(spec, coords, workers, progress)
    return ScanGrid(spec, (v1, v2), tuple(cells))


def run_line(spec: ScanSpec, workers=None, progress: Optional[Callable] = None):
    """Evaluate a one-axis spec; returns ``[(value, Cell), ...]`` in axis order."""
    spec.validate(dims=1)
    values = spec.axis1.values()
    cells = _evaluate_all(spec, [(v,) for v in values], workers, progress)
    return list(zip(values, cells))


def regime_census(grid: ScanGrid) -> dict:
    """Cell count per regime label (every label present, zero if absent)."""
    counts = {label: 0 for label in RegimeLabel}
    for c in grid.cells:
        counts[c.regime] += 1
    return counts


def flagged_cells(grid: ScanGrid):
    """Indices of cells where work is extracted without heat from the hotter bath."""
    return [k for k, c in enumerate(grid.cells) if c.observables.anomalous]


@dataclass(frozen=True)
class Island:
    cells: tuple  # (i, j) index pairs
    label: RegimeLabel

    @property
    def size(self):
        return len(self.cells)


def engine_islands(grid: ScanGrid):
    """Connected engine regions under 4-neighbour adjacency, largest first.

    ``label`` is the majority engine label inside the component.
    """
    mask = grid.engine_mask()
    n1, n2 = mask.shape
    seen = np.zeros_like(mask)
    islands = []
    for i in range(n1):
        for j in range(n2):
            if not mask[i, j] or seen[i, j]:
                continue
            comp = []
            queue = deque([(i, j)])
            seen[i, j] = True
            while queue:
                a, b = queue.popleft()
                comp.append((a, b))
                for da, db in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    x, y = a + da, b + db
                    if 0 <= x < n1 and 0 <= y < n2 and mask[x, y] and not seen[x, y]:
                        seen[x, y] = True
                        queue.append((x, y))
            normal = sum(grid.cell(a, b).regime is RegimeLabel.Engine for a, b in comp)
            label = RegimeLabel.Engine if 2 * normal >= len(comp) else RegimeLabel.CounterRotatingEngine
            islands.append(Island(tuple(sorted(comp)), label))
    islands.sort(key=lambda isl: (-isl.size, isl.cells[0]))
    return islands


# --- extremum search -------------------------------------------------------

OBJECTIVES = {
    "mean_W": lambda o: o.mean_W,
    "abs_mean_W": lambda o: abs(o.mean_W),
    "rel_fluct_W": lambda o: o.rel_fluct_W,
    "eta_th": lambda o: o.eta_th,
}
OBJECTIVE_ALIASES = {"|mean_W|": "abs_mean_W"}
MIN_COARSE_POINTS = 64
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ExtremumResult:
    objective: str
    parameter: str
    argopt: float
    value: float
    tolerance: float
    maximize: bool = False
    evaluations: int = field(default=0, compare=False)


def find_extremum(objective: str, interval: Axis, fixed: Mapping[str, float], tol=1e-6,
                  maximize=False, engine_only=False) -> ExtremumResult:
    """Global extremum of a cycle observable along one parameter.

    A coarse grid of ``max(interval.points, 64)`` points locates the best
    sample; golden-section search then refines inside the two neighbouring
    grid intervals until the bracket is at most ``tol`` wide in parameter
    units. Points where the objective is undefined (or not an engine, when
    ``engine_only``) are treated as infinitely bad.
    """
    name = OBJECTIVE_ALIASES.get(objective, objective)
    if name not in OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}; choose from {', '.join(OBJECTIVES)}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    coarse = Axis(interval.parameter, interval.min, interval.max,
                  max(interval.points, MIN_COARSE_POINTS), interval.spacing)
    spec = ScanSpec(fixed=dict(fixed), axis1=coarse, quantities=("mean_W",))
    spec.validate(dims=1)
    sign = -1.0 if maximize else 1.0
    extract = OBJECTIVES[name]
    evaluations = 0

    def score(x):
        nonlocal evaluations
        evaluations += 1
        obs = cycle_observables(spec.params_at({coarse.parameter: x}))
        if engine_only and not obs.is_engine:
            return math.inf
        v = extract(obs)
        return math.inf if v is None else sign * v

    xs = coarse.values()
    fs = [score(x) for x in xs]
    best = min(range(len(xs)), key=lambda k: fs[k])
    if math.isinf(fs[best]):
        raise NoExtremumError(f"{name} is undefined over the whole {coarse.parameter} interval")

    a = coarse.to_unit(xs[max(best - 1, 0)])
    b = coarse.to_unit(xs[min(best + 1, len(xs) - 1)])
    best_x, best_f = xs[best], fs[best]
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = score(coarse.from_unit(c)), score(coarse.from_unit(d))
    while coarse.from_unit(b) - coarse.from_unit(a) > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = score(coarse.from_unit(c))
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = score(coarse.from_unit(d))
        if b - a <= 4.0 * math.ulp(max(abs(a), abs(b), 1e-300)):
            break
    for t, f in ((c, fc), (d, fd)):
        if f < best_f:
            best_x, best_f = coarse.from_unit(t), f
    width = coarse.from_unit(b) - coarse.from_unit(a)
    best_x = min(max(best_x, interval.min), interval.max)
    return ExtremumResult(objective=name, parameter=coarse.parameter, argopt=best_x,
                          value=sign * best_f, tolerance=width, maximize=maximize,
                          evaluations=evaluations)


# --- CSV -------------------------------------------------------------------

def format_value(v):
    """17 significant digits; absent values as ``NaN``; booleans as 0/1."""
    if v is None:
        return "NaN"
    if isinstance(v, RegimeLabel):
        return v.value
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def _header_lines(spec: ScanSpec, extra=None):
    lines = [f"# tool=idleotto {__version__}"]
    for key, value in (extra or {}).items():
        lines.append(f"# {key}={value}")
    for name in PARAMETERS:
        if name in spec.fixed:
            lines.append(f"# {name}={format_value(spec.fixed[name])}")
    for k, ax in enumerate(spec.axes, 1):
        lines.append(f"# axis{k}={ax.parameter}:{format_value(ax.min)}:{format_value(ax.max)}:"
                     f"{ax.points}:{ax.spacing}")
    return lines


def scan_rows(spec: ScanSpec, result):
    """Rows (lists of strings) for a grid or line result, axis values first."""
    if isinstance(result, ScanGrid):
        cells = result.cells
    else:
        cells = [c for _, c in result]
    for c in cells:
        yield [format_value(x) for x in c.coords] + [format_value(c.value(q)) for q in spec.quantities]


def write_csv(spec: ScanSpec, result, stream, extra_header=None):
    for line in _header_lines(spec, extra_header):
        stream.write(line + "\n")
    stream.write(",".join([ax.parameter for ax in spec.axes] + list(spec.quantities)) + "\n")
    for row in scan_rows(spec, result):
        stream.write(",".join(row) + "\n")


def write_series_csv(series, stream, extra_header=None):
    """CSV for several specs sharing axes and quantities, with a leading ``series`` column.

    ``series`` is a list of ``(label, spec, result)``. A single entry is written
    exactly like :func:`write_csv`.
    """
    if len(series) == 1:
        _, spec, result = series[0]
        write_csv(spec, result, stream, extra_header)
        return
    stream.write(f"# tool=idleotto {__version__}\n")
    for key, value in (extra_header or {}).items():
        stream.write(f"# {key}={value}\n")
    for k, (label, spec, _) in enumerate(series):
        fixed = " ".join(f"{n}={format_value(spec.fixed[n])}" for n in PARAMETERS if n in spec.fixed)
        stream.write(f"# series{k}={label} | {fixed}\n")
    first = series[0][1]
    for k, ax in enumerate(first.axes, 1):
        stream.write(f"# axis{k}={ax.parameter}:{format_value(ax.min)}:{format_value(ax.max)}:"
                     f"{ax.points}:{ax.spacing}\n")
    stream.write(",".join(["series"] + [ax.parameter for ax in first.axes]
                          + list(first.quantities)) + "\n")
    for k, (_, spec, result) in enumerate(series):
        for row in scan_rows(spec, result):
            stream.write(",".join([str(k)] + row) + "\n")
