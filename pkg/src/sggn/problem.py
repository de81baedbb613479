"""Target functions, weight functions, and weighted point sets.

Continuous least squares (composite midpoint quadrature over a box) and
discrete least squares (given data points) are unified in one
representation: a set of points with nonnegative weights and target
values. Every downstream sum -- loss, mass matrix, gradients -- is the
same weighted sum over this set; only the weights differ between the two
settings.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import Domain, NetworkParams, evaluate

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

__all__ = [
    "ConfigError",
    "ProblemSpec",
    "TargetFunction",
    "WeightedPointSet",
    "build_point_set",
    "builtin_target",
    "load_problem_spec",
    "loss",
]

TARGET_TAGS = ("step1d", "delta1d", "step2d", "synthetic2d", "custom")

# Ten segment values for the 1-D staircase target, drawn once from a
# lognormal (skewed) distribution and frozen so every run is deterministic.
STEP1D_DEFAULT_VALUES = (
    0.3683, 0.3622, 0.5803, 1.3245, 0.2149,
    0.8348, 2.3144, 1.9233, 0.2902, 1.9297,
)

# Peak centers (all irrational, so never on a rational grid) and
# sharpness parameters of the 1-D delta-like target.
DELTA1D_CENTERS = (-math.pi**2 / 10.0, -(math.pi - 2.5), math.sqrt(85.0) / 10.0)
DELTA1D_WIDTHS = (1.0e4, 1.0e3, 5.0e3)

# Planted 5-neuron network on [-1,1]^2 for the exact-recovery test problem;
# rows are (b, omega_1, omega_2), all lines cross the box. Line normals sit
# at 10/80, 30/60, and 45 degrees, so the instance is symmetric under
# swapping the axes and is recoverable from horizontal and vertical
# initializations alike.
_SYNTHETIC2D_HIDDEN = (
    (0.3, 0.9848, 0.1736),
    (0.3, 0.1736, 0.9848),
    (-0.25, 0.866, 0.5),
    (-0.25, 0.5, 0.866),
    (0.1, 0.7071, 0.7071),
)
_SYNTHETIC2D_C = (1.2, 1.2, -0.9, -0.9, 1.6)
_SYNTHETIC2D_C0 = -0.2


class ConfigError(ValueError):
    """Invalid problem or experiment configuration; carries the field name."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field_name = field_name


@dataclass(frozen=True)
class WeightedPointSet:
    """Points, nonnegative weights, and target values; kind marks origin."""

    points: np.ndarray   # (m, d)
    weights: np.ndarray  # (m,)
    targets: np.ndarray  # (m,)
    kind: str            # "quadrature" | "data"

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        u = np.atleast_1d(np.asarray(self.targets, dtype=float))
        if not (pts.shape[0] == w.size == u.size):
            raise ValueError("points, weights, and targets must have equal length")
        if pts.shape[0] == 0:
            raise ValueError("point set must be nonempty")
        if not np.all(np.isfinite(pts)) or not np.all(np.isfinite(w)) or not np.all(np.isfinite(u)):
            raise ValueError("point set entries must be finite")
        if np.any(w < 0.0):
            raise ValueError("weights must be nonnegative")
        if self.kind not in ("quadrature", "data"):
            raise ValueError(f"unknown point-set kind {self.kind!r}")
        for name, arr in (("points", pts), ("weights", w), ("targets", u)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class TargetFunction:
    """Evaluable target; ``params`` keeps whatever defines the instance."""

    tag: str
    params: dict
    fn: object  # callable (m, d) -> (m,)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        single = x.ndim <= 1 and self.tag != "custom"
        batch = np.atleast_2d(x)
        vals = np.asarray(self.fn(batch), dtype=float)
        return float(vals[0]) if single and vals.size == 1 else vals

    @property
    def generator(self) -> NetworkParams | None:
        """Planted network for synthetic targets, None otherwise."""
        return self.params.get("generator")


def builtin_target(tag: str, params: dict | None = None) -> TargetFunction:
    """Construct one of the named target functions.

    step1d      piecewise constant staircase on [0, 10]; params: values
                (segment values, default a frozen skewed sample), lo, hi.
    delta1d     sum of three sharp rational peaks; params: centers, widths.
    step2d      +1 in the diagonal band |x1 + x2| <= 0.5, -1 outside.
    synthetic2d planted 5-neuron network on [-1,1]^2; params: generator
                (a NetworkParams) to override the frozen instance.
    custom      params: fn, a callable mapping (m, d) arrays to (m,).
    """
    params = dict(params or {})
    if tag == "step1d":
        values = np.asarray(params.get("values", STEP1D_DEFAULT_VALUES), dtype=float)
        lo = float(params.get("lo", 0.0))
        hi = float(params.get("hi", 10.0))
        nseg = values.size
        width = (hi - lo) / nseg

        def fn(x, values=values, lo=lo, width=width, nseg=nseg):
            idx = np.clip(((x[:, 0] - lo) // width).astype(int), 0, nseg - 1)
            return values[idx]

        return TargetFunction(tag, {"values": values, "lo": lo, "hi": hi}, fn)

    if tag == "delta1d":
        centers = np.asarray(params.get("centers", DELTA1D_CENTERS), dtype=float)
        widths = np.asarray(params.get("widths", DELTA1D_WIDTHS), dtype=float)

        def fn(x, centers=centers, widths=widths):
            diffs = x[:, 0][:, None] - centers[None, :]
            return np.sum(1.0 / (widths[None, :] * diffs**2 + 1.0), axis=1)

        return TargetFunction(tag, {"centers": centers, "widths": widths}, fn)

    if tag == "step2d":

        def fn(x):
            s = x[:, 0] + x[:, 1]
            return np.where((s >= -0.5) & (s <= 0.5), 1.0, -1.0)

        return TargetFunction(tag, {}, fn)

    if tag == "synthetic2d":
        generator = params.get("generator")
        if generator is None:
            generator = NetworkParams.from_arrays(
                _SYNTHETIC2D_C0, _SYNTHETIC2D_C, np.array(_SYNTHETIC2D_HIDDEN)
            )

        def fn(x, generator=generator):
            return evaluate(generator, x)

        return TargetFunction(tag, {"generator": generator}, fn)

    if tag == "custom":
        if "fn" not in params:
            raise ConfigError("target.params.fn", "custom target needs a callable")
        return TargetFunction(tag, params, params["fn"])

    raise ConfigError("target.tag", f"unknown tag {tag!r}; expected one of {TARGET_TAGS}")


@dataclass(frozen=True)
class ProblemSpec:
    """A least-squares problem: domain, target, weight function, sampling.

    Exactly one of ``h`` (midpoint-quadrature mesh size) or ``data_path``
    (CSV data file) must be set. ``mu`` is an optional weight function;
    None means the constant 1.
    """

    domain: Domain
    target: TargetFunction | None = None
    mu: object | None = None
    h: float | None = None
    data_path: str | None = None

    def __post_init__(self):
        if (self.h is None) == (self.data_path is None):
            raise ConfigError("sampling", "set exactly one of sampling.h or sampling.data_path")
        if self.h is not None:
            if self.h <= 0:
                raise ConfigError("sampling.h", "mesh size must be positive")
            if self.target is None:
                raise ConfigError("target", "quadrature sampling requires a target function")
            for k, edge in enumerate(self.domain.upper - self.domain.lower):
                ratio = edge / self.h
                if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
                    raise ConfigError(
                        "sampling.h", f"h={self.h} does not evenly divide edge {k} of length {edge}"
                    )

    @property
    def kind(self) -> str:
        return "quadrature" if self.h is not None else "data"

    def mu_values(self, points: np.ndarray) -> np.ndarray:
        if self.mu is None:
            return np.ones(points.shape[0])
        return np.asarray(self.mu(points), dtype=float)


def midpoint_grid(domain: Domain, h: float) -> tuple[np.ndarray, float]:
    """Cell midpoints of the uniform grid with mesh size h, and cell volume.

    Points are ordered C-style (last axis fastest), which fixes the
    summation order of every downstream reduction.
    """
    axes = []
    volume = 1.0
    for lo, hi in zip(domain.lower, domain.upper):
        cells = int(round((hi - lo) / h))
        hk = (hi - lo) / cells
        axes.append(lo + (np.arange(cells) + 0.5) * hk)
        volume *= hk
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=1)
    return points, volume


def build_point_set(spec: ProblemSpec) -> WeightedPointSet:
    """Materialize the weighted point set for a problem.

    Quadrature kind: midpoints of the uniform grid, weights mu(x) * h^d.
    Data kind: points/targets from the CSV file, weights mu(x) (times the
    file's weight column when present).
    """
    if spec.kind == "quadrature":
        points, volume = midpoint_grid(spec.domain, spec.h)
        weights = spec.mu_values(points) * volume
        targets = np.asarray(spec.target(points), dtype=float)
        return WeightedPointSet(points, weights, targets, kind="quadrature")

    points, targets, file_weights = read_data_csv(spec.data_path, spec.domain.d)
    weights = spec.mu_values(points)
    if file_weights is not None:
        weights = weights * file_weights
    return WeightedPointSet(points, weights, targets, kind="data")


def read_data_csv(path, d: int):
    """Read a data CSV: d coordinate columns, a target column, and an
    optional trailing weight column. A header row is required."""
    path = Path(path)
    if not path.exists():
        raise ConfigError("sampling.data_path", f"file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ConfigError("sampling.data_path", "empty data file")
        try:
            rows = np.array([[float(v) for v in row] for row in reader if row])
        except ValueError as exc:
            raise ConfigError("sampling.data_path", f"non-numeric data entry: {exc}") from exc
    if rows.ndim != 2 or rows.shape[0] == 0:
        raise ConfigError("sampling.data_path", "no data rows")
    ncols = rows.shape[1]
    if ncols == d + 1:
        return rows[:, :d], rows[:, d], None
    if ncols == d + 2:
        return rows[:, :d], rows[:, d], rows[:, d + 1]
    raise ConfigError(
        "sampling.data_path",
        f"expected {d}+1 or {d}+2 columns for dimension {d}, found {ncols}",
    )


def loss(params: NetworkParams, pts: WeightedPointSet) -> float:
    """Weighted least-squares loss 0.5 * sum_i w_i (v(x_i) - u_i)^2."""
    r = evaluate(params, pts.points) - pts.targets
    return 0.5 * float(np.dot(pts.weights * r, r))


def _load_config_doc(path) -> dict:
    path = Path(path)
    if path.suffix.lower() == ".json":
        with open(path) as fh:
            return json.load(fh)
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def problem_spec_from_dict(doc: dict) -> ProblemSpec:
    """Build a ProblemSpec from a parsed config document.

    Recognized keys: domain.lower, domain.upper, target.tag,
    target.params, sampling.h or sampling.data_path.
    """
    try:
        domain = Domain(doc["domain"]["lower"], doc["domain"]["upper"])
    except KeyError as exc:
        raise ConfigError(f"domain.{exc.args[0]}" if exc.args[0] != "domain" else "domain",
                          "missing") from exc
    except ValueError as exc:
        raise ConfigError("domain", str(exc)) from exc

    target = None
    if "target" in doc:
        tdoc = doc["target"]
        if "tag" not in tdoc:
            raise ConfigError("target.tag", "missing")
        target = builtin_target(tdoc["tag"], tdoc.get("params"))

    sampling = doc.get("sampling", {})
    return ProblemSpec(
        domain=domain,
        target=target,
        h=sampling.get("h"),
        data_path=sampling.get("data_path"),
    )


def load_problem_spec(path) -> ProblemSpec:
    """Read a ProblemSpec from a TOML or JSON config file."""
    return problem_spec_from_dict(_load_config_doc(path))
