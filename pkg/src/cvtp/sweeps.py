"""Figure-style parameter sweeps emitting deterministic CSV."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .model import (
    Circumference,
    Disk,
    Gaussian,
    ImagLine,
    InputDistribution,
    RealLine,
    validate_squeezing,
)
from .optimize import OBJECTIVES, maximize_three_param

HEADER = ("family", "param1", "param2", "r", "theta_opt", "gu_opt", "gv_opt",
          "F_opt", "F_one_param", "F_original", "residual", "converged")

# Which pool parameter the secondary grid varies.
SECONDARY_KINDS = {
    "real": ("R",),
    "imag": ("R",),
    "circle": ("R",),
    "disk": ("R",),
    "gaussian": ("lambda", "beta_abs", "beta_arg"),
}

R_INFINITY_PROXY = 50.0


def r_range(start: float, stop: float, step: float) -> list[float]:
    """Inclusive grid start, start+step, ..., stop without float drift."""
    n = int(round((stop - start) / step))
    return [round(start + k * step, 12) for k in range(n + 1)]


@dataclass(frozen=True)
class SweepSpec:
    family: str
    r_grid: tuple[float, ...]
    secondary_grid: tuple[float, ...]
    secondary_kind: str = "R"
    # Pool parameters held fixed (Gaussian only): lam, beta_re, beta_im, beta_abs, beta_arg.
    fixed: dict = field(default_factory=dict)
    objective: str = "closed-form"
    output: str | None = None

    def __post_init__(self):
        if self.family not in SECONDARY_KINDS:
            raise ValueError(f"unknown family {self.family!r}")
        if self.secondary_kind not in SECONDARY_KINDS[self.family]:
            raise ValueError(f"family {self.family!r} cannot sweep {self.secondary_kind!r}")
        if self.objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}")
        for name in ("r_grid", "secondary_grid"):
            grid = tuple(float(v) for v in getattr(self, name))
            if not grid:
                raise ValueError(f"{name} must be nonempty")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise ValueError(f"{name} must be strictly increasing")
            object.__setattr__(self, name, grid)
        for r in self.r_grid:
            validate_squeezing(r)

    def distribution(self, value: float) -> InputDistribution:
        fam = self.family
        if fam == "real":
            return RealLine(value)
        if fam == "imag":
            return ImagLine(value)
        if fam == "circle":
            return Circumference(value)
        if fam == "disk":
            return Disk(value)
        fx = self.fixed
        if self.secondary_kind == "lambda":
            return Gaussian(value, complex(fx.get("beta_re", 0.0), fx.get("beta_im", 0.0)))
        lam = fx.get("lam", 1.0)
        if self.secondary_kind == "beta_abs":
            return Gaussian(lam, value * complex(math.cos(fx.get("beta_arg", 0.0)), math.sin(fx.get("beta_arg", 0.0))))
        return Gaussian(lam, fx.get("beta_abs", 0.0) * complex(math.cos(value), math.sin(value)))

    def points(self) -> list[tuple[InputDistribution, float]]:
        """Grid points in output order: secondary outer, r inner."""
        return [(self.distribution(v), r) for v in self.secondary_grid for r in self.r_grid]


@dataclass(frozen=True)
class SweepRow:
    family: str
    param1: float
    param2: complex | None
    r: float
    theta_opt: float
    gu_opt: float
    gv_opt: float
    F_opt: float
    F_one_param: float
    F_original: float
    residual: float
    converged: bool

    def cells(self) -> list[str]:
        p2 = "" if self.param2 is None else format_complex(self.param2)
        nums = (self.r, self.theta_opt, self.gu_opt, self.gv_opt, self.F_opt,
                self.F_one_param, self.F_original, self.residual)
        return [self.family, fmt(self.param1), p2, *(fmt(v) for v in nums),
                "true" if self.converged else "false"]


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def format_complex(z: complex) -> str:
    """Round-trippable through ``complex()``, e.g. ``1.5+0j``."""
    return f"{fmt(z.real)}{float(z.imag):+.17g}j"


def _pool_params(dist: InputDistribution):
    if isinstance(dist, Gaussian):
        return dist.lam, complex(dist.beta)
    return dist.R, None


def evaluate_point(dist: InputDistribution, r: float, objective: str = "closed-form") -> SweepRow:
    p1, p2 = _pool_params(dist)
    try:
        res = maximize_three_param(dist, r, objective)
    except (ArithmeticError, RuntimeError):
        nan = math.nan
        return SweepRow(dist.tag, p1, p2, r, nan, nan, nan, nan, nan, nan, nan, False)
    return row_from_result(dist, r, res)


def row_from_result(dist: InputDistribution, r: float, res) -> SweepRow:
    p1, p2 = _pool_params(dist)
    s = res.settings
    return SweepRow(dist.tag, p1, p2, r, s.theta, s.g_u, s.g_v, res.value,
                    res.baseline_one_param, res.baseline_original,
                    res.stationarity_residual, res.converged)


def _evaluate_packed(args):
    return evaluate_point(*args)


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[SweepRow]:
    """All rows of the sweep; with workers > 1 points run in parallel but order is kept."""
    jobs = [(d, r, spec.objective) for d, r in spec.points()]
    if workers <= 1:
        return [_evaluate_packed(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_evaluate_packed, jobs, chunksize=4))


def rows_to_csv(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    for row in rows:
        writer.writerow(row.cells())
    return buf.getvalue()


def write_csv(rows: Sequence[SweepRow], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(rows_to_csv(rows))


def _deg(values):
    return tuple(math.radians(v) for v in values)


R_GRID = tuple(r_range(0.0, 2.0, 0.1))

PRESETS = {
    # Optimal fidelity vs squeezing for several segment half-lengths; 50 stands in for R -> infinity.
    "fig2": SweepSpec("real", R_GRID, (0.5, 1.0, 2.0, 5.0, R_INFINITY_PROXY)),
    "fig3": SweepSpec("imag", R_GRID, (0.5, 1.0, 2.0, 5.0, R_INFINITY_PROXY)),
    # Three-parameter vs one-parameter vs original protocol at R = 5.
    "fig4": SweepSpec("real", R_GRID, (5.0,)),
    "fig5": SweepSpec("circle", R_GRID, (0.0, 0.5, 1.0, 2.0, 5.0, R_INFINITY_PROXY)),
    "fig6": SweepSpec("gaussian", R_GRID, (0.01, 0.5, 2.0, 10.0), "lambda"),
    "fig6-beta0": SweepSpec("gaussian", (0.2,), (2.0, 5.0, 10.0), "beta_abs", {"lam": 2.0, "beta_arg": 0.0}),
    "fig6-beta30": SweepSpec("gaussian", (0.2,), (2.0, 5.0, 10.0), "beta_abs",
                             {"lam": 2.0, "beta_arg": math.radians(30.0)}),
    "fig7": SweepSpec("gaussian", (0.2,), _deg(np.arange(0, 360, 5)), "beta_arg",
                      {"lam": 2.0, "beta_abs": 1.5}),
}
