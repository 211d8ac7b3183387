"""Experiment engine: manufactured problems, ladders, and CSV output.

Bounded runs all solve the Poisson problem manufactured from
u = sin(x)cos(y) (which is not discretely harmonic, so the particular
solution and superposition machinery is always exercised); boundary
data comes from the same u.  The unbounded study solves potential flow
past the unit circle with u = x/(x^2 + y^2), harmonic away from the
origin, using direct convolution for interior values since no bounded
auxiliary box contains the domain.

Timings are measured but written into the CSV only on request; the
default output is byte-identical across runs for identical configs,
which keeps diffs meaningful.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import closure as closure_mod
from . import diffpot, geometry, potentials, solver
from .errors import AssemblyError, ConfigError, DoubleLayerInapplicableError

CSV_HEADER = "n,h,geometry,bc,formulation,max_error,cond,wall_time"

_GEOMETRIES = ("ellipse", "diamond", "circle-exterior")
_BCS = ("dirichlet", "robin", "neumann")
#: Robin coefficients (normal-derivative, value) used throughout the study.
ROBIN_COEFFS = (1.0, 1.0)

#: Conditioning study matrices, in output order.
CONDITIONING_LABELS = ("S-", "D-", "A_s", "A_d", "M_s", "M_d")


@dataclass(frozen=True)
class ExperimentConfig:
    geometry: str
    bc: str
    formulation: str = "single-direct"
    n: Optional[int] = None
    n_list: tuple = ()
    aspect: float = 1.0
    r1: float = 0.9
    r2: float = 0.5
    radius: float = 1.0
    ell: float = 0.15
    nonhomogeneous: bool = False
    seed: int = 0
    compute_cond: bool = False
    timing: bool = False

    def __post_init__(self):
        if self.geometry not in _GEOMETRIES:
            raise ConfigError(f"unknown geometry {self.geometry!r}")
        if self.bc not in _BCS:
            raise ConfigError(f"unknown boundary condition {self.bc!r}")
        try:
            solver.formulation_from_tag(self.formulation)
        except AssemblyError as exc:
            raise ConfigError(str(exc)) from None
        for value, name in ((self.aspect, "aspect"), (self.r1, "r1"),
                            (self.r2, "r2"), (self.radius, "radius"),
                            (self.ell, "ell")):
            if value <= 0.0:
                raise ConfigError(f"{name} must be positive, got {value}")
        for n in self.all_n():
            if n < 32 or n > 1024 or (n & (n - 1)) != 0:
                raise ConfigError(f"n must be a power of two in [32, 1024], got {n}")
        if self.unbounded and self.nonhomogeneous:
            raise ConfigError(
                "the unbounded study is homogeneous; drop the nonhomogeneous flag"
            )

    @property
    def unbounded(self) -> bool:
        return self.geometry == "circle-exterior"

    def all_n(self):
        if self.n is not None:
            yield self.n
        yield from self.n_list

    def single_n(self) -> int:
        if self.n is None:
            raise ConfigError("this operation needs a single n")
        return self.n

    def ladder(self) -> tuple:
        ns = tuple(self.n_list)
        if len(ns) < 3:
            raise ConfigError("ladders need at least three n values")
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ConfigError("n-list must be strictly ascending")
        return ns


@dataclass
class ResultRow:
    n: int
    h: float
    geometry: str
    bc: str
    formulation: str
    max_error: Optional[float]
    cond: Optional[float] = None
    wall_time: Optional[float] = None


@dataclass
class Manufactured:
    u: Callable
    grad: Callable
    f: Optional[Callable]


def build_shape(cfg: ExperimentConfig) -> geometry.LevelSetShape:
    if cfg.geometry == "ellipse":
        return geometry.ellipse(cfg.aspect)
    if cfg.geometry == "diamond":
        return geometry.diamond(cfg.r1, cfg.r2)
    return geometry.circle_exterior(cfg.radius)


def build_grid(cfg: ExperimentConfig, n: int) -> geometry.Grid:
    if cfg.unbounded:
        return geometry.Grid.from_box((-3.0, 3.0), (-3.0, 3.0), n)
    half = 1.0 + cfg.ell
    return geometry.Grid.from_box((-half, half), (-half, half), n)


def manufactured_solution(cfg: ExperimentConfig) -> Manufactured:
    if cfg.unbounded:
        def u(x, y):
            return x / (x**2 + y**2)

        def grad(x, y):
            r2 = x**2 + y**2
            return (y**2 - x**2) / r2**2, -2.0 * x * y / r2**2

        return Manufactured(u=u, grad=grad, f=None)

    def u(x, y):
        return np.sin(x) * np.cos(y)

    def grad(x, y):
        return np.cos(x) * np.cos(y), -np.sin(x) * np.sin(y)

    def f(x, y):
        return 2.0 * np.sin(x) * np.cos(y)

    return Manufactured(u=u, grad=grad, f=f)


def make_boundary_condition(cfg: ExperimentConfig, shape: geometry.LevelSetShape,
                            mf: Manufactured) -> closure_mod.BoundaryCondition:
    if cfg.bc == "dirichlet":
        return closure_mod.dirichlet(mf.u)
    alpha_c, beta_c = ROBIN_COEFFS if cfg.bc == "robin" else (1.0, 0.0)

    def g(x, y):
        gx, gy = shape.grad(x, y)
        norm = np.hypot(gx, gy)
        ux, uy = mf.grad(x, y)
        return alpha_c * (ux * gx + uy * gy) / norm + beta_c * mf.u(x, y)

    return closure_mod.robin(alpha_c, beta_c, g)


def scatter_gamma_trace(result: solver.SolveResult, ps: geometry.PointSets) -> np.ndarray:
    """Interleave the gamma+ and gamma- traces into canonical gamma order."""
    ny = ps.grid.ny
    gamma_flat = ps.gamma_indices[:, 0] * ny + ps.gamma_indices[:, 1]
    plus_flat = ps.gamma_plus_indices[:, 0] * ny + ps.gamma_plus_indices[:, 1]
    minus_flat = ps.gamma_minus_indices[:, 0] * ny + ps.gamma_minus_indices[:, 1]
    out = np.empty(len(gamma_flat))
    out[np.searchsorted(gamma_flat, plus_flat)] = result.trace_plus
    out[np.searchsorted(gamma_flat, minus_flat)] = result.trace_minus
    return out


@dataclass
class SolutionField:
    """A solved problem with its pointwise errors on the interior nodes."""

    grid: geometry.Grid
    ps: geometry.PointSets
    values: np.ndarray
    exact: np.ndarray
    result: solver.SolveResult

    @property
    def errors(self) -> np.ndarray:
        return np.abs(self.values - self.exact)

    @property
    def max_error(self) -> float:
        return float(self.errors.max())

    def max_error_node(self):
        return tuple(int(v) for v in self.ps.m_plus_indices[int(self.errors.argmax())])


def _validate_runtime_combination(cfg: ExperimentConfig, form: solver.Formulation):
    if cfg.unbounded and form.kernel is potentials.LayerKind.DOUBLE:
        raise DoubleLayerInapplicableError(
            "the double-layer matrix D- is singular for the unbounded exterior "
            "domain; use a single-layer formulation"
        )


def solve_problem(cfg: ExperimentConfig, n: Optional[int] = None) -> SolutionField:
    """Run the full pipeline for one grid size."""
    n = cfg.single_n() if n is None else n
    form = solver.formulation_from_tag(cfg.formulation)
    _validate_runtime_combination(cfg, form)
    shape = build_shape(cfg)
    grid = build_grid(cfg, n)
    mf = manufactured_solution(cfg)
    ps = geometry.classify(grid, shape)
    xs = geometry.select_intersections(ps, shape, grid)
    bc = make_boundary_condition(cfg, shape, mf)
    cm = closure_mod.assemble_closure(ps, xs, bc, grid)
    k_plus, k_minus = solver.build_layer_matrices(cm, ps, form.kernel)

    if cfg.unbounded:
        result = solver.solve_system(
            form, cm, ps, k_plus, k_minus, compute_cond=cfg.compute_cond
        )
        density = result.density
        values = potentials.evaluate_potential(
            ps.m_plus_indices, density, form.kernel, ps
        )
    else:
        box = diffpot.AuxiliaryBox.for_pointsets(ps)
        u_p = diffpot.particular_solution(mf.f, ps, box, grid)
        corrected = diffpot.correct_boundary_rhs(cm, u_p)
        result = solver.solve_system(
            form, replace(cm, rhs=corrected), ps, k_plus, k_minus,
            compute_cond=cfg.compute_cond,
        )
        u_h = diffpot.difference_potential(scatter_gamma_trace(result, ps), ps, box)
        total = diffpot.superpose(u_h, u_p)
        mp = ps.m_plus_indices
        values = total.values[mp[:, 0], mp[:, 1]]

    mp = ps.m_plus_indices
    x = grid.origin[0] + grid.h * mp[:, 0]
    y = grid.origin[1] + grid.h * mp[:, 1]
    exact = mf.u(x, y)
    return SolutionField(grid=grid, ps=ps, values=values, exact=exact, result=result)


def run_solve(cfg: ExperimentConfig, n: Optional[int] = None) -> ResultRow:
    n = cfg.single_n() if n is None else n
    start = time.perf_counter()
    sol = solve_problem(cfg, n)
    elapsed = time.perf_counter() - start
    return ResultRow(
        n=n,
        h=sol.grid.h,
        geometry=build_shape(cfg).label,
        bc=cfg.bc,
        formulation=cfg.formulation,
        max_error=sol.max_error,
        cond=sol.result.system_cond,
        wall_time=elapsed,
    )


@dataclass
class ConvergenceReport:
    rows: list
    order: Optional[float]
    failures: list = field(default_factory=list)


def run_convergence(cfg: ExperimentConfig) -> ConvergenceReport:
    """Solve the ladder and fit the error order in h."""
    rows = []
    failures = []
    for n in cfg.ladder():
        try:
            rows.append(run_solve(cfg, n))
        except Exception as exc:  # keep the partial table
            failures.append(f"n={n}: {type(exc).__name__}: {exc}")
    order = None
    good = [r for r in rows if r.max_error is not None and r.max_error > 0.0]
    if len(good) >= 2:
        hs = np.log([r.h for r in good])
        errs = np.log([r.max_error for r in good])
        order = float(np.polyfit(hs, errs, 1)[0])
    return ConvergenceReport(rows=rows, order=order, failures=failures)


@dataclass
class ConditioningReport:
    rows: list
    notes: list = field(default_factory=list)


def run_conditioning(cfg: ExperimentConfig) -> ConditioningReport:
    """Condition numbers of all six study matrices per ladder rung."""
    shape = build_shape(cfg)
    mf = manufactured_solution(cfg)
    rows = []
    notes = []
    for n in cfg.ladder():
        grid = build_grid(cfg, n)
        ps = geometry.classify(grid, shape)
        xs = geometry.select_intersections(ps, shape, grid)
        bc = make_boundary_condition(cfg, shape, mf)
        cm = closure_mod.assemble_closure(ps, xs, bc, grid)
        conds = {}
        for kernel in (potentials.LayerKind.SINGLE, potentials.LayerKind.DOUBLE):
            suffix = "s" if kernel is potentials.LayerKind.SINGLE else "d"
            minus_label = "S-" if kernel is potentials.LayerKind.SINGLE else "D-"
            if cfg.unbounded and kernel is potentials.LayerKind.DOUBLE:
                notes.append(
                    f"n={n}: double-layer family skipped (singular on unbounded domain)"
                )
                conds[minus_label] = None
                conds[f"A_{suffix}"] = None
                conds[f"M_{suffix}"] = None
                continue
            k_plus, k_minus = solver.build_layer_matrices(cm, ps, kernel)
            conds[minus_label] = solver.condition_number(k_minus.entries)
            for form_name in ("schur", "direct"):
                tag = f"{kernel.value}-{form_name}"
                matrix, _ = solver.assemble_system(
                    solver.formulation_from_tag(tag), cm, k_plus, k_minus
                )
                label = ("A_" if form_name == "schur" else "M_") + suffix
                conds[label] = solver.condition_number(matrix)
        for label in CONDITIONING_LABELS:
            rows.append(
                ResultRow(
                    n=n,
                    h=grid.h,
                    geometry=shape.label,
                    bc=cfg.bc,
                    formulation=label,
                    max_error=None,
                    cond=conds.get(label),
                )
            )
    return ConditioningReport(rows=rows, notes=notes)


def _field_str(value) -> str:
    return "" if value is None else f"{value:.17g}"


def emit_csv(rows, path, include_timing: bool = False, metadata=()) -> None:
    """Deterministic CSV; wall_time stays empty unless timing is requested."""
    with open(path, "w", encoding="ascii") as fh:
        for line in metadata:
            fh.write(f"# {line}\n")
        fh.write(CSV_HEADER + "\n")
        for r in rows:
            wall = _field_str(r.wall_time) if include_timing else ""
            fh.write(
                f"{r.n},{r.h:.17g},{r.geometry},{r.bc},{r.formulation},"
                f"{_field_str(r.max_error)},{_field_str(r.cond)},{wall}\n"
            )


def csv_metadata(cfg: ExperimentConfig):
    if cfg.unbounded:
        return ("max_error measured over the box-restricted interior node set",)
    return ()


def dump_solution_csv(sol: SolutionField, path) -> None:
    """Error-surface dump: x,y,value,exact,error over interior nodes."""
    grid = sol.grid
    with open(path, "w", encoding="ascii") as fh:
        fh.write("x,y,value,exact,error\n")
        for (j, k), v, e in zip(sol.ps.m_plus_indices, sol.values, sol.exact):
            x, y = grid.node(int(j), int(k))
            fh.write(f"{x:.17g},{y:.17g},{v:.17g},{e:.17g},{abs(v - e):.17g}\n")


_PLOT_PREAMBLE = """\
#!/usr/bin/env python3
\"\"\"Plot companion for {csv}; regenerates the figures from the CSV alone.\"\"\"
import csv
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = Path(__file__).resolve().parent
ROWS = [row for row in csv.DictReader(
    (line for line in open(HERE / "{csv}") if not line.startswith("#"))
)]
"""

_CONVERGENCE_BODY = """\
fig, ax = plt.subplots(figsize=(5, 4))
by_label = {}
for row in ROWS:
    if not row["max_error"]:
        continue
    label = f'{row["geometry"]} {row["bc"]} {row["formulation"]}'
    by_label.setdefault(label, []).append((float(row["h"]), float(row["max_error"])))
for label, pts in sorted(by_label.items()):
    pts.sort()
    ax.loglog([p[0] for p in pts], [p[1] for p in pts], "o-", label=label)
hs = sorted({float(row["h"]) for row in ROWS if row["max_error"]})
if hs:
    anchor = max(
        float(row["max_error"]) for row in ROWS if row["max_error"]
    )
    ax.loglog(hs, [anchor * (h / hs[-1]) ** 2 for h in hs], "k--", label="order 2")
ax.set_xlabel("h")
ax.set_ylabel("max error")
ax.legend(fontsize=7)
fig.tight_layout()
fig.savefig(HERE / "convergence.png", dpi=150)
print("wrote", HERE / "convergence.png")
"""

_CONDITIONING_BODY = """\
fig, ax = plt.subplots(figsize=(5, 4))
by_label = {}
for row in ROWS:
    if not row["cond"]:
        continue
    by_label.setdefault(row["formulation"], []).append(
        (int(row["n"]), float(row["cond"]))
    )
for label, pts in sorted(by_label.items()):
    pts.sort()
    ax.semilogy([p[0] for p in pts], [p[1] for p in pts], "o-", label=label)
ax.set_xlabel("N")
ax.set_ylabel("condition number")
ax.legend(fontsize=7)
fig.tight_layout()
fig.savefig(HERE / "conditioning.png", dpi=150)
print("wrote", HERE / "conditioning.png")
"""


def write_plot_script(csv_path, script_path, kind: str) -> None:
    """Companion script reading the CSV by relative path."""
    import os

    if kind not in ("convergence", "conditioning"):
        raise ConfigError(f"unknown plot kind {kind!r}")
    rel = os.path.basename(str(csv_path))
    body = _CONVERGENCE_BODY if kind == "convergence" else _CONDITIONING_BODY
    with open(script_path, "w", encoding="ascii") as fh:
        fh.write(_PLOT_PREAMBLE.format(csv=rel))
        fh.write(body)
