"""Discrete error norms, observed orders and the refinement-study driver."""
from __future__ import annotations

import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import fv1d, fv2d
from .mesh import (Mesh1D, Mesh2D, build_cell_centered, build_mesh2d, build_third_point,
                   build_uniform, read_mesh_file)
from .model import Problem1D, Problem2D, get_problem

__all__ = [
    "StudyError",
    "ErrorField",
    "error_field",
    "h1_error_1d",
    "l2_error_1d",
    "h1_error_2d",
    "l2_error_2d",
    "modified_l2_2d",
    "norm_value",
    "observed_order",
    "least_squares_slope",
    "MeshFamily",
    "FAMILIES",
    "ReportRow",
    "ConvergenceReport",
    "solve_on_mesh",
    "run_study",
    "side_by_side",
]


class StudyError(ValueError):
    """Invalid study request."""


@dataclass(frozen=True, eq=False)
class ErrorField:
    """Nodal errors ``u(x_i) - u_i`` with zeros on the boundary entries."""

    values: np.ndarray
    mesh: object


def error_field(solution, problem) -> ErrorField:
    if problem.exact is None:
        raise StudyError(f"{problem.name}: no exact solution to measure errors against")
    if isinstance(solution, fv1d.Solution1D):
        e = problem.exact(solution.mesh.x) - solution.values
        e[0] = e[-1] = 0.0
    else:
        X, Y = solution.mesh.grid()
        e = problem.exact(X, Y) - solution.values
        e[0, :] = e[-1, :] = e[:, 0] = e[:, -1] = 0.0
    return ErrorField(e, solution.mesh)


def h1_error_1d(e: ErrorField) -> float:
    """``sqrt(sum_{i=0..N} (e_{i+1} - e_i)^2 / h_{i+1/2})``."""
    return float(np.sqrt(np.sum(np.diff(e.values) ** 2 / e.mesh.h_half)))


def l2_error_1d(e: ErrorField) -> float:
    """``sqrt(sum_i h_i e_i^2)``."""
    return float(np.sqrt(np.sum(e.mesh.h * e.values[1:-1] ** 2)))


def h1_error_2d(e: ErrorField) -> float:
    ax, ay = e.mesh.axis_x, e.mesh.axis_y
    v = e.values
    sx = np.sum(ay.h[None, :] * np.diff(v, axis=0)[:, 1:-1] ** 2 / ax.h_half[:, None])
    sy = np.sum(ax.h[:, None] * np.diff(v, axis=1)[1:-1, :] ** 2 / ay.h_half[None, :])
    return float(np.sqrt(sx + sy))


def l2_error_2d(e: ErrorField) -> float:
    ax, ay = e.mesh.axis_x, e.mesh.axis_y
    return float(np.sqrt(np.sum(ax.h[:, None] * ay.h[None, :] * e.values[1:-1, 1:-1] ** 2)))


def modified_l2_2d(e: ErrorField) -> float:
    """L2-type sum weighted by ``k_j h_{i+1/2}`` over interior cells."""
    ax, ay = e.mesh.axis_x, e.mesh.axis_y
    w = ax.h_half[1:, None] * ay.h[None, :]
    return float(np.sqrt(np.sum(w * e.values[1:-1, 1:-1] ** 2)))


_NORMS_1D = {"h1": h1_error_1d, "l2": l2_error_1d}
_NORMS_2D = {"h1": h1_error_2d, "l2": l2_error_2d, "l2mod": modified_l2_2d}


def norm_value(e: ErrorField, name: str) -> float:
    table = _NORMS_1D if isinstance(e.mesh, Mesh1D) else _NORMS_2D
    try:
        return table[name](e)
    except KeyError:
        raise StudyError(f"unknown norm {name!r} (choose from {', '.join(table)})") from None


def observed_order(errors: Sequence[float], hs: Sequence[float],
                   mode: str = "anchored") -> np.ndarray:
    """Observed convergence orders, one per row after the first.

    ``anchored`` compares every row with the first one; ``dyadic`` compares
    consecutive rows.
    """
    e = np.asarray(errors, dtype=float)
    h = np.asarray(hs, dtype=float)
    if e.shape != h.shape or e.ndim != 1:
        raise ValueError("errors and hs must be matching 1D sequences")
    if e.size < 2:
        raise ValueError("need at least two rows")
    if np.any(e <= 0) or np.any(h <= 0):
        raise ValueError("errors and mesh sizes must be positive")
    le, lh = np.log(e), np.log(h)
    if mode == "anchored":
        return (le[1:] - le[0]) / (lh[1:] - lh[0])
    if mode == "dyadic":
        return np.diff(le) / np.diff(lh)
    raise ValueError(f"unknown ratio mode {mode!r}")


def least_squares_slope(errors: Sequence[float], hs: Sequence[float]) -> float:
    """Slope of the least-squares line through ``(log h, log e)``."""
    return float(np.polyfit(np.log(hs), np.log(errors), 1)[0])


@dataclass(frozen=True)
class MeshFamily:
    name: str
    build: Callable[[object], object]
    size_of: Callable[[object], float]
    dim: int


FAMILIES = {
    f.name: f
    for f in (
        MeshFamily("uniform", build_uniform, lambda m: m.size, 1),
        MeshFamily("cell-centered", build_cell_centered, lambda m: m.size, 1),
        MeshFamily("third-point", build_third_point, lambda m: m.size, 1),
        MeshFamily("custom", read_mesh_file, lambda m: m.size, 1),
        MeshFamily("uniform-2d", lambda n: build_mesh2d(build_uniform(n), build_uniform(n)),
                   lambda m: m.size, 2),
        MeshFamily("cell-centered-2d",
                   lambda p: build_mesh2d(build_cell_centered(p), build_cell_centered(p)),
                   lambda m: m.size, 2),
        # alternating cells along x; uniform cells along y, 3/2 times the larger x cell
        MeshFamily("cell-centered-by-uniform",
                   lambda p: build_mesh2d(build_cell_centered(p), build_uniform(p)),
                   lambda m: m.size, 2),
    )
}

ESTIMATORS = ("taylor", "direct", "aux")


def solve_on_mesh(mesh, problem, level: int, estimator: str = "taylor"):
    """Solution of the requested correction level on one mesh."""
    if isinstance(mesh, Mesh2D):
        if not isinstance(problem, Problem2D):
            raise StudyError("2D mesh family needs a 2D problem")
        if level > 1:
            raise StudyError("2D corrections are available up to level 1")
        if estimator != "taylor":
            raise StudyError("estimator options apply to 1D studies only")
        if level == 0:
            return fv2d.solve_basic_2d(mesh, problem)
        return fv2d.solve_with_correction_2d(mesh, problem)[2]
    if not isinstance(problem, Problem1D):
        raise StudyError("1D mesh family needs a 1D problem")
    if estimator not in ESTIMATORS:
        raise StudyError(f"unknown estimator {estimator!r}")
    if estimator == "aux":
        if level != 1:
            raise StudyError("the auxiliary u'' estimator is defined for level 1 only")
        basic = fv1d.solve_basic(mesh, problem)
        aux = fv1d.aux_second_derivative_solve(mesh, problem, basic.matrix)
        return fv1d.first_correction(mesh, problem, basic, aux)
    return fv1d.kth_correction(mesh, problem, level, half_points=estimator)


@dataclass(frozen=True)
class ReportRow:
    h: float
    errors: dict
    orders: dict


@dataclass(frozen=True)
class ConvergenceReport:
    """Errors and observed orders over a refinement sequence."""

    problem_id: str
    family: str
    level: int
    norms: tuple
    rows: tuple
    ratio: str = "anchored"
    q: int = 2
    estimator: str = "taylor"

    @property
    def hs(self) -> np.ndarray:
        return np.array([r.h for r in self.rows])

    def errors(self, norm: str) -> np.ndarray:
        return np.array([r.errors[norm] for r in self.rows])

    def orders(self, norm: str) -> list:
        """Order column (first entry ``None``; ``"exact"`` for zero errors)."""
        return [r.orders[norm] for r in self.rows]

    def scaled(self, norm: str) -> np.ndarray:
        return self.errors(norm) / self.hs**self.q

    def _cells(self, row: ReportRow, norm: str):
        err = row.errors[norm]
        order = row.orders[norm]
        if order is None:
            o = ""
        elif order == "exact":
            o = "exact"
        else:
            o = f"{order:.6f}"
        return f"{err:.10e}", o, f"{err / row.h**self.q:.6e}"

    def to_csv(self) -> str:
        multi = len(self.norms) > 1
        head = ["h"]
        for n in self.norms:
            head += [f"error_{n}", f"order_{n}",
                     f"error_over_h{self.q}" + (f"_{n}" if multi else "")]
        lines = [",".join(head)]
        for row in self.rows:
            cells = [f"{row.h:.12g}"]
            for n in self.norms:
                cells += self._cells(row, n)
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        head = ["h"]
        for n in self.norms:
            head += [f"error {n}", "order", f"error/h^{self.q}"]
        body = []
        for row in self.rows:
            cells = [f"{row.h:.6g}"]
            for n in self.norms:
                err, o, sc = self._cells(row, n)
                cells += [f"{float(err):.4e}", o or "-", f"{float(sc):.4f}"]
            body.append(cells)
        title = (f"{self.problem_id} on {self.family} mesh, level {self.level}"
                 f" ({self.ratio} ratios)")
        return title + "\n" + _align([head] + body)

    def write(self, outdir, stem: str) -> tuple[Path, Path]:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        csv_path = outdir / f"{stem}.csv"
        txt_path = outdir / f"{stem}.txt"
        _atomic_write(csv_path, self.to_csv())
        _atomic_write(txt_path, self.to_text() + "\n")
        return csv_path, txt_path


def _align(rows: list[list[str]]) -> str:
    widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
    fmt = lambda r: "  ".join(cell.rjust(w) for cell, w in zip(r, widths))
    sep = "-" * len(fmt(rows[0]))
    return "\n".join([fmt(rows[0]), sep] + [fmt(r) for r in rows[1:]])


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _order_column(errors: np.ndarray, hs: np.ndarray, ratio: str) -> list:
    out: list = [None]
    for k in range(1, len(errors)):
        ref = 0 if ratio == "anchored" else k - 1
        if errors[k] == 0 or errors[ref] == 0:
            out.append("exact")
        else:
            out.append(float(observed_order([errors[ref], errors[k]], [hs[ref], hs[k]])[0]))
    return out


def _study_point(problem_id, family_name, size, level, norms, estimator):
    family = FAMILIES[family_name]
    problem = get_problem(problem_id)
    mesh = family.build(size)
    sol = solve_on_mesh(mesh, problem, level, estimator)
    e = error_field(sol, problem)
    return family.size_of(mesh), {n: norm_value(e, n) for n in norms}


def run_study(problem_id: str, family: str, sizes: Sequence, level: int,
              norms: Sequence[str] = ("h1",), ratio: str = "anchored", q: int = 2,
              estimator: str = "taylor", jobs: int = 1) -> ConvergenceReport:
    """Solve on every mesh of a family and tabulate errors and orders."""
    if family not in FAMILIES:
        raise StudyError(f"unknown mesh family {family!r} (known: {', '.join(FAMILIES)})")
    if len(sizes) < 2:
        raise StudyError("need ≥ 2 refinements")
    if level < 0:
        raise StudyError("correction level must be >= 0")
    if ratio not in ("anchored", "dyadic"):
        raise StudyError(f"unknown ratio mode {ratio!r}")
    norms = tuple(norms)
    if not norms:
        raise StudyError("at least one norm is required")
    get_problem(problem_id)
    args = [(problem_id, family, s, level, norms, estimator) for s in sizes]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(args))) as pool:
            results = list(pool.map(_study_point, *zip(*args)))
    else:
        results = [_study_point(*a) for a in args]
    hs = np.array([r[0] for r in results])
    if np.any(np.diff(hs) >= 0):
        raise StudyError("sizes must give strictly decreasing mesh sizes")
    orders = {n: _order_column(np.array([r[1][n] for r in results]), hs, ratio) for n in norms}
    rows = tuple(
        ReportRow(float(h), dict(res[1]), {n: orders[n][k] for n in norms})
        for k, (h, res) in enumerate(zip(hs, results))
    )
    return ConvergenceReport(problem_id, family, level, norms, rows, ratio, q, estimator)


def side_by_side(reports: Sequence[ConvergenceReport], labels: Sequence[str],
                 norm: str, title: str = "") -> str:
    """Text table with one (order, error/h^q) column pair per report."""
    head = ["h"]
    scale = "error" if reports[0].q == 0 else f"error/h^{reports[0].q}"
    for lab in labels:
        head += [f"{lab} order", f"{lab} {scale}"]
    body = []
    for k, row in enumerate(reports[0].rows):
        cells = [f"{row.h:.6g}"]
        for rep in reports:
            r = rep.rows[k]
            o = r.orders[norm]
            cells.append("-" if o is None else (o if isinstance(o, str) else f"{o:.4f}"))
            cells.append(f"{r.errors[norm] / r.h**rep.q:.4e}")
        body.append(cells)
    table = _align([head] + body)
    return f"{title}\n{table}" if title else table
