"""Five-point finite volume scheme on tensor-product meshes and its first
correction, for ``-lap(u) = f`` and ``-lap(u) + p u = f``.

Grids carry a boundary ring: arrays of center values have shape
``(M+2, N+2)`` with index 0 and M+1 (resp. N+1) on the boundary.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .linalg import FivePointOperator, cg_solve
from .mesh import Mesh2D
from .model import Problem2D, ProblemError

__all__ = [
    "Solution2D",
    "apply_five_point",
    "assemble_2d",
    "cell_integrals_2d",
    "solve_basic_2d",
    "solve_aux_uxx_2d",
    "first_correction_2d",
    "solve_with_correction_2d",
]

CG_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Solution2D:
    """Center values on the full grid, boundary ring included."""

    values: np.ndarray
    mesh: Mesh2D
    level: int
    operator: FivePointOperator = field(repr=False)
    role: str = "primary"

    @property
    def interior(self) -> np.ndarray:
        return self.values[1:-1, 1:-1]


def apply_five_point(mesh: Mesh2D, field_values) -> np.ndarray:
    """Five-point diffusion operator evaluated at interior cells.

    Accepts a :class:`Solution2D` or an ``(M+2, N+2)`` array whose ring holds
    the boundary values.
    """
    w = field_values.values if isinstance(field_values, Solution2D) else np.asarray(field_values, float)
    ax, ay = mesh.axis_x, mesh.axis_y
    if w.shape != (ax.n + 2, ay.n + 2):
        raise ValueError(f"field has shape {w.shape}, expected {(ax.n + 2, ay.n + 2)}")
    flux_x = np.diff(w[:, 1:-1], axis=0) / ax.h_half[:, None]
    flux_y = np.diff(w[1:-1, :], axis=1) / ay.h_half[None, :]
    return (-ay.h[None, :] * np.diff(flux_x, axis=0)
            - ax.h[:, None] * np.diff(flux_y, axis=1))


def assemble_2d(mesh: Mesh2D, p=None) -> FivePointOperator:
    """Operator of the basic scheme; ``p`` adds ``h_i k_j p(x_i, y_j)`` to the center."""
    ax, ay = mesh.axis_x, mesh.axis_y
    hi = ax.h[:, None]
    kj = ay.h[None, :]
    west = kj / ax.h_half[:-1, None]
    east = kj / ax.h_half[1:, None]
    south = hi / ay.h_half[None, :-1]
    north = hi / ay.h_half[None, 1:]
    center = west + east + south + north
    if p is not None:
        X, Y = np.meshgrid(ax.centers, ay.centers, indexing="ij")
        center = center + hi * kj * p(X, Y)
    arrays = [np.ascontiguousarray(np.broadcast_to(a, center.shape), dtype=float)
              for a in (center, west, east, south, north)]
    for a in arrays:
        a.setflags(write=False)
    return FivePointOperator(*arrays)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(5)


def _gauss_axis(edges):
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    return mid[:, None] + half[:, None] * _GL_NODES, half[:, None] * _GL_WEIGHTS


def cell_integrals_2d(func, mesh: Mesh2D) -> np.ndarray:
    """Tensor 5x5 Gauss-Legendre integrals of ``func`` over every cell."""
    xs, wx = _gauss_axis(mesh.axis_x.edges)
    ys, wy = _gauss_axis(mesh.axis_y.edges)
    vals = np.asarray(func(xs[:, :, None, None], ys[None, None, :, :]), dtype=float)
    vals = np.broadcast_to(vals, xs.shape + ys.shape)
    return np.einsum("ia,jb,iajb->ij", wx, wy, vals)


def _solve(mesh, op, rhs, level, ring=None, role="primary", rel_tol=CG_TOL) -> Solution2D:
    m, n = mesh.shape
    values = np.zeros((m + 2, n + 2)) if ring is None else np.array(ring, dtype=float)
    values[1:-1, 1:-1] = cg_solve(op, rhs, rel_tol=rel_tol)
    return Solution2D(values, mesh, level, op, role)


def solve_basic_2d(mesh: Mesh2D, problem: Problem2D,
                   operator: Optional[FivePointOperator] = None) -> Solution2D:
    """First-order solution of the five-point scheme."""
    if operator is None:
        operator = assemble_2d(mesh, problem.p)
    return _solve(mesh, operator, cell_integrals_2d(problem.f, mesh), 0)


def _x_differences(values: np.ndarray, mesh: Mesh2D) -> np.ndarray:
    """``(w_{i+1,j} - w_ij) / h_{i+1/2}`` for ``i = 0..M`` and all ``j``."""
    return np.diff(values, axis=0) / mesh.axis_x.h_half[:, None]


def _y_differences(values: np.ndarray, mesh: Mesh2D) -> np.ndarray:
    return np.diff(values, axis=1) / mesh.axis_y.h_half[None, :]


def solve_aux_uxx_2d(mesh: Mesh2D, problem: Problem2D, basic: Optional[Solution2D] = None,
                     operator: Optional[FivePointOperator] = None) -> Solution2D:
    """Approximate ``u_xx`` with the operator of the basic scheme.

    ``u_xx`` solves the same problem with source ``f_xx`` (minus
    ``p_xx u + 2 p_x u_x`` when a reaction term is present), boundary values
    ``-f`` on the sides ``x = 0`` and ``x = 1``, and zero on the other two.
    """
    f_2x = problem.closure("f_2x")
    ax, ay = mesh.axis_x, mesh.axis_y
    if operator is None:
        operator = basic.operator if basic is not None else assemble_2d(mesh, problem.p)
    ring = np.zeros((ax.n + 2, ay.n + 2))
    ring[0, :] = -problem.f(0.0, ay.x)
    ring[-1, :] = -problem.f(1.0, ay.x)
    ring[1:-1, 0] = 0.0
    ring[1:-1, -1] = 0.0
    rhs = cell_integrals_2d(f_2x, mesh) + operator.fold_boundary(ring)
    if problem.has_reaction:
        if basic is None:
            raise ProblemError("the reaction model needs the basic solution for the u_xx solve")
        p_x, p_2x = problem.closure("p_x"), problem.closure("p_2x")
        X, Y = np.meshgrid(ax.centers, ay.centers, indexing="ij")
        hi, kj = ax.h[:, None], ay.h[None, :]
        dxu = _x_differences(basic.values, mesh)[:, 1:-1]
        px = p_x(X, Y)
        rhs = (rhs - hi * kj * p_2x(X, Y) * basic.interior
               - 2 * ax.h_plus[1:-1, None] * kj * px * dxu[1:]
               - 2 * ax.h_minus[1:-1, None] * kj * px * dxu[:-1])
    return _solve(mesh, operator, rhs, 0, ring=ring, role="second-derivative")


def first_correction_2d(mesh: Mesh2D, problem: Problem2D, basic: Solution2D,
                        aux: Solution2D) -> Solution2D:
    """Second-order correction of the basic solution, same operator.

    ``u_xx`` at vertical interfaces comes from ``aux``; ``u_yy`` is eliminated
    through the equation, ``u_yy = p u - f - u_xx``.
    """
    if basic.level != 0:
        raise ValueError("first_correction_2d expects a basic (level 0) solution")
    if aux.role != "second-derivative":
        raise ValueError("aux must come from solve_aux_uxx_2d")
    f_x = problem.closure("f_x")
    ax, ay = mesh.axis_x, mesh.axis_y
    U, V = basic.values, aux.values
    hi, kj = ax.h[:, None], ay.h[None, :]
    hp, hm = ax.h_plus[1:-1, None], ax.h_minus[1:-1, None]
    kp, km = ay.h_plus[None, 1:-1], ay.h_minus[None, 1:-1]
    skew_x = 0.5 * (ax.minus_next - ax.plus)
    skew_y = 0.5 * (ay.minus_next - ay.plus)
    X, Y = mesh.grid()

    # u_xx at x-interfaces, i = 0..M
    flux_x = -kj * skew_x[:, None] * V[:-1, 1:-1]
    # u_yy at y-interfaces, j = 0..N
    xi, yh = np.meshgrid(ax.centers, ay.half_points, indexing="ij")
    u_yy = -problem.f(xi, yh) - V[1:-1, :-1]
    if problem.has_reaction:
        u_yy = u_yy + problem.p(xi, yh) * U[1:-1, :-1]
    flux_y = -hi * skew_y[None, :] * u_yy

    dxv = _x_differences(V, mesh)[:, 1:-1]
    dyv = _y_differences(V, mesh)[1:-1, :]
    # u_xyy = -f_x - u_xxx (+ (p u)_x), at x_i and x_{i-1}
    mixed_r = -f_x(X[1:-1, 1:-1], Y[1:-1, 1:-1]) - dxv[1:]
    mixed_l = -f_x(X[:-2, 1:-1], Y[:-2, 1:-1]) - dxv[:-1]
    if problem.has_reaction:
        p, p_x, p_y = problem.p, problem.closure("p_x"), problem.closure("p_y")
        dxu = _x_differences(U, mesh)[:, 1:-1]
        dyu = _y_differences(U, mesh)[1:-1, :]
        Xc, Yc = X[1:-1, 1:-1], Y[1:-1, 1:-1]
        Xl = X[:-2, 1:-1]
        pc = p(Xc, Yc)
        mixed_r = mixed_r + p_x(Xc, Yc) * U[1:-1, 1:-1] + pc * dxu[1:]
        mixed_l = mixed_l + p_x(Xl, Yc) * U[:-2, 1:-1] + p(Xl, Yc) * dxu[:-1]
    local = (hi * kp**2 / 2 * dyv[:, 1:] - hi * km**2 / 2 * dyv[:, :-1]
             + kj * hp**2 / 2 * mixed_r - kj * hm**2 / 2 * mixed_l)
    if problem.has_reaction:
        uc = U[1:-1, 1:-1]
        local = (local
                 - kj * (hp**2 - hm**2) / 2 * p_x(Xc, Yc) * uc
                 - kj * hp**2 / 2 * pc * dxu[1:] + kj * hm**2 / 2 * pc * dxu[:-1]
                 - hi * (kp**2 - km**2) / 2 * p_y(Xc, Yc) * uc
                 - hi * kp**2 / 2 * pc * dyu[:, 1:] + hi * km**2 / 2 * pc * dyu[:, :-1])
    rhs = (cell_integrals_2d(problem.f, mesh) + np.diff(flux_x, axis=0)
           + np.diff(flux_y, axis=1) + local)
    return _solve(mesh, basic.operator, rhs, 1)


def solve_with_correction_2d(mesh: Mesh2D, problem: Problem2D):
    """Basic solution, auxiliary ``u_xx`` and first correction on one mesh."""
    basic = solve_basic_2d(mesh, problem)
    aux = solve_aux_uxx_2d(mesh, problem, basic)
    return basic, aux, first_correction_2d(mesh, problem, basic, aux)
