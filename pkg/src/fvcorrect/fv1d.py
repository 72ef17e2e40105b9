"""Three-point finite volume scheme in 1D and its correction ladder.

Every correction re-solves with the matrix assembled for the basic solution;
only the right-hand side changes.  Right-hand sides are built in flux form
(cell integrals plus differences of interface terms) and divided by the cell
widths at the end, matching the row scaling of :func:`assemble_matrix`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial
from typing import Optional, Sequence

import numpy as np

from .linalg import TridiagonalSystem, thomas_solve
from .mesh import Mesh1D
from .model import Problem1D, ProblemError

__all__ = [
    "Solution1D",
    "DerivativeExpansion",
    "DerivativeEstimates",
    "assemble_matrix",
    "cell_integrals",
    "cell_average_source",
    "solve_basic",
    "forward_diff",
    "derivative_expansion",
    "stencil_coeffs",
    "derivative_estimates",
    "first_correction",
    "second_correction",
    "kth_correction",
    "correction_ladder",
    "aux_second_derivative_solve",
    "gauss_cell_integrals",
]

HALF_POINT_MODES = ("taylor", "direct")


@dataclass(frozen=True, eq=False)
class Solution1D:
    """Center values ``u_0 .. u_{N+1}`` including the boundary entries."""

    values: np.ndarray
    mesh: Mesh1D
    level: int
    matrix: TridiagonalSystem = field(repr=False)
    role: str = "primary"

    @property
    def interior(self) -> np.ndarray:
        return self.values[1:-1]


def assemble_matrix(mesh: Mesh1D, alpha: float, beta: float) -> TridiagonalSystem:
    """Tridiagonal matrix of the basic scheme, rows scaled by ``1/h_i``."""
    if alpha < 0 or beta < 0:
        raise ProblemError("alpha and beta must be >= 0")
    h, hh = mesh.h, mesh.h_half
    diag = (1.0 / hh[1:] + 1.0 / hh[:-1] + alpha) / h + beta
    sub = -(1.0 / hh[1:-1] + alpha) / h[1:]
    sup = -(1.0 / hh[1:-1]) / h[:-1]
    for arr in (sub, diag, sup):
        arr.setflags(write=False)
    return TridiagonalSystem(sub, diag, sup)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(5)


def gauss_cell_integrals(func, edges: np.ndarray) -> np.ndarray:
    """Five-point Gauss-Legendre integral of ``func`` over each cell."""
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    pts = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    return half * (np.asarray(func(pts)) @ _GL_WEIGHTS)


def cell_integrals(mesh: Mesh1D, problem: Problem1D) -> np.ndarray:
    """``int_{K_i} f`` from the antiderivative if available, else by quadrature."""
    if problem.f_antideriv is not None:
        return np.diff(problem.f_antideriv(mesh.edges))
    return gauss_cell_integrals(problem.f, mesh.edges)


def cell_average_source(mesh: Mesh1D, problem: Problem1D) -> np.ndarray:
    """Right-hand side of the basic scheme: cell averages of the source."""
    return cell_integrals(mesh, problem) / mesh.h


def _solve(mesh: Mesh1D, matrix: TridiagonalSystem, flux_rhs: np.ndarray, level: int,
           boundary=(0.0, 0.0), role: str = "primary") -> Solution1D:
    interior = thomas_solve(matrix, flux_rhs / mesh.h)
    values = np.concatenate(([boundary[0]], interior, [boundary[1]]))
    return Solution1D(values, mesh, level, matrix, role)


def solve_basic(mesh: Mesh1D, problem: Problem1D,
                matrix: Optional[TridiagonalSystem] = None) -> Solution1D:
    """First-order finite volume solution."""
    if matrix is None:
        matrix = assemble_matrix(mesh, problem.alpha, problem.beta)
    return _solve(mesh, matrix, cell_integrals(mesh, problem), 0)


def forward_diff(solution, mesh: Optional[Mesh1D] = None) -> np.ndarray:
    """``(u_{i+1} - u_i) / h_{i+1/2}`` for ``i = 0..N``."""
    if isinstance(solution, Solution1D):
        mesh = solution.mesh if mesh is None else mesh
        values = solution.values
    else:
        values = np.asarray(solution, dtype=float)
        if mesh is None:
            raise ValueError("mesh required for raw arrays")
    return np.diff(values) / mesh.h_half


@dataclass(frozen=True)
class DerivativeExpansion:
    """``u^{(k)} = sum_j a[j] f^{(j)} + b u + c u'`` for solutions of the ODE."""

    order: int
    a: tuple
    b: object
    c: object

    def evaluate(self, source_values: Sequence[np.ndarray], u, ux):
        """Combine precomputed source derivatives with values of ``u`` and ``u'``."""
        out = self.b * u + self.c * ux
        for coef, fv in zip(self.a, source_values):
            if coef:
                out = out + coef * fv
        return out


def derivative_expansion(k: int, alpha, beta) -> DerivativeExpansion:
    """Express the k-th derivative of the solution through f, u and u'.

    Starts from ``u'' = alpha u' + beta u - f`` and differentiates, removing
    ``u''`` each time.  Works with any numeric type, so rational inputs give
    exact coefficients.
    """
    if k < 2:
        raise ValueError("expansion is defined for k >= 2")
    a, b, c = [-1], beta, alpha
    for _ in range(k - 2):
        a, b, c = [-c] + a, c * beta, b + c * alpha
    return DerivativeExpansion(k, tuple(a), b, c)


def stencil_coeffs(mesh: Mesh1D, m: int, i: Optional[int] = None):
    """Weights of the m-th derivative in the flux defect at each interface.

    ``(1/m!) sum_{j<m} (h_{i+1}^-)^j (-h_i^+)^(m-1-j)`` for ``i = 0..N``; a single
    value when ``i`` is given.
    """
    if m < 2:
        raise ValueError("m must be >= 2")
    hm, hp = mesh.minus_next, mesh.plus
    if i is not None:
        if not 0 <= i <= mesh.n:
            raise IndexError(f"interface index {i} outside 0..{mesh.n}")
        hm, hp = hm[i], hp[i]
    total = sum(hm**j * (-hp) ** (m - 1 - j) for j in range(m))
    return total / factorial(m)


@dataclass(frozen=True, eq=False)
class DerivativeEstimates:
    """Pointwise derivative estimates built from a previous solution.

    ``center[1]`` estimates ``u'(x_i)``; ``center[b]`` for ``b >= 2`` estimates the
    b-th derivative at ``x_i``; ``half[b]`` estimates it at ``x_{i+1/2}``.  All
    arrays are indexed by ``i = 0..N``.
    """

    level: int
    center: dict
    half: dict
    delta: Optional[np.ndarray] = None


def _source_values(problem: Problem1D, count: int, x: np.ndarray) -> list:
    return [problem.source_derivative(j, x) for j in range(count)]


def derivative_estimates(mesh: Mesh1D, problem: Problem1D, level: int,
                         previous: Solution1D,
                         lower: Optional[DerivativeEstimates] = None,
                         half_points: str = "taylor") -> DerivativeEstimates:
    """Derivative estimates consumed by the correction of the given level.

    ``previous`` is the solution of level ``level - 1``; ``lower`` the estimates
    used to build it (needed from level 3 on).  With ``half_points="taylor"``
    interface values are Taylor shifts of the center estimates; with
    ``"direct"`` the source terms are evaluated at the interfaces themselves.
    """
    if level < 1:
        raise ValueError("level must be >= 1")
    if previous.level != level - 1:
        raise ValueError(f"level {level} estimates need a level {level - 1} solution, "
                         f"got level {previous.level}")
    if half_points not in HALF_POINT_MODES:
        raise ValueError(f"half_points must be one of {HALF_POINT_MODES}")
    problem.require_order(level - 1)
    al, be = problem.alpha, problem.beta
    u = previous.values[:-1]
    d = forward_diff(previous)
    if level == 1:
        xh = mesh.half_points
        return DerivativeEstimates(1, {1: d}, {2: al * d + be * u - problem.f(xh)})

    hh, hp = mesh.h_half, mesh.plus
    xc = mesh.x[:-1]
    fc = _source_values(problem, level, xc)
    expand = {m: derivative_expansion(m, al, be) for m in range(2, level + 2)}
    U = {level + 1: expand[level + 1].evaluate(fc, u, d)}
    delta = None
    if level == 2:
        delta = 1.0 + 0.5 * al * hh
        U[2] = (al * d + be * u - fc[0]) / delta
    else:
        if lower is None or lower.level != level - 1:
            raise ValueError(f"level {level} estimates need level {level - 1} estimates")
        for m in range(2, level + 1):
            ux = d - sum(lower.center[j] / factorial(j) * hh ** (j - 1)
                         for j in range(2, level - m + 3))
            U[m] = expand[m].evaluate(fc, u, ux)
    U[1] = d - sum(hh ** (j - 1) / factorial(j) * U[j] for j in range(2, level + 1))

    H = {}
    if half_points == "taylor":
        for m in range(2, level + 2):
            H[m] = sum(hp**j / factorial(j) * U[m + j] for j in range(level - m + 2))
    else:
        fh = _source_values(problem, level, mesh.half_points)
        U0 = {0: u, **U}
        u_half = sum(hp**j / factorial(j) * U0[j] for j in range(level))
        ux_half = sum(hp**j / factorial(j) * U0[1 + j] for j in range(level))
        for m in range(2, level + 2):
            H[m] = expand[m].evaluate(fh, u_half, ux_half)
    return DerivativeEstimates(level, dict(sorted(U.items())), H, delta)


def _corrected_flux_rhs(mesh: Mesh1D, problem: Problem1D, est: DerivativeEstimates,
                        integrals: np.ndarray) -> np.ndarray:
    k = est.level
    al, be = problem.alpha, problem.beta
    U = est.center
    hp = mesh.plus
    r = integrals.copy()
    for m in range(2, k + 2):
        g = stencil_coeffs(mesh, m) * est.half[m]
        r -= g[1:] - g[:-1]
    if al:
        for m in range(1, k + 1):
            g = al * hp**m / factorial(m) * U[m]
            r -= g[1:] - g[:-1]
    if be:
        hp_i = mesh.h_plus[1:-1]
        hm_i = mesh.h_minus[1:-1]
        h_left = mesh.h_half[:-1]
        t = np.zeros(mesh.n)
        for m in range(1, k + 1):
            t += hp_i ** (m + 1) / factorial(m + 1) * U[m][1:]
            shifted = sum(h_left**j / factorial(j) * U[m + j][:-1] for j in range(k - m + 1))
            t -= (-hm_i) ** (m + 1) / factorial(m + 1) * shifted
        r -= be * t
    return r


def _correct(mesh, problem, previous: Solution1D, est: DerivativeEstimates,
             integrals=None) -> Solution1D:
    if integrals is None:
        integrals = cell_integrals(mesh, problem)
    rhs = _corrected_flux_rhs(mesh, problem, est, integrals)
    return _solve(mesh, previous.matrix, rhs, est.level)


def first_correction(mesh: Mesh1D, problem: Problem1D, basic: Solution1D,
                     second_derivative: Optional[Solution1D] = None) -> Solution1D:
    """Second-order correction of the basic solution, same matrix.

    By default ``u''`` at interfaces is recovered from the equation using the
    basic solution.  Passing ``second_derivative`` (from
    :func:`aux_second_derivative_solve`) uses its center values instead.
    """
    if basic.level != 0:
        raise ValueError("first_correction expects a basic (level 0) solution")
    est = derivative_estimates(mesh, problem, 1, basic)
    if second_derivative is not None:
        est = DerivativeEstimates(1, est.center, {2: second_derivative.values[:-1]})
    return _correct(mesh, problem, basic, est)


def second_correction(mesh: Mesh1D, problem: Problem1D, first: Solution1D,
                      half_points: str = "taylor") -> Solution1D:
    """Third-order correction built from the first correction."""
    est = derivative_estimates(mesh, problem, 2, first, half_points=half_points)
    return _correct(mesh, problem, first, est)


def correction_ladder(mesh: Mesh1D, problem: Problem1D, k: int,
                      half_points: str = "taylor") -> list[Solution1D]:
    """Basic solution followed by corrections of levels ``1..k``."""
    if k < 0:
        raise ValueError("k must be >= 0")
    problem.require_order(max(k - 1, 0))
    integrals = cell_integrals(mesh, problem)
    matrix = assemble_matrix(mesh, problem.alpha, problem.beta)
    sols = [_solve(mesh, matrix, integrals, 0)]
    est = None
    for level in range(1, k + 1):
        est = derivative_estimates(mesh, problem, level, sols[-1], lower=est,
                                   half_points=half_points)
        sols.append(_correct(mesh, problem, sols[-1], est, integrals))
    return sols


def kth_correction(mesh: Mesh1D, problem: Problem1D, k: int,
                   half_points: str = "taylor") -> Solution1D:
    """Correction of level ``k`` (``k = 0`` returns the basic solution)."""
    return correction_ladder(mesh, problem, k, half_points)[-1]


def aux_second_derivative_solve(mesh: Mesh1D, problem: Problem1D,
                                matrix: Optional[TridiagonalSystem] = None) -> Solution1D:
    """Finite volume approximation of ``u''`` for ``-u'' + beta u = f``.

    ``u''`` solves the same equation with source ``f''`` and boundary values
    ``-f(0)``, ``-f(1)``; the boundary values are folded into the first and
    last rows.  Cell integrals of ``f''`` are taken exactly from ``f'``.
    """
    if problem.alpha != 0:
        raise ProblemError("the auxiliary second-derivative solve requires alpha = 0")
    problem.require_order(1)
    if matrix is None:
        matrix = assemble_matrix(mesh, problem.alpha, problem.beta)
    edges_fx = problem.source_derivative(1, mesh.edges)
    r = np.diff(edges_fx)
    v0 = -float(problem.f(0.0))
    v1 = -float(problem.f(1.0))
    r[0] += v0 / mesh.h_half[0]
    r[-1] += v1 / mesh.h_half[-1]
    return _solve(mesh, matrix, r, 0, boundary=(v0, v1), role="second-derivative")
