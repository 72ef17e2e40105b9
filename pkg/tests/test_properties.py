"""Structural properties of the schemes, checked on random admissible meshes."""
import numpy as np
import pytest
from hypothesis import given, strategies as st

from fvcorrect import fv1d, fv2d
from fvcorrect.analysis import (ErrorField, h1_error_1d, h1_error_2d, l2_error_1d, l2_error_2d,
                                modified_l2_2d, observed_order)
from fvcorrect.mesh import build_mesh2d
from fvcorrect.model import Problem1D, Problem2D, get_problem, sine_problem_1d

from strategies import meshes

coefficients = st.sampled_from([0.0, 0.5, 1.0, 2.5])
# squared terms must stay clear of underflow
scales = st.floats(-20, 20).filter(lambda c: c == 0 or abs(c) > 1e-100)


def bump_1d(alpha, beta):
    # nonnegative source with enough derivatives for the second correction
    return Problem1D(alpha, beta, lambda j, x: [1 + np.sin(3 * np.asarray(x)) ** 2,
                                                3 * np.sin(6 * np.asarray(x)),
                                                18 * np.cos(6 * np.asarray(x))][j], 2)


# -- same matrix at every level ---------------------------------------------

@given(meshes(min_cells=2), coefficients, coefficients)
def test_ladder_reuses_matrix_bytes(mesh, alpha, beta):
    prob = sine_problem_1d(alpha, beta)
    ladder = fv1d.correction_ladder(mesh, prob, 3)
    ref = fv1d.assemble_matrix(mesh, alpha, beta)
    for sol in ladder:
        for name in ("sub", "diag", "sup"):
            assert getattr(sol.matrix, name).tobytes() == getattr(ref, name).tobytes()
    if alpha == 0:
        aux = fv1d.aux_second_derivative_solve(mesh, prob)
        assert aux.matrix.diag.tobytes() == ref.diag.tobytes()


@given(meshes(max_cells=6), meshes(max_cells=6))
def test_two_dimensional_levels_share_operator(ax, ay):
    mesh = build_mesh2d(ax, ay)
    basic, aux, corr = fv2d.solve_with_correction_2d(mesh, get_problem("test2-2d"))
    fresh = fv2d.assemble_2d(mesh)
    for sol in (basic, aux, corr):
        for name in ("center", "west", "east", "south", "north"):
            assert getattr(sol.operator, name).tobytes() == getattr(fresh, name).tobytes()


# -- symmetry ---------------------------------------------------------------

@given(meshes(), coefficients)
def test_width_scaled_matrix_symmetric_without_drift(mesh, beta):
    a = fv1d.assemble_matrix(mesh, 0.0, beta).to_dense()
    scaled = mesh.h[:, None] * a
    np.testing.assert_allclose(scaled, scaled.T, rtol=1e-14)


@given(meshes(max_cells=8), meshes(max_cells=8))
def test_five_point_operator_symmetric(ax, ay):
    mesh = build_mesh2d(ax, ay)
    p = lambda x, y: 1 + x * y
    for op in (fv2d.assemble_2d(mesh), fv2d.assemble_2d(mesh, p)):
        a = op.to_dense()
        assert np.array_equal(a, a.T)


# -- maximum principle ------------------------------------------------------

@given(meshes(), coefficients, coefficients)
def test_nonnegative_source_nonnegative_solution(mesh, alpha, beta):
    sol = fv1d.solve_basic(mesh, bump_1d(alpha, beta))
    assert sol.values.min() >= -1e-12


@given(meshes(max_cells=10), meshes(max_cells=10), st.floats(0, 10))
def test_nonnegative_source_nonnegative_solution_2d(ax, ay, c):
    mesh = build_mesh2d(ax, ay)
    prob = Problem2D(f=lambda x, y: np.exp(-(x - .3) ** 2 - y), p=lambda x, y: c * x * x + 0 * y)
    sol = fv2d.solve_basic_2d(mesh, prob)
    assert sol.values.min() >= -1e-12


# -- norms ------------------------------------------------------------------

@given(meshes(), scales)
def test_norm_homogeneity_1d(mesh, c):
    v = np.zeros(mesh.n + 2)
    v[1:-1] = np.cos(7 * mesh.centers)
    for norm in (h1_error_1d, l2_error_1d):
        expected = abs(c) * norm(ErrorField(v, mesh))
        assert norm(ErrorField(c * v, mesh)) == pytest.approx(expected, rel=1e-12)


@given(meshes(max_cells=8), meshes(max_cells=8), scales)
def test_norm_homogeneity_2d(ax, ay, c):
    mesh = build_mesh2d(ax, ay)
    X, Y = mesh.grid()
    v = np.cos(5 * X + 2 * Y)
    v[0, :] = v[-1, :] = v[:, 0] = v[:, -1] = 0
    for norm in (h1_error_2d, l2_error_2d, modified_l2_2d):
        expected = abs(c) * norm(ErrorField(v, mesh))
        assert norm(ErrorField(c * v, mesh)) == pytest.approx(expected, rel=1e-12)


@given(meshes(), meshes())
def test_norms_vanish_only_on_zero(ax, ay):
    assert h1_error_1d(ErrorField(np.zeros(ax.n + 2), ax)) == 0.0
    mesh = build_mesh2d(ax, ay)
    v = np.zeros((ax.n + 2, ay.n + 2))
    v[1, 1] = 1e-3
    assert h1_error_2d(ErrorField(v, mesh)) > 0 and l2_error_2d(ErrorField(v, mesh)) > 0


# -- observed orders --------------------------------------------------------

@given(st.integers(1, 4), st.floats(1e-3, 1e3),
       st.lists(st.floats(1e-4, 0.5), min_size=2, max_size=6, unique=True),
       st.sampled_from(["anchored", "dyadic"]))
def test_observed_order_exact_on_power_laws(q, c, hs, mode):
    hs = np.sort(np.array(hs))[::-1]
    if np.min(np.abs(np.diff(np.log(hs)))) < 1e-3:
        return
    np.testing.assert_allclose(observed_order(c * hs**q, hs, mode), q, rtol=1e-9)
