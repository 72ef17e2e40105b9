import numpy as np
import pytest
from hypothesis import given, strategies as st

from fvcorrect import fv2d
from fvcorrect.analysis import error_field, h1_error_2d, least_squares_slope
from fvcorrect.linalg import dense_solve
from fvcorrect.mesh import build_cell_centered, build_mesh2d, build_third_point, build_uniform
from fvcorrect.model import Problem2D, ProblemError, get_problem, polynomial_problem_2d, sine_problem_2d

from strategies import meshes, random_mesh


def random_mesh2d(seed, m, n):
    rng = np.random.default_rng(seed)
    return build_mesh2d(random_mesh(rng, m), random_mesh(rng, n))


def const2(c):
    return lambda x, y: np.full(np.broadcast(np.asarray(x), np.asarray(y)).shape, float(c))


def constant_reaction(c):
    return sine_problem_2d(const2(c), p_x=const2(0.0), p_y=const2(0.0), p_2x=const2(0.0))


def hand_apply(mesh, w):
    ax, ay = mesh.axis_x, mesh.axis_y
    m, n = mesh.shape
    out = np.zeros((m, n))
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            h, k = ax.h[i - 1], ay.h[j - 1]
            out[i - 1, j - 1] = (
                -k * ((w[i + 1, j] - w[i, j]) / (ax.x[i + 1] - ax.x[i])
                      - (w[i, j] - w[i - 1, j]) / (ax.x[i] - ax.x[i - 1]))
                - h * ((w[i, j + 1] - w[i, j]) / (ay.x[j + 1] - ay.x[j])
                       - (w[i, j] - w[i, j - 1]) / (ay.x[j] - ay.x[j - 1])))
    return out


# -- operator ---------------------------------------------------------------

def test_constant_and_linear_fields_are_annihilated():
    mesh = random_mesh2d(1, 5, 6)
    X, Y = mesh.grid()
    np.testing.assert_allclose(fv2d.apply_five_point(mesh, np.ones_like(X)), 0.0, atol=1e-12)
    np.testing.assert_allclose(fv2d.apply_five_point(mesh, 2 * X - 3 * Y + 1), 0.0, atol=1e-11)


def test_apply_matches_hand_loop():
    mesh = random_mesh2d(2, 3, 3)
    w = np.random.default_rng(3).normal(size=(5, 5))
    np.testing.assert_allclose(fv2d.apply_five_point(mesh, w), hand_apply(mesh, w), rtol=1e-12)


def test_apply_rejects_bad_shape():
    with pytest.raises(ValueError):
        fv2d.apply_five_point(random_mesh2d(2, 3, 3), np.zeros((4, 5)))


def test_operator_split_interior_and_ring():
    mesh = random_mesh2d(4, 4, 7)
    w = np.random.default_rng(5).normal(size=(6, 9))
    op = fv2d.assemble_2d(mesh)
    np.testing.assert_allclose(op.apply(w[1:-1, 1:-1]) - op.fold_boundary(w),
                               fv2d.apply_five_point(mesh, w), rtol=1e-11, atol=1e-12)


@given(st.integers(0, 10**6), st.floats(-3, 3), st.floats(-3, 3))
def test_apply_is_linear(seed, a, b):
    mesh = random_mesh2d(seed, 3, 4)
    rng = np.random.default_rng(seed)
    u, v = rng.normal(size=(2, 5, 6))
    lhs = fv2d.apply_five_point(mesh, a * u + b * v)
    rhs = a * fv2d.apply_five_point(mesh, u) + b * fv2d.apply_five_point(mesh, v)
    np.testing.assert_allclose(lhs, rhs, atol=1e-9 * (1 + np.abs(rhs).max()))


def test_reaction_adds_cell_area_to_center():
    mesh = random_mesh2d(6, 4, 5)
    base = fv2d.assemble_2d(mesh)
    react = fv2d.assemble_2d(mesh, const2(1.0))
    np.testing.assert_allclose(react.center - base.center,
                               np.outer(mesh.axis_x.h, mesh.axis_y.h), rtol=1e-12)
    assert react.west.tobytes() == base.west.tobytes()


def test_operator_is_read_only():
    op = fv2d.assemble_2d(random_mesh2d(6, 3, 3))
    with pytest.raises(ValueError):
        op.center[0, 0] = 1.0


@given(meshes(max_cells=8), meshes(max_cells=8))
def test_dense_operator_symmetric_positive(ax, ay):
    mesh = build_mesh2d(ax, ay)
    a = fv2d.assemble_2d(mesh).to_dense()
    assert np.array_equal(a, a.T)
    x = np.random.default_rng(0).normal(size=a.shape[0])
    assert x @ a @ x > 0


# -- sources ----------------------------------------------------------------

def test_cell_integrals_of_polynomials():
    mesh = random_mesh2d(7, 4, 3)
    ex, ey = mesh.axis_x.edges, mesh.axis_y.edges
    np.testing.assert_allclose(fv2d.cell_integrals_2d(const2(2.0), mesh),
                               2 * np.outer(np.diff(ex), np.diff(ey)), rtol=1e-13)
    got = fv2d.cell_integrals_2d(lambda x, y: x**3 * y**4, mesh)
    np.testing.assert_allclose(got, np.outer(np.diff(ex**4) / 4, np.diff(ey**5) / 5), rtol=1e-12)


# -- basic and auxiliary solves ---------------------------------------------

def test_zero_source_gives_zero():
    mesh = random_mesh2d(8, 5, 5)
    sol = fv2d.solve_basic_2d(mesh, Problem2D(f=const2(0.0)))
    assert not sol.values.any() and sol.level == 0


def test_basic_solution_satisfies_scheme():
    mesh = random_mesh2d(9, 6, 8)
    prob = get_problem("test1-2d")
    sol = fv2d.solve_basic_2d(mesh, prob)
    ints = fv2d.cell_integrals_2d(prob.f, mesh)
    np.testing.assert_allclose(fv2d.apply_five_point(mesh, sol), ints, atol=1e-10)
    op = sol.operator
    np.testing.assert_allclose(sol.interior, dense_solve(op.to_dense(), ints.ravel()).reshape(6, 8),
                               atol=1e-10)


def test_aux_constant_source_is_discrete_harmonic():
    mesh = random_mesh2d(10, 5, 6)
    prob = Problem2D(f=const2(2.0), f_x=const2(0.0), f_2x=const2(0.0))
    aux = fv2d.solve_aux_uxx_2d(mesh, prob)
    assert aux.role == "second-derivative"
    np.testing.assert_array_equal(aux.values[0, :], -2.0)
    np.testing.assert_array_equal(aux.values[-1, :], -2.0)
    np.testing.assert_array_equal(aux.values[1:-1, [0, -1]], 0.0)
    np.testing.assert_allclose(fv2d.apply_five_point(mesh, aux), 0.0, atol=1e-10)
    assert np.all(aux.interior <= 1e-12) and np.all(aux.interior >= -2.0 - 1e-12)


def test_aux_with_zero_ring_is_scaled_basic():
    # f = x(1 - x) vanishes on the x-sides, so the aux solve is the basic solve of f_xx = -2
    mesh = random_mesh2d(11, 4, 5)
    prob = Problem2D(f=lambda x, y: x * (1 - x) + 0 * y, f_x=lambda x, y: 1 - 2 * x + 0 * y,
                     f_2x=const2(-2.0))
    aux = fv2d.solve_aux_uxx_2d(mesh, prob)
    assert not aux.values[[0, -1], :].any()
    unit = fv2d.solve_basic_2d(mesh, Problem2D(f=const2(1.0)))
    np.testing.assert_allclose(aux.values, -2 * unit.values, atol=1e-11)


def test_aux_reaction_needs_basic():
    prob = constant_reaction(1.0)
    with pytest.raises(ProblemError):
        fv2d.solve_aux_uxx_2d(random_mesh2d(1, 3, 3), prob)


def test_missing_closure_reported():
    prob = Problem2D(f=const2(1.0))
    with pytest.raises(ProblemError, match="f_2x"):
        fv2d.solve_aux_uxx_2d(random_mesh2d(1, 3, 3), prob)


# -- first correction -------------------------------------------------------

def hand_correction_rhs(mesh, prob, U, V):
    """Loop transcription of the corrected source for the Laplace model."""
    ax, ay = mesh.axis_x, mesh.axis_y
    m, n = mesh.shape
    xs, ys, ex, ey = ax.x, ay.x, ax.edges, ay.edges
    hp = lambda i: ex[i] - xs[i] if 1 <= i <= m else 0.0
    hm = lambda i: xs[i] - ex[i - 1] if 1 <= i <= m else 0.0
    kp = lambda j: ey[j] - ys[j] if 1 <= j <= n else 0.0
    km = lambda j: ys[j] - ey[j - 1] if 1 <= j <= n else 0.0

    def gamma_x(i, j):  # at x_{i+1/2}, i = 0..m
        return -ay.h[j - 1] * (hm(i + 1) - hp(i)) / 2 * V[i, j]

    def gamma_y(i, j):  # at y_{j+1/2}, j = 0..n
        yh = ys[j] + kp(j)
        return -ax.h[i - 1] * (km(j + 1) - kp(j)) / 2 * (-prob.f(xs[i], yh) - V[i, j])

    rhs = fv2d.cell_integrals_2d(prob.f, mesh).copy()
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            h, k = ax.h[i - 1], ay.h[j - 1]
            dv_n = (V[i, j + 1] - V[i, j]) / (ys[j + 1] - ys[j])
            dv_s = (V[i, j] - V[i, j - 1]) / (ys[j] - ys[j - 1])
            dv_e = (V[i + 1, j] - V[i, j]) / (xs[i + 1] - xs[i])
            dv_w = (V[i, j] - V[i - 1, j]) / (xs[i] - xs[i - 1])
            delta = (h * kp(j) ** 2 / 2 * dv_n - h * km(j) ** 2 / 2 * dv_s
                     + k * hp(i) ** 2 / 2 * (-prob.f_x(xs[i], ys[j]) - dv_e)
                     - k * hm(i) ** 2 / 2 * (-prob.f_x(xs[i - 1], ys[j]) - dv_w))
            rhs[i - 1, j - 1] += (gamma_x(i, j) - gamma_x(i - 1, j)
                                  + gamma_y(i, j) - gamma_y(i, j - 1) + delta)
    return rhs


def test_correction_matches_hand_transcription():
    mesh = random_mesh2d(12, 5, 4)
    prob = get_problem("test1-2d")
    basic, aux, corr = fv2d.solve_with_correction_2d(mesh, prob)
    rhs = hand_correction_rhs(mesh, prob, basic.values, aux.values)
    np.testing.assert_allclose(fv2d.apply_five_point(mesh, corr), rhs, atol=1e-10)


def test_correction_shares_operator():
    mesh = random_mesh2d(13, 4, 6)
    basic, aux, corr = fv2d.solve_with_correction_2d(mesh, constant_reaction(2.0))
    assert aux.operator is basic.operator and corr.operator is basic.operator
    assert corr.level == 1


def test_correction_argument_checks():
    mesh = random_mesh2d(14, 3, 3)
    prob = get_problem("test1-2d")
    basic, aux, corr = fv2d.solve_with_correction_2d(mesh, prob)
    with pytest.raises(ValueError):
        fv2d.first_correction_2d(mesh, prob, corr, aux)
    with pytest.raises(ValueError):
        fv2d.first_correction_2d(mesh, prob, basic, basic)


def test_zero_problem_correction_is_zero():
    zero = const2(0.0)
    prob = Problem2D(f=zero, f_x=zero, f_2x=zero, exact=zero)
    basic, aux, corr = fv2d.solve_with_correction_2d(random_mesh2d(15, 4, 4), prob)
    assert not corr.values.any()


def _h1_slopes(problem, build, params):
    hs, basic_errs, corr_errs = [], [], []
    for q in params:
        mesh = build(q)
        basic, _, corr = fv2d.solve_with_correction_2d(mesh, problem)
        hs.append(mesh.size)
        basic_errs.append(h1_error_2d(error_field(basic, problem)))
        corr_errs.append(h1_error_2d(error_field(corr, problem)))
    return least_squares_slope(basic_errs, hs), least_squares_slope(corr_errs, hs)


def cc2(q):
    return build_mesh2d(build_cell_centered(q), build_cell_centered(q))


def test_laplace_correction_second_order():
    basic, corr = _h1_slopes(get_problem("test1-2d"), cc2, (10, 20, 40))
    assert 0.9 <= basic <= 1.1 and corr >= 1.9


def test_reaction_correction_second_order():
    p = lambda x, y: 1 + x**2 + y
    prob = sine_problem_2d(p, p_x=lambda x, y: 2 * x + 0 * y, p_y=lambda x, y: 1 + 0 * x * y,
                           p_2x=lambda x, y: 2 + 0 * x * y)
    basic, corr = _h1_slopes(prob, cc2, (10, 20, 40))
    assert 0.9 <= basic <= 1.1 and corr >= 1.9


def test_third_point_product_mesh():
    build = lambda n: build_mesh2d(build_third_point(n), build_uniform(n))
    _, corr = _h1_slopes(polynomial_problem_2d(), build, (8, 16, 32))
    assert corr >= 1.9
