"""Problem definitions and the catalog of manufactured test problems.

One-dimensional problems read ``-u'' + alpha u' + beta u = f`` on (0, 1) and
two-dimensional ones ``-lap(u) + p u = f`` on the unit square, both with
homogeneous Dirichlet data.  Sources carry analytic derivative closures
because the corrections consume them directly.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

__all__ = [
    "ProblemError",
    "Problem1D",
    "Problem2D",
    "residual_check",
    "CATALOG",
    "get_problem",
    "sine_problem_1d",
    "sine_problem_2d",
    "polynomial_problem_2d",
]

PI = np.pi
Func1 = Callable[[np.ndarray], np.ndarray]
Func2 = Callable[[np.ndarray, np.ndarray], np.ndarray]


class ProblemError(ValueError):
    """Invalid problem data or a missing closure."""


@dataclass(frozen=True)
class Problem1D:
    """``-u'' + alpha u' + beta u = f`` with ``u(0) = u(1) = 0``.

    ``f_deriv(j, x)`` returns the j-th derivative of the source for
    ``0 <= j <= max_order``.  ``exact_deriv(j, x)`` is optional and only used
    for residual checks.
    """

    alpha: float
    beta: float
    f_deriv: Callable[[int, np.ndarray], np.ndarray]
    max_order: int
    f_antideriv: Optional[Func1] = None
    exact: Optional[Func1] = None
    exact_deriv: Optional[Callable[[int, np.ndarray], np.ndarray]] = None
    name: str = "problem"

    def __post_init__(self):
        if not (self.alpha >= 0 and self.beta >= 0):
            raise ProblemError(f"alpha and beta must be >= 0, got {self.alpha}, {self.beta}")
        if self.max_order < 0:
            raise ProblemError("max_order must be >= 0")

    def f(self, x):
        return self.f_deriv(0, x)

    def source_derivative(self, j: int, x):
        """Checked access to the j-th source derivative."""
        if j > self.max_order:
            raise ProblemError(
                f"{self.name}: source derivative of order {j} requested, "
                f"only {self.max_order} available"
            )
        return self.f_deriv(j, x)

    def require_order(self, j: int) -> None:
        if j > self.max_order:
            raise ProblemError(
                f"{self.name}: needs source derivatives up to order {j}, "
                f"only {self.max_order} available"
            )


@dataclass(frozen=True)
class Problem2D:
    """``-lap(u) + p u = f`` on the unit square with ``u = 0`` on the boundary.

    ``p`` and its derivatives default to zero (the Laplace model).  Missing
    source closures are reported when a correction needs them.
    """

    f: Func2
    f_x: Optional[Func2] = None
    f_2x: Optional[Func2] = None
    f_y: Optional[Func2] = None
    p: Optional[Func2] = None
    p_x: Optional[Func2] = None
    p_y: Optional[Func2] = None
    p_2x: Optional[Func2] = None
    exact: Optional[Func2] = None
    exact_xx: Optional[Func2] = None
    exact_yy: Optional[Func2] = None
    name: str = "problem"

    def __post_init__(self):
        if self.p is not None:
            g = np.linspace(0.0, 1.0, 10)
            X, Y = np.meshgrid(g, g, indexing="ij")
            if np.any(np.asarray(self.p(X, Y)) < 0):
                raise ProblemError(f"{self.name}: p must be nonnegative")

    @property
    def has_reaction(self) -> bool:
        return self.p is not None

    def closure(self, name: str) -> Func2:
        fn = getattr(self, name)
        if fn is None:
            if name.startswith("p") and self.p is None:
                return _zero2
            raise ProblemError(f"{self.name}: missing closure {name!r}")
        return fn


def _zero2(x, y):
    return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)


def residual_check(problem, point) -> float:
    """Absolute residual of the differential equation for the exact solution."""
    if isinstance(problem, Problem1D):
        if problem.exact_deriv is None:
            raise ProblemError(f"{problem.name}: exact derivatives are not available")
        x = float(point)
        d = problem.exact_deriv
        lhs = -d(2, x) + problem.alpha * d(1, x) + problem.beta * d(0, x)
        return float(abs(lhs - problem.f(x)))
    if isinstance(problem, Problem2D):
        if problem.exact is None or problem.exact_xx is None or problem.exact_yy is None:
            raise ProblemError(f"{problem.name}: exact second derivatives are not available")
        x, y = point
        p = problem.closure("p")(x, y)
        lhs = -problem.exact_xx(x, y) - problem.exact_yy(x, y) + p * problem.exact(x, y)
        return float(abs(lhs - problem.f(x, y)))
    raise ProblemError(f"unsupported problem type {type(problem).__name__}")


def _sine_deriv(j, x):
    """j-th derivative of sin(pi x)."""
    return PI**j * np.sin(PI * np.asarray(x, dtype=float) + 0.5 * j * PI)


def _cosine_deriv(j, x):
    return PI**j * np.cos(PI * np.asarray(x, dtype=float) + 0.5 * j * PI)


def sine_problem_1d(alpha: float = 0.0, beta: float = 0.0, name: str = "sine") -> Problem1D:
    """Manufactured problem with exact solution ``sin(pi x)``.

    The source is ``(pi^2 + beta) sin(pi x) + alpha pi cos(pi x)``.
    """
    a, b = float(alpha), float(beta)
    s2 = PI**2 + b

    def f_deriv(j, x):
        out = s2 * _sine_deriv(j, x)
        if a:
            out = out + a * PI * _cosine_deriv(j, x)
        return out

    def f_antideriv(x):
        x = np.asarray(x, dtype=float)
        return -s2 / PI * np.cos(PI * x) + a * np.sin(PI * x)

    return Problem1D(
        alpha=a,
        beta=b,
        f_deriv=f_deriv,
        max_order=12,
        f_antideriv=f_antideriv,
        exact=lambda x: np.sin(PI * np.asarray(x, dtype=float)),
        exact_deriv=_sine_deriv,
        name=name,
    )


def sine_problem_2d(p: Optional[Func2] = None, p_x=None, p_y=None, p_2x=None,
                    name: str = "sine-2d") -> Problem2D:
    """Exact solution ``sin(pi x) sin(pi y)``; an optional reaction ``p`` is folded into f."""
    u = lambda x, y: np.sin(PI * x) * np.sin(PI * y)
    u_x = lambda x, y: PI * np.cos(PI * x) * np.sin(PI * y)
    u_2x = lambda x, y: -PI**2 * u(x, y)
    u_y = lambda x, y: PI * np.sin(PI * x) * np.cos(PI * y)
    if p is None:
        f = lambda x, y: 2 * PI**2 * u(x, y)
        f_x = lambda x, y: 2 * PI**2 * u_x(x, y)
        f_2x = lambda x, y: 2 * PI**2 * u_2x(x, y)
        f_y = lambda x, y: 2 * PI**2 * u_y(x, y)
    else:
        if p_x is None or p_y is None or p_2x is None:
            raise ProblemError("p needs p_x, p_y and p_2x closures")
        f = lambda x, y: 2 * PI**2 * u(x, y) + p(x, y) * u(x, y)
        f_x = lambda x, y: (2 * PI**2 * u_x(x, y) + p_x(x, y) * u(x, y)
                            + p(x, y) * u_x(x, y))
        f_2x = lambda x, y: (-2 * PI**4 * u(x, y) + p_2x(x, y) * u(x, y)
                             + 2 * p_x(x, y) * u_x(x, y) + p(x, y) * u_2x(x, y))
        f_y = lambda x, y: (2 * PI**2 * u_y(x, y) + p_y(x, y) * u(x, y)
                            + p(x, y) * u_y(x, y))
    return Problem2D(
        f=f, f_x=f_x, f_2x=f_2x, f_y=f_y, p=p, p_x=p_x, p_y=p_y, p_2x=p_2x,
        exact=u, exact_xx=u_2x, exact_yy=lambda x, y: -PI**2 * u(x, y), name=name,
    )


def polynomial_problem_2d(name: str = "poly-2d") -> Problem2D:
    """Exact solution ``x y (1 - x)(1 - y)`` for the Laplace model."""
    one = lambda x, y: np.ones(np.broadcast(np.asarray(x), np.asarray(y)).shape)
    return Problem2D(
        f=lambda x, y: 2 * y * (1 - y) + 2 * x * (1 - x),
        f_x=lambda x, y: (2 - 4 * x) * one(x, y),
        f_2x=lambda x, y: -4.0 * one(x, y),
        f_y=lambda x, y: (2 - 4 * y) * one(x, y),
        exact=lambda x, y: x * y * (1 - x) * (1 - y),
        exact_xx=lambda x, y: -2 * y * (1 - y) * one(x, y),
        exact_yy=lambda x, y: -2 * x * (1 - x) * one(x, y),
        name=name,
    )


CATALOG: dict[str, Callable[[], object]] = {
    "test1-1d": lambda: sine_problem_1d(0.0, 0.0, name="test1-1d"),
    "test2-1d-mesh": lambda: sine_problem_1d(0.0, 0.0, name="test2-1d-mesh"),
    "test3-1d": lambda: sine_problem_1d(1.0, 1.0, name="test3-1d"),
    "test1-2d": lambda: polynomial_problem_2d(name="test1-2d"),
    "test2-2d": lambda: sine_problem_2d(name="test2-2d"),
}


def get_problem(problem_id: str):
    """Look up a catalog problem by id."""
    try:
        factory = CATALOG[problem_id]
    except KeyError:
        known = ", ".join(sorted(CATALOG))
        raise ProblemError(f"unknown problem id {problem_id!r} (known: {known})") from None
    return factory()
