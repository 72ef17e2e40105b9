"""Linear solvers: tridiagonal elimination, Jacobi-preconditioned CG for the
five-point operator, and a dense LU oracle for cross-checks.

The inner loops live in a compiled extension when it is available; otherwise
an interpreted implementation with the same interface is used.  Setting the
environment variable ``FVCORRECT_PURE=1`` forces the interpreted kernels.
"""
from __future__ import annotations

import os
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from . import _purepy

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

__all__ = [
    "LinalgError",
    "SingularSystemError",
    "ConvergenceError",
    "TridiagonalSystem",
    "FivePointOperator",
    "thomas_solve",
    "dense_solve",
    "cg_solve",
    "CGInfo",
    "BACKEND",
    "get_kernels",
]


def get_kernels(name: Optional[str] = None):
    """Return the kernel module: ``"compiled"``, ``"python"`` or the default."""
    if name == "python":
        return _purepy
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        return _compiled
    if name is not None:
        raise ValueError(f"unknown kernel backend {name!r}")
    if _compiled is None or os.environ.get("FVCORRECT_PURE", "") not in ("", "0"):
        return _purepy
    return _compiled


_kernels = get_kernels()
BACKEND = "compiled" if _kernels is _compiled else "python"


class LinalgError(RuntimeError):
    """Base class for solver failures."""


class SingularSystemError(LinalgError):
    pass


class ConvergenceError(LinalgError):
    def __init__(self, message: str, residual: float = float("nan"), iterations: int = -1):
        super().__init__(message, residual, iterations)
        self.residual = residual
        self.iterations = iterations

    def __str__(self) -> str:
        return self.args[0]


@dataclass(frozen=True, eq=False)
class TridiagonalSystem:
    """Tridiagonal matrix stored by diagonals, with an optional right-hand side."""

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    rhs: Optional[np.ndarray] = None

    def __post_init__(self):
        n = len(self.diag)
        if len(self.sub) != max(n - 1, 0) or len(self.sup) != max(n - 1, 0):
            raise ValueError("sub and super diagonals must have length N-1")
        if self.rhs is not None and len(self.rhs) != n:
            raise ValueError("rhs must have length N")

    @property
    def n(self) -> int:
        return len(self.diag)

    def with_rhs(self, rhs) -> "TridiagonalSystem":
        return TridiagonalSystem(self.sub, self.diag, self.sup, np.asarray(rhs, dtype=float))

    def matvec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = self.diag * x
        y[1:] += self.sub * x[:-1]
        y[:-1] += self.sup * x[1:]
        return y

    def to_dense(self) -> np.ndarray:
        a = np.diag(self.diag)
        if self.n > 1:
            a += np.diag(self.sub, -1) + np.diag(self.sup, 1)
        return a


def thomas_solve(system: TridiagonalSystem, rhs=None) -> np.ndarray:
    """Solve a tridiagonal system by elimination without pivoting.

    ``rhs`` overrides ``system.rhs`` when given.
    """
    b = system.rhs if rhs is None else rhs
    if b is None:
        raise ValueError("no right-hand side supplied")
    b = np.ascontiguousarray(b, dtype=float)
    if b.shape != (system.n,):
        raise ValueError(f"rhs has shape {b.shape}, expected ({system.n},)")
    args = [np.ascontiguousarray(a, dtype=float) for a in (system.sub, system.diag, system.sup)]
    try:
        x = _kernels.thomas(*args, b)
    except ZeroDivisionError as exc:
        raise SingularSystemError(f"tridiagonal elimination failed: {exc}") from None
    x = np.asarray(x)
    if not np.all(np.isfinite(x)):
        raise SingularSystemError("tridiagonal elimination produced non-finite values")
    return x


DENSE_LIMIT = 2500


def dense_solve(matrix, rhs) -> np.ndarray:
    """LU with partial pivoting; meant as an oracle on small systems."""
    a = np.asarray(matrix, dtype=float)
    b = np.asarray(rhs, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if a.shape[0] > DENSE_LIMIT:
        raise ValueError(f"dense oracle limited to dimension {DENSE_LIMIT}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=True)
    pivots = np.abs(np.diag(lu))
    if pivots.size and pivots.min() <= np.finfo(float).eps * pivots.max() * a.shape[0]:
        raise SingularSystemError("matrix is singular to working precision")
    return scipy.linalg.lu_solve((lu, piv), b)


@dataclass(frozen=True, eq=False)
class FivePointOperator:
    """Five-point operator on an ``M x N`` grid of interior unknowns.

    Neighbor coefficients are stored as positive conductances, so row
    ``(i, j)`` reads ``center*w_ij - west*w_{i-1,j} - east*w_{i+1,j} - ...``.
    Entries on the outer ring of each array couple to boundary values and are
    used when folding Dirichlet data into a right-hand side.
    """

    center: np.ndarray
    west: np.ndarray
    east: np.ndarray
    south: np.ndarray
    north: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.center.shape

    def apply(self, x: np.ndarray, out: Optional[np.ndarray] = None) -> np.ndarray:
        """Matrix action on interior values (boundary treated as zero)."""
        x = np.ascontiguousarray(x, dtype=float).reshape(self.shape)
        if out is None:
            out = np.empty(self.shape)
        return _kernels.five_point_apply(
            self.center, self.west, self.east, self.south, self.north, x, out
        )

    def abs_apply(self, x: np.ndarray) -> np.ndarray:
        """``|A| |x|``, used to bound the rounding error of a residual."""
        ax = np.abs(np.asarray(x, dtype=float).reshape(self.shape))
        out = self.center * ax
        out[1:, :] += self.west[1:, :] * ax[:-1, :]
        out[:-1, :] += self.east[:-1, :] * ax[1:, :]
        out[:, 1:] += self.south[:, 1:] * ax[:, :-1]
        out[:, :-1] += self.north[:, :-1] * ax[:, 1:]
        return out

    def fold_boundary(self, ring: np.ndarray) -> np.ndarray:
        """Right-hand-side contribution of Dirichlet values on the ring.

        ``ring`` has shape ``(M+2, N+2)``; only its outer entries are read.
        """
        r = np.zeros(self.shape)
        r[0, :] += self.west[0, :] * ring[0, 1:-1]
        r[-1, :] += self.east[-1, :] * ring[-1, 1:-1]
        r[:, 0] += self.south[:, 0] * ring[1:-1, 0]
        r[:, -1] += self.north[:, -1] * ring[1:-1, -1]
        return r

    def to_sparse(self):
        import scipy.sparse as sp

        m, n = self.shape
        idx = np.arange(m * n).reshape(m, n)
        rows = [idx.ravel()]
        cols = [idx.ravel()]
        vals = [self.center.ravel()]
        links = (
            (idx[1:, :], idx[:-1, :], self.west[1:, :]),
            (idx[:-1, :], idx[1:, :], self.east[:-1, :]),
            (idx[:, 1:], idx[:, :-1], self.south[:, 1:]),
            (idx[:, :-1], idx[:, 1:], self.north[:, :-1]),
        )
        for src, dst, coef in links:
            rows.append(src.ravel())
            cols.append(dst.ravel())
            vals.append(-coef.ravel())
        return sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(m * n, m * n),
        )

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()


@dataclass(frozen=True)
class CGInfo:
    iterations: int
    residual: float


def _pcg(op, b, x, bnorm, rel_tol, max_iter):
    inv_diag = 1.0 / op.center
    ap = np.empty(op.shape)
    r = b - op.apply(x, ap)
    z = inv_diag * r
    p = z.copy()
    rz = float(np.vdot(r, z))
    target = rel_tol * bnorm
    res = float(np.linalg.norm(r))
    it = 0
    while res > target:
        if it >= max_iter:
            raise ConvergenceError(
                f"CG did not converge in {max_iter} iterations "
                f"(relative residual {res / bnorm:.3e})", res / bnorm, it)
        op.apply(p, ap)
        step = rz / float(np.vdot(p, ap))
        x += step * p
        r -= step * ap
        res = float(np.linalg.norm(r))
        z = inv_diag * r
        rz_new = float(np.vdot(r, z))
        p *= rz_new / rz
        p += z
        rz = rz_new
        it += 1
    return x, it


def cg_solve(op: FivePointOperator, rhs, rel_tol: float = 1e-12,
             max_iter: Optional[int] = None, x0=None, return_info: bool = False):
    """Jacobi-preconditioned conjugate gradients.

    Iterates until the recursive residual satisfies
    ``||r|| <= rel_tol * ||b||``, then checks the true residual ``b - A x``.
    If that exceeds both ``rel_tol`` and the rounding floor of its own
    evaluation, ``eps * || |A| |x| || / ||b||``, CG is restarted from ``x``.
    Raises :class:`ConvergenceError` after ``max_iter`` iterations or when
    restarts stop helping.
    """
    b = np.ascontiguousarray(rhs, dtype=float).reshape(op.shape)
    if max_iter is None:
        max_iter = 10 * b.size + 100
    bnorm = float(np.linalg.norm(b))
    x = np.zeros(op.shape) if x0 is None else np.array(x0, dtype=float).reshape(op.shape)
    if bnorm == 0.0:
        x[:] = 0.0
        return (x, CGInfo(0, 0.0)) if return_info else x
    total = 0
    for _ in range(4):
        x, it = _pcg(op, b, x, bnorm, rel_tol, max_iter - total)
        total += it
        rel = float(np.linalg.norm(b - op.apply(x))) / bnorm
        floor = 8 * np.finfo(float).eps * float(np.linalg.norm(op.abs_apply(x))) / bnorm
        if rel <= max(rel_tol, floor):
            break
    else:
        raise ConvergenceError(
            f"CG stalled at relative residual {rel:.3e} above {rel_tol:.1e}", rel, total)
    return (x, CGInfo(total, rel)) if return_info else x
