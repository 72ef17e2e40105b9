"""Admissible one-dimensional meshes and their tensor products.

Index conventions follow the cell numbering used throughout the package:
cells are numbered ``1..N`` and the boundary points ``x_0 = 0`` and
``x_{N+1} = 1`` are stored with the interior centers.  Arrays indexed by
gaps (``0..N``) have length ``N + 1``; per-point arrays have length ``N + 2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "MeshError",
    "Mesh1D",
    "Mesh2D",
    "build_uniform",
    "build_cell_centered",
    "build_third_point",
    "build_from_edges_centers",
    "build_mesh2d",
    "read_mesh_file",
    "write_mesh_file",
]

ENDPOINT_TOL = 1e-12


class MeshError(ValueError):
    """Raised when a mesh violates an admissibility invariant."""


@dataclass(frozen=True, eq=False)
class Mesh1D:
    """Admissible mesh of (0, 1) with one center strictly inside each cell.

    Attributes
    ----------
    edges : ndarray, shape (N+1,)
        Cell interfaces ``x_{1/2} .. x_{N+1/2}``.
    centers : ndarray, shape (N,)
        Interior centers ``x_1 .. x_N``.
    x : ndarray, shape (N+2,)
        Centers padded with the boundary points 0 and 1.
    h : ndarray, shape (N,)
        Cell widths ``h_1 .. h_N``.
    h_minus, h_plus : ndarray, shape (N+2,)
        ``x_i - x_{i-1/2}`` and ``x_{i+1/2} - x_i`` for ``i = 0..N+1``, with
        ``h_plus[0] = h_minus[N+1] = 0`` (the unused ends are also zero).
    h_half : ndarray, shape (N+1,)
        Center gaps ``x_{i+1} - x_i`` for ``i = 0..N``.
    """

    edges: np.ndarray
    centers: np.ndarray
    x: np.ndarray = field(init=False, repr=False)
    h: np.ndarray = field(init=False, repr=False)
    h_minus: np.ndarray = field(init=False, repr=False)
    h_plus: np.ndarray = field(init=False, repr=False)
    h_half: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        edges = np.array(self.edges, dtype=float)
        centers = np.array(self.centers, dtype=float)
        _validate(edges, centers)
        n = centers.size
        h_minus = np.zeros(n + 2)
        h_plus = np.zeros(n + 2)
        h_minus[1:-1] = centers - edges[:-1]
        h_plus[1:-1] = edges[1:] - centers
        x = np.concatenate(([0.0], centers, [1.0]))
        values = {
            "edges": edges,
            "centers": centers,
            "x": x,
            "h": np.diff(edges),
            "h_minus": h_minus,
            "h_plus": h_plus,
            "h_half": np.diff(x),
        }
        for name, arr in values.items():
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        """Number of cells ``N``."""
        return self.centers.size

    @property
    def size(self) -> float:
        """Mesh size ``max_i h_i``."""
        return float(self.h.max())

    @property
    def plus(self) -> np.ndarray:
        """``h_i^+`` for gap indices ``i = 0..N`` (``h_0^+ = 0``)."""
        return self.h_plus[:-1]

    @property
    def minus_next(self) -> np.ndarray:
        """``h_{i+1}^-`` for gap indices ``i = 0..N`` (``h_{N+1}^- = 0``)."""
        return self.h_minus[1:]

    @property
    def half_points(self) -> np.ndarray:
        """Interfaces ``x_{i+1/2}`` seen from gap ``i = 0..N``, i.e. ``x_i + h_i^+``."""
        return self.x[:-1] + self.plus

    def __repr__(self) -> str:
        return f"Mesh1D(n={self.n}, size={self.size:.6g})"


def _validate(edges: np.ndarray, centers: np.ndarray) -> None:
    if edges.ndim != 1 or centers.ndim != 1:
        raise MeshError("edges and centers must be one-dimensional")
    if centers.size < 1:
        raise MeshError("a mesh needs at least one cell")
    if edges.size != centers.size + 1:
        raise MeshError(
            f"expected {centers.size + 1} edges for {centers.size} centers, got {edges.size}"
        )
    if not (np.all(np.isfinite(edges)) and np.all(np.isfinite(centers))):
        raise MeshError("mesh coordinates must be finite")
    if abs(edges[0]) > ENDPOINT_TOL or abs(edges[-1] - 1.0) > ENDPOINT_TOL:
        raise MeshError(f"edges must start at 0 and end at 1, got {edges[0]!r} and {edges[-1]!r}")
    if np.any(np.diff(edges) <= 0.0):
        raise MeshError("edges must be strictly increasing")
    bad = np.flatnonzero((centers <= edges[:-1]) | (centers >= edges[1:]))
    if bad.size:
        i = int(bad[0])
        raise MeshError(
            f"center {centers[i]!r} of cell {i + 1} lies outside ({edges[i]!r}, {edges[i + 1]!r})"
        )
    if abs(np.diff(edges).sum() - 1.0) > ENDPOINT_TOL:
        raise MeshError("cell widths must sum to 1")


def build_from_edges_centers(edges, centers) -> Mesh1D:
    """Build a mesh from explicit interfaces and centers, validating both."""
    return Mesh1D(np.asarray(edges, dtype=float), np.asarray(centers, dtype=float))


def _from_widths(widths: np.ndarray) -> Mesh1D:
    edges = np.concatenate(([0.0], np.cumsum(widths)))
    edges[-1] = 1.0
    return Mesh1D(edges, 0.5 * (edges[:-1] + edges[1:]))


def _check_count(value, minimum: int, what: str) -> int:
    if isinstance(value, bool) or int(value) != value or value < minimum:
        raise MeshError(f"{what} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def build_uniform(n: int) -> Mesh1D:
    """``n`` equal cells with centers at the midpoints."""
    n = _check_count(n, 1, "n")
    edges = np.linspace(0.0, 1.0, n + 1)
    return Mesh1D(edges, 0.5 * (edges[:-1] + edges[1:]))


def build_cell_centered(pairs: int) -> Mesh1D:
    """Alternating widths ``h/2, h, h/2, h, ...`` with midpoint centers.

    Odd-numbered cells get ``h/2`` and even-numbered cells ``h``; ``h`` is
    fixed by exact tiling, ``h = 2 / (3 * pairs)``.
    """
    pairs = _check_count(pairs, 1, "pairs")
    h = 2.0 / (3.0 * pairs)
    widths = np.tile([0.5 * h, h], pairs)
    return _from_widths(widths)


def build_third_point(n: int) -> Mesh1D:
    """Uniform cells of width ``1/n`` with centers at ``(i - 1/3)/n``.

    Each interior interface then sits at one third of the way between
    neighbouring centers, and all interior center gaps equal ``1/n``.
    """
    n = _check_count(n, 2, "n")
    edges = np.linspace(0.0, 1.0, n + 1)
    centers = (np.arange(1, n + 1) - 1.0 / 3.0) / n
    return Mesh1D(edges, centers)


@dataclass(frozen=True, eq=False)
class Mesh2D:
    """Tensor-product mesh of the unit square.

    The y axis reuses :class:`Mesh1D`; its widths play the role of ``k_j``.
    """

    axis_x: Mesh1D
    axis_y: Mesh1D

    @property
    def shape(self) -> tuple[int, int]:
        """Interior cell counts ``(M, N)``."""
        return self.axis_x.n, self.axis_y.n

    @property
    def size(self) -> float:
        """Largest cell width over both axes."""
        return max(self.axis_x.size, self.axis_y.size)

    def grid(self) -> tuple[np.ndarray, np.ndarray]:
        """Center coordinates including the boundary ring, shape ``(M+2, N+2)``."""
        return np.meshgrid(self.axis_x.x, self.axis_y.x, indexing="ij")

    def __repr__(self) -> str:
        return f"Mesh2D(shape={self.shape}, size={self.size:.6g})"


def build_mesh2d(axis_x: Mesh1D, axis_y: Mesh1D) -> Mesh2D:
    if not isinstance(axis_x, Mesh1D) or not isinstance(axis_y, Mesh1D):
        raise MeshError("both axes must be Mesh1D instances")
    return Mesh2D(axis_x, axis_y)


def read_mesh_file(path) -> Mesh1D:
    """Read a mesh from ``edges: ...`` and ``centers: ...`` lines."""
    found: dict[str, list[float]] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, rest = line.partition(":")
        key = key.strip().lower()
        if not sep or key not in ("edges", "centers"):
            raise MeshError(f"{path}:{lineno}: expected 'edges:' or 'centers:'")
        try:
            found[key] = [float(tok) for tok in rest.split()]
        except ValueError as exc:
            raise MeshError(f"{path}:{lineno}: {exc}") from None
    missing = {"edges", "centers"} - found.keys()
    if missing:
        raise MeshError(f"{path}: missing {', '.join(sorted(missing))} line")
    return build_from_edges_centers(found["edges"], found["centers"])


def write_mesh_file(mesh: Mesh1D, path) -> None:
    fmt = lambda arr: " ".join(repr(float(v)) for v in arr)
    Path(path).write_text(f"edges: {fmt(mesh.edges)}\ncenters: {fmt(mesh.centers)}\n")
