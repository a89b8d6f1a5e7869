"""Uniform 1D grids with quadrature and differentiation.

Two geometries are supported: a symmetric interval [-L, L] for functions on
the line, and a radial half-line [0, R] representing spherically symmetric
functions on R^n.  Quadrature weights are trapezoidal; on radial grids they
carry the surface measure of the (n-1)-sphere, so that a weighted sum over
nodes approximates the full n-dimensional integral.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

MIN_POINTS = 16


class GridKind(enum.Enum):
    LINE = "line"
    RADIAL = "radial"


def sphere_surface_area(n: int) -> float:
    """Surface area of the unit sphere in R^n (2 for n=1, 2*pi for n=2, ...)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform grid with trapezoid quadrature weights.

    Attributes
    ----------
    kind : GridKind
        LINE for [-extent, extent], RADIAL for [0, extent].
    n : int
        Spatial dimension carried by the quadrature (1 for LINE).
    nodes : ndarray
        Strictly increasing, uniformly spaced coordinates.
    h : float
        Node spacing.
    weights : ndarray
        Nonnegative quadrature weights; ``weights @ values`` approximates
        the integral of the represented function over R^n.
    """

    kind: GridKind
    n: int
    nodes: np.ndarray
    h: float
    weights: np.ndarray
    extent: float = field(default=0.0)

    def __post_init__(self):
        object.__setattr__(self, "nodes", np.asarray(self.nodes, dtype=float))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))

    @property
    def size(self) -> int:
        return self.nodes.size


def make_grid(kind: GridKind | str, n: int, extent: float, points: int) -> Grid:
    """Build a uniform grid covering [-extent, extent] (LINE) or [0, extent] (RADIAL).

    Parameters
    ----------
    kind : GridKind or str
        Grid geometry; strings "line" / "radial" are accepted.
    n : int
        Spatial dimension.  LINE requires n == 1; RADIAL requires n >= 1.
    extent : float
        Half-width L of the line interval, or radius R of the half-line.
    points : int
        Node count; at least ``MIN_POINTS`` so quadrature claims are meaningful.
    """
    if isinstance(kind, str):
        kind = GridKind(kind.lower())
    if points < MIN_POINTS:
        raise ValueError(f"grid too coarse: points={points} < {MIN_POINTS}")
    if extent <= 0:
        raise ValueError(f"extent must be positive, got {extent}")
    if n < 1 or int(n) != n:
        raise ValueError(f"dimension must be a positive integer, got {n}")
    n = int(n)

    if kind is GridKind.LINE:
        if n != 1:
            raise ValueError("line grids require n = 1")
        nodes = np.linspace(-extent, extent, points)
        h = 2.0 * extent / (points - 1)
        weights = np.full(points, h)
        weights[0] = weights[-1] = 0.5 * h
    else:
        nodes = np.linspace(0.0, extent, points)
        h = extent / (points - 1)
        trap = np.full(points, h)
        trap[0] = trap[-1] = 0.5 * h
        weights = trap * sphere_surface_area(n) * nodes ** (n - 1)
    return Grid(kind=kind, n=n, nodes=nodes, h=h, weights=weights, extent=float(extent))


def integrate(grid: Grid, values: np.ndarray) -> float:
    """Quadrature of ``values`` over R^n: sum of weights[i] * values[i]."""
    values = np.asarray(values, dtype=float)
    if values.shape != grid.nodes.shape:
        raise ValueError(
            f"length mismatch: {values.shape[0]} values on a {grid.size}-node grid"
        )
    return float(grid.weights @ values)


def gradient(grid: Grid, values: np.ndarray) -> np.ndarray:
    """Second-order derivative along the grid coordinate.

    Central differences at interior nodes, one-sided second-order stencils at
    the two boundary nodes; exact for affine input.
    """
    values = np.asarray(values, dtype=float)
    if values.shape != grid.nodes.shape:
        raise ValueError(
            f"length mismatch: {values.shape[0]} values on a {grid.size}-node grid"
        )
    if grid.size < 3:
        raise ValueError("gradient needs at least 3 nodes")
    return np.gradient(values, grid.h, edge_order=2)


def noflux_laplacian(grid: Grid, w: np.ndarray) -> np.ndarray:
    """Flux-form discrete Laplacian of ``w`` with zero-flux boundaries.

    On LINE grids this conserves the trapezoid quadrature of the evolved field
    exactly (boundary nodes own half cells).  On RADIAL grids it discretizes
    r^(1-n) d/dr (r^(n-1) dw/dr) with face areas at midpoints; the center node
    uses the symmetry form 2n (w[1] - w[0]) / h^2.
    """
    w = np.asarray(w, dtype=float)
    if w.shape != grid.nodes.shape:
        raise ValueError("length mismatch in laplacian input")
    h = grid.h
    out = np.empty_like(w)
    if grid.kind is GridKind.LINE:
        out[1:-1] = (w[:-2] - 2.0 * w[1:-1] + w[2:]) / h**2
        out[0] = 2.0 * (w[1] - w[0]) / h**2
        out[-1] = 2.0 * (w[-2] - w[-1]) / h**2
        return out
    r = grid.nodes
    n = grid.n
    area = sphere_surface_area(n)
    r_face = 0.5 * (r[:-1] + r[1:])
    # signed flux A(r_face) * dw/dr through each interior face
    face_flux = area * r_face ** (n - 1) * (w[1:] - w[:-1]) / h
    out[1:-1] = (face_flux[1:] - face_flux[:-1]) / grid.weights[1:-1]
    out[0] = 2.0 * n * (w[1] - w[0]) / h**2
    out[-1] = -face_flux[-1] / grid.weights[-1]
    return out
