"""Probability densities on a grid with moment bookkeeping.

A :class:`Density` stores nonnegative node values together with cached mass,
mean and second moment (the "energy").  Densities built from a closed form
carry an analytic evaluator so that dilation and shifting can be performed
exactly; purely numerical densities fall back to monotone cubic resampling.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator

from .grids import Grid, GridKind, gradient, integrate, make_grid

# relative threshold below which a node does not count as support
SUPPORT_FLOOR = 1e-12
# default relative boundary floor for dilation overflow checks
BOUNDARY_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class Density:
    """Nonnegative grid function with cached moments.

    ``pdf``, when present, evaluates the underlying closed form at arbitrary
    coordinates; operations use it to avoid interpolation error.
    """

    grid: Grid
    values: np.ndarray
    mass: float = field(init=False)
    mean: float = field(init=False)
    energy: float = field(init=False)
    pdf: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.nodes.shape:
            raise ValueError("values length does not match grid")
        if np.any(values < 0):
            worst = float(values.min())
            if worst < -1e-13 * max(1.0, float(values.max())):
                raise ValueError(f"density values must be nonnegative (min {worst:g})")
            values = np.maximum(values, 0.0)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mass", integrate(self.grid, values))
        if self.grid.kind is GridKind.LINE:
            mean = integrate(self.grid, self.grid.nodes * values)
        else:
            mean = 0.0  # radial symmetry
        object.__setattr__(self, "mean", mean)
        object.__setattr__(
            self, "energy", integrate(self.grid, self.grid.nodes**2 * values)
        )

    def support_mask(self, floor: float = SUPPORT_FLOOR) -> np.ndarray:
        """Boolean mask of nodes where the density exceeds ``floor * max``."""
        return self.values > floor * float(self.values.max(initial=0.0))


def density_from_values(grid: Grid, values: np.ndarray, pdf=None) -> Density:
    return Density(grid=grid, values=values, pdf=pdf)


def moments(f: Density) -> tuple[float, float, float]:
    """(mass, mean, energy) by quadrature; cached values agree by construction."""
    return f.mass, f.mean, f.energy


def gaussian_density(grid: Grid, variance: float, mean: float = 0.0) -> Density:
    """Isotropic Gaussian with per-coordinate variance ``variance`` in grid.n dims."""
    if variance <= 0:
        raise ValueError("variance must be positive")
    if grid.kind is GridKind.RADIAL and mean != 0.0:
        raise ValueError("radial grids carry centered densities only")
    n = grid.n
    norm = (2.0 * math.pi * variance) ** (-n / 2.0)

    def pdf(x):
        return norm * np.exp(-((np.asarray(x) - mean) ** 2) / (2.0 * variance))

    return Density(grid=grid, values=pdf(grid.nodes), pdf=pdf)


def gaussian_mixture_density(
    grid: Grid, weights, means, variances, center: bool = True
) -> Density:
    """Convex mixture of 1D Gaussians; optionally recentered to exact zero mean."""
    w = np.asarray(weights, dtype=float)
    mu = np.asarray(means, dtype=float)
    var = np.asarray(variances, dtype=float)
    if grid.kind is not GridKind.LINE:
        raise ValueError("gaussian mixtures are built on line grids")
    if w.shape != mu.shape or w.shape != var.shape:
        raise ValueError("weights, means, variances must have equal length")
    if np.any(w <= 0) or np.any(var <= 0):
        raise ValueError("weights and variances must be positive")
    w = w / w.sum()
    if center:
        mu = mu - float(w @ mu)
    norms = (2.0 * math.pi * var) ** -0.5

    def pdf(x):
        x = np.asarray(x, dtype=float)[..., None]
        return np.sum(w * norms * np.exp(-((x - mu) ** 2) / (2.0 * var)), axis=-1)

    return Density(grid=grid, values=pdf(grid.nodes), pdf=pdf)


def uniform_box_density(grid: Grid, half_width: float) -> Density:
    """Flat density on approximately [-half_width, half_width], node-aligned.

    The realized box spans an integer number of cells so that the trapezoid
    mass and every L^p integral of the sampled values are exact.
    """
    if grid.kind is not GridKind.LINE:
        raise ValueError("uniform box is defined on line grids")
    if not 0 < half_width < grid.extent:
        raise ValueError("half_width must lie inside the grid")
    inside = np.abs(grid.nodes) <= half_width + 1e-12
    measure = grid.h * int(inside.sum())
    values = np.where(inside, 1.0 / measure, 0.0)
    return Density(grid=grid, values=values)


def lp_integral(f: Density, p: float) -> float:
    """Integral of f^p over the numerical support (0^p := 0 for p < 1)."""
    if p <= 0:
        raise ValueError("lp_integral requires p > 0")
    mask = f.support_mask()
    vals = np.where(mask, f.values, 0.0)
    powered = np.zeros_like(vals)
    powered[mask] = vals[mask] ** p
    return integrate(f.grid, powered)


def _resample(f: Density, coords: np.ndarray) -> np.ndarray:
    """Evaluate f at arbitrary coordinates: analytic when possible, else PCHIP."""
    if f.pdf is not None:
        return np.asarray(f.pdf(coords), dtype=float)
    interp = PchipInterpolator(f.grid.nodes, f.values, extrapolate=False)
    out = interp(coords)
    out = np.where(np.isfinite(out), out, 0.0)
    return np.maximum(out, 0.0)


def dilate(f: Density, a: float, boundary_floor: float = BOUNDARY_FLOOR) -> Density:
    """Mass-preserving dilation x -> a^n f(a x), resampled onto the same grid.

    Energy scales by 1/a^2.  Raises if the dilated density is significantly
    nonzero at the grid boundary (support overflow), where "significant" means
    exceeding ``boundary_floor`` times the dilated maximum.
    """
    if a <= 0:
        raise ValueError("dilation factor must be positive")
    if a == 1.0:
        return f
    n = f.grid.n
    scale = a**n
    new_values = scale * _resample(f, a * f.grid.nodes)
    peak = float(new_values.max(initial=0.0))
    boundary = abs(new_values[-1]) if f.grid.kind is GridKind.RADIAL else max(
        abs(new_values[0]), abs(new_values[-1])
    )
    if peak > 0 and boundary > boundary_floor * peak:
        raise ValueError(
            f"support overflow: dilated density is {boundary / peak:.2e} of its "
            f"maximum at the grid boundary (floor {boundary_floor:g})"
        )
    new_pdf = None
    if f.pdf is not None:
        base = f.pdf
        new_pdf = lambda x, _b=base, _a=a, _s=scale: _s * _b(_a * np.asarray(x))
    return Density(grid=f.grid, values=new_values, pdf=new_pdf)


def shift(f: Density, offset: float, boundary_floor: float = BOUNDARY_FLOOR) -> Density:
    """Translate a line density by ``offset`` (new density g(x) = f(x + offset))."""
    if f.grid.kind is not GridKind.LINE:
        raise ValueError("shift applies to line grids only")
    if offset == 0.0:
        return f
    new_values = _resample(f, f.grid.nodes + offset)
    peak = float(new_values.max(initial=0.0))
    boundary = max(abs(new_values[0]), abs(new_values[-1]))
    if peak > 0 and boundary > boundary_floor * peak:
        raise ValueError("support overflow: shifted density leaves the grid")
    new_pdf = None
    if f.pdf is not None:
        base = f.pdf
        new_pdf = lambda x, _b=base, _o=offset: _b(np.asarray(x) + _o)
    return Density(grid=f.grid, values=new_values, pdf=new_pdf)


def scale_values(f: Density, factor: float) -> Density:
    """Multiply values by a positive scalar (adjusts mass, keeps shape)."""
    if factor <= 0:
        raise ValueError("scale factor must be positive")
    new_pdf = None
    if f.pdf is not None:
        base = f.pdf
        new_pdf = lambda x, _b=base, _c=factor: _c * _b(np.asarray(x))
    return Density(grid=f.grid, values=factor * f.values, pdf=new_pdf)


def normalize(
    f: Density,
    target_energy: float | None = None,
    boundary_floor: float = BOUNDARY_FLOOR,
) -> Density:
    """Return the density with mass 1, mean 0, and optionally energy ``target_energy``.

    Centering is by shift, mass by scalar rescale, energy by dilation.  The
    operation is idempotent: an already normalized density is returned as is.
    """
    if f.mass <= 0:
        raise ValueError("zero mass: cannot normalize")
    g = f
    if g.grid.kind is GridKind.LINE:
        mu = g.mean / g.mass
        if abs(mu) > 1e-13 * g.grid.extent:
            g = shift(g, mu, boundary_floor)
    if abs(g.mass - 1.0) > 1e-14:
        g = scale_values(g, 1.0 / g.mass)
    if target_energy is not None:
        if target_energy <= 0:
            raise ValueError("target energy must be positive")
        if g.energy <= 0:
            raise ValueError("zero energy: point mass cannot be renormalized")
        # dilation changes energy by 1/a^2; a second mass fix absorbs resampling error
        for _ in range(3):
            rel = abs(g.energy - target_energy) / target_energy
            if rel <= 1e-13:
                break
            a = math.sqrt(g.energy / target_energy)
            g = dilate(g, a, boundary_floor)
            if abs(g.mass - 1.0) > 1e-14:
                g = scale_values(g, 1.0 / g.mass)
    return g


# -- serialization -----------------------------------------------------------


def density_to_csv(f: Density, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["coordinate", "value"])
        for x, v in zip(f.grid.nodes, f.values):
            writer.writerow([f"{x:.17g}", f"{v:.17g}"])


def density_to_json(f: Density) -> dict:
    return {
        "kind": f.grid.kind.value,
        "n": f.grid.n,
        "extent": f.grid.extent,
        "points": f.grid.size,
        "values": [float(v) for v in f.values],
    }


def density_from_json(record: dict) -> Density:
    grid = make_grid(record["kind"], record["n"], record["extent"], record["points"])
    return Density(grid=grid, values=np.asarray(record["values"], dtype=float))


def save_density_json(f: Density, path) -> None:
    with open(path, "w") as fh:
        json.dump(density_to_json(f), fh)


def load_density_json(path) -> Density:
    with open(path) as fh:
        return density_from_json(json.load(fh))
