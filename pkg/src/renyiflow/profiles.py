"""Steady profiles of the scaled diffusion flow, matched to prescribed moments.

The stationary densities of the second-moment-rescaled flow are Gaussians for
exponent p = 1 and generalized Gaussians (Barenblatt profiles) otherwise:

    p < 1:  B(y) = (C + (1-p)/(2 p sigma) |y|^2) ** (1/(p-1))        on R^n
    p > 1:  B(y) = max(C - (p-1)/(2 p sigma) |y|^2, 0) ** (1/(p-1))

The pair (C, sigma) is fixed uniquely by mass 1 and second moment E0.  The
admissible exponent range is p > n/(n+2); below it the second moment of the
profile diverges.

Matching is a damped 2D Newton iteration on the quadrature moments of the
sampled profile.  For p < 1 the polynomial tails beyond the grid are accounted
for exactly through incomplete-beta integrals, so the converged parameters
describe the full-space profile, not its truncation.  Closed-form moments
(complete beta integrals) provide an independent check of the construction.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc, betaln

from .density import Density
from .grids import Grid, GridKind, gradient, integrate, sphere_surface_area


class ProfileConstructionError(RuntimeError):
    """Raised when a matched profile cannot be built on the given grid."""


class ProfileKind(enum.Enum):
    GAUSSIAN = "gaussian"
    FAST_DIFFUSION = "barenblatt_fd"
    POROUS_MEDIUM = "barenblatt_pme"


# tail-truncation caps beyond which the grid sampling is too lossy to use
TAIL_MASS_CAP = 1e-3
TAIL_ENERGY_CAP = 1e-2


def critical_exponent(n: int) -> float:
    """Lower admissibility bound n/(n+2) for the diffusion exponent."""
    return n / (n + 2.0)


def check_admissible(p: float, n: int) -> None:
    if p <= critical_exponent(n):
        raise ValueError(
            f"inadmissible exponent: p={p} requires p > n/(n+2) = {critical_exponent(n):g}"
        )


def selfsimilar_exponent(p: float, n: int) -> float:
    """Scaling exponent 2 - n(1-p) governing the self-similar spreading rate."""
    return 2.0 - n * (1.0 - p)


@dataclass(frozen=True)
class SteadyProfile:
    """Parameters of a matched steady profile.

    ``c_b`` and ``sigma`` parametrize the closed form above; ``lam`` is the
    self-similar exponent 2 - n(1-p).  ``tail_mass`` and ``tail_energy`` are
    the exact portions of mass and second moment lying beyond the grid (zero
    for p >= 1 on an adequate grid).
    """

    p: float
    n: int
    c_b: float
    sigma: float
    lam: float
    kind: ProfileKind
    e0: float
    tail_mass: float = 0.0
    tail_energy: float = 0.0

    def curvature(self) -> float:
        """Quadratic coefficient k in the profile argument C +/- k |y|^2."""
        return abs(1.0 - self.p) / (2.0 * self.p * self.sigma)

    def support_radius(self) -> float:
        """Free-boundary radius for p > 1, infinity otherwise."""
        if self.p <= 1.0:
            return math.inf
        return math.sqrt(self.c_b / self.curvature())

    def evaluate(self, x) -> np.ndarray:
        """Closed-form profile values at arbitrary coordinates."""
        r2 = np.asarray(x, dtype=float) ** 2
        k = self.curvature()
        if self.kind is ProfileKind.GAUSSIAN:
            return (2.0 * math.pi * self.sigma) ** (-self.n / 2.0) * np.exp(
                -r2 / (2.0 * self.sigma)
            )
        if self.p < 1.0:
            return (self.c_b + k * r2) ** (1.0 / (self.p - 1.0))
        arg = self.c_b - k * r2
        return np.where(arg > 0.0, arg, 0.0) ** (1.0 / (self.p - 1.0))

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "n": self.n,
            "C_B": self.c_b,
            "sigma": self.sigma,
            "lambda": self.lam,
            "E0": self.e0,
        }


# -- closed-form moment machinery --------------------------------------------


def _beta(a: float, b: float) -> float:
    return math.exp(betaln(a, b))


def _fd_radial_integral(a: float, m: float, c: float, k: float) -> float:
    """Integral over [0, inf) of r^(a-1) (c + k r^2)^(-m); needs m > a/2."""
    return 0.5 * k ** (-a / 2.0) * c ** (a / 2.0 - m) * _beta(a / 2.0, m - a / 2.0)


def _fd_radial_tail(a: float, m: float, c: float, k: float, r0: float) -> float:
    """Exact integral over [r0, inf) of r^(a-1) (c + k r^2)^(-m)."""
    total = _fd_radial_integral(a, m, c, k)
    t0 = k * r0**2 / (c + k * r0**2)
    return total * (1.0 - betainc(a / 2.0, m - a / 2.0, t0))

def _pme_radial_integral(a: float, m: float, c: float, k: float) -> float:
    """Integral over the support of r^(a-1) (c - k r^2)_+^m."""
    return 0.5 * k ** (-a / 2.0) * c ** (m + a / 2.0) * _beta(a / 2.0, m + 1.0)


def closed_form_moments(p: float, n: int, c: float, sigma: float) -> tuple[float, float]:
    """(mass, energy) of the full-space profile with parameters (c, sigma)."""
    area = sphere_surface_area(n)
    if p < 1.0:
        m = 1.0 / (1.0 - p)
        k = (1.0 - p) / (2.0 * p * sigma)
        mass = area * _fd_radial_integral(n, m, c, k)
        energy = area * _fd_radial_integral(n + 2, m, c, k)
    else:
        m = 1.0 / (p - 1.0)
        k = (p - 1.0) / (2.0 * p * sigma)
        mass = area * _pme_radial_integral(n, m, c, k)
        energy = area * _pme_radial_integral(n + 2, m, c, k)
    return mass, energy


def closed_form_lp(p: float, n: int, c: float, sigma: float) -> float:
    """Integral of the profile raised to its own exponent p, full space."""
    area = sphere_surface_area(n)
    if p < 1.0:
        m = 1.0 / (1.0 - p)
        k = (1.0 - p) / (2.0 * p * sigma)
        return area * _fd_radial_integral(n, m * p, c, k)
    m = 1.0 / (p - 1.0)
    k = (p - 1.0) / (2.0 * p * sigma)
    return area * _pme_radial_integral(n, m * p, c, k)


def continuum_parameters(p: float, n: int, e0: float) -> tuple[float, float]:
    """Closed-form (c, sigma) matching mass 1 and energy e0 in the continuum."""
    check_admissible(p, n)
    area = sphere_surface_area(n)
    if p < 1.0:
        m = 1.0 / (1.0 - p)
        b1 = _beta(n / 2.0, m - n / 2.0)
        b2 = _beta(n / 2.0 + 1.0, m - n / 2.0 - 1.0)
        c = ((area * b1 / 2.0) * (e0 * b1 / b2) ** (n / 2.0)) ** (1.0 / m)
        k = c * b2 / (e0 * b1)
        sigma = (1.0 - p) / (2.0 * p * k)
    else:
        m = 1.0 / (p - 1.0)
        b1 = _beta(n / 2.0, m + 1.0)
        b2 = _beta(n / 2.0 + 1.0, m + 1.0)
        c = ((2.0 / (area * b1)) * (b2 / (e0 * b1)) ** (n / 2.0)) ** (1.0 / m)
        k = c * b2 / (e0 * b1)
        sigma = (p - 1.0) / (2.0 * p * k)
    return c, sigma


# -- grid-level evaluation -----------------------------------------------------


def _grid_tail_start(grid: Grid) -> float:
    return float(grid.nodes[-1])


def _sample(p: float, n: int, c: float, sigma: float, grid: Grid) -> np.ndarray:
    r2 = grid.nodes**2
    if p < 1.0:
        k = (1.0 - p) / (2.0 * p * sigma)
        return (c + k * r2) ** (-1.0 / (1.0 - p))
    k = (p - 1.0) / (2.0 * p * sigma)
    arg = c - k * r2
    return np.where(arg > 0.0, arg, 0.0) ** (1.0 / (p - 1.0))


def _tails(p: float, n: int, c: float, sigma: float, grid: Grid) -> tuple[float, float]:
    """Exact (mass, energy) of the profile beyond the grid; zero for p > 1."""
    if p >= 1.0:
        return 0.0, 0.0
    m = 1.0 / (1.0 - p)
    k = (1.0 - p) / (2.0 * p * sigma)
    r0 = _grid_tail_start(grid)
    area = sphere_surface_area(n)
    return (
        area * _fd_radial_tail(n, m, c, k, r0),
        area * _fd_radial_tail(n + 2, m, c, k, r0),
    )


def _corrected_moments(
    p: float, n: int, c: float, sigma: float, grid: Grid
) -> tuple[float, float, float, float]:
    values = _sample(p, n, c, sigma, grid)
    tail_mass, tail_energy = _tails(p, n, c, sigma, grid)
    mass = integrate(grid, values) + tail_mass
    energy = integrate(grid, grid.nodes**2 * values) + tail_energy
    return mass, energy, tail_mass, tail_energy


# -- matched constructions ----------------------------------------------------


def gaussian_matched(n: int, e0: float, grid: Grid) -> tuple[SteadyProfile, Density]:
    """Gaussian steady state with mass 1, mean 0, energy e0 (sigma = e0/n)."""
    if e0 <= 0:
        raise ValueError("target energy must be positive")
    if grid.n != n:
        raise ValueError(f"grid dimension {grid.n} does not match n={n}")
    sigma = e0 / n
    if grid.extent < 6.0 * math.sqrt(sigma):
        raise ValueError(
            f"grid too small: needs extent >= 6 sqrt(sigma) = {6.0 * math.sqrt(sigma):.3g}"
        )
    profile = SteadyProfile(
        p=1.0,
        n=n,
        c_b=(2.0 * math.pi * sigma) ** (-n / 2.0),
        sigma=sigma,
        lam=2.0,
        kind=ProfileKind.GAUSSIAN,
        e0=e0,
    )
    density = Density(grid=grid, values=profile.evaluate(grid.nodes), pdf=profile.evaluate)
    return profile, density


def barenblatt_matched(
    p: float,
    n: int,
    e0: float,
    grid: Grid,
    initial_guess: tuple[float, float] | None = None,
    residual_tol: float = 1e-11,
    max_iter: int = 60,
) -> tuple[SteadyProfile, Density]:
    """Barenblatt steady profile with quadrature mass 1 and energy e0.

    Newton residuals are the tail-corrected quadrature moments, so for p > 1
    the sampled density carries mass and energy (1, e0) to residual tolerance,
    while for p < 1 the full-space profile does (the grid part misses exactly
    the reported tails).  Fails if the tails exceed the module caps, meaning
    the grid extent is too small for this exponent.
    """
    check_admissible(p, n)
    if abs(p - 1.0) <= 1e-6:
        raise ValueError("exponent p = 1 is the Gaussian case; use gaussian_matched")
    if e0 <= 0:
        raise ValueError("target energy must be positive")
    if grid.n != n:
        raise ValueError(f"grid dimension {grid.n} does not match n={n}")

    if initial_guess is None:
        theta = np.log(np.array(continuum_parameters(p, n, e0)))
    else:
        c0, s0 = initial_guess
        if c0 <= 0 or s0 <= 0:
            raise ValueError("initial guess must be positive")
        theta = np.log(np.array([c0, s0], dtype=float))

    scale = np.array([1.0, max(1.0, e0)])

    def residual(th: np.ndarray) -> np.ndarray:
        c, sigma = np.exp(th)
        mass, energy, _, _ = _corrected_moments(p, n, c, sigma, grid)
        return np.array([mass - 1.0, energy - e0])

    r = residual(theta)
    for _ in range(max_iter):
        if np.max(np.abs(r / scale)) <= residual_tol:
            break
        jac = np.empty((2, 2))
        for j in range(2):
            step = 1e-7
            bumped = theta.copy()
            bumped[j] += step
            jac[:, j] = (residual(bumped) - r) / step
        try:
            delta = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError as exc:
            raise ProfileConstructionError(f"singular Jacobian in profile match: {exc}")
        lam = 1.0
        best = None
        for _ in range(25):
            trial = theta + lam * delta
            r_trial = residual(trial)
            if np.linalg.norm(r_trial / scale) < np.linalg.norm(r / scale):
                best = (trial, r_trial)
                break
            lam *= 0.5
        if best is None:
            raise ProfileConstructionError(
                f"profile match stalled at residual {np.max(np.abs(r / scale)):.3e}"
            )
        theta, r = best
    else:
        raise ProfileConstructionError(
            f"profile match did not converge: residual {np.max(np.abs(r / scale)):.3e}"
        )

    c, sigma = np.exp(theta)
    mass, energy, tail_mass, tail_energy = _corrected_moments(p, n, c, sigma, grid)
    if tail_mass > TAIL_MASS_CAP or tail_energy > TAIL_ENERGY_CAP * e0:
        raise ProfileConstructionError(
            f"grid extent too small for the profile tail: tail mass {tail_mass:.2e}, "
            f"tail energy {tail_energy:.2e} (caps {TAIL_MASS_CAP:g}, {TAIL_ENERGY_CAP:g} E0)"
        )
    if p > 1.0:
        support = math.sqrt(c / ((p - 1.0) / (2.0 * p * sigma)))
        if support >= grid.extent:
            raise ProfileConstructionError(
                f"free boundary at {support:.3g} exceeds grid extent {grid.extent:g}"
            )
    kind = ProfileKind.FAST_DIFFUSION if p < 1.0 else ProfileKind.POROUS_MEDIUM
    profile = SteadyProfile(
        p=p,
        n=n,
        c_b=float(c),
        sigma=float(sigma),
        lam=selfsimilar_exponent(p, n),
        kind=kind,
        e0=e0,
        tail_mass=tail_mass,
        tail_energy=tail_energy,
    )
    density = Density(grid=grid, values=profile.evaluate(grid.nodes), pdf=profile.evaluate)
    return profile, density


def matched_profile(p: float, n: int, e0: float, grid: Grid) -> tuple[SteadyProfile, Density]:
    """Moment-matched steady profile: Gaussian at p = 1, Barenblatt otherwise."""
    if abs(p - 1.0) <= 1e-6:
        return gaussian_matched(n, e0, grid)
    return barenblatt_matched(p, n, e0, grid)


# -- self-similar family -------------------------------------------------------


def selfsimilar_barenblatt(profile: SteadyProfile, t: float, grid: Grid) -> Density:
    """Slice at time t of the self-similar family through ``profile``.

    The family dilates the base profile by a = t^(-1/lam); at t = 1 it returns
    the base itself, mass is conserved, and energy grows as t^(2/lam).  When
    sigma = lam this family is the exact source-type solution of the flow.
    """
    if t <= 0:
        raise ValueError("self-similar time must be positive")
    a = t ** (-1.0 / profile.lam)
    return _dilated_profile_density(profile, a, grid)


def _dilated_profile_density(profile: SteadyProfile, a: float, grid: Grid) -> Density:
    def pdf(x):
        return a**profile.n * profile.evaluate(a * np.asarray(x))

    values = pdf(grid.nodes)
    if profile.p > 1.0:
        if profile.support_radius() / a >= grid.extent:
            raise ValueError(
                f"support overflow: dilated free boundary {profile.support_radius() / a:.3g} "
                f"outside grid extent {grid.extent:g}"
            )
    else:
        # tail mass of the dilated profile equals the base tail beyond a * extent
        k = profile.curvature()
        m = 1.0 / (1.0 - profile.p) if profile.p < 1.0 else None
        if m is not None:
            area = sphere_surface_area(profile.n)
            tail = area * _fd_radial_tail(profile.n, m, profile.c_b, k, a * grid.extent)
            if tail > TAIL_MASS_CAP:
                raise ValueError(
                    f"support overflow: {tail:.2e} of the dilated profile mass lies "
                    "beyond the grid"
                )
    return Density(grid=grid, values=values, pdf=pdf)


# -- diagnostics ---------------------------------------------------------------


@dataclass(frozen=True)
class SteadyStateReport:
    """Tail-corrected functionals of a matched profile on its grid."""

    mass: float
    energy: float
    lp: float
    fisher_gen: float
    moment_identity_residual: float  # sigma * int B^p - E0 / n
    stationarity_residual: float  # max over interior support, relative


def steady_state_report(profile: SteadyProfile, density: Density) -> SteadyStateReport:
    """Evaluate mass, energy, the p-norm integral and the generalized Fisher
    information of a matched profile, adding exact tail contributions for p < 1.

    The Fisher numerator uses the discrete gradient on the grid interior (an
    independent route from the closed-form identities) and the analytic
    integrand beyond the grid.
    """
    p, n = profile.p, profile.n
    grid = density.grid
    c, sigma = profile.c_b, profile.sigma
    values = density.values
    area = sphere_surface_area(n)

    mass = integrate(grid, values) + profile.tail_mass
    energy = integrate(grid, grid.nodes**2 * values) + profile.tail_energy

    mask = density.support_mask()
    vp = np.zeros_like(values)
    vp[mask] = values[mask] ** p
    lp = integrate(grid, vp)
    grad_vp = gradient(grid, vp)
    stencil = mask & np.roll(mask, 1) & np.roll(mask, -1)
    stencil[0] = stencil[-1] = False
    num_integrand = np.zeros_like(values)
    num_integrand[stencil] = grad_vp[stencil] ** 2 / values[stencil]
    fisher_num = integrate(grid, num_integrand)

    if p < 1.0:
        m = 1.0 / (1.0 - p)
        k = profile.curvature()
        r0 = _grid_tail_start(grid)
        lp += area * _fd_radial_tail(n, m * p, c, k, r0)
        fisher_num += (
            area
            * (2.0 * m * p * k) ** 2
            * _fd_radial_tail(n + 2, 2.0 * m * p + 2.0 - m, c, k, r0)
        )

    fisher_gen = fisher_num / lp

    # stationarity of the matched profile: p/(p-1) grad(B^(p-1)) + y/sigma = 0
    if profile.kind is ProfileKind.GAUSSIAN:
        with np.errstate(divide="ignore"):
            log_b = np.where(mask, np.log(values, where=mask, out=np.zeros_like(values)), 0.0)
        resid = gradient(grid, log_b) + grid.nodes / sigma
    else:
        bpm1 = np.zeros_like(values)
        bpm1[mask] = values[mask] ** (p - 1.0)
        resid = (p / (p - 1.0)) * gradient(grid, bpm1) + grid.nodes / sigma
    scale = max(np.abs(grid.nodes[stencil]).max(initial=0.0) / sigma, 1e-300)
    stationarity = float(np.abs(resid[stencil]).max(initial=0.0)) / scale

    return SteadyStateReport(
        mass=float(mass),
        energy=float(energy),
        lp=float(lp),
        fisher_gen=float(fisher_gen),
        moment_identity_residual=float(sigma * lp - energy / n),
        stationarity_residual=stationarity,
    )


# -- scale family monotonicity --------------------------------------------------


@dataclass(frozen=True)
class ScaleFamilyReport:
    sigmas: tuple[float, ...]
    values: tuple[float, ...]
    expected_direction: str  # "increasing" for p < 1, "decreasing" for p > 1
    strictly_monotone: bool


def phi_monotonicity_check(
    p: float, n: int, grid: Grid, sigmas, e0: float = 1.0
) -> ScaleFamilyReport:
    """Evaluate phi(s) = s * integral of (energy-preserving rescale of B)^p.

    The family B_s(y) = s^(-(n+2)/2) B(y / sqrt(s)) keeps the second moment of
    the base profile fixed while trading mass for scale; phi is strictly
    increasing in s for p < 1 and strictly decreasing for p > 1.
    """
    check_admissible(p, n)
    if abs(p - 1.0) <= 1e-6:
        raise ValueError("inadmissible exponent: phi is defined for p != 1")
    sigmas = [float(s) for s in sigmas]
    if any(s <= 0 for s in sigmas) or sorted(sigmas) != sigmas:
        raise ValueError("sigma samples must be positive and increasing")
    base, _ = barenblatt_matched(p, n, e0, grid)
    area = sphere_surface_area(n)
    k = base.curvature()
    phi = []
    for s in sigmas:
        amp = s ** (-(n + 2) / 2.0)
        r2 = grid.nodes**2
        if p < 1.0:
            m = 1.0 / (1.0 - p)
            vals = amp**p * (base.c_b + (k / s) * r2) ** (-m * p)
            tail = amp**p * area * _fd_radial_tail(n, m * p, base.c_b, k / s, grid.nodes[-1])
        else:
            m = 1.0 / (p - 1.0)
            arg = base.c_b - (k / s) * r2
            vals = amp**p * np.where(arg > 0.0, arg, 0.0) ** (m * p)
            tail = 0.0
        phi.append(s * (integrate(grid, vals) + tail))
    diffs = np.diff(phi)
    if p < 1.0:
        monotone = bool(np.all(diffs > 0))
        direction = "increasing"
    else:
        monotone = bool(np.all(diffs < 0))
        direction = "decreasing"
    return ScaleFamilyReport(
        sigmas=tuple(sigmas),
        values=tuple(float(v) for v in phi),
        expected_direction=direction,
        strictly_monotone=monotone,
    )


def profile_to_json(profile: SteadyProfile, path=None) -> dict:
    record = profile.to_json()
    if path is not None:
        with open(path, "w") as fh:
            json.dump(record, fh)
    return record
