"""Entropy and information functionals of densities.

All integrals restrict to the numerical support (values above a relative
floor), which realizes the {f > 0} domains of the continuum definitions and
keeps logarithms finite.  The order-1 limit is dispatched inside a window
|p - 1| <= 1e-6, below the accuracy of the 1/(1-p) cancellation in double
precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .density import Density, lp_integral
from .grids import GridKind, gradient, integrate
from .profiles import check_admissible, matched_profile

P_ONE_WINDOW = 1e-6


def _is_shannon(p: float) -> bool:
    return abs(p - 1.0) <= P_ONE_WINDOW


def _require_normalized(f: Density, what: str) -> None:
    if abs(f.mass - 1.0) > 1e-6:
        raise ValueError(f"{what} expects a unit-mass density (mass = {f.mass:.6g})")
    scale = math.sqrt(max(f.energy, 1e-300))
    if abs(f.mean) > 1e-6 * max(scale, 1.0):
        raise ValueError(f"{what} expects a centered density (mean = {f.mean:.3g})")


def renyi_entropy(f: Density, p: float) -> float:
    """Order-p entropy (1/(1-p)) log int f^p; Shannon entropy at p = 1."""
    if p <= 0:
        raise ValueError("entropy order must be positive")
    if f.mass <= 0:
        raise ValueError("entropy of a zero-mass density is undefined")
    if _is_shannon(p):
        mask = f.support_mask()
        vals = f.values
        integrand = np.zeros_like(vals)
        integrand[mask] = vals[mask] * np.log(vals[mask])
        return -integrate(f.grid, integrand)
    return math.log(lp_integral(f, p)) / (1.0 - p)


def _stencil_mask(mask: np.ndarray) -> np.ndarray:
    """Nodes whose full central-difference stencil lies in the support."""
    out = mask & np.roll(mask, 1) & np.roll(mask, -1)
    out[0] = out[-1] = False
    return out


def fisher_information(f: Density) -> float:
    """Integral of |grad f|^2 / f over the numerical support.

    Nodes whose difference stencil touches the support boundary are dropped;
    near a free boundary this removes a one-node layer whose integrand is the
    small residue of the kink.
    """
    mask = f.support_mask()
    g = gradient(f.grid, f.values)
    stencil = _stencil_mask(mask)
    integrand = np.zeros_like(f.values)
    integrand[stencil] = g[stencil] ** 2 / f.values[stencil]
    return integrate(f.grid, integrand)


def generalized_fisher_information(f: Density, p: float) -> float:
    """(1 / int f^p) * integral of |grad f^p|^2 / f over the support."""
    check_admissible(p, f.grid.n)
    mask = f.support_mask()
    vp = np.zeros_like(f.values)
    vp[mask] = f.values[mask] ** p
    g = gradient(f.grid, vp)
    stencil = _stencil_mask(mask)
    integrand = np.zeros_like(f.values)
    integrand[stencil] = g[stencil] ** 2 / f.values[stencil]
    return integrate(f.grid, integrand) / integrate(f.grid, vp)


def renyi_gap(f: Density, p: float) -> float:
    """Entropy deficit of f against the steady profile with the same moments.

    Equals R_p(profile) - R_p(f) with both entropies evaluated on f's grid,
    so the gap vanishes identically when f is the matched profile itself.
    Nonnegative for every unit-mass centered density, up to quadrature error.
    """
    check_admissible(p, f.grid.n)
    _require_normalized(f, "renyi_gap")
    if f.energy <= 0:
        raise ValueError("renyi_gap needs a positive second moment")
    _, steady = matched_profile(p, f.grid.n, f.energy, f.grid)
    if _is_shannon(p):
        return renyi_entropy(steady, 1.0) - renyi_entropy(f, 1.0)
    return (math.log(lp_integral(f, p)) - math.log(lp_integral(steady, p))) / (p - 1.0)


def relative_renyi(f: Density, g: Density, p: float) -> float:
    """Two-density order-p relative entropy.

    H_p(f|g) = log(int f^p)/(p-1) + log(int g^p) - p/(p-1) log(int g^(p-1) f),
    nonnegative, and undefined for p > 1 when f has mass outside g's support.
    """
    if _is_shannon(p):
        raise ValueError("two-density form needs p != 1; use the Shannon limit")
    check_admissible(p, f.grid.n)
    if f.grid is not g.grid and f.grid.size != g.grid.size:
        raise ValueError("densities must share a grid")
    g_mask = g.support_mask()
    if p > 1.0:
        f_mask = f.support_mask()
        if np.any(f_mask & ~g_mask):
            raise ValueError(
                "relative entropy undefined: f has support outside the reference"
            )
    cross = np.zeros_like(f.values)
    cross[g_mask] = g.values[g_mask] ** (p - 1.0) * f.values[g_mask]
    cross_int = integrate(f.grid, cross)
    if cross_int <= 0:
        raise ValueError("relative entropy undefined: cross integral not positive")
    return (
        math.log(lp_integral(f, p)) / (p - 1.0)
        + math.log(lp_integral(g, p))
        - (p / (p - 1.0)) * math.log(cross_int)
    )


def ralston_entropy(f: Density, b: Density, p: float) -> float:
    """Convexity-gap relative entropy (1/(p-1)) int [f^p - b^p - p b^(p-1)(f-b)].

    At p = 1 this is the Kullback-Leibler divergence of f from b.  For p <= 1
    the reference must be strictly positive on the support of f.  Where f
    vanishes the integrand reduces to b^p, which is used directly so that
    negative powers of a tiny reference never enter.
    """
    if f.grid is not b.grid and f.grid.size != b.grid.size:
        raise ValueError("densities must share a grid")
    fv, bv = f.values, b.values
    f_mask = f.support_mask()
    b_pos = bv > 0.0
    if _is_shannon(p):
        if np.any(f_mask & ~b_pos):
            raise ValueError("reference vanishes where f > 0")
        integrand = np.where(b_pos, bv, 0.0)
        m = f_mask
        integrand[m] = fv[m] * (np.log(fv[m]) - np.log(bv[m])) - (fv[m] - bv[m])
        return integrate(f.grid, integrand)
    if p < 1.0 and np.any(f_mask & ~b_pos):
        raise ValueError("reference vanishes where f > 0 (p < 1 needs b > 0 there)")
    integrand = np.where(b_pos, bv**p, 0.0) * (p - 1.0)  # exact f -> 0 limit
    both = f_mask & b_pos
    integrand[both] = (
        fv[both] ** p
        - bv[both] ** p
        - p * bv[both] ** (p - 1.0) * (fv[both] - bv[both])
    )
    only_f = f_mask & ~b_pos
    integrand[only_f] = fv[only_f] ** p  # reference terms vanish there (p > 1)
    return integrate(f.grid, integrand) / (p - 1.0)


def entropy_powers(f: Density, p: float) -> tuple[float, float]:
    """(Shannon entropy power, order-p entropy power).

    N = exp(2 R / n) and N_p = exp((2/n + p - 1) R_p); the two coincide at
    p = 1.  Both are linear in time exactly on self-similar solutions.
    """
    check_admissible(p, f.grid.n)
    n = f.grid.n
    power_shannon = math.exp(2.0 / n * renyi_entropy(f, 1.0))
    if _is_shannon(p):
        return power_shannon, power_shannon
    power_p = math.exp((2.0 / n + p - 1.0) * renyi_entropy(f, p))
    return power_shannon, power_p


def scale_invariant_renyi(f: Density, p: float) -> float:
    """Dilation-invariant combination R_p(f) - (n/2) log E(f)."""
    check_admissible(p, f.grid.n)
    if f.energy <= 0:
        raise ValueError("scale-invariant entropy needs a positive second moment")
    return renyi_entropy(f, p) - 0.5 * f.grid.n * math.log(f.energy)


# -- aggregate report ----------------------------------------------------------

REPORT_COLUMNS = (
    "p",
    "renyi",
    "shannon",
    "fisher",
    "fisher_gen",
    "gap_to_steady",
    "relative_to_reference",
    "ralston",
    "power_shannon",
    "power_renyi",
    "scale_invariant",
)


@dataclass(frozen=True)
class EntropyReport:
    """All functional values of one density at one order p."""

    p: float
    renyi: float
    shannon: float
    fisher: float
    fisher_gen: float
    gap_to_steady: float
    relative_to_reference: float | None
    ralston: float
    power_shannon: float
    power_renyi: float
    scale_invariant: float

    def csv_row(self) -> list[str]:
        row = []
        for name in REPORT_COLUMNS:
            val = getattr(self, name)
            row.append("" if val is None else f"{val:.17g}")
        return row


def entropy_report(f: Density, p: float, reference: Density | None = None) -> EntropyReport:
    """Evaluate every functional on one density; see REPORT_COLUMNS for order."""
    _, steady = matched_profile(p, f.grid.n, f.energy, f.grid)
    rel = None
    if reference is not None and not _is_shannon(p):
        rel = relative_renyi(f, reference, p)
    power_shannon, power_renyi = entropy_powers(f, p)
    return EntropyReport(
        p=p,
        renyi=renyi_entropy(f, p),
        shannon=renyi_entropy(f, 1.0),
        fisher=fisher_information(f),
        fisher_gen=generalized_fisher_information(f, p),
        gap_to_steady=renyi_gap(f, p),
        relative_to_reference=rel,
        ralston=ralston_entropy(f, steady, p),
        power_shannon=power_shannon,
        power_renyi=power_renyi,
        scale_invariant=scale_invariant_renyi(f, p),
    )
