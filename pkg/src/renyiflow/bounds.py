"""Decay bounds and the functional-inequality suite.

The central object is the closed-form decay bound

    H(t) <= -(n/2) log[1 - (1 - exp(-2 H0 / n)) * E0 / E(t)],

which controls the entropy gap to the moment-matched steady profile along the
flow; for the linear flow E(t) = E0 + 2nt is explicit, while in general the
measured second moment is used directly.  The bound saturates at t = 0 and is
strictly below the plain exponential H0 * exp(-2 n tau / E0) for tau > 0.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass

import numpy as np

from .density import Density, lp_integral
from .entropy import (
    P_ONE_WINDOW,
    entropy_powers,
    fisher_information,
    generalized_fisher_information,
    ralston_entropy,
    renyi_entropy,
    renyi_gap,
)
from .evolve import Trajectory
from .grids import integrate
from .profiles import matched_profile
from .rescale import tau_of_t


def _decay_core(h0: float, n: int, shrink) -> np.ndarray | float:
    """-(n/2) log[1 - (1 - e^(-2 h0 / n)) * shrink] for shrink in (0, 1]."""
    c = -math.expm1(-2.0 * h0 / n)  # 1 - exp(-2 h0 / n), computed stably
    return -0.5 * n * np.log1p(-c * np.asarray(shrink, dtype=float))


def linear_bound(h0: float, e0: float, n: int, t) -> np.ndarray | float:
    """Entropy-gap bound for the linear flow, where E(t) = E0 + 2nt exactly."""
    if h0 < 0:
        raise ValueError("initial entropy gap must be nonnegative")
    if e0 <= 0:
        raise ValueError("initial energy must be positive")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("time must be nonnegative")
    out = _decay_core(h0, n, e0 / (e0 + 2.0 * n * t))
    return float(out) if out.ndim == 0 else out


def nonlinear_bound(h0: float, e0: float, n: int, e_t) -> np.ndarray | float:
    """Entropy-gap bound in terms of the measured second moment E(t) >= E0."""
    if h0 < 0:
        raise ValueError("initial entropy gap must be nonnegative")
    if e0 <= 0:
        raise ValueError("initial energy must be positive")
    e_t = np.asarray(e_t, dtype=float)
    if np.any(e_t < e0 * (1.0 - 1e-9)):
        raise ValueError("second moment below its initial value is inconsistent")
    e_t = np.maximum(e_t, e0)
    out = _decay_core(h0, n, e0 / e_t)
    return float(out) if out.ndim == 0 else out


class Theorem(enum.Enum):
    LINEAR_SHANNON = "linear_shannon"
    NONLINEAR_RENYI = "nonlinear_renyi"


@dataclass(frozen=True)
class DecayEntry:
    t: float
    tau: float
    energy: float
    h_measured: float
    h_bound: float
    slack: float


@dataclass(frozen=True)
class DecayCurve:
    theorem: Theorem
    p: float
    n: int
    e0: float
    h0: float
    entries: tuple[DecayEntry, ...]

    @property
    def min_slack(self) -> float:
        return min(e.slack for e in self.entries)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "tau", "energy", "h_measured", "h_bound", "slack"])
            for e in self.entries:
                writer.writerow(
                    [
                        f"{e.t:.17g}",
                        f"{e.tau:.17g}",
                        f"{e.energy:.17g}",
                        f"{e.h_measured:.17g}",
                        f"{e.h_bound:.17g}",
                        f"{e.slack:.17g}",
                    ]
                )


def verify_decay(traj: Trajectory, p: float) -> DecayCurve:
    """Measure the entropy gap along a trajectory and compare with its bound.

    The gap at each snapshot is taken against the steady profile matched to
    that snapshot's own moments.  For p = 1 the bound uses the explicit linear
    second-moment law; otherwise it uses the measured E(t).
    """
    if len(traj.snapshots) == 0:
        raise ValueError("empty trajectory")
    n = traj.config.n
    shannon = abs(p - 1.0) <= P_ONE_WINDOW
    taus = tau_of_t(traj)
    e0 = float(traj.energies[0])
    h_measured = [renyi_gap(s.density, p) for s in traj.snapshots]
    h0 = max(h_measured[0], 0.0)
    entries = []
    for snap, tau, h in zip(traj.snapshots, taus, h_measured):
        if shannon:
            bound = linear_bound(h0, e0, n, snap.t)
        else:
            bound = nonlinear_bound(h0, e0, n, max(snap.energy, e0))
        entries.append(
            DecayEntry(
                t=snap.t,
                tau=float(tau),
                energy=snap.energy,
                h_measured=h,
                h_bound=float(bound),
                slack=float(bound) - h,
            )
        )
    theorem = Theorem.LINEAR_SHANNON if shannon else Theorem.NONLINEAR_RENYI
    return DecayCurve(theorem=theorem, p=p, n=n, e0=e0, h0=h0, entries=tuple(entries))


# -- rate comparison ---------------------------------------------------------------


@dataclass(frozen=True)
class RateRow:
    tau: float
    improved: float
    exponential: float
    gap: float


@dataclass(frozen=True)
class RateComparison:
    h0: float
    e0: float
    n: int
    rows: tuple[RateRow, ...]
    max_gap: float
    ordering_ok: bool


def compare_rates(h0: float, e0: float, n: int, taus) -> RateComparison:
    """Tabulate the improved bound against the exponential H0 e^(-2n tau / E0).

    The improved curve is never above the exponential one; they meet only at
    tau = 0 (and asymptotically as tau -> infinity).
    """
    if h0 <= 0:
        raise ValueError("rate comparison needs a positive initial gap")
    taus = np.asarray(taus, dtype=float)
    shrink = np.exp(-2.0 * n * taus / e0)
    improved = _decay_core(h0, n, shrink)
    exponential = h0 * shrink
    gap = exponential - improved
    rows = tuple(
        RateRow(tau=float(t), improved=float(r1), exponential=float(r2), gap=float(g))
        for t, r1, r2, g in zip(taus, improved, exponential, gap)
    )
    ordering_ok = bool(np.all(gap >= -1e-12 * max(h0, 1.0)))
    return RateComparison(
        h0=h0, e0=e0, n=n, rows=rows, max_gap=float(gap.max()), ordering_ok=ordering_ok
    )


# -- entropy power concavity --------------------------------------------------------


@dataclass(frozen=True)
class ConcavityReport:
    times: tuple[float, ...]
    powers: tuple[float, ...]
    second_differences: tuple[float, ...]
    max_relative_d2: float  # signed; concavity means this stays <= tolerance
    max_abs_relative_d2: float  # small for exactly linear growth


def concavity_check(traj: Trajectory, p: float) -> ConcavityReport:
    """Second differences of the entropy power along uniformly spaced snapshots."""
    if len(traj.snapshots) < 4:
        raise ValueError("concavity check needs at least 4 snapshots")
    t = traj.times
    gaps = np.diff(t)
    if gaps.max() - gaps.min() > 1e-9 * gaps.max():
        raise ValueError("concavity check needs uniform snapshot spacing")
    powers = np.array([entropy_powers(s.density, p)[1] for s in traj.snapshots])
    d2 = powers[2:] - 2.0 * powers[1:-1] + powers[:-2]
    rel = d2 / powers[1:-1]
    return ConcavityReport(
        times=tuple(t),
        powers=tuple(float(v) for v in powers),
        second_differences=tuple(float(v) for v in d2),
        max_relative_d2=float(rel.max()),
        max_abs_relative_d2=float(np.abs(rel).max()),
    )


# -- inequality suite ----------------------------------------------------------------


@dataclass(frozen=True)
class InequalityRecord:
    name: str
    lhs: float
    rhs: float

    @property
    def slack(self) -> float:
        return self.lhs - self.rhs


@dataclass(frozen=True)
class InequalitySuiteReport:
    p: float
    records: tuple[InequalityRecord, ...]
    empirical_l1_constant: float | None

    @property
    def min_slack(self) -> float:
        return min(r.slack for r in self.records)

    def record(self, name: str) -> InequalityRecord:
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)


def l1_lower_constant(f: Density, b: Density, p: float) -> float | None:
    """Constant C such that the entropy gap dominates C * (L1 distance)^2.

    Derived from the pointwise convexity gap of s -> s^p / (p-1): the second
    derivative p s^(p-2) is bounded below on (0, K] by p K^(p-2) when p <= 2,
    with K the larger maximum of the two densities; Cauchy-Schwarz against the
    grid volume then gives the squared-L1 control.  At p = 1 this is the
    classical Pinsker constant 1/2.  For p > 2 no derived constant is used.
    """
    if abs(p - 1.0) <= P_ONE_WINDOW:
        return 0.5
    if p > 2.0:
        return None
    volume = float(np.sum(f.grid.weights))
    k_max = max(float(f.values.max()), float(b.values.max()))
    curvature = 0.5 * p * k_max ** (p - 2.0)
    chain = lp_integral(b, p) if p < 1.0 else lp_integral(f, p)
    return curvature / (volume * chain)


def inequality_suite(f: Density, p: float) -> InequalitySuiteReport:
    """Evaluate both sides of each inequality; every slack should be >= 0.

    Reference profiles are sampled on f's grid and integrated with the same
    quadrature, so discretization error largely cancels between the two sides.
    """
    n = f.grid.n
    energy = f.energy
    shannon_sigma = energy / n
    _, gauss = matched_profile(1.0, n, energy, f.grid)
    _, steady = matched_profile(p, n, energy, f.grid)

    fisher_f = fisher_information(f)
    fisher_g = fisher_information(gauss)
    shannon_f = renyi_entropy(f, 1.0)
    shannon_g = renyi_entropy(gauss, 1.0)
    power_f = entropy_powers(f, 1.0)[0]
    power_g = entropy_powers(gauss, 1.0)[0]

    gen_fisher_f = generalized_fisher_information(f, p)
    gen_fisher_b = generalized_fisher_information(steady, p)
    renyi_f = renyi_entropy(f, p)
    renyi_b = renyi_entropy(steady, p)
    gap = renyi_gap(f, p)
    lp_f = lp_integral(f, p)
    lp_b = lp_integral(steady, p)

    records = [
        InequalityRecord(
            "log_sobolev",
            fisher_f - fisher_g,
            (2.0 * n / energy) * (shannon_g - shannon_f),
        ),
        InequalityRecord("isoperimetric", fisher_f * power_f, fisher_g * power_g),
        InequalityRecord(
            "isoperimetric_renyi",
            gen_fisher_f / gen_fisher_b,
            math.exp(-(2.0 / n + p - 1.0) * (renyi_f - renyi_b)),
        ),
        InequalityRecord("information_excess", gen_fisher_f, n**2 * lp_f / energy),
        InequalityRecord("gap_nonnegative", gap, 0.0),
        InequalityRecord(
            "ralston_vs_gap",
            (lp_b if p <= 1.0 else lp_f) * gap,
            ralston_entropy(f, steady, p),
        ),
    ]
    l1 = integrate(f.grid, np.abs(f.values - steady.values))
    constant = l1_lower_constant(f, steady, p)
    if constant is not None:
        records.append(InequalityRecord("l1_lower", gap, constant * l1**2))
    empirical = gap / l1**2 if l1 > 1e-10 else None
    return InequalitySuiteReport(
        p=p, records=tuple(records), empirical_l1_constant=empirical
    )


def suite_to_csv(reports: list[tuple[int, InequalitySuiteReport]], path) -> None:
    """Write (density_id, p, inequality, lhs, rhs, slack) rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["density_id", "p", "inequality", "lhs", "rhs", "slack"])
        for ident, report in reports:
            for rec in report.records:
                writer.writerow(
                    [
                        ident,
                        f"{report.p:.17g}",
                        rec.name,
                        f"{rec.lhs:.17g}",
                        f"{rec.rhs:.17g}",
                        f"{rec.slack:.17g}",
                    ]
                )
