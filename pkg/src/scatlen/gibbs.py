"""Positive-temperature functional ``E_beta`` and its infimum ``e(beta)``.

``E_beta(phi) = int 2|grad phi|^2 + V |1 - phi|^2 + (2/beta) |phi|^2 dx``.

The radial minimizer is computed by minimizing a discretized energy on a
graded mesh: piecewise-linear ``phi`` (gradient term integrated exactly with
the radial weight ``r^(d-1)``), trapezoidal quadrature for the potential and
mass terms, shells as point masses at nodes. Stationarity gives a symmetric
tridiagonal system; the scheme is second order in the mesh size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solveh_banded

from .mesh import MeshParams, potential_grid, refine
from .potential import (
    RadialPotential,
    ball_volume,
    check_dimension,
    finiteness_check,
    sphere_area,
    volume_integral,
)
from .scatter import ScatteringLimit, scattering_length, solve_zero_energy

TRUNCATION_C = 12.0
FLUX_RTOL = 1e-6
MAX_ENLARGE = 12


class TruncationError(RuntimeError):
    """The minimizer does not decay inside the enlarged computational domain."""


@dataclass(frozen=True)
class GibbsSolution:
    d: int
    beta: float
    grid: np.ndarray
    phi: np.ndarray
    e_beta: float
    error_estimate: float  # relative
    R_max: float
    certified: bool = True

    @property
    def abs_error(self) -> float:
        return self.error_estimate * abs(self.e_beta)


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not (beta > 0 and math.isfinite(beta)):
        raise ValueError(f"beta must be positive and finite, got {beta}")
    return beta


def _cell_density(V: RadialPotential, r: np.ndarray):
    """V at the left and right end of each cell, using the cell's own segment."""
    mid = 0.5 * (r[:-1] + r[1:])
    left = np.zeros(mid.size)
    right = np.zeros(mid.size)
    for seg in V.segments:
        m = (mid >= seg.r_lo) & (mid < seg.r_hi)
        if np.any(m):
            left[m] = seg.value(r[:-1][m])
            right[m] = seg.value(r[1:][m])
    return left, right


def _discrete_terms(V, d, beta, r):
    """Stiffness per cell and potential / mass weights per node (all without S_d)."""
    h = np.diff(r)
    if np.any(h <= 0):
        raise ValueError("grid must be strictly increasing")
    kappa = 2.0 * (r[1:] ** d - r[:-1] ** d) / d / h**2
    wd = r ** (d - 1)
    vl, vr = _cell_density(V, r)
    mV = np.zeros(r.size)
    mV[:-1] += 0.5 * h * wd[:-1] * vl
    mV[1:] += 0.5 * h * wd[1:] * vr
    mB = np.zeros(r.size)
    mB[:-1] += 0.5 * h * wd[:-1]
    mB[1:] += 0.5 * h * wd[1:]
    mB *= 2.0 / beta
    shell_pts = []
    for s, g in V.shells:
        if s > r[-1]:
            continue
        j = int(np.searchsorted(r, s))
        if j < r.size and r[j] == s:
            mV[j] += g * s ** (d - 1)
        else:
            shell_pts.append((s, g))
    return kappa, mV, mB, shell_pts


def _outside_terms(V, d, beta, r_end):
    core = V.hard_core_radius
    extra = (2.0 / beta) * ball_volume(core, d) if core > 0 else 0.0
    return extra + volume_integral(V, r_end, d)


def energy_functional(r, phi, V: RadialPotential, d: int, beta: float) -> float:
    """``E_beta`` of the radial profile ``phi`` given at nodes ``r``.

    ``phi`` is interpolated linearly between nodes and extended by 0 beyond
    ``r[-1]``. The grid starts at the core radius (``phi = 1`` there) or at 0.
    """
    d = check_dimension(d)
    beta = _check_beta(beta)
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    core = V.hard_core_radius
    if abs(phi[-1]) > 1e-12:
        raise ValueError("profile must vanish at the last grid node")
    if core > 0:
        inside = r <= core
        if np.any(np.abs(phi[inside] - 1.0) > 1e-12):
            raise ValueError("profile must equal 1 on the hard core")
        if not np.any(r == core):
            raise ValueError("grid must contain the hard-core radius")
        keep = r >= core
        r, phi = r[keep], phi[keep]
    elif r[0] != 0.0:
        raise ValueError("grid must start at 0 when there is no hard core")
    kappa, mV, mB, shell_pts = _discrete_terms(V, d, beta, r)
    total = (
        np.sum(kappa * np.diff(phi) ** 2)
        + np.sum(mV * (1.0 - phi) ** 2)
        + np.sum(mB * phi**2)
    )
    for s, g in shell_pts:
        total += g * s ** (d - 1) * (1.0 - np.interp(s, r, phi)) ** 2
    return float(sphere_area(d) * total + _outside_terms(V, d, beta, r[-1]))


def solve_on_grid(V: RadialPotential, d: int, beta: float, r: np.ndarray):
    """Minimize the discrete energy on nodes ``r``; returns ``(phi, e)``."""
    core = V.hard_core_radius
    kappa, mV, mB, shell_pts = _discrete_terms(V, d, beta, r)
    if shell_pts:
        raise ValueError(f"shells {shell_pts} are not grid nodes")
    n = r.size
    diag = mV + mB
    diag[:-1] += kappa
    diag[1:] += kappa
    rhs = mV.copy()
    lo = 1 if core > 0 else 0
    hi = n - 1  # Dirichlet phi = 0 at r[-1]
    phi = np.zeros(n)
    if core > 0:
        phi[0] = 1.0
        rhs[1] += kappa[0] * 1.0
    free = slice(lo, hi)
    ab = np.zeros((2, hi - lo))
    ab[1] = diag[free]
    ab[0, 1:] = -kappa[lo : hi - 1]
    phi[free] = solveh_banded(ab, rhs[free])
    total = (
        np.sum(kappa * np.diff(phi) ** 2)
        + np.sum(mV * (1.0 - phi) ** 2)
        + np.sum(mB * phi**2)
    )
    e = float(sphere_area(d) * total + _outside_terms(V, d, beta, r[-1]))
    return phi, e


def default_rmax(V: RadialPotential, beta: float) -> float:
    return V.range_scale + TRUNCATION_C * math.sqrt(beta)


def gibbs_grid(V: RadialPotential, beta: float, R_max: float, mesh: MeshParams) -> np.ndarray:
    return potential_grid(V, V.hard_core_radius, R_max, mesh, cap=math.sqrt(beta))


def _boundary_flux(r, phi, d):
    return sphere_area(d) * r[-1] ** (d - 1) * 2.0 * abs(phi[-2] - phi[-1]) / (r[-1] - r[-2])


def solve_ebeta(
    V: RadialPotential,
    d: int,
    beta: float,
    mesh: MeshParams | None = None,
    R_max: float | None = None,
) -> GibbsSolution:
    """``e(beta)`` with a relative error estimate from one mesh halving.

    The domain is truncated at ``R_max`` (default: range + 12 sqrt(beta)) and
    enlarged while the outgoing flux at the boundary is not negligible.
    """
    d = check_dimension(d)
    beta = _check_beta(beta)
    mesh = mesh or MeshParams()
    certified = finiteness_check(V, d).verdict == "finite"
    if V.is_zero:
        r = np.array([0.0, default_rmax(V, beta)])
        return GibbsSolution(d, beta, r, np.zeros(2), 0.0, 0.0, float(r[-1]), certified)
    R = R_max if R_max is not None else default_rmax(V, beta)
    if math.isinf(volume_integral(V, max(R, V.hard_core_radius), d)):
        # V(1 - phi)^2 + (2/beta) phi^2 >= V (2/beta) / (V + 2/beta) is not integrable
        r = np.array([V.hard_core_radius, R])
        return GibbsSolution(d, beta, r, np.array([1.0, 0.0]), math.inf, 0.0, float(R), False)
    if R <= V.hard_core_radius:
        raise ValueError("R_max must exceed the hard-core radius")
    for _ in range(MAX_ENLARGE + 1):
        coarse = gibbs_grid(V, beta, R, mesh)
        fine = refine(coarse)
        _, e_c = solve_on_grid(V, d, beta, coarse)
        phi, e = solve_on_grid(V, d, beta, fine)
        flux = _boundary_flux(fine, phi, d)
        if flux <= FLUX_RTOL * max(e, 1e-300) or R_max is not None:
            err = abs(e_c - e) / 3.0 / e if e > 0 else 0.0
            return GibbsSolution(d, beta, fine, phi, e, err, float(R), certified)
        R *= 1.5
    raise TruncationError(f"boundary flux {flux:.3g} still large at R_max={R:.6g}")


# -- bounds -------------------------------------------------------------------


def theorem1_bound(a: float, beta: float, d: int) -> float:
    """Upper bound on ``e(beta)`` in terms of the scattering length ``a`` alone."""
    d = check_dimension(d)
    beta = _check_beta(beta)
    if not (a > 0 and math.isfinite(a)):
        raise ValueError(f"scattering length must be positive and finite, got {a}")
    if d == 3:
        return 8.0 * math.pi * a * (1.0 + a / math.sqrt(3.0 * beta)) ** 2
    L = math.log1p(beta / (a * a))
    return 8.0 * math.pi / L * (1.0 + (1.0 + a * a / beta) / (2.0 * L))


def optimal_trial_radius(a: float, beta: float, d: int) -> float:
    if d == 3:
        return a + math.sqrt(3.0 * beta)
    return math.sqrt(a * a + beta)


def trial_rhs(a: float, a_R: float, R: float, beta: float, d: int) -> float:
    """Analytic upper bound on the trial-state energy of ``psi_R``."""
    if d == 3:
        return 8.0 * math.pi * a / (1.0 - a / R) + 8.0 * math.pi * a_R**2 * R / (3.0 * beta)
    first = 4.0 * math.pi / math.log(R / a) if a > 0 else 0.0
    second = math.pi * R * R / (beta * math.log(R / a_R) ** 2) if a_R > 0 else 0.0
    return first + second


@dataclass(frozen=True)
class TrialState:
    R: float
    a: float
    a_R: float
    energy: float
    error: float  # absolute quadrature error estimate
    rhs: float


def trial_state(
    V: RadialPotential,
    d: int,
    beta: float,
    R: float | str = "optimal",
    limit: ScatteringLimit | None = None,
    mesh: MeshParams | None = None,
) -> TrialState:
    """Energy of the zero-energy minimizer ``psi_R`` used as a trial state."""
    d = check_dimension(d)
    beta = _check_beta(beta)
    mesh = mesh or MeshParams()
    limit = limit or scattering_length(V, d)
    a = limit.bracket[1]
    if R == "optimal":
        R = optimal_trial_radius(a, beta, d)
    R = float(R)
    if not R > a:
        raise ValueError(f"trial radius R={R} must exceed a={a}")
    if V.is_zero:
        return TrialState(R, 0.0, 0.0, 0.0, 0.0, 0.0)
    r0 = V.hard_core_radius
    grid = potential_grid(V, r0, R, mesh)
    energies = []
    for g in (grid, refine(grid)):
        prof = solve_zero_energy(V, d, R, grid=g)
        energies.append(energy_functional(g, 1.0 - prof.w, V, d, beta))
    w, wp = prof.w[-1], prof.w_prime[-1]
    if wp <= 0:
        a_R = 0.0
    elif d == 3:
        a_R = R * R * wp / (w + R * wp)
    else:
        a_R = R * math.exp(-w / (R * wp))
    err = abs(energies[0] - energies[1]) / 3.0
    return TrialState(R, a, a_R, energies[1], err, trial_rhs(a, a_R, R, beta, d))


def trial_state_energy(V, d, beta, R="optimal", mesh=None) -> float:
    return trial_state(V, d, beta, R, mesh=mesh).energy


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    lhs: float
    rhs: float
    slack: float = 0.0


@dataclass
class BoundsReport:
    a: float
    a_bracket: tuple[float, float]
    theorem1: float
    trial: float | None
    trial_error: float | None
    numeric: float | None
    numeric_error: float | None
    mc: object | None = None
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _le(name, lhs, rhs, slack=0.0):
    slack = slack + 1e-12 * max(abs(lhs), abs(rhs))
    return Check(name, bool(lhs <= rhs + slack), float(lhs), float(rhs), float(slack))


def bounds_report(
    V: RadialPotential,
    d: int,
    beta: float,
    mesh: MeshParams | None = None,
    floor_rtol: float = 1e-6,
) -> BoundsReport:
    """Closed-form upper bound, trial-state energy and numeric ``e(beta)`` side by side."""
    d = check_dimension(d)
    beta = _check_beta(beta)
    limit = scattering_length(V, d)
    a_lo, a_hi = limit.bracket
    if math.isinf(a_hi):
        sol = solve_ebeta(V, d, beta, mesh)
        return BoundsReport(math.inf, limit.bracket, math.inf, None, None, sol.e_beta, sol.abs_error)
    thm = theorem1_bound(a_hi, beta, d) if a_hi > 0 else 0.0
    sol = solve_ebeta(V, d, beta, mesh)
    tr = trial_state(V, d, beta, "optimal", limit, mesh)
    e, de = sol.e_beta, 3.0 * sol.abs_error
    checks = [
        _le("numeric <= trial", e, tr.energy, de + 3.0 * tr.error),
        _le("trial <= analytic trial RHS", tr.energy, tr.rhs, 3.0 * tr.error),
        _le("numeric <= theorem1", e, thm, de),
    ]
    if d == 3:
        floor = 8.0 * math.pi * a_lo
        checks.append(_le("numeric >= 8 pi a", floor * (1.0 - floor_rtol), e, de))
    return BoundsReport(limit.a, limit.bracket, thm, tr.energy, tr.error, e, sol.abs_error, None, checks)
