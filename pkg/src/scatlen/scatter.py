"""Zero-energy radial scattering problem on a ball and the scattering length.

For ``w = 1 - psi_R`` the minimizer of the truncated scattering functional
solves ``2 Delta w = V w`` on ``|x| < R`` with ``w(R) = 1``. In d=3 we integrate
``u = r w`` (``u'' = V u / 2``), in d=2 the pair ``(w, y = r w')`` with
``y' = V r w / 2``. Constant pieces are propagated exactly (hyperbolic resp.
modified Bessel functions), other pieces with an adaptive 8th-order
Runge-Kutta scheme, and delta shells as exact derivative jumps.

Shells sitting exactly at ``R`` are treated as part of the closed ball.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special
from scipy.integrate import solve_ivp

from .mesh import MeshParams, potential_grid
from .potential import (
    RadialPotential,
    check_dimension,
    finiteness_check,
    log_weighted_tail,
    volume_integral,
)

RTOL = 1e-12


@dataclass(frozen=True)
class ZeroEnergyProfile:
    """``w = 1 - psi_R`` on ``grid`` (``grid[-1] == R``), normalized to ``w(R) = 1``.

    ``w_prime`` holds right derivatives (after the jump at shell nodes).
    """

    d: int
    R: float
    grid: np.ndarray
    w: np.ndarray
    w_prime: np.ndarray


@dataclass(frozen=True)
class ScatteringResult:
    a_R: float
    lambda_R: float
    profile: ZeroEnergyProfile


@dataclass(frozen=True)
class ScatteringLimit:
    a: float
    bracket: tuple[float, float]
    R_used: float
    converged: bool = True
    history: tuple[tuple[float, float, float], ...] = ()  # (R, a_lo, a_hi)


def _exact_constant(d, c, A, nodes, state):
    """Propagate ``state`` across a constant piece; returns (columns, log scales)."""
    k = math.sqrt(c / 2.0)
    if d == 3:
        f, g, _ = state
        x = k * (nodes - A)
        em = np.exp(-2.0 * x)
        # u = e^x [f (1 + e^-2x)/2 + g/k (1 - e^-2x)/2]
        val = 0.5 * f * (1 + em) + 0.5 * (g / k) * (1 - em)
        der = 0.5 * f * k * (1 - em) + 0.5 * g * (1 + em)
        return [val, der, nodes * der - val], x
    # d = 2: w = P I0(kr) + Q K0(kr), y = r w' = kr (P I1 - Q K1)
    f, g = state
    xa = k * A
    xb = k * nodes
    if xa == 0.0:
        # regular start: w = f I0, y = 0
        return [f * special.ive(0, xb), f * xb * special.ive(1, xb)], xb
    # coefficients with scaled Bessel functions, P = P_s e^{-xa}, Q = Q_s e^{xa}
    P_s = xa * f * special.kve(1, xa) + g * special.kve(0, xa)
    Q_s = xa * f * special.ive(1, xa) - g * special.ive(0, xa)
    damp = np.exp(-2.0 * (xb - xa))
    val = P_s * special.ive(0, xb) + Q_s * special.kve(0, xb) * damp
    der = xb * (P_s * special.ive(1, xb) - Q_s * special.kve(1, xb) * damp)
    return [val, der], xb - xa


def _ode_piece(d, seg, A, nodes, state):
    if d == 3:
        # (u, u', q = r u' - u)
        def fun(r, s):
            h = 0.5 * float(seg.value(r)) * s[0]
            return [s[1], h, r * h]
    else:
        fun = lambda r, s: [s[1] / r, 0.5 * float(seg.value(r)) * r * s[0]]
    start = A
    y0 = list(state)
    if d == 2 and A == 0.0:
        # series start off the origin: w ~ 1, y ~ V(0) r^2 / 4
        start = 1e-9 * nodes[-1]
        y0 = [state[0], 0.25 * float(seg.value(0.0)) * start * start * state[0]]
    sol = solve_ivp(
        fun,
        (start, nodes[-1]),
        y0,
        method="DOP853",
        t_eval=np.maximum(nodes, start),
        rtol=RTOL,
        atol=1e-22,  # state is normalized to unit l1 norm at the piece start
    )
    if not sol.success:
        raise RuntimeError(f"zero-energy integration failed: {sol.message}")
    return list(sol.y), np.zeros(nodes.size)


def _free_piece(d, A, nodes, state):
    if d == 3:
        f, g, q = state
        return [f + g * (nodes - A), np.full(nodes.size, g), np.full(nodes.size, q)]
    f, g = state
    if A > 0:
        return [f + g * np.log(nodes / A), np.full(nodes.size, g)]
    return [np.full(nodes.size, f), np.zeros(nodes.size)]


def _propagate(V: RadialPotential, d: int, grid: np.ndarray):
    """Integrate outward from the core / origin.

    Returns unnormalized columns ``(u, u', r u' - u)`` (d=3) or ``(w, r w')``
    (d=2) on the grid, plus a per-node log scale factor.
    """
    core = V.hard_core_radius
    shells = dict(V.shells)
    breaks = [grid[0], *[p for p in V.breakpoints() if grid[0] < p < grid[-1]], grid[-1]]
    if d == 3:
        state = (0.0, 1.0, core)
    else:
        state = (0.0, core) if core > 0 else (1.0, 0.0)
    cols = np.empty((len(state), grid.size))
    cols[:, 0] = state
    logs = np.zeros(grid.size)
    log_base = 0.0
    for A, B in zip(breaks, breaks[1:]):
        idx = np.nonzero((grid >= A) & (grid <= B))[0]
        nodes = grid[idx]
        seg = V.segment_at(0.5 * (A + B))
        if seg is None or seg.params.get("c", seg.params.get("C")) == 0.0:
            piece, lg = _free_piece(d, A, nodes, state), np.zeros(nodes.size)
        elif seg.form == "constant":
            piece, lg = _exact_constant(d, seg.params["c"], A, nodes, state)
        else:
            piece, lg = _ode_piece(d, seg, A, nodes, state)
        piece = np.array(piece)
        gamma = shells.get(B, 0.0)
        if gamma:
            # shell at the right end: derivative jump
            jump = 0.5 * gamma * piece[0, -1]
            if d == 3:
                piece[1, -1] += jump
                piece[2, -1] += B * jump
            else:
                piece[1, -1] += B * jump
        cols[:, idx[1:]] = piece[:, 1:]
        logs[idx[1:]] = log_base + lg[1:]
        norm = float(np.sum(np.abs(piece[:, -1])))
        state = tuple(piece[:, -1] / norm)
        log_base += lg[-1] + math.log(norm)
    return cols, logs


def solve_zero_energy(
    V: RadialPotential,
    d: int,
    R: float,
    mesh: MeshParams | None = None,
    grid: np.ndarray | None = None,
) -> ZeroEnergyProfile:
    """Profile ``w = 1 - psi_R`` of the zero-energy problem on the ball of radius ``R``.

    An explicit ``grid`` (starting at the core radius or 0, ending at ``R``)
    overrides the mesh builder; it must contain every shell radius below ``R``.
    """
    d = check_dimension(d)
    core = V.hard_core_radius
    if not R > core:
        raise ValueError(f"R={R} must exceed the hard-core radius {core}")
    if grid is None:
        grid = potential_grid(V, core, R, mesh or MeshParams())
    else:
        grid = np.asarray(grid, dtype=float)
        if grid[0] != core or grid[-1] != R:
            raise ValueError("grid must start at the core radius (or 0) and end at R")
        missing = [s for s, _ in V.shells if s < R and not np.any(grid == s)]
        if missing:
            raise ValueError(f"mesh does not resolve shells at {missing}")
    cols, logs = _propagate(V, d, grid)
    cols = cols * np.exp(logs - logs[-1])
    r = grid
    with np.errstate(divide="ignore", invalid="ignore"):
        if d == 3:
            u, up, q = cols
            w = np.where(r > 0, u / r, up)
            wp = np.where(r > 0, q / r**2, 0.0)
        else:
            w, y = cols
            wp = np.where(r > 0, y / r, 0.0)
    wR = w[-1]
    return ZeroEnergyProfile(d, float(R), grid, w / wR, wp / wR)


def lambda_from_a(a_R: float, R: float, d: int) -> float:
    if a_R <= 0:
        return 0.0
    if d == 3:
        return 8.0 * math.pi * a_R / (1.0 - a_R / R)
    return 4.0 * math.pi / math.log(R / a_R)


def scattering_length_at(
    V: RadialPotential, d: int, R: float, mesh: MeshParams | None = None
) -> ScatteringResult:
    """``a_R`` and ``lambda(R)`` for the potential truncated to the ball of radius ``R``."""
    prof = solve_zero_energy(V, d, R, mesh)
    w, wp = prof.w[-1], prof.w_prime[-1]
    if wp <= 0:
        a_R = 0.0
    elif d == 3:
        # a_R = (R u' - u) / u' with u = R w, u' = w + R w'
        a_R = R * R * wp / (w + R * wp)
    else:
        a_R = R * math.exp(-w / (R * wp))
    a_R = min(max(a_R, 0.0), R)
    return ScatteringResult(a_R, lambda_from_a(a_R, R, d), prof)


def tail_upper_bound(V: RadialPotential, d: int, R: float, a_R: float) -> float:
    """Rigorous upper bound on the scattering length given ``a_R``.

    Glues the truncated minimizer to the free exterior solution and charges
    the potential beyond ``R`` at full weight: d=3 gives
    ``a <= a_R + (8 pi)^-1 int_{|x|>R} V``, d=2 gives
    ``a <= a_R exp((4 pi)^-1 int_{|x|>R} V ln^2(|x|/a_R))``.
    """
    if d == 3:
        return a_R + volume_integral(V, R, 3) / (8.0 * math.pi)
    if a_R <= 0:
        return math.inf
    m = log_weighted_tail(V, R, a_R)
    return a_R * math.exp(min(m / (4.0 * math.pi), 700.0))


def scattering_length(
    V: RadialPotential,
    d: int,
    tol: float = 1e-8,
    mesh: MeshParams | None = None,
    growth: float = 4.0,
    max_iter: int = 40,
) -> ScatteringLimit:
    """``a = lim a_R`` with a certified bracket ``a_R <= a <= a_hi``."""
    d = check_dimension(d)
    fin = finiteness_check(V, d)
    if fin.verdict == "infinite":
        return ScatteringLimit(math.inf, (0.0, math.inf), 0.0, converged=False)
    if V.is_zero:
        return ScatteringLimit(0.0, (0.0, 0.0), 0.0)
    cap = fin.a_upper_3d if d == 3 else fin.a_upper_2d
    cap = math.inf if cap is None else cap
    R = 2.0 * max(V.range_scale, V.hard_core_radius)
    history = []
    lo = hi = 0.0
    for _ in range(max_iter):
        a_R = scattering_length_at(V, d, R, mesh).a_R
        lo = max(lo, a_R)
        hi = lo if V.finite_range else min(cap, tail_upper_bound(V, d, R, a_R))
        history.append((R, lo, hi))
        if hi - lo <= tol * lo:
            a = lo if hi == lo else 0.5 * (lo + hi)
            return ScatteringLimit(a, (lo, hi), R, True, tuple(history))
        R *= growth
    return ScatteringLimit(0.5 * (lo + hi), (lo, hi), R / growth, False, tuple(history))


def check_tail_bound(
    V: RadialPotential, d: int, R: float, a: float, a_R: float, rtol: float = 1e-9
) -> bool:
    """Audit ``int_{|x|>R} V <= lambda_a(R) - lambda(R)`` for the computed ``a, a_R``.

    ``lambda_a(R)`` is ``8 pi a/(1 - a/R)`` (d=3) or ``4 pi/ln(R/a)`` (d=2).
    """
    d = check_dimension(d)
    if not R > a:
        raise ValueError(f"need R > a, got R={R}, a={a}")
    lhs = volume_integral(V, R, d)
    rhs = lambda_from_a(a, R, d) - lambda_from_a(a_R, R, d)
    return lhs <= rhs + rtol * max(abs(rhs), lambda_from_a(a, R, d), 1e-300)
