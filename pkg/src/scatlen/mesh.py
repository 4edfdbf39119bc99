"""Graded radial meshes.

Nodes always include every breakpoint of the potential (core, shells, segment
ends). Cell sizes grow linearly away from breakpoints and are capped by a
per-piece length scale divided by ``cells_per_scale``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid


@dataclass(frozen=True)
class MeshParams:
    cells_per_scale: int = 48
    growth: float | None = None  # cell-size slope away from breakpoints; default 1/cells_per_scale
    max_nodes: int = 2_000_000

    @property
    def slope(self) -> float:
        return self.growth if self.growth is not None else 1.0 / self.cells_per_scale

    def refined(self, factor: int = 2) -> "MeshParams":
        return MeshParams(self.cells_per_scale * factor, self.growth, self.max_nodes)


def _piece_nodes(A, B, h_a, h_b, h_far, slope):
    L = B - A
    h_a, h_b = min(h_a, L), min(h_b, L)
    offs = np.concatenate([[0.0], np.geomspace(min(h_a, h_b) * 1e-3, L, 600)])
    s = np.unique(np.concatenate([A + offs, B - offs, np.linspace(A, B, 600)]))
    s = s[(s >= A) & (s <= B)]
    h = np.minimum(np.minimum(h_a + slope * (s - A), h_b + slope * (B - s)), h_far)
    N = cumulative_trapezoid(1.0 / h, s, initial=0.0)
    n = max(2, int(math.ceil(N[-1])))
    nodes = np.interp(np.linspace(0.0, N[-1], n + 1), N, s)
    nodes[0], nodes[-1] = A, B
    return nodes


def graded_grid(breaks, scales, mesh: MeshParams) -> np.ndarray:
    """Mesh over ``[breaks[0], breaks[-1]]``.

    ``scales[k] = (near, far)`` are resolution lengths on
    ``[breaks[k], breaks[k+1]]``: ``near`` applies at the piece ends (further
    capped by the breakpoint radius), ``far`` caps the cell size everywhere.
    Either may be ``inf``.
    """
    breaks = np.asarray(breaks, dtype=float)
    if np.any(np.diff(breaks) <= 0):
        raise ValueError("breakpoints must be strictly increasing")
    n = mesh.cells_per_scale
    pieces = []
    for k in range(len(breaks) - 1):
        A, B = breaks[k], breaks[k + 1]
        near_ell, far_ell = scales[k]
        near = lambda r: min(near_ell, far_ell, r if r > 0 else B - A) / n
        nodes = _piece_nodes(A, B, near(A), near(B), far_ell / n, mesh.slope)
        pieces.append(nodes if k == 0 else nodes[1:])
    grid = np.concatenate(pieces)
    if grid.size > mesh.max_nodes:
        raise ValueError(f"mesh needs {grid.size} nodes, above max_nodes={mesh.max_nodes}")
    return grid


def refine(grid: np.ndarray) -> np.ndarray:
    """Insert the midpoint of every cell (mesh halving)."""
    out = np.empty(2 * grid.size - 1)
    out[0::2] = grid
    out[1::2] = 0.5 * (grid[:-1] + grid[1:])
    return out


def piece_scale(V, A: float, B: float) -> tuple[float, float]:
    """(near, far) resolution lengths of the zero-energy equation on a piece.

    The local decay length is ``sqrt(2 / V)``; decaying tails only need it
    near their start, where the density is largest.
    """
    seg = V.segment_at(0.5 * (A + B))
    if seg is None:
        return math.inf, math.inf
    probe = np.array([A, 0.5 * (A + B), B if math.isfinite(B) else A])
    vmax = float(np.max(seg.value(probe)))
    ell = math.sqrt(2.0 / vmax) if vmax > 0 else math.inf
    if seg.form == "constant":
        return ell, ell
    if seg.form == "exponential" and seg.params["mu"] > 0:
        ell = min(ell, 1.0 / seg.params["mu"])
    return ell, math.inf


def potential_grid(V, r0: float, r1: float, mesh: MeshParams, cap: float = math.inf) -> np.ndarray:
    """Mesh on ``[r0, r1]`` with nodes at all breakpoints of ``V`` inside.

    ``cap`` bounds every resolution length (e.g. the thermal length).
    """
    inner = [p for p in V.breakpoints() if r0 < p < r1]
    breaks = [r0, *inner, r1]
    scales = []
    for a, b in zip(breaks, breaks[1:]):
        near, far = piece_scale(V, a, b)
        scales.append((min(near, cap), min(far, cap)))
    return graded_grid(breaks, scales, mesh)
