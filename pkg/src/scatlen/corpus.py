"""Reference potentials used by the verification suites and tests."""

import math

from .potential import RadialPotential, Segment


def hard_sphere(a: float = 1.0) -> RadialPotential:
    return RadialPotential(hard_core_radius=a)


hard_disc = hard_sphere


def square_well(c: float = 1.0, R: float = 1.0) -> RadialPotential:
    """Repulsive step ``V = c`` on ``[0, R)``."""
    return RadialPotential(segments=(Segment(0.0, R, "constant", {"c": c}),))


def delta_shell(s: float = 1.0, gamma: float = 2.0) -> RadialPotential:
    return RadialPotential(shells=((s, gamma),))


def power_tail(C: float = 1.0, p: float = 4.0, r_lo: float = 1.0, core: float = 0.5) -> RadialPotential:
    return RadialPotential(
        hard_core_radius=core,
        segments=(Segment(r_lo, math.inf, "power_tail", {"C": C, "p": p}),),
    )


def corpus() -> dict[str, tuple[RadialPotential, int]]:
    """Named ``(V, d)`` pairs: the hard core in both dimensions, the rest in d=3 and d=2."""
    out = {"hard_sphere": (hard_sphere(), 3), "hard_disc": (hard_disc(), 2)}
    for name, V in (
        ("square_well", square_well()),
        ("delta_shell", delta_shell()),
        ("power_tail", power_tail()),
    ):
        out[f"{name}_3d"] = (V, 3)
        out[f"{name}_2d"] = (V, 2)
    return out
