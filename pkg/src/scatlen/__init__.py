"""Scattering lengths of radial potentials and their positive-temperature analogue ``e(beta)``."""

__version__ = "0.1.0"

from .fk import McConfig, McEstimate, estimate_g, sandwich_check
from .gibbs import BoundsReport, GibbsSolution, bounds_report, solve_ebeta, theorem1_bound, trial_state
from .hardcore import HardCoreParams, bessel_k, ebeta_hardcore
from .mesh import MeshParams
from .potential import (
    PotentialError,
    RadialPotential,
    Segment,
    finiteness_check,
    load_spec,
    log_weighted_tail,
    serialize,
    validate,
    volume_integral,
)
from .scatter import scattering_length, scattering_length_at, solve_zero_energy

__all__ = [
    "BoundsReport",
    "GibbsSolution",
    "HardCoreParams",
    "McConfig",
    "McEstimate",
    "MeshParams",
    "PotentialError",
    "RadialPotential",
    "Segment",
    "bessel_k",
    "bounds_report",
    "ebeta_hardcore",
    "estimate_g",
    "finiteness_check",
    "load_spec",
    "log_weighted_tail",
    "sandwich_check",
    "scattering_length",
    "scattering_length_at",
    "serialize",
    "solve_ebeta",
    "solve_zero_energy",
    "theorem1_bound",
    "trial_state",
    "validate",
    "volume_integral",
]
