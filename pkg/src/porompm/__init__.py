"""Stabilized implicit material point method for coupled poromechanics.

A fixed background grid hosts fully-implicit solves of the coupled
momentum/mass balance of a saturated two-phase mixture at large strain;
Lagrangian particles carry state between steps. Equal-order interpolation
is stabilized by penalizing the deviation of the pressure-rate field from
its element-wise projection, which keeps the undrained limit well posed.
"""

from .basis import BasisKind
from .constitutive import MaterialParams
from .driver import RunResult, simulate
from .grid import BackgroundGrid, BoundaryCondition, build_grid
from .integrate import IntegratorConfig, Regime
from .particles import ParticleState, seed_disc, seed_particles
from .scenarios import (
    Scene,
    build_scene,
    oscillation_metric,
    terzaghi_exact,
    terzaghi_profile,
)
from .solver import SolveReport

__all__ = [
    "BackgroundGrid",
    "BasisKind",
    "BoundaryCondition",
    "IntegratorConfig",
    "MaterialParams",
    "ParticleState",
    "Regime",
    "RunResult",
    "Scene",
    "SolveReport",
    "build_grid",
    "build_scene",
    "oscillation_metric",
    "seed_disc",
    "seed_particles",
    "simulate",
    "terzaghi_exact",
    "terzaghi_profile",
]

__version__ = "0.1.0"
