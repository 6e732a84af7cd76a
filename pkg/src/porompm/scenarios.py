"""Built-in verification scenes, the consolidation analytical series and the
pressure-oscillation diagnostics.

The four presets (terzaghi, footing, self_weight, impact) carry the
reference parameter sets; a scale factor coarsens the spatial resolution
(h -> h/scale) while keeping dimensionless groups fixed (time steps scale
with h for the dynamic scenes).
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np

from .basis import BasisKind
from .constitutive import MaterialParams
from .errors import ConfigurationError, MetricError
from .grid import BackgroundGrid, BoundaryCondition, build_grid
from .integrate import IntegratorConfig, Regime
from .particles import merge_states, seed_disc, seed_particles


def terzaghi_exact(Z, T, n_terms=None):
    """Series solution P(Z, T) = sum (2/M) sin(M Z) exp(-M^2 T).

    Z is depth from the drained boundary over the column height; default
    truncation resolves the boundary layer at very small T.
    """
    Z = np.atleast_1d(np.asarray(Z, dtype=float))
    T = float(T)
    if n_terms is None:
        n_terms = 20000 if T < 1e-4 else 200
    out = np.zeros_like(Z)
    chunk = 200000
    for start in range(0, n_terms, chunk):
        m = np.arange(start, min(start + chunk, n_terms))
        M = np.pi * (2 * m + 1) / 2.0
        decay = np.exp(-(M**2) * T)
        out += ((2.0 / M) * decay) @ np.sin(np.outer(M, Z))
    return out if out.shape != (1,) else float(out[0])


def oscillation_metric(profile, deadband=0.01):
    """(sign_flip_count, max_neighbor_jump) of an ordered pressure profile.

    Counts strict sign alternations of successive first differences; jumps
    are normalized by the profile's range. Differences below deadband*range
    count as flat: checkerboard instability alternates at O(range) and is
    counted in full, while the small decaying drainage-boundary ringing that
    stable Galerkin solutions also exhibit is not.
    """
    v = np.asarray(profile, dtype=float)
    if v.size < 3:
        raise MetricError("oscillation metric needs at least 3 samples")
    d = np.diff(v)
    rng = float(v.max() - v.min())
    if rng == 0.0:
        return 0, 0.0
    sgn = np.where(np.abs(d) <= deadband * rng, 0.0, np.sign(d))
    flips = int(np.sum(sgn[:-1] * sgn[1:] < 0.0))
    return flips, float(np.abs(d).max() / rng)


@dataclass
class Scene:
    name: str
    grid: BackgroundGrid
    params: MaterialParams
    cfg: IntegratorConfig
    t_end: float
    initial_particles: object
    boundary: list = field(default_factory=list)
    particle_load_tags: list = field(default_factory=list)  # (indices, widths, bc)
    basis: BasisKind = BasisKind.GIMP
    stabilized: bool = True
    probes: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    gravity_ramp_time: float = 0.0
    steady = None

    def fresh_particles(self):
        return copy.deepcopy(self.initial_particles)

    def resolve_particle_loads(self, particles):
        return self.particle_load_tags

    def steady_pressure(self, point):
        if self.steady is None:
            return 0.0
        return float(self.steady(np.asarray(point)))

    def gravity_factor(self, t):
        """Staged application of the body force over the first instants:
        an instantaneous gravity switch-on makes plain Newton's first
        iterate overshoot into element inversion for very soft deposits."""
        if self.gravity_ramp_time <= 0.0:
            return 1.0
        return min(t / self.gravity_ramp_time, 1.0)


def _scaled_cells(n, scale, label):
    c = n * scale
    if abs(c - round(c)) > 1e-9 or round(c) < 1:
        raise ConfigurationError(
            f"scale {scale} gives a non-integer cell count for {label}"
        )
    return int(round(c))


def terzaghi_scene(scale=1.0, stabilized=True, basis=BasisKind.GIMP,
                   n_steps=1, t_end=0.1):
    """1D consolidation column: height 1 m, 40*scale occupied cells in a
    one-cell-wide grid with 3x headroom (80 particles / 160 cells at scale 1),
    single quasi-static step to t = 0.1 s by default."""
    H = 1.0
    n_col = _scaled_cells(40, scale, "terzaghi column")
    h = H / n_col
    grid = BackgroundGrid(np.zeros(2), h, (1, 4 * n_col))
    params = MaterialParams.from_bulk_poisson(
        K=1.0e6, nu=0.25, k0=1.0e-14, mu_f=1.0e-3, phi0=0.5,
        rho_s=2000.0, rho_f=1000.0, kozeny_carman=False,
    )
    # c_v = kappa * (lam + 2G) = 1e-11 * 1.8e6 = 1.8e-5 m^2/s as prescribed.
    particles = seed_particles(grid, (0.0, 0.0), (h, H), (1, 2), params.phi0)
    w = 1.0e3
    boundary = [
        BoundaryCondition("fixed_displacement", axis=1, coord=0.0, lo=0.0, hi=h),
        BoundaryCondition("roller", axis=0, coord=0.0, lo=0.0, hi=grid.extent[1], component=0),
        BoundaryCondition("roller", axis=0, coord=h, lo=0.0, hi=grid.extent[1], component=0),
        BoundaryCondition("prescribed_pressure", axis=1, coord=H, lo=0.0, hi=h, value=0.0),
        BoundaryCondition("traction", axis=1, coord=H, lo=0.0, hi=h, value=np.array([0.0, -w])),
    ]
    cfg = IntegratorConfig(regime=Regime.QUASI_STATIC, dt=t_end / n_steps)
    scene = Scene(
        name="terzaghi", grid=grid, params=params, cfg=cfg, t_end=t_end,
        initial_particles=particles, boundary=boundary, basis=basis,
        stabilized=stabilized,
        meta={"H": H, "w": w, "c_v": 1.8e-5, "column_width": h},
    )
    return scene


def terzaghi_profile(particles, scene):
    """(Z, P) with Z depth from the drained top, sorted shallow to deep."""
    H = scene.meta["H"]
    w = scene.meta["w"]
    order = np.argsort(-particles.X[:, 1], kind="stable")
    Z = (H - particles.X[order, 1]) / H
    P = particles.p[order] / w
    return Z, P


def footing_scene(scale=1.0, stabilized=True, basis=None, t_end=0.4):
    """Strip footing under harmonic loading, right half of the domain.

    10 m x 10 m at h = 0.25/scale plus 4*scale headroom rows; 4 particles
    per cell; load w = 3 - 3cos(100t) MPa on the 1 m footing half-width,
    carried by the top boundary particles.
    """
    n = _scaled_cells(40, scale, "footing domain")
    h = 10.0 / n
    headroom = max(1, int(round(4 * scale)))
    grid = build_grid((0.0, 0.0), (10.0, 10.0), h, headroom_cells=headroom)
    params = MaterialParams(
        lam=8.4e6, G=5.6e6, alpha_vis=0.04, k0=1.0e-14, mu_f=1.0e-3,
        phi0=0.33, rho_s=2500.0, rho_f=1000.0, kozeny_carman=False,
    )
    particles = seed_particles(grid, (0.0, 0.0), (10.0, 10.0), (2, 2), params.phi0)
    top_y = grid.extent[1]
    boundary = [
        BoundaryCondition("fixed_displacement", axis=1, coord=0.0, lo=0.0, hi=10.0),
        BoundaryCondition("roller", axis=0, coord=0.0, lo=0.0, hi=top_y, component=0),
        BoundaryCondition("roller", axis=0, coord=10.0, lo=0.0, hi=top_y, component=0),
        BoundaryCondition("prescribed_pressure", axis=1, coord=10.0, lo=1.0, hi=10.0, value=0.0),
    ]
    # Footing traction rides on the top row of particles under the footing.
    lattice = h / 2.0
    top_row = np.abs(particles.x[:, 1] - (10.0 - lattice / 2.0)) < 1e-9
    under = particles.x[:, 0] < 1.0
    idx = np.nonzero(top_row & under)[0]
    widths = np.full(len(idx), lattice)
    load_bc = BoundaryCondition(
        "traction", axis=1, coord=10.0, lo=0.0, hi=1.0,
        value=np.array([0.0, -3.0e6]), mode="material",
        amplitude=lambda t: 1.0 - np.cos(100.0 * t),
    )
    if basis is None:
        basis = BasisKind.GIMP if stabilized else BasisKind.LINEAR
    cfg = IntegratorConfig(regime=Regime.DYNAMIC, beta=0.3025, gamma=0.6, dt=1.0e-3 / scale)
    scene = Scene(
        name="footing", grid=grid, params=params, cfg=cfg, t_end=t_end,
        initial_particles=particles, boundary=boundary,
        particle_load_tags=[(idx, widths, load_bc)],
        basis=basis, stabilized=stabilized,
        probes={"A": (0.0625, 9.4375), "B": (0.0625, 4.9375), "C": (0.0625, 0.0625)},
        meta={"footing_half_width": 1.0},
    )
    return scene


def self_weight_scene(scale=1.0, stabilized=True, basis=BasisKind.GIMP, t_end=50.0):
    """Self-weight consolidation of a soft deposit, right half (2 m x 2 m),
    Kozeny-Carman permeability, growing quasi-static time steps."""
    n = _scaled_cells(16, scale, "self-weight domain")
    h = 2.0 / n
    # lateral headroom: the undrained slump bulges the free right face out
    side = max(4, n // 2)
    grid = BackgroundGrid(np.zeros(2), h, (n + side, n))
    # submerged deposit: buoyant body force, pressure unknown is the excess
    # over the ambient hydrostatic field
    params = MaterialParams.from_bulk_poisson(
        K=15.0e3, nu=0.3, k0=1.0e-14, mu_f=1.0e-3, phi0=0.5,
        rho_s=2600.0, rho_f=1000.0, gravity=np.array([0.0, -9.81]),
        kozeny_carman=True, buoyant=True,
    )
    particles = seed_particles(grid, (0.0, 0.0), (2.0, 2.0), (5, 5), params.phi0)
    lattice = h / 5.0
    top = particles.x[:, 1] > 2.0 - lattice
    right = particles.x[:, 0] > 2.0 - lattice
    particles.drained[top | right] = True
    boundary = [
        BoundaryCondition("fixed_displacement", axis=1, coord=0.0, lo=0.0,
                          hi=grid.extent[0]),
        BoundaryCondition("roller", axis=0, coord=0.0, lo=0.0, hi=2.0, component=0),
    ]
    cfg = IntegratorConfig(regime=Regime.QUASI_STATIC, dt=0.1, dt_growth=1.2)
    scene = Scene(
        name="self_weight", grid=grid, params=params, cfg=cfg, t_end=t_end,
        initial_particles=particles, boundary=boundary, basis=basis,
        stabilized=stabilized, meta={"surface_y": 2.0},
        gravity_ramp_time=0.1,
    )
    return scene


def impact_scene(scale=1.0, stabilized=True, basis=None, t_end=0.35):
    """Two saturated poroelastic discs launched at each other, bouncing at
    the domain center; porous parameters from the self-weight example."""
    n = _scaled_cells(100, scale, "impact domain")
    h = 1.0 / n
    grid = build_grid((0.0, 0.0), (1.0, 1.0), h)
    params = MaterialParams.from_young_poisson(
        E=100.0e3, nu=0.3, k0=1.0e-14, mu_f=1.0e-3, phi0=0.5,
        rho_s=2600.0, rho_f=1000.0, kozeny_carman=True,
    )
    lower = seed_disc(grid, (0.25, 0.25), 0.2, 2.5, params.phi0)
    lower.v[:] = [1.0, 1.0]
    lower.body_id[:] = 0
    upper = seed_disc(grid, (0.75, 0.75), 0.2, 2.5, params.phi0)
    upper.v[:] = [-1.0, -1.0]
    upper.body_id[:] = 1
    particles = merge_states(lower, upper)
    for body, cx in ((0, 0.25), (1, 0.75)):
        mask = particles.body_id == body
        ids = np.nonzero(mask)[0]
        order = np.lexsort((np.abs(particles.x[ids, 0] - cx), -particles.x[ids, 1]))
        particles.drained[ids[order[:14]]] = True
    boundary = [
        BoundaryCondition("roller", axis=0, coord=0.0, lo=0.0, hi=1.0, component=0),
        BoundaryCondition("roller", axis=0, coord=1.0, lo=0.0, hi=1.0, component=0),
        BoundaryCondition("roller", axis=1, coord=0.0, lo=0.0, hi=1.0, component=1),
        BoundaryCondition("roller", axis=1, coord=1.0, lo=0.0, hi=1.0, component=1),
    ]
    if basis is None:
        basis = BasisKind.GIMP if stabilized else BasisKind.LINEAR
    cfg = IntegratorConfig(regime=Regime.DYNAMIC, beta=0.3025, gamma=0.6, dt=2.5e-3 / scale)
    scene = Scene(
        name="impact", grid=grid, params=params, cfg=cfg, t_end=t_end,
        initial_particles=particles, boundary=boundary, basis=basis,
        stabilized=stabilized, probes={"center": (0.5, 0.5)},
        meta={"radius": 0.2, "centers": ((0.25, 0.25), (0.75, 0.75)), "v0": 1.0},
    )
    return scene


PRESETS = {
    "terzaghi": terzaghi_scene,
    "footing": footing_scene,
    "self_weight": self_weight_scene,
    "impact": impact_scene,
}


def build_scene(preset, **overrides):
    """Construct a preset scene; unknown preset names are configuration errors."""
    try:
        builder = PRESETS[preset]
    except KeyError:
        raise ConfigurationError(
            f"unknown preset {preset!r}; choose from {sorted(PRESETS)}"
        ) from None
    return builder(**overrides)


def diagonal_profile(particles, n_samples=41, span=0.25):
    """Pressure profile along the contact-normal diagonal through the domain
    center of the impact scene, sampled by nearest particle."""
    ts = np.linspace(-span, span, n_samples)
    direction = np.array([1.0, 1.0]) / np.sqrt(2.0)
    pts = 0.5 + ts[:, None] * direction[None, :]
    values = []
    for pt in pts:
        d2 = ((particles.x - pt) ** 2).sum(axis=1)
        values.append(particles.p[int(np.argmin(d2))])
    return np.asarray(values)
