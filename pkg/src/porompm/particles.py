"""Particle state, seeding, particle<->grid transfers and the per-step
particle updates (Stages 1, 3 and 4 of the MPM cycle).

Particle data is stored as structure-of-arrays so transfers and assembly
vectorize over the whole particle set. A TransferPlan freezes, for one step,
the node stencils with their weights/gradients evaluated at the previous
converged configuration, the constant-domain weights S0, and the cell
overlap fractions feeding the projection operator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import basis
from .basis import BasisKind
from .constitutive import mixture_density, update_porosity
from .errors import ConfigurationError, OutOfDomainError
from .grid import BackgroundGrid
from .tensors import det2, relative_deformation_gradient, right_stretch_diagonal


@dataclass
class ParticleState:
    x: np.ndarray            # current position (n, 2)
    V: np.ndarray            # current volume per unit thickness (n,)
    F: np.ndarray            # total deformation gradient (n, 2, 2)
    l_p: np.ndarray          # GIMP influence half-widths (n, 2)
    v: np.ndarray            # velocity (n, 2)
    a: np.ndarray            # acceleration (n, 2)
    p: np.ndarray            # pore pressure (n,)
    p_dot: np.ndarray
    p_ddot: np.ndarray
    phi: np.ndarray          # porosity (n,)
    X: np.ndarray = None     # reference position
    V0: np.ndarray = None
    l_p0: np.ndarray = None
    body_id: np.ndarray = None
    drained: np.ndarray = None   # particle-tagged zero-pressure boundary

    def __post_init__(self):
        n = len(self.x)
        if self.X is None:
            self.X = self.x.copy()
        if self.V0 is None:
            self.V0 = self.V.copy()
        if self.l_p0 is None:
            self.l_p0 = self.l_p.copy()
        if self.body_id is None:
            self.body_id = np.zeros(n, dtype=int)
        if self.drained is None:
            self.drained = np.zeros(n, dtype=bool)

    def __len__(self):
        return len(self.x)

    def solid_mass(self, params):
        return float(np.sum((1.0 - self.phi) * params.rho_s * self.V))

    def momentum(self, params):
        m = mixture_density(self.phi, params) * self.V
        return (m[:, None] * self.v).sum(axis=0)


def _empty_state(x, V, l_p, phi0):
    n = len(x)
    return ParticleState(
        x=np.asarray(x, dtype=float),
        V=np.asarray(V, dtype=float),
        F=np.broadcast_to(np.eye(2), (n, 2, 2)).copy(),
        l_p=np.asarray(l_p, dtype=float),
        v=np.zeros((n, 2)),
        a=np.zeros((n, 2)),
        p=np.zeros(n),
        p_dot=np.zeros(n),
        p_ddot=np.zeros(n),
        phi=np.full(n, phi0),
    )


def seed_particles(grid, region_lo, region_hi, ppc_axis, phi0):
    """Regular lattice seeding of an axis-aligned box.

    ppc_axis = (nx, ny) particles per cell per axis; V = h^2/(nx*ny) and
    l_p = h/(2*n_axis) so the influence domains tile each cell exactly.
    Region boundaries must lie on cell faces.
    """
    lo = np.asarray(region_lo, dtype=float)
    hi = np.asarray(region_hi, dtype=float)
    h = grid.h
    rel_lo = (lo - grid.origin) / h
    rel_hi = (hi - grid.origin) / h
    if np.any(np.abs(rel_lo - np.round(rel_lo)) > 1e-9) or np.any(
        np.abs(rel_hi - np.round(rel_hi)) > 1e-9
    ):
        raise ConfigurationError("seeded region must align with cell faces")
    if np.any(hi - lo <= 0):
        raise ConfigurationError("seeded region must have positive extent")
    nx, ny = int(ppc_axis[0]), int(ppc_axis[1])
    dx, dy = h / nx, h / ny
    xs = np.arange(lo[0] + dx / 2, hi[0], dx)
    ys = np.arange(lo[1] + dy / 2, hi[1], dy)
    gx, gy = np.meshgrid(xs, ys, indexing="xy")
    pts = np.stack([gx.ravel(), gy.ravel()], axis=-1)
    V = np.full(len(pts), dx * dy)
    l_p = np.tile([dx / 2, dy / 2], (len(pts), 1))
    return _empty_state(pts, V, l_p, phi0)


def seed_disc(grid, center, radius, points_per_cell_axis, phi0):
    """Lattice seeding clipped to a disc; spacing h/points_per_cell_axis.

    The lattice is centered on the disc so two discs seeded anywhere carry
    identical point patterns (equal counts, zero net momentum for opposite
    velocities). Each kept point carries the full lattice volume, no
    partial-volume correction at the rim.
    """
    d = grid.h / float(points_per_cell_axis)
    center = np.asarray(center, dtype=float)
    n = int(np.ceil(radius / d)) + 1
    offs = (np.arange(-n, n + 1) + 0.5) * d
    gx, gy = np.meshgrid(center[0] + offs, center[1] + offs, indexing="xy")
    pts = np.stack([gx.ravel(), gy.ravel()], axis=-1)
    keep = ((pts - center) ** 2).sum(axis=1) <= radius**2
    pts = pts[keep]
    V = np.full(len(pts), d * d)
    l_p = np.tile([d / 2, d / 2], (len(pts), 1))
    return _empty_state(pts, V, l_p, phi0)


def merge_states(a, b):
    def cat(x, y):
        return np.concatenate([x, y], axis=0)

    out = ParticleState(
        x=cat(a.x, b.x), V=cat(a.V, b.V), F=cat(a.F, b.F), l_p=cat(a.l_p, b.l_p),
        v=cat(a.v, b.v), a=cat(a.a, b.a), p=cat(a.p, b.p),
        p_dot=cat(a.p_dot, b.p_dot), p_ddot=cat(a.p_ddot, b.p_ddot),
        phi=cat(a.phi, b.phi), X=cat(a.X, b.X), V0=cat(a.V0, b.V0),
        l_p0=cat(a.l_p0, b.l_p0), body_id=cat(a.body_id, b.body_id),
        drained=cat(a.drained, b.drained),
    )
    return out


@dataclass
class TransferPlan:
    """Frozen particle->node connectivity for one step.

    nodes: (n, W) global node ids (weight-zero padding where a window slot
    falls outside the grid); S, S0: (n, W); gradN: (n, W, 2) gradients in the
    configuration the plan was built in; cells/cell_fr: (n, C) overlap cells
    of the influence domain with their domain fractions.
    """

    grid: BackgroundGrid
    kind: BasisKind
    nodes: np.ndarray
    S: np.ndarray
    gradN: np.ndarray
    S0: np.ndarray
    cells: np.ndarray
    cell_fr: np.ndarray
    cell_of_particle: np.ndarray
    S_row_sum: np.ndarray = None

    def __post_init__(self):
        if self.S_row_sum is None:
            self.S_row_sum = self.S.sum(axis=1)

    @property
    def window(self):
        return self.S.shape[1]

    def drop_nodes(self, dropped_node_ids):
        """Remove a set of grid nodes from the interpolation space.

        Nodes brushed only by the far tail of a support carry near-zero
        equations whose solves are amplified noise; their weights are zeroed
        here and node-to-particle gathers renormalize by the remaining row
        sum, so constant fields are still reproduced exactly.
        """
        if len(dropped_node_ids) == 0:
            return
        drop = np.zeros(self.grid.n_nodes, dtype=bool)
        drop[np.asarray(dropped_node_ids, dtype=int)] = True
        mask = drop[self.nodes]
        if not mask.any():
            return
        self.S = np.where(mask, 0.0, self.S)
        self.S0 = np.where(mask, 0.0, self.S0)
        self.gradN = np.where(mask[:, :, None], 0.0, self.gradN)
        self.S_row_sum = self.S.sum(axis=1)


def _axis_window_linear(grid, x, ax):
    h = grid.h
    rel = (x[:, ax] - grid.origin[ax]) / h
    base = np.ceil(rel).astype(int) - 1
    base = np.where(rel <= 0.0, 0, base)
    base = np.clip(base, 0, grid.cells[ax] - 1)
    xi_rel = rel - base  # in [0, 1]
    S = np.stack([1.0 - xi_rel, xi_rel], axis=1)
    dS = np.tile([-1.0 / h, 1.0 / h], (len(x), 1))
    S0 = np.full_like(S, 0.5)
    idx = np.stack([base, base + 1], axis=1)
    return idx, S, dS, S0


def _axis_window_gimp(grid, x, l_p, ax):
    h = grid.h
    xs = x[:, ax]
    lp = l_p[:, ax]
    basis._check_lp(lp, h)
    base = np.floor((xs - grid.origin[ax]) / h).astype(int) - 1
    idx = base[:, None] + np.arange(4)[None, :]
    node_x = grid.origin[ax] + idx * h
    xi = xs[:, None] - node_x
    lo = grid.origin[ax] - node_x          # grid extent in node coordinates
    hi = grid.extent[ax] - node_x
    lpb = lp[:, None]
    S = basis.gimp_weight_clipped_1d(xi, lpb, h, lo, hi)
    dS = basis.gimp_gradient_clipped_1d(xi, lpb, h, lo, hi)
    S0 = basis.constant_basis_1d(xi, lpb, h, lo, hi)
    idx_clamped = np.clip(idx, 0, grid.nodes_per_axis[ax] - 1)
    return idx_clamped, S, dS, S0


def build_transfer_plan(grid, particles, kind=BasisKind.GIMP, step=None):
    """Evaluate stencils, weights and overlap fractions at current positions."""
    x = particles.x
    cell_idx = grid.cell_of(x, step=step)
    cell_flat = cell_idx[:, 1] * grid.cells[0] + cell_idx[:, 0]

    if kind == BasisKind.LINEAR:
        ix, Sx, dSx, S0x = _axis_window_linear(grid, x, 0)
        iy, Sy, dSy, S0y = _axis_window_linear(grid, x, 1)
    else:
        ix, Sx, dSx, S0x = _axis_window_gimp(grid, x, particles.l_p, 0)
        iy, Sy, dSy, S0y = _axis_window_gimp(grid, x, particles.l_p, 1)

    w = Sx.shape[1]
    nodes = (iy[:, :, None] * grid.nodes_per_axis[0] + ix[:, None, :]).reshape(len(x), w * w)
    S = (Sy[:, :, None] * Sx[:, None, :]).reshape(len(x), w * w)
    gx = (Sy[:, :, None] * dSx[:, None, :]).reshape(len(x), w * w)
    gy = (dSy[:, :, None] * Sx[:, None, :]).reshape(len(x), w * w)
    gradN = np.stack([gx, gy], axis=-1)
    S0 = (S0y[:, :, None] * S0x[:, None, :]).reshape(len(x), w * w)

    if kind == BasisKind.LINEAR:
        cells = cell_flat[:, None]
        cell_fr = np.ones((len(x), 1))
    else:
        # The influence domain spans at most 2 cells per axis for l_p <= h/2.
        cx0 = np.floor((x[:, 0] - particles.l_p[:, 0] - grid.origin[0]) / grid.h).astype(int)
        cy0 = np.floor((x[:, 1] - particles.l_p[:, 1] - grid.origin[1]) / grid.h).astype(int)
        frx = np.stack(
            [
                basis.overlap_fraction_1d(
                    x[:, 0] - (grid.origin[0] + (cx0 + k) * grid.h), particles.l_p[:, 0], grid.h
                )
                for k in (0, 1)
            ],
            axis=1,
        )
        fry = np.stack(
            [
                basis.overlap_fraction_1d(
                    x[:, 1] - (grid.origin[1] + (cy0 + k) * grid.h), particles.l_p[:, 1], grid.h
                )
                for k in (0, 1)
            ],
            axis=1,
        )
        cxs = np.clip(np.stack([cx0, cx0 + 1], axis=1), 0, grid.cells[0] - 1)
        cys = np.clip(np.stack([cy0, cy0 + 1], axis=1), 0, grid.cells[1] - 1)
        cells = (cys[:, :, None] * grid.cells[0] + cxs[:, None, :]).reshape(len(x), 4)
        cell_fr = (fry[:, :, None] * frx[:, None, :]).reshape(len(x), 4)

    return TransferPlan(
        grid=grid, kind=kind, nodes=nodes, S=S, gradN=gradN, S0=S0,
        cells=cells, cell_fr=cell_fr, cell_of_particle=cell_flat,
    )


def p2g(plan, values):
    """Raw particle-to-node scatter f_i = sum_mp S_i,mp f_mp."""
    values = np.asarray(values, dtype=float)
    shape = (plan.grid.n_nodes,) + values.shape[1:]
    out = np.zeros(shape)
    if values.ndim == 1:
        np.add.at(out, plan.nodes.ravel(), (plan.S * values[:, None]).ravel())
    else:
        contrib = plan.S[:, :, None] * values[:, None, :]
        np.add.at(out, plan.nodes.ravel(), contrib.reshape(-1, values.shape[1]))
    return out


def p2g_weighted(plan, values, weights, min_support=1e-12):
    """Weighted transfer f_i = sum(S w f)/sum(S w); reproduces constants.

    Nodes whose accumulated support falls below min_support (relative to the
    mean) are returned as zero.
    """
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    denom = p2g(plan, weights)
    if values.ndim == 1:
        numer = p2g(plan, weights * values)
    else:
        numer = p2g(plan, weights[:, None] * values)
    ref = denom[denom > 0.0]
    floor = min_support * (ref.mean() if ref.size else 1.0)
    safe = denom > floor
    out = np.zeros_like(numer)
    if values.ndim == 1:
        out[safe] = numer[safe] / denom[safe]
    else:
        out[safe] = numer[safe] / denom[safe, None]
    return out


def g2p(plan, nodal):
    """Node-to-particle gather f_mp = sum_i S_i,mp f_i / sum_i S_i,mp.

    The row sum is exactly 1 for untouched interior supports; it deviates
    only where the interpolation space was trimmed (grid clipping or dropped
    fringe nodes), where the renormalization keeps constants exact.
    """
    nodal = np.asarray(nodal, dtype=float)
    vals = nodal[plan.nodes]
    denom = np.where(plan.S_row_sum > 0.1, plan.S_row_sum, 1.0)
    if nodal.ndim == 1:
        return (plan.S * vals).sum(axis=1) / denom
    return (plan.S[:, :, None] * vals).sum(axis=1) / denom[:, None]


def particle_gradient(plan, nodal, use_gradN=True):
    """grad f at particles from nodal values using plan gradients (n, 2) or,
    for vector fields, (n, 2, 2) with grad[p, i, j] = d f_i / d x_j."""
    nodal = np.asarray(nodal, dtype=float)
    vals = nodal[plan.nodes]
    if nodal.ndim == 1:
        return np.einsum("pw,pwg->pg", vals, plan.gradN)
    return np.einsum("pwi,pwg->pig", vals, plan.gradN)


def element_averages(plan, values, volumes):
    """Projection Pi over all cells: overlap-volume-weighted averages.

    Returns (cell_value, cell_weight) arrays over the full grid; cells with
    no overlap carry weight 0 and value 0.
    """
    w = plan.cell_fr * volumes[:, None]
    denom = np.zeros(plan.grid.n_cells)
    numer = np.zeros(plan.grid.n_cells)
    np.add.at(denom, plan.cells.ravel(), w.ravel())
    np.add.at(numer, plan.cells.ravel(), (w * np.asarray(values)[:, None]).ravel())
    out = np.zeros(plan.grid.n_cells)
    mask = denom > 0.0
    out[mask] = numer[mask] / denom[mask]
    return out, denom


def post_solution_update(particles, plan, du_nodal, params, nodal_fields, dynamic):
    """Stage 3: pull converged nodal solutions back to the particles.

    du_nodal: (N, 2) converged displacement increment; nodal_fields: dict of
    full-grid nodal arrays with keys among v, a, p, p_dot, p_ddot. Updates
    kinematics (F, V, phi) from the increment gradient and replaces particle
    state variables by basis interpolation of the nodal solution. All
    validation happens before any state is mutated, so a raised step-cut
    signal leaves the particles untouched.
    """
    grad_du = particle_gradient(plan, du_nodal)  # (n, 2, 2), d du_i / d x_j
    dF = relative_deformation_gradient(grad_du)
    F_new = np.einsum("pij,pjk->pik", dF, particles.F)
    phi_new = update_porosity(det2(F_new), params)
    particles.F = F_new
    particles.V = particles.V * det2(dF)
    particles.phi = phi_new
    particles.p = g2p(plan, nodal_fields["p"])
    if dynamic:
        particles.v = g2p(plan, nodal_fields["v"])
        particles.a = g2p(plan, nodal_fields["a"])
        particles.p_dot = g2p(plan, nodal_fields["p_dot"])
        particles.p_ddot = g2p(plan, nodal_fields["p_ddot"])
    return dF


def convect_and_update_domains(particles, plan, du_nodal, grid, step=None):
    """Stage 4: move particles and rescale GIMP half-widths by the right
    stretch (rotation-free), then verify everyone stayed on the grid.

    Half-widths are capped at h/2: the closed-form weights assume domains no
    wider than a cell, so under extreme stretch the domain saturates instead
    of aborting the run.
    """
    x_new = particles.x + g2p(plan, du_nodal)
    grid.cell_of(x_new, step=step)  # raises OutOfDomainError before mutating
    particles.x = x_new
    stretch = right_stretch_diagonal(particles.F)
    particles.l_p = np.minimum(particles.l_p0 * stretch, 0.5 * grid.h)
    return particles
