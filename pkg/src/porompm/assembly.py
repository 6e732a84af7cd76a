"""Residual and block-Jacobian assembly for the coupled u-p system.

All volume integrals are one-point-per-material-point quadrature in the
updated-Lagrangian setting: stencils and gradients are frozen in the
previous converged configuration, current-configuration gradients are
obtained by contracting with dF^{-1}, and quadrature weights are the
current particle volumes dJ * V_n.

Unknowns: nodal displacement increments dU over the step and nodal total
pressures P at t_{n+1}. Dirichlet-constrained dofs are eliminated; the
BlockSystem holds the free-dof blocks

    [ A   B1 ] [dU]     [ R_mom           ]
    [ B2  C+ ] [dP] = - [ R_mass + R_stab ] ,  C+ = C + C_stab.

Linearization is consistent except the two inertial/damping couplings the
formulation deliberately leaves out: the volume/density derivative of the
inertia term and the geometric parts of the viscous term (see
docs/assembly_notes.md).
"""

from __future__ import annotations

from dataclasses import dataclass, field
import numpy as np
import scipy.sparse as sp

from .constitutive import (
    kirchhoff_from_strain,
    kozeny_carman,
    kozeny_carman_dk_dphi,
    mixture_density,
)
from .errors import ConfigurationError, ElementInversionError, PoromechanicsError
from .grid import DofMap
from .integrate import Regime, history_rate_offsets, stabilization_tau
from .particles import element_averages
from .tensors import I2, det2, half_log_derivative, hencky_strain, inv2


@dataclass
class BlockSystem:
    """Free-dof blocks of the stabilized Jacobian system."""

    A: sp.csr_matrix
    B1: sp.csr_matrix
    B2: sp.csr_matrix
    C: sp.csr_matrix
    C_stab: sp.csr_matrix
    R_mom: np.ndarray
    R_mass: np.ndarray
    R_stab: np.ndarray
    # norm of the sum of |term| magnitudes: the roundoff floor reference for
    # the Newton absolute criterion (residuals are near-cancelling sums)
    gross_scale: float = 1.0

    def matrix(self):
        return sp.bmat(
            [[self.A, self.B1], [self.B2, self.C + self.C_stab]], format="csc"
        )

    def residual(self):
        return np.concatenate([self.R_mom, self.R_mass + self.R_stab])

    @property
    def n_u(self):
        return self.A.shape[0]

    @property
    def n_p(self):
        return self.C.shape[0]


@dataclass
class AssemblyContext:
    """Everything frozen over one time step's Newton loop."""

    grid: object
    plan: object
    params: object
    cfg: object
    dt: float
    dofmap: DofMap
    # previous converged nodal fields, full-grid arrays
    v_n: np.ndarray
    a_n: np.ndarray
    p_n: np.ndarray
    pdot_n: np.ndarray
    pddot_n: np.ndarray
    stabilized: bool = True
    boundary: list = field(default_factory=list)
    particle_loads: list = field(default_factory=list)
    # cached particle state at t_n
    F_n: np.ndarray = None
    b_n: np.ndarray = None
    J_n: np.ndarray = None
    V_n: np.ndarray = None
    vol_ref: np.ndarray = None
    tau_cell: np.ndarray = None
    gravity_factor: float = 1.0
    free_u: np.ndarray = None
    free_p: np.ndarray = None
    p_dirichlet_nodes: np.ndarray = None
    p_dirichlet_values: list = None

    @property
    def dynamic(self):
        return self.cfg.regime == Regime.DYNAMIC


def make_context(grid, plan, particles, params, cfg, dt, dofmap, nodal_history,
                 boundary=(), particle_loads=(), stabilized=True,
                 gravity_factor=1.0):
    """Build the assembly context, Dirichlet masks and per-cell tau."""
    ctx = AssemblyContext(
        grid=grid, plan=plan, params=params, cfg=cfg, dt=dt, dofmap=dofmap,
        v_n=nodal_history["v"], a_n=nodal_history["a"], p_n=nodal_history["p"],
        pdot_n=nodal_history["p_dot"], pddot_n=nodal_history["p_ddot"],
        stabilized=stabilized, boundary=list(boundary),
        particle_loads=list(particle_loads), gravity_factor=gravity_factor,
    )
    ctx.F_n = particles.F.copy()
    ctx.b_n = np.einsum("pik,pjk->pij", ctx.F_n, ctx.F_n)
    ctx.J_n = det2(ctx.F_n)
    ctx.V_n = particles.V.copy()
    ctx.vol_ref = ctx.V_n / ctx.J_n

    if stabilized:
        if cfg.regime == Regime.QUASI_STATIC:
            tau = np.full(grid.n_cells, stabilization_tau(cfg.regime, params, grid.h, dt, cfg))
        else:
            kappa_p = kozeny_carman(particles.phi, params) / params.mu_f
            kappa_cell, weight = element_averages(plan, kappa_p, particles.V)
            tau = np.asarray(
                stabilization_tau(cfg.regime, params, grid.h, dt, cfg, kappa=kappa_cell)
            )
            tau[weight == 0.0] = 0.0
        if np.any(tau < 0.0):
            raise PoromechanicsError("stabilization parameter must be clamped at 0")
        ctx.tau_cell = tau
    else:
        ctx.tau_cell = None

    _build_dirichlet(ctx, particles)
    return ctx


def _build_dirichlet(ctx, particles):
    dof = ctx.dofmap
    fixed_u = np.zeros(dof.n_u, dtype=bool)
    fixed_p = np.zeros(dof.n_p, dtype=bool)
    p_nodes = []
    p_vals = []
    for bc in ctx.boundary:
        if bc.kind in ("traction", "flux", "impermeable"):
            continue
        nodes = bc.select_nodes(ctx.grid)
        nodes = nodes[dof.node_rank[nodes] >= 0]
        if bc.kind == "fixed_displacement":
            fixed_u[dof.u_dof(nodes, 0)] = True
            fixed_u[dof.u_dof(nodes, 1)] = True
        elif bc.kind == "roller":
            fixed_u[dof.u_dof(nodes, bc.component)] = True
        elif bc.kind == "prescribed_pressure":
            fixed_p[dof.p_dof(nodes)] = True
            p_nodes.append(nodes)
            p_vals.append(bc)
        else:
            raise ConfigurationError(f"unknown boundary condition kind {bc.kind!r}")

    if particles.drained.any():
        # Constrain the p-dof of the node nearest each tagged particle: the
        # tagged particles sit on the free surface, so this pins only the
        # outermost node layer and pressure in the adjacent cells still
        # develops by diffusion (pinning whole containing cells would drain
        # a full cell depth instantaneously).
        x = particles.x[particles.drained]
        idx = np.round((x - ctx.grid.origin) / ctx.grid.h).astype(int)
        idx[:, 0] = np.clip(idx[:, 0], 0, ctx.grid.nodes_per_axis[0] - 1)
        idx[:, 1] = np.clip(idx[:, 1], 0, ctx.grid.nodes_per_axis[1] - 1)
        nearest = np.unique(ctx.grid.node_id(idx[:, 0], idx[:, 1]))
        nearest = nearest[dof.node_rank[nearest] >= 0]
        fixed_p[dof.p_dof(nearest)] = True
        p_nodes.append(nearest)
        p_vals.append(None)

    ctx.free_u = np.nonzero(~fixed_u)[0]
    ctx.free_p = np.nonzero(~fixed_p)[0]
    ctx.p_dirichlet_nodes = p_nodes
    ctx.p_dirichlet_values = p_vals


def apply_pressure_dirichlet(ctx, P, t):
    """Write prescribed pressures into the trial nodal vector."""
    for nodes, bc in zip(ctx.p_dirichlet_nodes, ctx.p_dirichlet_values):
        P[nodes] = 0.0 if bc is None else float(bc.value_at(t))
    return P


def apply_neumann(ctx, t):
    """Boundary loads at time t: (momentum (N, 2), mass (N,)) nodal arrays.

    Segment tractions/fluxes integrate the prescribed value over grid-aligned
    segments with 2-point Gauss per cell edge and hat basis functions.
    Material-mode loads ride on tagged boundary particles (footing): each
    tagged particle carries value * width, distributed with its own weights.
    Flux sign: q_hat is an influx, contributing -S*q_hat to the mass residual.
    """
    grid = ctx.grid
    f_u = np.zeros((grid.n_nodes, 2))
    f_p = np.zeros(grid.n_nodes)
    gauss = np.array([-1.0, 1.0]) / np.sqrt(3.0)
    for bc in ctx.boundary:
        if bc.kind not in ("traction", "flux"):
            continue
        if bc.mode == "material":
            continue  # handled via particle_loads
        value = bc.value_at(t)
        axis, other = bc.axis, 1 - bc.axis
        lo_i = int(round((bc.lo - grid.origin[other]) / grid.h))
        hi_i = int(round((bc.hi - grid.origin[other]) / grid.h))
        if not (0 <= lo_i < hi_i <= grid.cells[other]):
            raise ConfigurationError("boundary segment lies off the grid")
        line_i = int(round((bc.coord - grid.origin[axis]) / grid.h))
        if abs(bc.coord - (grid.origin[axis] + line_i * grid.h)) > 1e-9 * grid.h:
            raise ConfigurationError("boundary segment is not grid-aligned")
        for e in range(lo_i, hi_i):
            n0 = grid.node_id(e, line_i) if other == 0 else grid.node_id(line_i, e)
            n1 = grid.node_id(e + 1, line_i) if other == 0 else grid.node_id(line_i, e + 1)
            for gp in gauss:
                N0, N1 = 0.5 * (1.0 - gp), 0.5 * (1.0 + gp)
                wq = 0.5 * grid.h
                if bc.kind == "traction":
                    f_u[n0] += N0 * wq * value
                    f_u[n1] += N1 * wq * value
                else:
                    f_p[n0] -= N0 * wq * float(value)
                    f_p[n1] -= N1 * wq * float(value)

    plan = ctx.plan
    for load in ctx.particle_loads:
        idx, widths, bc = load
        value = bc.value_at(t)
        if bc.kind == "traction":
            contrib = plan.S[idx][:, :, None] * (widths[:, None] * np.ones(2)[None, :] * value[None, :])[:, None, :]
            np.add.at(f_u, plan.nodes[idx].ravel(), contrib.reshape(-1, 2))
        elif bc.kind == "flux":
            contrib = -plan.S[idx] * (widths * float(value))[:, None]
            np.add.at(f_p, plan.nodes[idx].ravel(), contrib.ravel())
    return f_u, f_p


def _trial_fields(ctx, dU, P):
    """Per-particle kinematic and constitutive state for a trial (dU, P)."""
    plan, params = ctx.plan, ctx.params
    S, gradN, nodes = plan.S, plan.gradN, plan.nodes
    dU_w = dU[nodes]
    P_w = P[nodes]

    grad_du = np.einsum("pwk,pwg->pkg", dU_w, gradN)
    dF = grad_du + I2
    dJ = det2(dF)
    if np.any(dJ <= 0.0):
        which = int(np.nonzero(dJ <= 0.0)[0][0])
        raise ElementInversionError(
            f"trial increment inverts the neighborhood of particle {which}",
            particle=which,
        )
    dFinv = inv2(dF)
    s = np.einsum("pwg,pgk->pwk", gradN, dFinv)
    w_cur = dJ * ctx.V_n

    F = np.einsum("pij,pjk->pik", dF, ctx.F_n)
    J = dJ * ctx.J_n
    b = np.einsum("pik,pjk->pij", F, F)
    eps = hencky_strain(b)
    tau_K = kirchhoff_from_strain(eps, params)

    # clamp porosity for constitutive evaluation: transient Newton iterates
    # may overshoot the physical range; the converged state is validated in
    # the post-solution update, which raises the step-cut signal
    phi = np.clip(1.0 - (1.0 - params.phi0) / J, 0.005, 0.995)
    rho = mixture_density(phi, params)
    kappa = kozeny_carman(phi, params) / params.mu_f

    rate_v, rate_a, rate_p = ctx.cfg.rate_factors(ctx.dt)
    v_star, a_star = history_rate_offsets(ctx.v_n, ctx.a_n, ctx.cfg, ctx.dt)
    v_nodal = rate_v * dU + v_star
    v_w = v_nodal[nodes]
    grad_v = np.einsum("pwk,pwg->pkg", v_w, s)
    div_v = grad_v[:, 0, 0] + grad_v[:, 1, 1]

    if ctx.dynamic:
        a_nodal = rate_a * dU + a_star
        a_mp = np.einsum("pw,pwk->pk", S, a_nodal[nodes])
        sym_gv = 0.5 * (grad_v + np.swapaxes(grad_v, -1, -2))
        sigma_vis = params.alpha_vis * kirchhoff_from_strain(sym_gv, params)
        pdot_nodal = rate_p * (P - ctx.p_n) + (
            (1.0 - ctx.cfg.gamma / ctx.cfg.beta) * ctx.pdot_n
            + (1.0 - ctx.cfg.gamma / (2.0 * ctx.cfg.beta)) * ctx.dt * ctx.pddot_n
        )
    else:
        a_mp = np.zeros_like(v_w[:, 0, :])
        sigma_vis = np.zeros_like(tau_K)
        pdot_nodal = (P - ctx.p_n) / ctx.dt

    p_mp = np.einsum("pw,pw->p", S, P_w)
    grad_p = np.einsum("pw,pwk->pk", P_w, s)
    g_eff = ctx.gravity_factor * params.gravity
    if params.buoyant:
        drive_neg = -(grad_p + params.rho_f * a_mp)
    else:
        drive_neg = -(grad_p - params.rho_f * (g_eff[None, :] - a_mp))
    q = kappa[:, None] * drive_neg

    return dict(
        dF=dF, dJ=dJ, dFinv=dFinv, s=s, w_cur=w_cur, F=F, J=J, b=b,
        tau_K=tau_K, sigma_vis=sigma_vis, phi=phi, rho=rho, kappa=kappa,
        grad_v=grad_v, div_v=div_v, a_mp=a_mp, p_mp=p_mp, grad_p=grad_p,
        drive_neg=drive_neg, q=q, pdot_nodal=pdot_nodal,
        rate_v=rate_v, rate_a=rate_a, rate_p=rate_p, g_eff=g_eff,
    )


def _stab_active(ctx):
    return ctx.stabilized and ctx.tau_cell is not None and np.any(ctx.tau_cell != 0.0)


def assemble(ctx, dU, P, t, jacobian=True):
    """Assemble the free-dof BlockSystem at trial state (dU, P), time t."""
    plan, params, dof = ctx.plan, ctx.params, ctx.dofmap
    S, nodes = plan.S, plan.nodes
    f = _trial_fields(ctx, dU, P)
    s, w_cur = f["s"], f["w_cur"]
    g_vec = f["g_eff"]

    # -- residuals, scattered to full-grid nodal arrays ---------------------
    r_u = -np.einsum("p,pkl,pwl->pwk", ctx.vol_ref, f["tau_K"], s)
    if ctx.dynamic and params.alpha_vis > 0.0:
        r_u -= np.einsum("p,pkl,pwl->pwk", w_cur, f["sigma_vis"], s)
    r_u += np.einsum("p,pwk->pwk", w_cur * f["p_mp"], s)
    if params.buoyant:
        r_u += ((w_cur * (f["rho"] - params.rho_f))[:, None, None]
                * S[:, :, None] * g_vec[None, None, :])
        r_u -= (w_cur * f["rho"])[:, None, None] * S[:, :, None] * f["a_mp"][:, None, :]
    else:
        body = g_vec[None, :] - f["a_mp"]
        r_u += (w_cur * f["rho"])[:, None, None] * S[:, :, None] * body[:, None, :]

    r_p = (w_cur * f["div_v"])[:, None] * S
    r_p -= np.einsum("p,pwk,pk->pw", w_cur, s, f["q"])

    R_mom = np.zeros((ctx.grid.n_nodes, 2))
    R_mass = np.zeros(ctx.grid.n_nodes)
    np.add.at(R_mom, nodes.ravel(), r_u.reshape(-1, 2))
    np.add.at(R_mass, nodes.ravel(), r_p.ravel())

    G_mom = np.zeros((ctx.grid.n_nodes, 2))
    G_mass = np.zeros(ctx.grid.n_nodes)
    np.add.at(G_mom, nodes.ravel(), np.abs(r_u).reshape(-1, 2))
    np.add.at(G_mass, nodes.ravel(), np.abs(r_p).ravel())

    f_u, f_p = apply_neumann(ctx, t)
    R_mom += f_u
    R_mass += f_p
    G_mom += np.abs(f_u)
    G_mass += np.abs(f_p)

    R_stab = np.zeros(ctx.grid.n_nodes)
    stab_on = _stab_active(ctx)
    if stab_on:
        D = S - plan.S0
        tau_p = ctx.tau_cell[plan.cell_of_particle]
        pdot_fluct = np.einsum("pw,pw->p", D, f["pdot_nodal"][nodes])
        np.add.at(
            R_stab, nodes.ravel(), ((w_cur * tau_p * pdot_fluct)[:, None] * D).ravel()
        )

    # -- reduce to free dofs -------------------------------------------------
    rank = np.maximum(dof.node_rank[nodes], 0)
    udof = (2 * rank)[:, :, None] + np.arange(2)[None, None, :]
    pdof = rank

    R_mom_free = _reduce_u(ctx, R_mom)
    R_mass_free = _reduce_p(ctx, R_mass)
    R_stab_free = _reduce_p(ctx, R_stab)
    gross = float(
        np.linalg.norm(np.concatenate([_reduce_u(ctx, G_mom), _reduce_p(ctx, G_mass)]))
    )

    if not jacobian:
        return BlockSystem(None, None, None, None, None,
                           R_mom_free, R_mass_free, R_stab_free, gross)

    n = len(w_cur)
    W = S.shape[1]

    # -- A block -------------------------------------------------------------
    m_vec = np.einsum("pij,pjk,pwk->pwi", f["dF"], ctx.b_n, plan.gradN)
    # d b = e_l x m_j + m_j x e_l, so contracting L = d eps/d b with both
    # symmetric halves doubles the single-sided contraction below.
    L = half_log_derivative(f["b"])
    Ltr = np.einsum("paald->pld", L)
    E = 2.0 * (params.lam * np.einsum("kq,pld->pkqld", I2, Ltr) + 2.0 * params.G * L)
    A_blk = -np.einsum("p,pkqld,piq,pjd->pikjl", ctx.vol_ref, E, s, m_vec, optimize=True)
    ts = np.einsum("pkq,pjq->pjk", f["tau_K"], s)
    A_blk += np.einsum("p,pil,pjk->pikjl", ctx.vol_ref, s, ts, optimize=True)
    wp = w_cur * f["p_mp"]
    A_blk += np.einsum("p,pjl,pik->pikjl", wp, s, s, optimize=True)
    A_blk -= np.einsum("p,pil,pjk->pikjl", wp, s, s, optimize=True)
    if np.any(g_vec != 0.0):
        A_blk += np.einsum("p,pi,k,pjl->pikjl", w_cur * params.rho_f, S, g_vec, s, optimize=True)
    if ctx.dynamic:
        A_blk -= np.einsum(
            "p,pi,pj,kl->pikjl", w_cur * f["rho"] * f["rate_a"], S, S, I2, optimize=True
        )
        if params.alpha_vis > 0.0:
            av = w_cur * params.alpha_vis * f["rate_v"]
            sisj = np.einsum("pik,pjk->pij", s, s)
            A_blk -= params.lam * np.einsum("p,pjl,pik->pikjl", av, s, s, optimize=True)
            A_blk -= params.G * np.einsum("p,pij,kl->pikjl", av, sisj, I2, optimize=True)
            A_blk -= params.G * np.einsum("p,pjk,pil->pikjl", av, s, s, optimize=True)

    # -- B1 ------------------------------------------------------------------
    B1_blk = np.einsum("p,pik,pj->pikj", w_cur, s, S, optimize=True)

    # -- B2 ------------------------------------------------------------------
    gvTs = np.einsum("pbl,pjb->pjl", f["grad_v"], s)
    B2_blk = np.einsum(
        "p,pi,pjl->pijl", w_cur, S, f["rate_v"] * s - gvTs + f["div_v"][:, None, None] * s,
        optimize=True,
    )
    siq = np.einsum("pik,pk->pi", s, f["q"])
    B2_blk -= np.einsum("p,pi,pjl->pijl", w_cur, siq, s, optimize=True)
    B2_blk += np.einsum("p,pil,pj->pijl", w_cur, s, siq, optimize=True)
    sisj = np.einsum("pik,pjk->pij", s, s)
    B2_blk -= np.einsum("p,pij,pl->pijl", w_cur * f["kappa"], sisj, f["grad_p"], optimize=True)
    if params.kozeny_carman:
        dkap_dlnJ = (
            kozeny_carman_dk_dphi(f["phi"], params) / params.mu_f
        ) * (1.0 - params.phi0) / f["J"]
        sidrive = np.einsum("pik,pk->pi", s, f["drive_neg"])
        B2_blk -= np.einsum("p,pi,pjl->pijl", w_cur * dkap_dlnJ, sidrive, s, optimize=True)
    if ctx.dynamic:
        B2_blk += np.einsum(
            "p,pj,pil->pijl",
            w_cur * f["kappa"] * params.rho_f * f["rate_a"], S, s, optimize=True,
        )
    if stab_on:
        # volume derivative of the stabilization residual (tau int (...) dv)
        tau_p = ctx.tau_cell[plan.cell_of_particle]
        D = S - plan.S0
        pdot_fluct = np.einsum("pw,pw->p", D, f["pdot_nodal"][nodes])
        B2_blk += np.einsum("p,pi,pjl->pijl", w_cur * tau_p * pdot_fluct, D, s, optimize=True)

    # -- C and C_stab ----------------------------------------------------------
    C_blk = np.einsum("p,pij->pij", w_cur * f["kappa"], sisj, optimize=True)
    if stab_on:
        tau_p = ctx.tau_cell[plan.cell_of_particle]
        D = S - plan.S0
        Cs_blk = np.einsum("p,pi,pj->pij", f["rate_p"] * tau_p * w_cur, D, D, optimize=True)
    else:
        Cs_blk = np.zeros((n, W, W))

    # -- scatter to sparse -----------------------------------------------------
    nu, npd = dof.n_u, dof.n_p
    rows_uu = np.broadcast_to(udof[:, :, :, None, None], A_blk.shape)
    cols_uu = np.broadcast_to(udof[:, None, None, :, :], A_blk.shape)
    A = sp.coo_matrix(
        (A_blk.ravel(), (rows_uu.ravel(), cols_uu.ravel())), shape=(nu, nu)
    ).tocsr()
    rows_up = np.broadcast_to(udof[:, :, :, None], B1_blk.shape)
    cols_up = np.broadcast_to(pdof[:, None, None, :], B1_blk.shape)
    B1 = sp.coo_matrix(
        (B1_blk.ravel(), (rows_up.ravel(), cols_up.ravel())), shape=(nu, npd)
    ).tocsr()
    rows_pu = np.broadcast_to(pdof[:, :, None, None], B2_blk.shape)
    cols_pu = np.broadcast_to(udof[:, None, :, :], B2_blk.shape)
    B2 = sp.coo_matrix(
        (B2_blk.ravel(), (rows_pu.ravel(), cols_pu.ravel())), shape=(npd, nu)
    ).tocsr()
    rows_pp = np.broadcast_to(pdof[:, :, None], C_blk.shape)
    cols_pp = np.broadcast_to(pdof[:, None, :], C_blk.shape)
    C = sp.coo_matrix(
        (C_blk.ravel(), (rows_pp.ravel(), cols_pp.ravel())), shape=(npd, npd)
    ).tocsr()
    Cs = sp.coo_matrix(
        (Cs_blk.ravel(), (rows_pp.ravel(), cols_pp.ravel())), shape=(npd, npd)
    ).tocsr()

    A = A[np.ix_(ctx.free_u, ctx.free_u)]
    B1 = B1[np.ix_(ctx.free_u, ctx.free_p)]
    B2 = B2[np.ix_(ctx.free_p, ctx.free_u)]
    C = C[np.ix_(ctx.free_p, ctx.free_p)]
    Cs = Cs[np.ix_(ctx.free_p, ctx.free_p)]

    return BlockSystem(A, B1, B2, C, Cs, R_mom_free, R_mass_free, R_stab_free, gross)


def _reduce_u(ctx, nodal_uv):
    dof = ctx.dofmap
    full = np.zeros(dof.n_u)
    full[0::2] = nodal_uv[dof.active_nodes, 0]
    full[1::2] = nodal_uv[dof.active_nodes, 1]
    return full[ctx.free_u]


def _reduce_p(ctx, nodal_s):
    return nodal_s[ctx.dofmap.active_nodes][ctx.free_p]


def expand_solution(ctx, x_free):
    """Map a free-dof solution vector back to full-grid (dU, dP) arrays."""
    dof = ctx.dofmap
    nu_free = len(ctx.free_u)
    du_full = np.zeros(dof.n_u)
    dp_full = np.zeros(dof.n_p)
    du_full[ctx.free_u] = x_free[:nu_free]
    dp_full[ctx.free_p] = x_free[nu_free:]
    dU = np.zeros((ctx.grid.n_nodes, 2))
    dP = np.zeros(ctx.grid.n_nodes)
    dU[dof.active_nodes, 0] = du_full[0::2]
    dU[dof.active_nodes, 1] = du_full[1::2]
    dP[dof.active_nodes] = dp_full
    return dU, dP
