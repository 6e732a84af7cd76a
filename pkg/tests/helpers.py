"""Shared test utilities: tiny patch scenes and finite-difference Jacobians."""

import numpy as np

from porompm.assembly import assemble, make_context
from porompm.basis import BasisKind
from porompm.constitutive import MaterialParams
from porompm.grid import BackgroundGrid, BoundaryCondition, activate_and_number
from porompm.integrate import IntegratorConfig, Regime
from porompm.particles import build_transfer_plan, seed_particles


def patch_setup(n_cells=2, h=0.5, ppc=(2, 2), kind=BasisKind.GIMP,
                regime=Regime.QUASI_STATIC, dt=0.1, params=None,
                boundary=(), stabilized=True, gravity=(0.0, 0.0),
                kozeny_carman=True, seed=0, randomize=True):
    """Fully seeded n x n cell patch with optionally randomized history state."""
    grid = BackgroundGrid(np.zeros(2), h, (n_cells, n_cells))
    if params is None:
        params = MaterialParams(
            lam=8.4e6, G=5.6e6, alpha_vis=0.04, k0=1e-14, mu_f=1e-3,
            phi0=0.4, rho_s=2500.0, rho_f=1000.0,
            gravity=np.asarray(gravity, float), kozeny_carman=kozeny_carman,
        )
    particles = seed_particles(grid, (0, 0), (n_cells * h, n_cells * h), ppc, params.phi0)
    rng = np.random.default_rng(seed)
    if randomize:
        # random pre-strained particle state (moderate, SPD-safe)
        W = rng.normal(scale=0.05, size=(len(particles), 2, 2))
        particles.F = np.eye(2) + W
        particles.phi = 1.0 - (1.0 - params.phi0) / np.linalg.det(particles.F)
        particles.V = particles.V0 * np.linalg.det(particles.F)
        particles.p = rng.normal(scale=1e4, size=len(particles))
        particles.p_dot = rng.normal(scale=1e3, size=len(particles))
        particles.p_ddot = rng.normal(scale=1e2, size=len(particles))
        particles.v = rng.normal(scale=0.01, size=(len(particles), 2))
        particles.a = rng.normal(scale=0.01, size=(len(particles), 2))
    cfg = IntegratorConfig(regime=regime, dt=dt)
    plan = build_transfer_plan(grid, particles, kind)
    dofmap = activate_and_number(grid, plan.nodes, plan.S, threshold=0.0)
    history = {
        "v": rng.normal(scale=0.01, size=(grid.n_nodes, 2)) if randomize else np.zeros((grid.n_nodes, 2)),
        "a": rng.normal(scale=0.01, size=(grid.n_nodes, 2)) if randomize else np.zeros((grid.n_nodes, 2)),
        "p": rng.normal(scale=1e4, size=grid.n_nodes) if randomize else np.zeros(grid.n_nodes),
        "p_dot": rng.normal(scale=1e3, size=grid.n_nodes) if randomize else np.zeros(grid.n_nodes),
        "p_ddot": rng.normal(scale=1e2, size=grid.n_nodes) if randomize else np.zeros(grid.n_nodes),
    }
    ctx = make_context(
        grid, plan, particles, params, cfg, dt, dofmap, history,
        boundary=list(boundary), stabilized=stabilized,
    )
    return grid, particles, plan, dofmap, ctx, rng


def fd_jacobian(ctx, dU, P, t, rel_step=1e-6):
    """Central-difference Jacobian of the free residual wrt free dofs.

    Steps scale with the grid spacing (u columns) and the pressure magnitude
    (p columns) so difference quotients stay above float noise.
    """
    from porompm.assembly import expand_solution

    n_u = len(ctx.free_u)
    n_p = len(ctx.free_p)
    n = n_u + n_p
    J = np.zeros((n, n))
    u_step = rel_step * ctx.grid.h
    p_step = rel_step * max(np.abs(P).max(), np.abs(ctx.p_n).max(), 1.0)
    for j in range(n):
        e = np.zeros(n)
        hstep = u_step if j < n_u else p_step
        e[j] = hstep
        ddU, ddP = expand_solution(ctx, e)
        rp = assemble(ctx, dU + ddU, P + ddP, t, jacobian=False).residual()
        rm = assemble(ctx, dU - ddU, P - ddP, t, jacobian=False).residual()
        J[:, j] = (rp - rm) / (2.0 * hstep)
    return J


def assembled_matrix(ctx, dU, P, t):
    return assemble(ctx, dU, P, t, jacobian=True).matrix().toarray()
