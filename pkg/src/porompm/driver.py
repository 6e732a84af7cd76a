"""Time-stepping driver: runs the four-stage MPM cycle per step with
grid-resident history, step cutting on Newton failure and dt growth."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .assembly import make_context
from .constitutive import mixture_density
from .errors import SolverFailure, StepTooLarge
from .grid import activate_and_number
from .integrate import Regime, history_rate_offsets
from .particles import (
    build_transfer_plan,
    convect_and_update_domains,
    g2p,
    p2g_weighted,
    post_solution_update,
)
from .solver import newton_solve

MAX_STEP_CUTS = 10
# minimum accumulated basis support for a node to carry equations
ACTIVATION_THRESHOLD = 1e-4


@dataclass
class StepRecord:
    step: int
    t: float
    dt: float
    report: object


@dataclass
class RunResult:
    status: str = "completed"
    records: list = field(default_factory=list)
    particles: object = None
    probes: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)
    failure: str = ""

    @property
    def n_steps(self):
        return len(self.records)


class NodalHistory:
    """Grid-resident previous converged solution (full-grid arrays)."""

    def __init__(self, n_nodes):
        self.v = np.zeros((n_nodes, 2))
        self.a = np.zeros((n_nodes, 2))
        self.p = np.zeros(n_nodes)
        self.p_dot = np.zeros(n_nodes)
        self.p_ddot = np.zeros(n_nodes)

    def as_dict(self):
        return {"v": self.v, "a": self.a, "p": self.p,
                "p_dot": self.p_dot, "p_ddot": self.p_ddot}

    def remap_from_particles(self, plan, particles, params):
        """Project particle state to nodes: mass weighting for kinematic
        fields, volume weighting for the pressure family."""
        mass = mixture_density(particles.phi, params) * particles.V
        self.v = p2g_weighted(plan, particles.v, mass)
        self.a = p2g_weighted(plan, particles.a, mass)
        self.p = p2g_weighted(plan, particles.p, particles.V)
        self.p_dot = p2g_weighted(plan, particles.p_dot, particles.V)
        self.p_ddot = p2g_weighted(plan, particles.p_ddot, particles.V)

    def advanced(self, ctx, dU, P):
        """Converged nodal fields at t_{n+1} from the step solution (pure:
        commit separately so a failed post-update can retry the step)."""
        cfg, dt = ctx.cfg, ctx.dt
        rate_v, rate_a, rate_p = cfg.rate_factors(dt)
        new = {"p": P.copy(), "v": self.v, "a": self.a,
               "p_dot": self.p_dot, "p_ddot": self.p_ddot}
        if cfg.regime == Regime.DYNAMIC:
            v_star, a_star = history_rate_offsets(self.v, self.a, cfg, dt)
            new["v"] = rate_v * dU + v_star
            new["a"] = rate_a * dU + a_star
            b, g = cfg.beta, cfg.gamma
            new["p_dot"] = rate_p * (P - self.p) + (1.0 - g / b) * self.p_dot \
                + (1.0 - g / (2.0 * b)) * dt * self.p_ddot
            new["p_ddot"] = (P - self.p) / (b * dt**2) - self.p_dot / (b * dt) \
                + (1.0 - 1.0 / (2.0 * b)) * self.p_ddot
        else:
            new["p_dot"] = (P - self.p) / dt
        return new

    def commit(self, fields):
        self.v = fields["v"]
        self.a = fields["a"]
        self.p = fields["p"]
        self.p_dot = fields["p_dot"]
        self.p_ddot = fields["p_ddot"]


def sample_pressure(particles, point, radius):
    """Nearest-particle pressure at a fixed physical location, or None."""
    d2 = ((particles.x - np.asarray(point)) ** 2).sum(axis=1)
    i = int(np.argmin(d2))
    if d2[i] > radius**2:
        return None
    return float(particles.p[i])


def simulate(scene, solver="direct", stabilized=None, basis=None,
             observer=None, max_steps=None, raise_on_failure=False):
    """Run a scene to t_end. Returns a RunResult; a non-converged step after
    all cuts marks the result failed (or raises when raise_on_failure)."""
    particles = scene.fresh_particles()
    grid, params, cfg = scene.grid, scene.params, scene.cfg
    stab = scene.stabilized if stabilized is None else stabilized
    kind = scene.basis if basis is None else basis
    history = NodalHistory(grid.n_nodes)
    result = RunResult(particles=particles)
    for name in scene.probes:
        result.probes[name] = []

    t = 0.0
    dt = cfg.dt
    step = 0
    prev_dofmap = None
    while t < scene.t_end - 1e-12 * scene.t_end:
        if max_steps is not None and step >= max_steps:
            break
        dt = min(dt, scene.t_end - t)
        plan = build_transfer_plan(grid, particles, kind, step=step)
        # nodes brushed only by the far tail of a support (total weight below
        # threshold) carry near-zero equations whose solves are amplified
        # noise; drop them from the interpolation space for this step
        measure = np.zeros(grid.n_nodes)
        np.add.at(measure, plan.nodes.ravel(), plan.S.ravel())
        plan.drop_nodes(np.nonzero((measure > 0.0) & (measure <= ACTIVATION_THRESHOLD))[0])
        dofmap = activate_and_number(grid, plan.nodes, plan.S, threshold=ACTIVATION_THRESHOLD)
        if prev_dofmap is None or not dofmap.same_active_set(prev_dofmap):
            history.remap_from_particles(plan, particles, params)
        prev_dofmap = dofmap
        loads = scene.resolve_particle_loads(particles)

        cuts = 0
        report = None
        while True:
            ctx = make_context(
                grid, plan, particles, params, cfg, dt, dofmap,
                history.as_dict(), boundary=scene.boundary,
                particle_loads=loads, stabilized=stab,
                gravity_factor=scene.gravity_factor(t + dt),
            )
            try:
                dU, P, report = newton_solve(
                    ctx, t + dt, step=step, linear_solver=solver
                )
                # stage 3 validates the converged state before mutating and
                # participates in the step-cut recovery
                new_fields = history.advanced(ctx, dU, P)
                post_solution_update(
                    particles, plan, dU, params, new_fields,
                    dynamic=(cfg.regime == Regime.DYNAMIC),
                )
                history.commit(new_fields)
                break
            except StepTooLarge as exc:
                cuts += 1
                if cuts > MAX_STEP_CUTS:
                    result.status = "failed"
                    result.failure = f"step {step}: {exc} after {MAX_STEP_CUTS} cuts"
                    if raise_on_failure:
                        raise SolverFailure(result.failure) from exc
                    return result
                dt *= 0.5

        report.cut_events = cuts
        convect_and_update_domains(particles, plan, dU, grid, step=step)

        t += dt
        step += 1
        result.records.append(StepRecord(step=step, t=t, dt=dt, report=report))
        for name, point in scene.probes.items():
            p = sample_pressure(particles, point, radius=2.0 * grid.h)
            excess = None if p is None else p - scene.steady_pressure(point)
            result.probes[name].append((t, excess))
        if observer is not None:
            observer(result.records[-1], particles, history)
        if dt < cfg.dt and cuts == 0:
            # recover toward the nominal step after earlier cuts
            dt = min(2.0 * dt, cfg.dt)
        else:
            dt *= cfg.dt_growth
    return result
