"""Newton loop and the two linear-solve paths (sparse direct and
fixed-stress block-preconditioned BiCGStab)."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import apply_pressure_dirichlet, assemble, expand_solution
from .errors import SolverFailure, StepTooLarge

NEWTON_RTOL = 1e-8
NEWTON_ATOL = 1e-14
MAX_NEWTON_ITER = 25
KRYLOV_MAXITER = 200


@dataclass
class SolveReport:
    step: int = 0
    residuals: list = field(default_factory=list)   # ||R^k|| per iteration
    krylov_iters: list = field(default_factory=list)
    converged: bool = False
    cut_events: int = 0
    condition_estimate: float = None

    @property
    def ratios(self):
        if not self.residuals or self.residuals[0] == 0.0:
            return []
        return [r / self.residuals[0] for r in self.residuals]

    @property
    def iterations(self):
        return max(len(self.residuals) - 1, 0)


def linear_solve_direct(system):
    """Monolithic sparse LU of the assembled block matrix.

    The matrix is symmetrically Jacobi-equilibrated first: the displacement
    and pressure blocks differ by many orders of magnitude in scale, and an
    unequilibrated factorization loses the small block to backward error.
    """
    K = system.matrix().tocsr()
    R = system.residual()
    d = np.abs(K.diagonal())
    d[d <= 0.0] = 1.0
    scale = 1.0 / np.sqrt(d)
    Ks = sp.diags(scale) @ K @ sp.diags(scale)
    try:
        lu = spla.splu(Ks.tocsc())
    except RuntimeError as exc:
        zero_rows = np.nonzero(np.abs(K).sum(axis=1).A.ravel() == 0.0)[0]
        detail = f" (zero rows at free dofs {zero_rows[:5]})" if zero_rows.size else ""
        raise SolverFailure(f"singular linear system: {exc}{detail}") from exc
    x = scale * lu.solve(-(scale * R))
    if not np.all(np.isfinite(x)):
        raise SolverFailure("direct solve produced non-finite increments")
    return x[: system.n_u], x[system.n_u:], 0


def condition_estimate(system):
    """Dense 1-norm condition number of the assembled matrix (small systems)."""
    K = system.matrix().toarray()
    try:
        return float(np.linalg.cond(K, 1))
    except np.linalg.LinAlgError:
        return np.inf


class FixedStressPreconditioner:
    """Right preconditioner applying S_tilde^{-1} then A^{-1} sequentially.

    S_tilde approximates the true Schur complement C+ - B2 A^{-1} B1. In
    this residual convention A is the negative stiffness (R = F_ext -
    F_int), so the correction enters with a plus sign: -B2 A^{-1} B1 ~
    +rate_v B1^T (-A)^{-1} B1. Quasi-statically the classical fixed-stress
    constant works well: S_tilde = C+ + (rate_v/K_dr) M_p with K_dr =
    lam + G (2D drained bulk) and M_p the pressure mass matrix. In the
    dynamic regime A is dominated by the Newmark mass term and no single
    modulus fits all modes, so the Schur correction is evaluated with the
    diagonal of -A instead: S_tilde = C+ + rate_v B1^T diag(-A)^{-1} B1.
    """

    def __init__(self, system, rate_v, kdr, mass_p, dynamic=False):
        self.n_u = system.n_u
        if dynamic:
            d = -system.A.diagonal()
            floor = np.abs(system.A.diagonal()).mean()
            d[d <= 0.0] = floor if floor > 0.0 else 1.0
            correction = rate_v * (system.B1.T @ sp.diags(1.0 / d) @ system.B1)
        else:
            correction = (rate_v / kdr) * mass_p
        S_tilde = (system.C + system.C_stab) + correction
        self.A_lu = spla.splu(system.A.tocsc())
        self.S_lu = spla.splu(S_tilde.tocsc())
        self.B1 = system.B1

    def apply(self, r):
        rp = r[self.n_u:]
        dp = self.S_lu.solve(rp)
        du = self.A_lu.solve(r[: self.n_u] - self.B1 @ dp)
        return np.concatenate([du, dp])


def pressure_mass_matrix(ctx):
    """Free-dof pressure mass matrix sum_mp w S_i S_j (preconditioner metric)."""
    plan = ctx.plan
    w = ctx.V_n
    blk = np.einsum("p,pi,pj->pij", w, plan.S, plan.S)
    rank = np.maximum(ctx.dofmap.node_rank[plan.nodes], 0)
    rows = np.broadcast_to(rank[:, :, None], blk.shape)
    cols = np.broadcast_to(rank[:, None, :], blk.shape)
    n = ctx.dofmap.n_p
    M = sp.coo_matrix((blk.ravel(), (rows.ravel(), cols.ravel())), shape=(n, n)).tocsr()
    return M[np.ix_(ctx.free_p, ctx.free_p)]


def linear_solve_fixed_stress(system, rate_v, kdr, mass_p, dynamic=False,
                              rtol=1e-10):
    """BiCGStab on the monolithic system with the fixed-stress preconditioner.

    The mass-balance rows are equilibrated against the momentum rows first
    (the two blocks carry different physical units, and an unbalanced
    residual norm would leave the pressure block unresolved); row scaling
    does not change the solution. Falls back to the direct path with a
    warning when Krylov stagnates.
    """
    try:
        M = FixedStressPreconditioner(system, rate_v, kdr, mass_p, dynamic=dynamic)
    except RuntimeError:
        warnings.warn("fixed-stress sub-factorization failed; using direct solve")
        return linear_solve_direct(system)

    diag_u = np.abs(system.A.diagonal()).mean() if system.n_u else 1.0
    S_tilde_diag = np.abs((system.C + system.C_stab).diagonal()).mean()
    s_p = diag_u / S_tilde_diag if S_tilde_diag > 0.0 else 1.0

    K = sp.bmat(
        [[system.A, system.B1],
         [s_p * system.B2, s_p * (system.C + system.C_stab)]], format="csr"
    )
    R = np.concatenate([system.R_mom, s_p * (system.R_mass + system.R_stab)])

    def precond(r):
        # the Schur solve sees scaled rows; the unscaled preconditioner
        # absorbs s_p by rescaling the pressure residual back
        rr = np.asarray(r, dtype=float).copy()
        rr[system.n_u:] /= s_p
        return M.apply(rr)

    op = spla.LinearOperator(K.shape, matvec=precond)
    count = [0]

    def cb(_):
        count[0] += 1

    x, info = spla.bicgstab(
        K, -R, rtol=rtol, atol=0.0, maxiter=KRYLOV_MAXITER, M=op, callback=cb
    )
    if info != 0 or not np.all(np.isfinite(x)):
        warnings.warn(
            f"BiCGStab stagnated (info={info}) after {count[0]} iterations; "
            "falling back to direct solve"
        )
        du, dp, _ = linear_solve_direct(system)
        return du, dp, count[0]
    return x[: system.n_u], x[system.n_u:], count[0]


def solve_system(system, ctx, method="direct"):
    """Dispatch a linear solve of the assembled block system."""
    if method == "fixed_stress":
        rate_v, _, _ = ctx.cfg.rate_factors(ctx.dt)
        kdr = ctx.params.lam + ctx.params.G
        return linear_solve_fixed_stress(
            system, rate_v, kdr, pressure_mass_matrix(ctx), dynamic=ctx.dynamic
        )
    return linear_solve_direct(system)


def newton_solve(ctx, t, step=0, linear_solver="direct", dU0=None, P0=None,
                 max_iter=MAX_NEWTON_ITER, rtol=NEWTON_RTOL):
    """Fully-implicit Newton solve of one step.

    Returns (dU, P, report) with full-grid nodal arrays. Raises StepTooLarge
    on non-convergence so the driver can cut the step.
    """
    dU = np.zeros((ctx.grid.n_nodes, 2)) if dU0 is None else dU0.copy()
    P = ctx.p_n.copy() if P0 is None else P0.copy()
    apply_pressure_dirichlet(ctx, P, t)

    report = SolveReport(step=step)
    norm0 = None
    prev = None
    for k in range(max_iter + 1):
        system = assemble(ctx, dU, P, t, jacobian=True)
        norm = float(np.linalg.norm(system.residual()))
        report.residuals.append(norm)
        if norm0 is None:
            norm0 = norm
        gross = max(system.gross_scale, 1e-300)
        # Converged when the relative criterion holds, or at the absolute
        # floor (1e-14 of the gross assembly magnitude: the residual is a
        # near-cancelling sum, so this is its roundoff level), or when the
        # iteration stagnates within a few hundred ulps of that floor, which
        # happens on near-equilibrium steps where ||R0|| is itself tiny.
        at_floor = norm <= NEWTON_ATOL * gross
        stagnated = (
            prev is not None and norm >= 0.25 * prev and norm <= 1e-10 * gross
        )
        if norm <= rtol * norm0 or at_floor or stagnated:
            report.converged = True
            return dU, P, report
        prev = norm
        if k == max_iter:
            break
        du_f, dp_f, kit = solve_system(system, ctx, method=linear_solver)
        report.krylov_iters.append(kit)
        ddU, ddP = expand_solution(ctx, np.concatenate([du_f, dp_f]))
        # a displacement increment beyond the grid extent is numerical junk
        # (near-singular system); treat it as a too-large step
        span = float(np.max(ctx.grid.extent - ctx.grid.origin))
        if np.abs(ddU).max() > 10.0 * span:
            raise StepTooLarge(
                f"linear solve produced a {np.abs(ddU).max():.2e} m increment "
                f"on a {span:.2e} m grid"
            )
        dU = dU + ddU
        P = P + ddP
    raise StepTooLarge(
        f"Newton did not reach {rtol:.1e} in {max_iter} iterations "
        f"(last ratio {report.residuals[-1] / max(norm0, 1e-300):.3e})"
    )
