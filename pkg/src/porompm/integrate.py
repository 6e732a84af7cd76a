"""Time integration: Newmark recurrences for the dynamic regime, implicit
Euler for the quasi-static one, and the two stabilization parameters."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigurationError


class Regime(Enum):
    DYNAMIC = "dynamic"
    QUASI_STATIC = "quasi_static"


@dataclass
class IntegratorConfig:
    regime: Regime = Regime.DYNAMIC
    beta: float = 0.3025
    gamma: float = 0.6
    dt: float = 1.0
    dt_growth: float = 1.0

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ConfigurationError("time step must be positive")
        if self.dt_growth < 1.0:
            raise ConfigurationError("dt growth factor must be >= 1")
        if self.regime == Regime.DYNAMIC and not (
            2.0 * self.beta >= self.gamma >= 0.5
        ):
            raise ConfigurationError(
                "Newmark parameters must satisfy 2*beta >= gamma >= 0.5 for "
                "unconditional stability"
            )

    @property
    def dynamic(self):
        return self.regime == Regime.DYNAMIC

    def rate_factors(self, dt=None):
        """(velocity, acceleration, pressure-rate) linearization factors:
        d v/d u, d a/d u and d pdot/d p for the active integrator."""
        dt = self.dt if dt is None else dt
        if self.dynamic:
            return (
                self.gamma / (self.beta * dt),
                1.0 / (self.beta * dt**2),
                self.gamma / (self.beta * dt),
            )
        return 1.0 / dt, 0.0, 1.0 / dt


def newmark_rates(u, u_n, v_n, a_n, cfg, dt=None):
    """Newmark velocity and acceleration at t_{n+1} from the displacement."""
    dt = cfg.dt if dt is None else dt
    if dt <= 0.0:
        raise ConfigurationError("time step must be positive")
    b, g = cfg.beta, cfg.gamma
    du = np.asarray(u) - np.asarray(u_n)
    v = g / (b * dt) * du + (1.0 - g / b) * np.asarray(v_n) + (1.0 - g / (2.0 * b)) * dt * np.asarray(a_n)
    a = du / (b * dt**2) - np.asarray(v_n) / (b * dt) + (1.0 - 1.0 / (2.0 * b)) * np.asarray(a_n)
    return v, a


def newmark_pressure_rates(p, p_n, pdot_n, pddot_n, cfg, dt=None):
    """Same recurrences applied to the scalar pore pressure."""
    return newmark_rates(p, p_n, pdot_n, pddot_n, cfg, dt=dt)


def implicit_euler_rate(u, u_n, dt):
    if dt <= 0.0:
        raise ConfigurationError("time step must be positive")
    return (np.asarray(u) - np.asarray(u_n)) / dt


def history_rate_offsets(v_n, a_n, cfg, dt=None):
    """The affine parts v*, a* with v = rate_v*du + v*, a = rate_a*du + a*."""
    dt = cfg.dt if dt is None else dt
    if cfg.dynamic:
        b, g = cfg.beta, cfg.gamma
        v_star = (1.0 - g / b) * np.asarray(v_n) + (1.0 - g / (2.0 * b)) * dt * np.asarray(a_n)
        a_star = -np.asarray(v_n) / (b * dt) + (1.0 - 1.0 / (2.0 * b)) * np.asarray(a_n)
        return v_star, a_star
    return np.zeros_like(np.asarray(v_n)), np.zeros_like(np.asarray(a_n))


def stabilization_tau(regime, params, h, dt, cfg, kappa=None):
    """Stabilization parameter (1/Pa).

    Quasi-static: 1/(2G). Dynamic: max(2*kappa/c_v - (beta/gamma)*12*kappa*
    dt/h^2, 0) with c_v = kappa*(lam + 2G) the consolidation coefficient, so
    the leading term is 2/(lam + 2G). kappa defaults to the reference
    mobility; pass cell-averaged values when permeability evolves.
    """
    if regime == Regime.QUASI_STATIC:
        return 1.0 / (2.0 * params.G)
    kappa = params.mobility0 if kappa is None else np.asarray(kappa, dtype=float)
    m_c = params.constrained_modulus
    tau = 2.0 / m_c - (cfg.beta / cfg.gamma) * 12.0 * kappa * dt / h**2
    return np.maximum(tau, 0.0)
