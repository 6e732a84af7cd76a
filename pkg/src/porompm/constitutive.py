"""Pointwise constitutive laws for the saturated two-phase mixture.

Stress sign convention: tension-positive tensors, pore pressure positive in
compression, total stress sigma = sigma'_inv + sigma'_vis - p*I.

Darcy sign: the flux is q = -kappa*[grad p - rho_f (g - a)], the classical
(diffusive) sign. With the mass balance div v + div q = 0 the opposite sign
is anti-diffusive and fails the consolidation benchmark.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidStateError, PorosityRangeError, SingularKinematicsError
from .tensors import I2, det2, first_failing, hencky_strain


@dataclass
class MaterialParams:
    """Mixture parameters, SI units (Pa, m, s, kg).

    lam/G are the Lame parameters of the solid skeleton; alpha_vis the Kelvin
    damping time; k0/phi0 the reference permeability/porosity pair of the
    Kozeny-Carman law; kozeny_carman=False freezes k at k0.
    """

    lam: float
    G: float
    alpha_vis: float = 0.0
    k0: float = 1e-14
    phi0: float = 0.5
    mu_f: float = 1e-3
    rho_s: float = 2500.0
    rho_f: float = 1000.0
    gravity: np.ndarray = field(default_factory=lambda: np.zeros(2))
    kozeny_carman: bool = False
    # submerged/excess-pressure form: body force uses the buoyant density
    # (rho - rho_f), the pressure unknown is the excess over the ambient
    # hydrostatic field, and the fluid self-weight drops out of the Darcy
    # drive (exactly equivalent for hydrostatic ambient water)
    buoyant: bool = False

    def __post_init__(self):
        self.gravity = np.asarray(self.gravity, dtype=float)
        if self.G <= 0.0:
            raise InvalidStateError("shear modulus G must be positive")
        if self.lam + 2.0 * self.G / 3.0 <= 0.0:
            raise InvalidStateError("bulk modulus K = lam + 2G/3 must be positive")
        if not 0.0 < self.phi0 < 1.0:
            raise InvalidStateError("initial porosity must lie in (0, 1)")
        # k0 = 0 is admitted deliberately: it is the exact undrained limit.
        if self.k0 < 0.0 or self.mu_f <= 0.0:
            raise InvalidStateError("permeability must be >= 0 and viscosity > 0")
        if self.rho_s <= 0.0 or self.rho_f <= 0.0:
            raise InvalidStateError("phase densities must be positive")
        if self.alpha_vis < 0.0:
            raise InvalidStateError("damping parameter must be non-negative")

    @classmethod
    def from_bulk_poisson(cls, K, nu, **kw):
        """Build from (K, nu) instead of (lam, G)."""
        G = 3.0 * K * (1.0 - 2.0 * nu) / (2.0 * (1.0 + nu))
        lam = K - 2.0 * G / 3.0
        return cls(lam=lam, G=G, **kw)

    @classmethod
    def from_young_poisson(cls, E, nu, **kw):
        G = E / (2.0 * (1.0 + nu))
        lam = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
        return cls(lam=lam, G=G, **kw)

    @property
    def mobility0(self):
        """Reference mobility kappa_0 = k0/mu_f."""
        return self.k0 / self.mu_f

    @property
    def constrained_modulus(self):
        return self.lam + 2.0 * self.G


@dataclass
class StressState:
    """Decomposed stress at a point; sigma_total holds by construction."""

    sigma_eff_inv: np.ndarray
    sigma_eff_vis: np.ndarray
    p: float

    @property
    def sigma_total(self):
        return self.sigma_eff_inv + self.sigma_eff_vis - self.p * I2


def hencky_stress(F, params, particle_label=None):
    """Effective Cauchy stress of Hencky hyperelasticity.

    eps = 0.5 ln(F F^T); Kirchhoff tau = lam*tr(eps)*I + 2G*eps; returns
    tau/J. Accepts (..., 2, 2) batches.
    """
    F = np.asarray(F, dtype=float)
    J = det2(F)
    bad = first_failing(J <= 0.0, particle_label)
    if bad is not None:
        raise SingularKinematicsError(
            f"hencky_stress: det F <= 0 at particle {bad}", particle=bad
        )
    b = np.einsum("...ik,...jk->...ij", F, F)
    eps = hencky_strain(b, particle_label=particle_label)
    tau = kirchhoff_from_strain(eps, params)
    return tau / J[..., None, None]


def kirchhoff_from_strain(eps, params):
    """tau = lam tr(eps) I + 2 G eps (plane strain: in-plane trace only)."""
    tr = eps[..., 0, 0] + eps[..., 1, 1]
    return params.lam * tr[..., None, None] * I2 + 2.0 * params.G * eps


def viscous_stress(sym_grad_v, params):
    """Kelvin-type damping stress alpha_vis * c : sym(grad v), with c the
    constant isotropic small-strain tangent (lam, G pairing): the standard
    Kelvin-Voigt choice; a deformation-dependent tangent would also fit the
    rate form but is not used here."""
    return params.alpha_vis * kirchhoff_from_strain(np.asarray(sym_grad_v, float), params)


def kozeny_carman(phi, params):
    """Porosity-dependent intrinsic permeability; k(phi0) = k0 exactly."""
    phi = np.asarray(phi, dtype=float)
    if np.any(phi <= 0.0) or np.any(phi >= 1.0):
        raise PorosityRangeError(
            f"porosity left (0, 1): min {phi.min():.3e}, max {phi.max():.3e}"
        )
    if not params.kozeny_carman:
        return np.broadcast_to(np.asarray(params.k0, float), phi.shape).copy() if phi.ndim else float(params.k0)
    c0 = (1.0 - params.phi0) ** 2 / params.phi0**3
    return params.k0 * c0 * phi**3 / (1.0 - phi) ** 2


def kozeny_carman_dk_dphi(phi, params):
    """d k / d phi, zero when the law is frozen at k0."""
    phi = np.asarray(phi, dtype=float)
    if not params.kozeny_carman:
        return np.zeros_like(phi)
    c0 = (1.0 - params.phi0) ** 2 / params.phi0**3
    return params.k0 * c0 * phi**2 * (3.0 - phi) / (1.0 - phi) ** 3


def update_porosity(J, params):
    """phi = 1 - (1 - phi0)/J from solid mass conservation, incompressible grains."""
    J = np.asarray(J, dtype=float)
    if np.any(J <= 0.0):
        raise InvalidStateError("update_porosity requires J > 0")
    phi = 1.0 - (1.0 - params.phi0) / J
    if np.any(phi <= 0.0) or np.any(phi >= 1.0):
        raise PorosityRangeError(
            f"porosity left (0, 1) after volume change: min {phi.min():.3e}"
        )
    return phi


def mixture_density(phi, params):
    """rho = (1 - phi) rho_s + phi rho_f."""
    phi = np.asarray(phi, dtype=float)
    return (1.0 - phi) * params.rho_s + phi * params.rho_f


def darcy_flux(grad_p, a, params, phi):
    """q = -kappa(phi) [grad p - rho_f (g - a)], kappa = k/mu_f.

    grad_p and a may be batched (..., 2); phi scalar or (...,).
    """
    grad_p = np.asarray(grad_p, dtype=float)
    a = np.asarray(a, dtype=float)
    kappa = kozeny_carman(phi, params) / params.mu_f
    drive = grad_p - params.rho_f * (params.gravity - a)
    return -np.asarray(kappa)[..., None] * drive
