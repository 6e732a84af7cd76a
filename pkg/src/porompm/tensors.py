"""Dense 2x2 tensor algebra and finite-strain kinematics.

All operations act on arrays with shape (..., 2, 2) so particle batches are
handled in one call. Plane-strain convention: the out-of-plane stretch is 1,
so ln(b) carries a zero out-of-plane Hencky strain and the in-plane trace is
the full volumetric trace entering lambda*tr(eps) terms.
"""

from __future__ import annotations

import numpy as np

from .errors import ElementInversionError, InvalidStateError, SingularKinematicsError

# Relative gap below which two eigenvalues are treated as repeated when
# evaluating divided differences of matrix functions.
_EIG_TOL = 1e-12

I2 = np.eye(2)


def det2(t):
    """Determinant of (..., 2, 2) arrays without LAPACK overhead."""
    return t[..., 0, 0] * t[..., 1, 1] - t[..., 0, 1] * t[..., 1, 0]


def inv2(t):
    """Inverse of (..., 2, 2) arrays via the adjugate formula."""
    d = det2(t)
    out = np.empty_like(t)
    out[..., 0, 0] = t[..., 1, 1]
    out[..., 0, 1] = -t[..., 0, 1]
    out[..., 1, 0] = -t[..., 1, 0]
    out[..., 1, 1] = t[..., 0, 0]
    return out / d[..., None, None]


def check_symmetric(t, rtol=1e-12):
    scale = np.abs(t).max(axis=(-1, -2))
    skew = np.abs(t - np.swapaxes(t, -1, -2)).max(axis=(-1, -2))
    return np.all(skew <= rtol * np.maximum(scale, 1.0))


def sym_eig_2x2(t):
    """Eigendecomposition of symmetric (..., 2, 2) arrays, closed form.

    Returns (w, n) with eigenvalues w[..., 0] >= w[..., 1] and unit
    eigenvectors in the columns of n.
    """
    a = t[..., 0, 0]
    c = t[..., 1, 1]
    b = 0.5 * (t[..., 0, 1] + t[..., 1, 0])
    mean = 0.5 * (a + c)
    half_diff = 0.5 * (a - c)
    radius = np.hypot(half_diff, b)
    w1 = mean + radius
    w2 = mean - radius

    # Eigenvector for w1: pick the better-conditioned formula of the two
    # candidate null-space vectors of (t - w1 I).
    v1a = np.stack([b, w1 - a], axis=-1)
    v1b = np.stack([w1 - c, b], axis=-1)
    use_b = np.abs(half_diff + radius) >= np.abs(radius - half_diff)
    v1 = np.where(use_b[..., None], v1b, v1a)
    norm = np.linalg.norm(v1, axis=-1)
    degenerate = norm <= _EIG_TOL * np.maximum(np.abs(w1), 1.0)
    v1 = np.where(degenerate[..., None], np.broadcast_to([1.0, 0.0], v1.shape), v1)
    v1 = v1 / np.linalg.norm(v1, axis=-1)[..., None]
    v2 = np.stack([-v1[..., 1], v1[..., 0]], axis=-1)

    w = np.stack([w1, w2], axis=-1)
    n = np.stack([v1, v2], axis=-1)
    return w, n


def first_failing(mask, labels=None):
    """Index (or label) of the first True entry of a violation mask."""
    flat = np.atleast_1d(mask).ravel()
    if not flat.any():
        return None
    idx = int(np.argmax(flat))
    return labels[idx] if labels is not None else idx


def _spd_apply(b, fn, name, particle_label=None):
    w, n = sym_eig_2x2(b)
    bad = first_failing(w[..., 1] <= 0.0, particle_label)
    if bad is not None:
        raise SingularKinematicsError(
            f"{name}: non-SPD tensor (eigenvalue <= 0) at particle {bad}",
            particle=bad,
        )
    fw = fn(w)
    return np.einsum("...ab,...b,...cb->...ac", n, fw, n)


def spd_log(b, particle_label=None):
    """Half log of an SPD tensor: the Hencky strain 0.5*ln(b) for b = F F^T."""
    if not check_symmetric(b):
        raise SingularKinematicsError("spd_log: input is not symmetric")
    return _spd_apply(b, lambda w: 0.5 * np.log(w), "spd_log", particle_label)


def spd_sqrt(b):
    """Square root of an SPD tensor (right stretch U for b = F^T F)."""
    return _spd_apply(b, np.sqrt, "spd_sqrt")


# Below this Frobenius norm of b - I the log is evaluated by series: the
# spectral path loses ~eps/gap accuracy to eigenvector cancellation near
# repeated eigenvalues, which puts an E*eps noise floor under the stress.
_SERIES_TOL = 1e-4


def hencky_strain(b, particle_label=None):
    """0.5*ln(b), series-evaluated near the identity for full precision."""
    b = np.asarray(b, dtype=float)
    E = b - I2
    small = np.abs(E).max(axis=(-1, -2)) < _SERIES_TOL
    if np.all(small):
        return _half_log_series(E)
    out = spd_log(b, particle_label=particle_label)
    if np.any(small):
        out = np.where(small[..., None, None], _half_log_series(E), out)
    return out


def _half_log_series(E):
    # 0.5*(E - E^2/2 + E^3/3 - E^4/4): truncation ~ |E|^5/5 < 2e-21
    E2 = np.einsum("...ij,...jk->...ik", E, E)
    E3 = np.einsum("...ij,...jk->...ik", E2, E)
    E4 = np.einsum("...ij,...jk->...ik", E2, E2)
    return 0.5 * (E - 0.5 * E2 + E3 / 3.0 - 0.25 * E4)


def half_log_derivative(b):
    """Derivative L of eps(b) = 0.5*ln(b) with respect to b.

    Returns the rank-four array L with L[..., a, b, c, d] such that
    d(eps)_ab = L_abcd d(b)_cd, built from the Daleckii-Krein divided
    differences f[w_i, w_j] of f(w) = 0.5*ln(w). Carries minor symmetries.
    """
    w, n = sym_eig_2x2(b)
    if np.any(w[..., 1] <= 0.0):
        raise SingularKinematicsError("half_log_derivative: non-SPD input")
    w1, w2 = w[..., 0], w[..., 1]
    f1, f2 = 0.5 * np.log(w1), 0.5 * np.log(w2)
    d1 = 0.5 / w1
    d2 = 0.5 / w2
    gap = w1 - w2
    sep = gap > _EIG_TOL * np.maximum(w1, 1.0)
    # Secant slope for well-separated pairs, analytic limit otherwise.
    cross = np.where(sep, (f1 - f2) / np.where(sep, gap, 1.0), 0.5 * (d1 + d2))

    fdiv = np.empty(w.shape[:-1] + (2, 2))
    fdiv[..., 0, 0] = d1
    fdiv[..., 1, 1] = d2
    fdiv[..., 0, 1] = cross
    fdiv[..., 1, 0] = cross

    # L_abcd = sum_ij fdiv_ij * sym(n_i x n_j)_ab * sym(n_i x n_j)_cd expanded
    # with minor symmetrization on (cd).
    outer = np.einsum("...ai,...bj->...ijab", n, n)
    L = 0.5 * (
        np.einsum("...ij,...ijab,...ijcd->...abcd", fdiv, outer, outer)
        + np.einsum("...ij,...ijab,...ijdc->...abcd", fdiv, outer, outer)
    )
    return L


def relative_deformation_gradient(grad_n_du, particle_label=None):
    """dF = I + grad_n(u - u_n); errors when the increment inverts elements."""
    dF = grad_n_du + I2
    bad = first_failing(det2(dF) <= 0.0, particle_label)
    if bad is not None:
        raise ElementInversionError(
            f"relative deformation gradient has det <= 0 at particle {bad}; "
            "the step is too large",
            particle=bad,
        )
    return dF


def pull_back_gradient(grad_n, dF):
    """Map gradients taken in the previous configuration to the current one.

    grad_n has shape (..., 2) (row gradients); returns grad_n . dF^{-1}.
    """
    dJ = det2(dF)
    if np.any(np.abs(dJ) <= 0.0):
        raise ElementInversionError("pull_back_gradient: singular dF")
    return np.einsum("...k,...kl->...l", grad_n, inv2(dF))


def update_volume(v_n, dJ):
    """Particle volume update V = dJ * V_n."""
    v_n = np.asarray(v_n, dtype=float)
    dJ = np.asarray(dJ, dtype=float)
    if np.any(v_n <= 0.0) or np.any(dJ <= 0.0):
        raise InvalidStateError("update_volume requires V_n > 0 and dJ > 0")
    return dJ * v_n


def right_stretch_diagonal(F):
    """Diagonal entries of U in the polar decomposition F = R U.

    Used for the stretch-only GIMP domain update: pure rotations leave the
    influence half-widths unchanged.
    """
    C = np.einsum("...ki,...kj->...ij", F, F)
    U = spd_sqrt(C)
    return np.stack([U[..., 0, 0], U[..., 1, 1]], axis=-1)
