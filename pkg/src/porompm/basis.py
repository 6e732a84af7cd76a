"""Basis function evaluation: linear hats, uGIMP weights, the constant
influence-domain basis S0, and the element-average projection Pi.

The uGIMP weight is the exact average of the grid hat function over the
particle's rectangular influence domain. Per axis, with node at the origin,
offset xi, half-width lp and cell size h (0 < lp <= h/2):

    |xi| <  lp        : 1 - (xi^2 + lp^2) / (2 h lp)
    lp <= |xi| < h-lp : 1 - |xi| / h
    h-lp <= |xi| < h+lp: (h + lp - |xi|)^2 / (4 h lp)
    else              : 0

Multi-dimensional weights are tensor products of the 1D values. Influence
domains protruding past the grid are clipped (the hat integral is taken over
the clipped interval only), which zeroes the weights of out-of-grid nodes.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .errors import MetricError, UnsupportedDomainError


class BasisKind(Enum):
    LINEAR = "linear"
    GIMP = "gimp"


def linear_weight_1d(xi, h):
    """Standard hat function value at offset xi from the node."""
    xi = np.asarray(xi, dtype=float)
    return np.maximum(0.0, 1.0 - np.abs(xi) / h)


def linear_gradient_1d(xi, h):
    xi = np.asarray(xi, dtype=float)
    inside = np.abs(xi) < h
    return np.where(inside, -np.sign(xi) / h, 0.0)


def _check_lp(l_p, h):
    if np.any(np.asarray(l_p) <= 0.0) or np.any(np.asarray(l_p) > 0.5 * h + 1e-15 * h):
        raise UnsupportedDomainError(
            "GIMP half-width must satisfy 0 < l_p <= h/2 for the 3-node stencil"
        )


def gimp_weight_1d(xi, l_p, h):
    """Closed-form uGIMP weight (piecewise quadratic, unclipped domain)."""
    _check_lp(l_p, h)
    xi = np.abs(np.asarray(xi, dtype=float))
    l_p = np.broadcast_to(np.asarray(l_p, dtype=float), xi.shape)
    inner = xi < l_p
    hat = (xi >= l_p) & (xi < h - l_p)
    tail = (xi >= np.abs(h - l_p)) & (xi < h + l_p)
    out = np.zeros_like(xi)
    out = np.where(inner, 1.0 - (xi**2 + l_p**2) / (2.0 * h * l_p), out)
    out = np.where(hat, 1.0 - xi / h, out)
    out = np.where(tail, (h + l_p - xi) ** 2 / (4.0 * h * l_p), out)
    return out


def gimp_gradient_1d(xi, l_p, h):
    """Derivative of gimp_weight_1d; continuous across region breakpoints."""
    _check_lp(l_p, h)
    xi = np.asarray(xi, dtype=float)
    l_p = np.broadcast_to(np.asarray(l_p, dtype=float), xi.shape)
    ax = np.abs(xi)
    sgn = np.sign(xi)
    inner = ax < l_p
    hat = (ax >= l_p) & (ax < h - l_p)
    tail = (ax >= np.abs(h - l_p)) & (ax < h + l_p)
    out = np.zeros_like(xi)
    out = np.where(inner, -xi / (h * l_p), out)
    out = np.where(hat, -sgn / h, out)
    out = np.where(tail, -sgn * (h + l_p - ax) / (2.0 * h * l_p), out)
    return out


def _hat_antiderivative(s, h):
    """Antiderivative of the hat N(t) = max(0, 1 - |t|/h), zero at t = -h."""
    s = np.clip(s, -h, h)
    return np.where(
        s <= 0.0,
        (s + h) + (s * s - h * h) / (2.0 * h),
        h / 2.0 + s - s * s / (2.0 * h),
    )


def gimp_weight_clipped_1d(xi, l_p, h, lo, hi):
    """uGIMP weight with the influence domain clipped to [lo, hi].

    lo/hi are offsets from the node (grid extent minus node coordinate).
    Equals gimp_weight_1d whenever [xi - lp, xi + lp] lies inside [lo, hi].
    """
    a = np.maximum(xi - l_p, lo)
    b = np.minimum(xi + l_p, hi)
    width = np.maximum(b - a, 0.0)
    val = (_hat_antiderivative(b, h) - _hat_antiderivative(a, h)) / (2.0 * l_p)
    return np.where(width > 0.0, val, 0.0)


def gimp_gradient_clipped_1d(xi, l_p, h, lo, hi):
    """Gradient counterpart: (N(b) - N(a)) / (2 lp) over the clipped domain."""
    a = np.maximum(xi - l_p, lo)
    b = np.minimum(xi + l_p, hi)
    width = np.maximum(b - a, 0.0)
    val = (linear_weight_1d(b, h) - linear_weight_1d(a, h)) / (2.0 * l_p)
    return np.where(width > 0.0, val, 0.0)


def constant_basis_1d(xi, l_p, h, lo=None, hi=None):
    """Per-axis constant-domain basis S0: half the fraction of the influence
    domain lying within the node's two adjacent cells [-h, h]."""
    lo_n = -h if lo is None else np.maximum(lo, -h)
    hi_n = h if hi is None else np.minimum(hi, h)
    a = np.maximum(xi - l_p, lo_n)
    b = np.minimum(xi + l_p, hi_n)
    return 0.5 * np.maximum(b - a, 0.0) / (2.0 * l_p)


def overlap_fraction_1d(xi_cell, l_p, h):
    """Fraction of [x - lp, x + lp] inside the cell [0, h]; xi_cell = x - cell_lo."""
    a = np.maximum(xi_cell - l_p, 0.0)
    b = np.minimum(xi_cell + l_p, h)
    return np.maximum(b - a, 0.0) / (2.0 * l_p)


def constant_basis(xp, l_p, cell_lo, h):
    """S0 contribution of a particle to one cell: the fraction of its
    influence domain inside that cell (tensor product of axis overlaps).

    xp, l_p: particle center and half-widths, shape (..., 2); cell_lo: the
    cell's lower corner. For a point particle (linear basis) use the
    containing cell with fraction 1.
    """
    xp = np.asarray(xp, dtype=float)
    fr = 1.0
    for ax in range(2):
        fr = fr * overlap_fraction_1d(xp[..., ax] - np.asarray(cell_lo)[..., ax],
                                      np.asarray(l_p)[..., ax], h)
    return fr


def element_average(values, weights):
    """Projection Pi: overlap-volume weighted average of particle values.

    values/weights are 1D arrays of the contributions landing in one cell.
    Raises MetricError when the cell has no contributing overlap.
    """
    weights = np.asarray(weights, dtype=float)
    total = weights.sum()
    if total <= 0.0:
        raise MetricError("element_average: cell has no particle overlap")
    return float(np.dot(np.asarray(values, dtype=float), weights) / total)
