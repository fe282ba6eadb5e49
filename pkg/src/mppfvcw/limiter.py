"""Maximum-principle-satisfying polynomial rescaling limiter.

The limiter never builds the reconstruction polynomial.  It only needs the
boundary traces and the interior value p(x*) that closes the Gauss-Lobatto
decomposition of the cell average; all traces are then scaled toward the
average by one factor theta per cell.
"""
from __future__ import annotations

import numpy as np

from .core import BoundViolationError

TINY = 1e-300
BOUND_TOL = 1e-12
OVERSHOOT_TOL = 1e-15


def p_star_1d(ubar, u_left_plus, u_right_minus, w1):
    return (ubar - w1 * u_left_plus - w1 * u_right_minus) / (1.0 - 2.0 * w1)


def convex_factors(a1, a2, dx, dy):
    """mu1, mu2 proportional to lambda1*a1 and lambda2*a2 (dt cancels)."""
    s1, s2 = a1 / dx, a2 / dy
    if s1 + s2 == 0.0:
        raise ValueError("degenerate transport: both wave speeds vanish")
    return s1 / (s1 + s2), s2 / (s1 + s2)


def p_star_2d(ubar, x_right, x_left, y_top, y_bottom, gauss_weights, w1, mu1, mu2):
    """Interior value of the 2D decomposition.

    Trace arrays carry the Gauss points on their first axis.
    """
    gw = np.asarray(gauss_weights).reshape((-1,) + (1,) * (np.ndim(x_right) - 1))
    edge = np.sum(gw * (mu1 * (x_right + x_left) + mu2 * (y_top + y_bottom)), axis=0)
    return (ubar - w1 * edge) / (1.0 - 2.0 * w1)


def check_average(ubar, m, M):
    bad = (ubar < m - BOUND_TOL) | (ubar > M + BOUND_TOL)
    if np.any(bad):
        idx = tuple(int(i) for i in np.argwhere(np.atleast_1d(bad))[0])
        val = float(np.atleast_1d(ubar)[idx])
        raise BoundViolationError(
            f"cell average {val!r} at {idx} outside [{m}, {M}]; CFL bound violated upstream?")


def theta_factor(ubar, vmax, vmin, m, M):
    """min((M-u)/(Mj-u), (m-u)/(mj-u), 1), clipped at 0.

    A side only enters when it actually overshoots (beyond 1e-15); otherwise
    its ratio is >= 1 anyway and skipping it avoids dividing by ~0.  The
    signed ratio matters: an average sitting a roundoff outside [m, M] gets
    theta = 0 instead of a reflected trace that doubles the excursion.
    """
    dmax = vmax - ubar
    dmin = vmin - ubar
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        r_hi = np.where((vmax > M + OVERSHOOT_TOL) & (dmax > TINY), (M - ubar) / dmax, 1.0)
        r_lo = np.where((vmin < m - OVERSHOOT_TOL) & (dmin < -TINY), (m - ubar) / dmin, 1.0)
    return np.clip(np.minimum(r_hi, r_lo), 0.0, 1.0)


def mpp_limit_1d(ubar, u_left_plus, u_right_minus, m, M, w1, check=True):
    """Return (theta, limited left-face trace, limited right-face trace)."""
    ubar = np.asarray(ubar, dtype=float)
    if check:
        check_average(ubar, m, M)
    ps = p_star_1d(ubar, u_left_plus, u_right_minus, w1)
    vmax = np.maximum(np.maximum(ps, u_left_plus), u_right_minus)
    vmin = np.minimum(np.minimum(ps, u_left_plus), u_right_minus)
    theta = theta_factor(ubar, vmax, vmin, m, M)
    return (theta,
            theta * (u_left_plus - ubar) + ubar,
            theta * (u_right_minus - ubar) + ubar)


def mpp_limit_2d(ubar, x_right, x_left, y_top, y_bottom, gauss_weights, w1, mu1, mu2,
                 m, M, check=True):
    """Limit the 4L edge traces of each cell; returns theta and the four arrays."""
    ubar = np.asarray(ubar, dtype=float)
    if check:
        check_average(ubar, m, M)
    ps = p_star_2d(ubar, x_right, x_left, y_top, y_bottom, gauss_weights, w1, mu1, mu2)
    traces = (x_right, x_left, y_top, y_bottom)
    vmax = np.maximum(ps, np.max([t.max(axis=0) for t in traces], axis=0))
    vmin = np.minimum(ps, np.min([t.min(axis=0) for t in traces], axis=0))
    theta = theta_factor(ubar, vmax, vmin, m, M)
    return (theta,) + tuple(theta * (t - ubar) + ubar for t in traces)
