"""Interface reconstruction from cell averages.

All routines work on the last axis of their input so that a batch of grid
lines (rows of a 2D field) is reconstructed in one call.  Periodic lines use
``np.roll``; bounded lines carry two ghost cells per side supplied by the
caller.

Notation for a cell ``j``: ``um[j]`` is the trace at its right face seen from
inside the cell (u^-_{j+1/2}), ``up[j]`` the trace at its left face
(u^+_{j-1/2}).
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg

from .core import SchemeConfig, SingularSystemError

# compact substencil weights and classical WENO5 point weights at x_{j+1/2}
C_COMPACT = (0.2, 0.5, 0.3)
D_WENO5 = (0.1, 0.6, 0.3)


class SmoothnessTriple(NamedTuple):
    beta0: np.ndarray
    beta1: np.ndarray
    beta2: np.ndarray
    tau5: np.ndarray


class NonlinearWeights(NamedTuple):
    w0: np.ndarray
    w1: np.ndarray
    w2: np.ndarray


def smoothness_indicators(stencil) -> SmoothnessTriple:
    """Jiang-Shu indicators of the three 3-cell substencils.

    ``stencil`` has the five averages u_{j-2}..u_{j+2} on its first axis.
    """
    a, b, c, d, e = (np.asarray(s, dtype=float) for s in stencil)
    beta0 = 13.0 / 12.0 * (a - 2 * b + c) ** 2 + 0.25 * (a - 4 * b + 3 * c) ** 2
    beta1 = 13.0 / 12.0 * (b - 2 * c + d) ** 2 + 0.25 * (b - d) ** 2
    beta2 = 13.0 / 12.0 * (c - 2 * d + e) ** 2 + 0.25 * (3 * c - 4 * d + e) ** 2
    return SmoothnessTriple(beta0, beta1, beta2, np.abs(beta2 - beta0))


def weight_factors(s: SmoothnessTriple, mode="z", epsilon=1e-13, p=2):
    """Per-substencil multipliers r_k with alpha_k = c_k r_k.

    They depend on the smoothness only, so one set serves every choice of
    linear weights on the same stencil.
    """
    if mode == "z":
        tau = s.tau5
        return tuple(1.0 + (tau / ((b + epsilon) / (b + tau + epsilon) + epsilon)) ** p
                     for b in s[:3])
    if mode == "js":
        return tuple(1.0 / (b + epsilon) ** p for b in s[:3])
    if mode == "linear":
        one = np.ones_like(s.beta0)
        return one, one, one
    raise ValueError(f"unknown weight mode {mode!r}")


def blend_weights(factors, linear) -> NonlinearWeights:
    alphas = [c * r for c, r in zip(linear, factors)]
    total = alphas[0] + alphas[1] + alphas[2]
    return NonlinearWeights(*(a / total for a in alphas))


def wenoz_weights(s: SmoothnessTriple, epsilon=1e-13, p=2, linear=C_COMPACT) -> NonlinearWeights:
    """Z-type weights; epsilon enters both the rescaled indicator and alpha."""
    return blend_weights(weight_factors(s, "z", epsilon, p), linear)


def wenojs_weights(s: SmoothnessTriple, epsilon=1e-13, p=2, linear=D_WENO5) -> NonlinearWeights:
    return blend_weights(weight_factors(s, "js", epsilon, p), linear)


def _weights(s, mode, epsilon, p, linear):
    return blend_weights(weight_factors(s, mode, epsilon, p), linear)


def weno5_left(stencil, mode="js", epsilon=1e-13, p=2) -> np.ndarray:
    """Fifth-order WENO value at the right face of the central cell."""
    a, b, c, d, e = (np.asarray(s, dtype=float) for s in stencil)
    q0 = (2 * a - 7 * b + 11 * c) / 6.0
    q1 = (-b + 5 * c + 2 * d) / 6.0
    q2 = (2 * c + 5 * d - e) / 6.0
    w = _weights(smoothness_indicators((a, b, c, d, e)), mode, epsilon, p, D_WENO5)
    return w.w0 * q0 + w.w1 * q1 + w.w2 * q2


def weno5_right(stencil, mode="js", epsilon=1e-13, p=2) -> np.ndarray:
    """Value at the left face of the central cell: mirror of :func:`weno5_left`."""
    return weno5_left(tuple(stencil)[::-1], mode, epsilon, p)


# ----------------------------------------------------- tridiagonal systems

class TridiagonalSystem(NamedTuple):
    """Rows ``sub*x[k-1] + main*x[k] + sup*x[k+1] = rhs`` along the last axis.

    With ``cyclic`` the first row's ``sub`` couples to the last unknown and
    the last row's ``sup`` to the first; otherwise those entries are ignored.
    """

    sub: np.ndarray
    main: np.ndarray
    sup: np.ndarray
    rhs: np.ndarray
    cyclic: bool

    def dense(self) -> np.ndarray:
        """Dense matrix of a single (1D) system; used by tests as an oracle."""
        n = self.main.shape[-1]
        A = np.diag(self.main) + np.diag(self.sub[1:], -1) + np.diag(self.sup[:-1], 1)
        if self.cyclic:
            A[0, -1] += self.sub[0]
            A[-1, 0] += self.sup[-1]
        return A if n > 1 else A.reshape(1, 1)


def _solve_banded_batch(sub, main, sup, rhs):
    """Solve independent tridiagonal systems stacked on the leading axes.

    ``rhs`` may carry one extra trailing axis of right-hand sides.  All
    systems are packed into one block-diagonal band so a single LAPACK call
    handles the whole batch.
    """
    n = main.shape[-1]
    lower = sub.copy()
    upper = sup.copy()
    lower[..., 0] = 0.0
    upper[..., -1] = 0.0
    ab = np.empty((3, main.size))
    ab[0, 1:] = upper.reshape(-1)[:-1]
    ab[0, 0] = 0.0
    ab[1] = main.reshape(-1)
    ab[2, :-1] = lower.reshape(-1)[1:]
    ab[2, -1] = 0.0
    extra = rhs.shape[main.ndim:]
    b = rhs.reshape((main.size,) + extra)
    try:
        x = scipy.linalg.solve_banded((1, 1), ab, b, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from exc
    return x.reshape(main.shape[:-1] + (n,) + extra)


def solve_tridiagonal(sys: TridiagonalSystem) -> np.ndarray:
    """Banded elimination; cyclic systems via a Sherman-Morrison correction."""
    sub, main, sup, rhs = (np.asarray(a, dtype=float) for a in sys[:4])
    if not sys.cyclic:
        return _solve_banded_batch(sub, main, sup, rhs)

    n = main.shape[-1]
    if n < 3:
        A = sys.dense()
        return np.linalg.solve(A, rhs)
    gamma = -main[..., 0]
    if np.any(gamma == 0.0):
        raise SingularSystemError("zero leading diagonal in cyclic system")
    main_mod = main.copy()
    main_mod[..., 0] -= gamma
    main_mod[..., -1] -= sub[..., 0] * sup[..., -1] / gamma
    corr = np.zeros_like(main)
    corr[..., 0] = gamma
    corr[..., -1] = sup[..., -1]
    yz = _solve_banded_batch(sub, main_mod, sup, np.stack([rhs, corr], axis=-1))
    y, z = yz[..., 0], yz[..., 1]
    v_last = sub[..., 0] / gamma
    vy = y[..., 0] + v_last * y[..., -1]
    vz = z[..., 0] + v_last * z[..., -1]
    denom = 1.0 + vz
    if np.any(denom == 0.0):
        raise SingularSystemError("Sherman-Morrison denominator vanished")
    return y - (vy / denom)[..., None] * z


# ------------------------------------------------------- compact WENO

def _stencil_periodic(u):
    return tuple(np.roll(u, s, axis=-1) for s in (2, 1, 0, -1, -2))


def _stencil_ghosted(ue, n):
    """Five shifted views of a line extended by two ghost cells per side."""
    return tuple(ue[..., k:k + n] for k in range(5))


def _compact_weights(stencil, epsilon, p, linear_only, family="z"):
    if linear_only:
        one = np.ones_like(stencil[2])
        return NonlinearWeights(*(c * one for c in C_COMPACT))
    return _weights(smoothness_indicators(stencil), family, epsilon, p, C_COMPACT)


def assemble_fvcw_system(u, periodic=True, epsilon=1e-13, p=2, linear_only=False,
                         ghosts=None, family="z") -> TridiagonalSystem:
    """Compact WENO relations for u^-_{j+1/2} along the last axis of ``u``.

    Row j reads
        (2w0+w1)/3 x_{j-1} + (w0+2(w1+w2))/3 x_j + w2/3 x_{j+1}
            = w0/6 u_{j-1} + (5(w0+w1)+w2)/6 u_j + (w1+5w2)/6 u_{j+1}.
    For bounded lines ``ghosts=(left, right)`` holds two ghost averages per
    side (shape (..., 2) each); the two rows nearest each boundary become
    identity rows carrying the WENO5 value.
    """
    u = np.asarray(u, dtype=float)
    n = u.shape[-1]
    if n < 5:
        raise ValueError(f"compact reconstruction needs at least 5 cells, got {n}")
    if periodic:
        st = _stencil_periodic(u)
    else:
        if ghosts is None:
            raise ValueError("bounded lines need ghost cells")
        ue = np.concatenate([ghosts[0], u, ghosts[1]], axis=-1)
        st = _stencil_ghosted(ue, n)
    w0, w1, w2 = _compact_weights(st, epsilon, p, linear_only, family)
    sub = (2 * w0 + w1) / 3.0
    main = (w0 + 2 * (w1 + w2)) / 3.0
    sup = w2 / 3.0
    rhs = w0 / 6.0 * st[1] + (5 * (w0 + w1) + w2) / 6.0 * st[2] + (w1 + 5 * w2) / 6.0 * st[3]
    if not periodic:
        closure = weno5_left(st, "linear" if linear_only else family, epsilon, p)
        for k in (0, 1, n - 2, n - 1):
            sub[..., k] = 0.0
            sup[..., k] = 0.0
            main[..., k] = 1.0
            rhs[..., k] = closure[..., k]
    return TridiagonalSystem(sub, main, sup, rhs, periodic)


class FaceTraces(NamedTuple):
    um: np.ndarray   # right-face value of each cell
    up: np.ndarray   # left-face value of each cell


def _minus_traces(u, config: SchemeConfig, periodic, ghosts):
    scheme = config.scheme
    if scheme in ("fvcw", "fvc"):
        sys = assemble_fvcw_system(u, periodic, config.epsilon, config.power_p,
                                   linear_only=(scheme == "fvc"), ghosts=ghosts,
                                   family=config.fvcw_weights)
        return solve_tridiagonal(sys)
    mode = "js" if scheme == "weno-js" else "z"
    if periodic:
        st = _stencil_periodic(u)
    else:
        st = _stencil_ghosted(np.concatenate([ghosts[0], u, ghosts[1]], axis=-1), u.shape[-1])
    return weno5_left(st, mode, config.epsilon, config.power_p)


def reconstruct_faces(u, config: SchemeConfig, periodic=True, ghosts=None) -> FaceTraces:
    """Both one-sided traces of every cell along the last axis.

    The left-face traces come from running the same right-face
    reconstruction on the reversed line.
    """
    u = np.asarray(u, dtype=float)
    um = _minus_traces(u, config, periodic, ghosts)
    rev_ghosts = None
    if ghosts is not None:
        rev_ghosts = (ghosts[1][..., ::-1], ghosts[0][..., ::-1])
    up = _minus_traces(u[..., ::-1], config, periodic, rev_ghosts)[..., ::-1]
    return FaceTraces(um, up)


# ------------------------------------------- point values inside a cell

def _average_matrix(offsets, degree):
    """Row o holds the averages of x^k over the unit cell centred at o."""
    offsets = np.asarray(offsets, dtype=float)
    k = np.arange(degree + 1)
    hi = (offsets[:, None] + 0.5) ** (k + 1)
    lo = (offsets[:, None] - 0.5) ** (k + 1)
    return (hi - lo) / (k + 1)


def point_coefficients(offsets, xi):
    """Weights mapping averages on ``offsets`` to the interpolant's value at ``xi``."""
    A = _average_matrix(offsets, len(offsets) - 1)
    e = float(xi) ** np.arange(len(offsets))
    return np.linalg.solve(A.T, e)


class PointWenoTable(NamedTuple):
    xi: float
    candidates: np.ndarray   # (3, 5) candidate coefficients embedded in the 5-cell stencil
    linear: np.ndarray       # (3,) linear weights, may contain negatives


def point_weno_table(xi: float) -> PointWenoTable:
    """Linear weights reproducing the quartic value at ``xi`` from the quadratics."""
    cand = np.zeros((3, 5))
    for k in range(3):
        cand[k, k:k + 3] = point_coefficients([k - 2, k - 1, k], xi)
    target = point_coefficients([-2, -1, 0, 1, 2], xi)
    d, *_ = np.linalg.lstsq(cand.T, target, rcond=None)
    if not np.allclose(cand.T @ d, target, atol=1e-13):
        raise ArithmeticError(f"no consistent linear weights at xi={xi}")
    return PointWenoTable(float(xi), cand, d)


def weno5_point(stencil, table: PointWenoTable, epsilon=1e-13, p=2, mode="js", factors=None):
    """WENO value at the abscissa of ``table`` from five averages.

    Negative linear weights are handled by splitting them into two positive
    groups (theta = 3) that are blended separately.  ``factors`` may carry
    precomputed ``weight_factors`` of the same stencil.
    """
    st = [np.asarray(s, dtype=float) for s in stencil]
    q = [sum(table.candidates[k, i] * st[i] for i in range(5) if table.candidates[k, i] != 0.0)
         for k in range(3)]
    d = table.linear
    if mode == "linear":
        return d[0] * q[0] + d[1] * q[1] + d[2] * q[2]
    if factors is None:
        factors = weight_factors(smoothness_indicators(st), mode, epsilon, p)
    if np.all(d >= 0):
        w = blend_weights(factors, d)
        return w.w0 * q[0] + w.w1 * q[1] + w.w2 * q[2]
    plus = 0.5 * (d + 3.0 * np.abs(d))
    minus = plus - d
    sp, sm = plus.sum(), minus.sum()
    wp = blend_weights(factors, plus / sp)
    wm = blend_weights(factors, minus / sm)
    rp = wp.w0 * q[0] + wp.w1 * q[1] + wp.w2 * q[2]
    rm = wm.w0 * q[0] + wm.w1 * q[1] + wm.w2 * q[2]
    return sp * rp - sm * rm


def gauss_point_values(avg, tables, axis=-1, epsilon=1e-13, p=2, mode="js"):
    """Point values at each table abscissa of every cell along a periodic axis.

    Returns an array with a new leading axis indexing the abscissae.
    """
    avg = np.moveaxis(np.asarray(avg, dtype=float), axis, -1)
    st = _stencil_periodic(avg)
    factors = None
    if mode != "linear":
        factors = weight_factors(smoothness_indicators(st), mode, epsilon, p)
    out = np.stack([weno5_point(st, t, epsilon, p, mode, factors) for t in tables])
    return np.moveaxis(out, -1, axis if axis < 0 else axis + 1)
