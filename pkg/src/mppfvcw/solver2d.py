"""Two-dimensional finite volume scheme on periodic rectangles.

Edge traces are built in two sweeps: the 1D reconstruction normal to an edge
family gives edge averages, then a WENO point evaluation along each edge
line gives the values at the L Gauss points.  Trace arrays are shaped
(L, Nx, Ny): ``xr``/``xl`` live on the right/left edges of cell (i, j),
``yt``/``yb`` on its top/bottom edges.
"""
from __future__ import annotations

from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .core import CellField, Grid2D, ProblemSpec, SchemeConfig, gauss_table
from .fluxes import lax_friedrichs
from .limiter import check_average, convex_factors, mpp_limit_2d
from .reconstruct import FaceTraces, gauss_point_values, point_weno_table, reconstruct_faces
from .solver1d import StepStats, effective_cfl, run_steps, ssprk3, wave_speed

GAUSS_POINT_WEIGHTS = "z"


class EdgeTraces2D(NamedTuple):
    xr: np.ndarray
    xl: np.ndarray
    yt: np.ndarray
    yb: np.ndarray


@lru_cache(maxsize=None)
def gauss_point_tables(n_points: int):
    return tuple(point_weno_table(xi) for xi in gauss_table(n_points).points)


def _require_periodic(problem):
    if problem is not None and problem.boundary != "periodic":
        raise NotImplementedError("the 2D solvers support periodic boundaries only")


def edge_averages(u, config: SchemeConfig, axis: int) -> FaceTraces:
    """Edge-averaged traces on the edges normal to ``axis`` (0: x, 1: y).

    ``um`` is the trace on the far edge of each cell (right or top), ``up``
    on the near edge (left or bottom).
    """
    u = np.asarray(u, dtype=float)
    if axis == 0:
        um, up = reconstruct_faces(u.T, config)
        return FaceTraces(um.T, up.T)
    return reconstruct_faces(u, config)


def quadrature_traces(edge_avg: FaceTraces, config: SchemeConfig, axis: int):
    """Gauss-point values along the edges normal to ``axis``.

    The edge averages vary along the other axis, which is the one the point
    reconstruction runs over.
    """
    tables = gauss_point_tables(config.gauss_points)
    along = 1 - axis
    return tuple(
        gauss_point_values(a, tables, axis=along, epsilon=config.epsilon, p=config.power_p,
                           mode=GAUSS_POINT_WEIGHTS)
        for a in edge_avg)


def edge_traces(u, config: SchemeConfig) -> EdgeTraces2D:
    xr, xl = quadrature_traces(edge_averages(u, config, 0), config, 0)
    yt, yb = quadrature_traces(edge_averages(u, config, 1), config, 1)
    return EdgeTraces2D(xr, xl, yt, yb)


def limit_traces(u, tr: EdgeTraces2D, config: SchemeConfig, a1, a2, dx, dy, m, M,
                 stats: StepStats | None = None) -> EdgeTraces2D:
    if a1 == 0.0 and a2 == 0.0:
        mu1 = mu2 = 0.5
    else:
        mu1, mu2 = convex_factors(a1, a2, dx, dy)
    theta, *limited = mpp_limit_2d(u, tr.xr, tr.xl, tr.yt, tr.yb, config.gauss.weights,
                                   config.mpp_cfl, mu1, mu2, m, M)
    if stats is not None:
        stats.limited_cells += int(np.count_nonzero(theta < 1.0))
    return EdgeTraces2D(*limited)


def flux_divergence(F, G, weights, dx, dy):
    """-(1/dx) sum_b w_b [F_{i+1/2} - F_{i-1/2}] - (1/dy) sum_b w_b [G_{j+1/2} - G_{j-1/2}].

    ``F``/``G`` hold the numerical flux on the right/top edge of each cell.
    """
    w = np.asarray(weights)[:, None, None]
    Fs = np.sum(w * F, axis=0)
    Gs = np.sum(w * G, axis=0)
    return -(Fs - np.roll(Fs, 1, axis=0)) / dx - (Gs - np.roll(Gs, 1, axis=1)) / dy


def wave_speeds_2d(u, problem: ProblemSpec):
    return wave_speed(u, problem, problem.f), wave_speed(u, problem, problem.g)


def spatial_residual_2d(u, grid: Grid2D, problem: ProblemSpec, config: SchemeConfig,
                        stats: StepStats | None = None):
    _require_periodic(problem)
    u = np.asarray(u, dtype=float)
    tr = edge_traces(u, config)
    a1, a2 = wave_speeds_2d(u, problem)
    if config.limiter:
        tr = limit_traces(u, tr, config, a1, a2, grid.dx, grid.dy, problem.m, problem.M, stats)
    F = lax_friedrichs(tr.xr, np.roll(tr.xl, -1, axis=1), problem.f, a1)
    G = lax_friedrichs(tr.yt, np.roll(tr.yb, -1, axis=2), problem.g, a2)
    return flux_divergence(F, G, config.gauss.weights, grid.dx, grid.dy)


def dt_from_speeds(a1, a2, dx, dy, cfl, policy="cfl", t_remaining=np.inf):
    """dt = cfl / (a1/dx + a2/dy); the accuracy policy uses dx^(5/3), dy^(5/3)."""
    rate = a1 / dx + a2 / dy
    if rate == 0.0:
        return float(t_remaining)
    dt = cfl / rate
    if policy == "accuracy":
        dt = min(dt, cfl / (a1 / dx ** (5.0 / 3.0) + a2 / dy ** (5.0 / 3.0)))
    return float(min(dt, t_remaining))


def compute_dt_2d(u, grid: Grid2D, problem: ProblemSpec, config: SchemeConfig,
                  t_remaining=np.inf, stats=None) -> float:
    a1, a2 = wave_speeds_2d(u, problem)
    cfl = effective_cfl(config, config.mpp_cfl, stats)
    return dt_from_speeds(a1, a2, grid.dx, grid.dy, cfl, config.dt_policy, t_remaining)


def ssprk3_step_2d(field: CellField, dt, problem: ProblemSpec, config: SchemeConfig,
                   stats: StepStats | None = None, t=0.0) -> CellField:
    grid = field.grid
    check = (lambda v: check_average(v, problem.m, problem.M)) if config.limiter else None
    rhs = lambda v, _t: spatial_residual_2d(v, grid, problem, config, stats)  # noqa: E731
    return CellField(ssprk3(field.values, dt, rhs, t, check), grid)


def advance_2d(field: CellField, problem: ProblemSpec, config: SchemeConfig, t_final=None,
               callback=None):
    _require_periodic(problem)
    t_final = problem.t_final if t_final is None else t_final
    return run_steps(
        field, t_final,
        lambda f, t, rem, st: compute_dt_2d(f.values, f.grid, problem, config, rem, st),
        lambda f, dt, t, st: ssprk3_step_2d(f, dt, problem, config, st, t),
        callback)
