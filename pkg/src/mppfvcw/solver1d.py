"""One-dimensional semi-discretisation and SSP-RK3 time stepping."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .core import CellField, Grid1D, ProblemSpec, SchemeConfig, StageError
from .fluxes import lax_friedrichs
from .limiter import check_average, mpp_limit_1d
from .reconstruct import reconstruct_faces

log = logging.getLogger(__name__)


@dataclass
class StepStats:
    """Running statistics of an advance loop."""

    steps: int = 0
    t: float = 0.0
    min: float = np.inf
    max: float = -np.inf
    limited_cells: int = 0
    warnings: list = field(default_factory=list)

    def observe(self, values):
        self.min = min(self.min, float(np.min(values)))
        self.max = max(self.max, float(np.max(values)))

    def warn(self, msg):
        if msg not in self.warnings:
            log.warning(msg)
            self.warnings.append(msg)


def ssprk3(u, dt, rhs, t=0.0, check=None):
    """Shu-Osher SSP-RK3; ``rhs(u, t)`` is called once per stage."""
    def stage(k, v):
        if not np.all(np.isfinite(v)):
            raise StageError(f"non-finite values after RK stage {k}")
        if check is not None:
            check(v)
        return v

    u1 = stage(1, u + dt * rhs(u, t))
    u2 = stage(2, 0.75 * u + 0.25 * (u1 + dt * rhs(u1, t + dt)))
    return stage(3, u / 3.0 + 2.0 / 3.0 * (u2 + dt * rhs(u2, t + 0.5 * dt)))


def effective_cfl(config: SchemeConfig, bound: float, stats: StepStats | None = None) -> float:
    """User CFL, clamped to ``bound`` when the limiter is on.

    Without an explicit value both limited and unlimited runs use ``bound``.
    """
    if config.cfl is None:
        return bound
    if config.limiter and config.cfl > bound:
        if stats is not None:
            stats.warn(f"cfl {config.cfl} exceeds the MPP bound {bound:.6g}; clamped")
        return bound
    return config.cfl


def _ghosts(u, problem: ProblemSpec):
    """Two ghost cells per side: prescribed inflow on the left, extrapolation on the right."""
    left_val = problem.inflow if problem.inflow is not None else u[..., :1]
    left = np.broadcast_to(left_val, u.shape[:-1] + (2,)).astype(float)
    right = np.repeat(u[..., -1:], 2, axis=-1)
    return left, right


def wave_speed(u, problem: ProblemSpec, flux=None) -> float:
    flux = problem.f if flux is None else flux
    lo = min(float(np.min(u)), problem.m)
    hi = max(float(np.max(u)), problem.M)
    return flux.wave_speed_bound(lo, hi)


def spatial_residual_1d(u, grid: Grid1D, problem: ProblemSpec, config: SchemeConfig,
                        stats: StepStats | None = None, alpha=None):
    """-(h_{j+1/2} - h_{j-1/2}) / dx with reconstructed and (optionally) limited traces."""
    u = np.asarray(u, dtype=float)
    periodic = problem.boundary == "periodic"
    ghosts = None if periodic else _ghosts(u, problem)
    um, up = reconstruct_faces(u, config, periodic, ghosts)
    if config.limiter:
        theta, up, um = mpp_limit_1d(u, up, um, problem.m, problem.M, config.mpp_cfl)
        if stats is not None:
            stats.limited_cells += int(np.count_nonzero(theta < 1.0))
    if alpha is None:
        alpha = wave_speed(u, problem)
    f = problem.f
    if periodic:
        flux = lax_friedrichs(um, np.roll(up, -1), f, alpha)   # face j+1/2
        return -(flux - np.roll(flux, 1)) / grid.dx
    left, right = ghosts
    um_ext = np.concatenate([left[..., -1:], um])
    up_ext = np.concatenate([up, right[..., :1]])
    flux = lax_friedrichs(um_ext, up_ext, f, alpha)             # faces 0..N
    return -(flux[1:] - flux[:-1]) / grid.dx


def compute_dt_1d(u, grid: Grid1D, problem: ProblemSpec, config: SchemeConfig,
                  t_remaining=np.inf, stats=None) -> float:
    alpha = wave_speed(u, problem)
    if alpha == 0.0:
        return float(t_remaining)
    cfl = effective_cfl(config, config.mpp_cfl, stats)
    dt = cfl * grid.dx / alpha
    if config.dt_policy == "accuracy":
        dt = min(dt, cfl * grid.dx ** (5.0 / 3.0) / alpha)
    return float(min(dt, t_remaining))


def _bounds_check(problem, config):
    if not config.limiter:
        return None
    return lambda v: check_average(v, problem.m, problem.M)


def ssprk3_step(field: CellField, dt, problem: ProblemSpec, config: SchemeConfig,
                stats: StepStats | None = None, t=0.0) -> CellField:
    grid = field.grid

    def rhs(v, _t):
        return spatial_residual_1d(v, grid, problem, config, stats)

    return CellField(ssprk3(field.values, dt, rhs, t, _bounds_check(problem, config)), grid)


def run_steps(field, t_final, dt_fn, step_fn, callback=None):
    """Generic advance loop; the final step is clipped to land on ``t_final``."""
    stats = StepStats()
    stats.observe(field.values)
    t = 0.0
    while t < t_final:
        dt = dt_fn(field, t, t_final - t, stats)
        last = t + dt >= t_final or t_final - (t + dt) < 1e-14 * max(1.0, t_final)
        if last:
            dt = t_final - t
        field = step_fn(field, dt, t, stats)
        t = t_final if last else t + dt
        stats.steps += 1
        stats.observe(field.values)
        if callback is not None:
            callback(t, field)
    stats.t = t
    return field, stats


def advance(field: CellField, problem: ProblemSpec, config: SchemeConfig, t_final=None,
            callback=None):
    """Step to ``t_final`` (default: the problem's); returns (field, StepStats)."""
    t_final = problem.t_final if t_final is None else t_final
    return run_steps(
        field, t_final,
        lambda f, t, rem, st: compute_dt_1d(f.values, f.grid, problem, config, rem, st),
        lambda f, dt, t, st: ssprk3_step(f, dt, problem, config, st, t),
        callback)
