"""Incompressible Euler in vorticity-streamfunction form on a periodic box.

The vorticity is transported conservatively with the 2D compact machinery.
Velocities come from a streamfunction, either solved spectrally from the
current vorticity or given analytically.  In both cases the Gauss-point edge
velocities are shifted so that their quadrature reproduces the exact edge
flux (a difference of corner streamfunction values); the discrete divergence
of every cell then vanishes to roundoff, which the maximum principle of the
transport step relies on.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .core import CellField, Grid2D, SchemeConfig
from .limiter import check_average
from .solver1d import StepStats, effective_cfl, run_steps, ssprk3
from .solver2d import dt_from_speeds, edge_traces, flux_divergence, limit_traces

MEAN_TOL = 1e-8


# ------------------------------------------------------------ spectral

@dataclass
class SpectralField:
    """Real-FFT coefficients of a periodic field sampled at cell centres."""

    coeffs: np.ndarray
    grid: Grid2D
    kx: np.ndarray
    ky: np.ndarray

    @classmethod
    def from_values(cls, values, grid: Grid2D):
        kx, ky = wavenumbers(grid)
        coeffs = np.fft.rfft2(values)
        return cls(_drop_nyquist(coeffs, grid), grid, kx, ky)

    def evaluate(self, shift_x=0.0, shift_y=0.0, deriv=(0, 0)):
        """Values of the (differentiated) series at centres shifted by (shift_x, shift_y)."""
        c = self.coeffs
        if deriv[0]:
            c = c * (1j * self.kx[:, None]) ** deriv[0]
        if deriv[1]:
            c = c * (1j * self.ky[None, :]) ** deriv[1]
        if shift_x:
            c = c * np.exp(1j * self.kx * shift_x)[:, None]
        if shift_y:
            c = c * np.exp(1j * self.ky * shift_y)[None, :]
        return np.fft.irfft2(c, s=self.grid.shape)

    def values(self):
        return self.evaluate()


def wavenumbers(grid: Grid2D):
    nx, ny = grid.shape
    kx = 2 * np.pi * np.fft.fftfreq(nx, d=grid.dx)
    ky = 2 * np.pi * np.fft.rfftfreq(ny, d=grid.dy)
    return kx, ky


def _drop_nyquist(coeffs, grid):
    nx, ny = grid.shape
    coeffs = coeffs.copy()
    if nx % 2 == 0:
        coeffs[nx // 2, :] = 0.0
    if ny % 2 == 0:
        coeffs[:, -1] = 0.0
    return coeffs


def poisson_solve_spectral(omega: CellField, deconvolve=True, stats: StepStats | None = None):
    """Streamfunction with Laplacian(psi) = omega and zero mean.

    With ``deconvolve`` the cell averages are turned into centre point values
    first by dividing every mode by its cell-averaging symbol.
    """
    grid = omega.grid
    w = SpectralField.from_values(omega.values, grid)
    mean = w.coeffs[0, 0].real / omega.values.size
    if abs(mean) > MEAN_TOL and stats is not None:
        stats.warn(f"vorticity mean {mean:.3e} removed before the Poisson solve")
    kx, ky = w.kx[:, None], w.ky[None, :]
    c = w.coeffs.copy()
    if deconvolve:
        c = c / (np.sinc(kx * grid.dx / (2 * np.pi)) * np.sinc(ky * grid.dy / (2 * np.pi)))
    k2 = kx**2 + ky**2
    k2[0, 0] = 1.0
    psi = -c / k2
    psi[0, 0] = 0.0
    return SpectralField(psi, grid, w.kx, w.ky)


# ------------------------------------------------------------ velocity

class VelocityTraces(NamedTuple):
    """Edge-normal velocities: ``u`` on right edges, ``v`` on top edges.

    Gauss-point arrays are (L, Nx, Ny); ``u_edge``/``v_edge`` are exact edge
    averages from corner streamfunction values.
    """

    u: np.ndarray
    v: np.ndarray
    u_edge: np.ndarray
    v_edge: np.ndarray


def edge_averages_from_corners(psi_corner, dx, dy):
    """Edge-average normal velocities from psi at upper-right corners (x_{i+1/2}, y_{j+1/2})."""
    u_edge = -(psi_corner - np.roll(psi_corner, 1, axis=1)) / dy
    v_edge = (psi_corner - np.roll(psi_corner, 1, axis=0)) / dx
    return u_edge, v_edge


def velocity_at_edges(psi: SpectralField, quadrature) -> VelocityTraces:
    """(u, v) = (-psi_y, psi_x) at the Gauss points of right and top edges."""
    g = psi.grid
    hx, hy = 0.5 * g.dx, 0.5 * g.dy
    u = np.stack([-psi.evaluate(hx, xi * g.dy, deriv=(0, 1)) for xi in quadrature.points])
    v = np.stack([psi.evaluate(xi * g.dx, hy, deriv=(1, 0)) for xi in quadrature.points])
    u_edge, v_edge = edge_averages_from_corners(psi.evaluate(hx, hy), g.dx, g.dy)
    return VelocityTraces(u, v, u_edge, v_edge)


def make_divergence_free(vel: VelocityTraces, weights) -> VelocityTraces:
    """Shift Gauss values so each edge's quadrature equals its exact average."""
    w = np.asarray(weights)[:, None, None]
    du = vel.u_edge - np.sum(w * vel.u, axis=0)
    dv = vel.v_edge - np.sum(w * vel.v, axis=0)
    return vel._replace(u=vel.u + du, v=vel.v + dv)


def discrete_divergence(vel: VelocityTraces, weights, dx, dy):
    w = np.asarray(weights)[:, None, None]
    us = np.sum(w * vel.u, axis=0)
    vs = np.sum(w * vel.v, axis=0)
    return (us - np.roll(us, 1, axis=0)) / dx + (vs - np.roll(vs, 1, axis=1)) / dy


@dataclass(frozen=True)
class AnalyticStream:
    """Prescribed divergence-free flow given by psi(x, y, t), u(x, y, t), v(x, y, t)."""

    psi: Callable
    u: Callable
    v: Callable

    def traces(self, grid: Grid2D, quadrature, t) -> VelocityTraces:
        xf, yf = grid.x.faces, grid.y.faces
        xc, yc = grid.x.centers, grid.y.centers
        pts = quadrature.points
        u = np.stack([self.u(xf[1:, None], (yc + xi * grid.dy)[None, :], t) * np.ones(grid.shape)
                      for xi in pts])
        v = np.stack([self.v((xc + xi * grid.dx)[:, None], yf[None, 1:], t) * np.ones(grid.shape)
                      for xi in pts])
        # all (N+1)^2 corners, so no wrap-around is needed for a psi that is
        # only periodic up to a constant
        c = self.psi(xf[:, None], yf[None, :], t) * np.ones((xf.size, yf.size))
        u_edge = -(c[1:, 1:] - c[1:, :-1]) / grid.dy
        v_edge = (c[1:, 1:] - c[:-1, 1:]) / grid.dx
        return VelocityTraces(u, v, u_edge, v_edge)


def hflux(w_minus, w_plus, vel, alpha):
    """Upwind-biased Lax-Friedrichs flux for the transported vorticity."""
    return 0.5 * (vel * (w_minus + w_plus) - alpha * (w_plus - w_minus))


# -------------------------------------------------------------- problem

@dataclass(frozen=True)
class VorticityProblem:
    name: str
    omega0: Callable
    m: float
    M: float
    t_final: float
    domain: tuple = (0.0, 2 * np.pi)
    exact: Optional[Callable] = None
    stream: Optional[AnalyticStream] = None    # None: solve for psi spectrally

    @property
    def u0(self):
        return self.omega0

    @property
    def dim(self) -> int:
        return 2


def edge_velocity(omega, grid: Grid2D, problem: VorticityProblem, config: SchemeConfig, t=0.0,
                  stats: StepStats | None = None) -> VelocityTraces:
    quad = config.gauss
    if problem.stream is None:
        psi = poisson_solve_spectral(CellField(omega, grid), stats=stats)
        vel = velocity_at_edges(psi, quad)
    else:
        vel = problem.stream.traces(grid, quad, t)
    return make_divergence_free(vel, quad.weights)


def vorticity_residual(omega, grid: Grid2D, problem: VorticityProblem, config: SchemeConfig,
                       t=0.0, stats: StepStats | None = None, vel: VelocityTraces | None = None):
    omega = np.asarray(omega, dtype=float)
    if vel is None:
        vel = edge_velocity(omega, grid, problem, config, t, stats)
    a1 = float(np.max(np.abs(vel.u)))
    a2 = float(np.max(np.abs(vel.v)))
    tr = edge_traces(omega, config)
    if config.limiter:
        tr = limit_traces(omega, tr, config, a1, a2, grid.dx, grid.dy, problem.m, problem.M, stats)
    F = hflux(tr.xr, np.roll(tr.xl, -1, axis=1), vel.u, a1)
    G = hflux(tr.yt, np.roll(tr.yb, -1, axis=2), vel.v, a2)
    return flux_divergence(F, G, config.gauss.weights, grid.dx, grid.dy)


def compute_dt_vorticity(omega, grid, problem, config, t=0.0, t_remaining=np.inf, stats=None):
    vel = edge_velocity(omega, grid, problem, config, t)
    a1 = float(np.max(np.abs(vel.u)))
    a2 = float(np.max(np.abs(vel.v)))
    cfl = effective_cfl(config, config.mpp_cfl_incompressible, stats)
    return dt_from_speeds(a1, a2, grid.dx, grid.dy, cfl, config.dt_policy, t_remaining)


def ssprk3_step_vorticity(field: CellField, dt, problem: VorticityProblem, config: SchemeConfig,
                          stats: StepStats | None = None, t=0.0) -> CellField:
    grid = field.grid
    check = (lambda v: check_average(v, problem.m, problem.M)) if config.limiter else None
    rhs = lambda w, tt: vorticity_residual(w, grid, problem, config, tt, stats)  # noqa: E731
    return CellField(ssprk3(field.values, dt, rhs, t, check), grid)


def advance_vorticity(field: CellField, problem: VorticityProblem, config: SchemeConfig,
                      t_final=None, callback=None):
    t_final = problem.t_final if t_final is None else t_final
    return run_steps(
        field, t_final,
        lambda f, t, rem, st: compute_dt_vorticity(f.values, f.grid, problem, config, t, rem, st),
        lambda f, dt, t, st: ssprk3_step_vorticity(f, dt, problem, config, st, t),
        callback)
