"""Grids, cell-average fields, quadrature tables and problem/config types."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np


class InitializationError(ValueError):
    """Raised when the initial condition cannot be averaged onto the grid."""


class SingularSystemError(ArithmeticError):
    """Raised when a tridiagonal elimination meets a zero pivot."""


class BoundViolationError(RuntimeError):
    """A cell average left [m, M]; usually means the CFL bound was broken."""


class StageError(FloatingPointError):
    """Non-finite values produced inside a Runge-Kutta stage."""


# ---------------------------------------------------------------- grids

@dataclass(frozen=True)
class Grid1D:
    a: float
    b: float
    n_cells: int

    def __post_init__(self):
        if self.n_cells <= 0:
            raise ValueError(f"n_cells must be positive, got {self.n_cells}")
        if not self.b > self.a:
            raise ValueError(f"empty domain [{self.a}, {self.b}]")

    @property
    def dx(self) -> float:
        return (self.b - self.a) / self.n_cells

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def faces(self) -> np.ndarray:
        return self.a + np.arange(self.n_cells + 1) * self.dx

    @property
    def centers(self) -> np.ndarray:
        return self.a + (np.arange(self.n_cells) + 0.5) * self.dx

    @property
    def shape(self):
        return (self.n_cells,)

    @property
    def cell_volume(self) -> float:
        return self.dx


@dataclass(frozen=True)
class Grid2D:
    x: Grid1D
    y: Grid1D

    @classmethod
    def square(cls, a, b, n, c=None, d=None, ny=None):
        c = a if c is None else c
        d = b if d is None else d
        return cls(Grid1D(a, b, n), Grid1D(c, d, n if ny is None else ny))

    @property
    def dx(self) -> float:
        return self.x.dx

    @property
    def dy(self) -> float:
        return self.y.dx

    @property
    def shape(self):
        return (self.x.n_cells, self.y.n_cells)

    @property
    def cell_volume(self) -> float:
        return self.dx * self.dy

    def meshgrid(self):
        """Cell-center coordinates, indexed [i, j] with i along x."""
        return np.meshgrid(self.x.centers, self.y.centers, indexing="ij")


@dataclass
class CellField:
    """Cell averages on a 1D or 2D grid; 2D arrays are indexed [i, j]."""

    values: np.ndarray
    grid: object

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != tuple(self.grid.shape):
            raise ValueError(
                f"field shape {self.values.shape} does not match grid {self.grid.shape}")

    def copy(self) -> "CellField":
        return CellField(self.values.copy(), self.grid)

    def total(self) -> float:
        return float(self.values.sum() * self.grid.cell_volume)

    def min(self) -> float:
        return float(self.values.min())

    def max(self) -> float:
        return float(self.values.max())


# ----------------------------------------------------------- quadrature

@dataclass(frozen=True)
class QuadratureTable:
    """Rule on the reference cell [-1/2, 1/2]; weights sum to one."""

    points: np.ndarray
    weights: np.ndarray
    kind: str
    degree: int

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def first_weight(self) -> float:
        return float(self.weights[0])


def gauss_table(n_points: int) -> QuadratureTable:
    if not 1 <= n_points <= 6:
        raise ValueError(f"Gauss rule with {n_points} points is not supported (1..6)")
    x, w = np.polynomial.legendre.leggauss(n_points)
    return QuadratureTable(0.5 * x, 0.5 * w, "gauss", 2 * n_points - 1)


def gauss_lobatto_table(n_points: int) -> QuadratureTable:
    """Gauss-Lobatto rule: endpoints plus the roots of P'_{G-1}."""
    if not 2 <= n_points <= 6:
        raise ValueError(f"Gauss-Lobatto rule with {n_points} points is not supported (2..6)")
    n = n_points - 1
    legendre = np.polynomial.legendre.Legendre.basis(n)
    interior = np.sort(legendre.deriv().roots().real) if n > 1 else np.empty(0)
    x = np.concatenate(([-1.0], interior, [1.0]))
    w = 2.0 / (n * (n + 1) * legendre(x) ** 2)
    return QuadratureTable(0.5 * x, 0.5 * w, "gauss-lobatto", 2 * n_points - 3)


# ---------------------------------------------------- scheme / problem

SCHEMES = ("fvcw", "fvc", "weno-js", "weno-z")


@dataclass(frozen=True)
class SchemeConfig:
    scheme: str = "fvcw"
    limiter: bool = True
    cfl: Optional[float] = None       # None -> largest value the MPP bound allows
    epsilon: float = 1e-13
    power_p: int = 2
    gauss_points: int = 3
    lobatto_points: int = 4
    dt_policy: str = "cfl"            # "cfl": dt ~ dx, "accuracy": dt ~ dx^(5/3)
    fvcw_weights: str = "z"           # nonlinear weight family inside FVCW: "z" or "js"

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.power_p < 1:
            raise ValueError("power_p must be >= 1")
        if self.cfl is not None and not self.cfl > 0:
            raise ValueError("cfl must be positive")
        if self.dt_policy not in ("cfl", "accuracy"):
            raise ValueError(f"unknown dt policy {self.dt_policy!r}")
        if self.fvcw_weights not in ("z", "js"):
            raise ValueError(f"unknown weight family {self.fvcw_weights!r}")

    def with_(self, **changes) -> "SchemeConfig":
        return replace(self, **changes)

    @property
    def gauss(self) -> QuadratureTable:
        return gauss_table(self.gauss_points)

    @property
    def lobatto(self) -> QuadratureTable:
        return gauss_lobatto_table(self.lobatto_points)

    @property
    def mpp_cfl(self) -> float:
        """Largest CFL number for which the limited scheme is MPP (omega_hat_1)."""
        return self.lobatto.first_weight

    @property
    def mpp_cfl_incompressible(self) -> float:
        """Half the smallest Gauss-Lobatto weight, the vorticity-transport bound."""
        return 0.5 * float(self.lobatto.weights.min())


@dataclass(frozen=True)
class ProblemSpec:
    """Scalar conservation law u_t + f(u)_x [+ g(u)_y] = 0 with data.

    ``f`` and ``g`` are :class:`mppfvcw.fluxes.FluxFn` instances; ``g`` is None
    in 1D.  ``exact(t, x[, y])`` returns point values of the exact solution.
    """

    name: str
    f: object
    u0: Callable
    m: float
    M: float
    t_final: float
    g: object = None
    boundary: str = "periodic"
    inflow: Optional[float] = None
    exact: Optional[Callable] = None
    domain: tuple = (0.0, 1.0)

    def __post_init__(self):
        if self.m > self.M:
            raise ValueError(f"bounds inverted: m={self.m} > M={self.M}")
        if self.boundary not in ("periodic", "inflow-outflow"):
            raise ValueError(f"unknown boundary type {self.boundary!r}")

    @property
    def dim(self) -> int:
        return 1 if self.g is None else 2


# ------------------------------------------------------ initialization

def _cell_average(func, grid, n_points):
    xi, w = np.polynomial.legendre.leggauss(n_points)
    xi, w = 0.5 * xi, 0.5 * w
    if isinstance(grid, Grid1D):
        xs = grid.centers[:, None] + xi[None, :] * grid.dx
        vals = np.asarray(func(xs), dtype=float) * np.ones_like(xs)
        return vals, vals @ w
    X, Y = grid.meshgrid()
    xs = X[..., None, None] + xi[:, None] * grid.dx
    ys = Y[..., None, None] + xi[None, :] * grid.dy
    vals = np.asarray(func(xs, ys), dtype=float) * np.ones(np.broadcast(xs, ys).shape)
    return vals, np.einsum("ijab,a,b->ij", vals, w, w)


def cell_average(func, grid, n_points: int = 5) -> np.ndarray:
    """Average a vectorised point function over every cell by tensor Gauss quadrature."""
    samples, avg = _cell_average(func, grid, n_points)
    bad = ~np.isfinite(avg)
    if bad.any():
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise InitializationError(f"non-finite initial data in cell {idx}")
    return avg


def cell_average_initial(problem: ProblemSpec, grid, n_points: int = 5) -> CellField:
    return CellField(cell_average(problem.u0, grid, n_points), grid)
