"""Benchmark catalog, exact solutions, error norms and convergence tables."""
from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from .core import CellField, Grid1D, Grid2D, ProblemSpec, SchemeConfig, cell_average
from .fluxes import flux_catalog, lax_friedrichs
from .incompressible import AnalyticStream, VorticityProblem, advance_vorticity
from .solver1d import advance
from .solver2d import advance_2d

TWO_PI = 2.0 * np.pi
CSV_COLUMNS = ("N", "L1", "L1_order", "Linf", "Linf_order", "min", "max")


class NewtonFailure(ArithmeticError):
    """Characteristic equation did not converge (typically after shock formation)."""


# ---------------------------------------------------------------- exact

def exact_advection(u0, t, x, domain=(0.0, 1.0), speed=1.0):
    """u0 translated by speed*t on a periodic interval."""
    a, b = domain
    return u0(a + np.mod(np.asarray(x, dtype=float) - speed * t - a, b - a))


def exact_burgers(u0, t, x, du0=None, tol=1e-14, max_iter=100):
    """Solve u = u0(x - u t) pointwise by damped Newton.

    ``du0`` is the derivative of the data; a central difference is used when
    it is missing (it only steers the iteration, not the converged value).
    """
    x = np.asarray(x, dtype=float)
    if t == 0:
        return np.asarray(u0(x), dtype=float) * np.ones_like(x)
    if du0 is None:
        def du0(s, h=1e-6):
            return (u0(s + h) - u0(s - h)) / (2 * h)

    def resid(u):
        return u - u0(x - u * t)

    u = np.asarray(u0(x), dtype=float) * np.ones_like(x)
    r = resid(u)
    for _ in range(max_iter):
        if np.max(np.abs(r)) <= tol:
            return _check_unbroken(u, x, t, du0)
        step = r / (1.0 + t * du0(x - u * t))
        lam = np.ones_like(u)
        for _ in range(30):
            trial = u - lam * step
            rt = resid(trial)
            worse = np.abs(rt) > np.abs(r)
            if not worse.any():
                break
            lam = np.where(worse, 0.5 * lam, lam)
        u, r = trial, rt
    if np.max(np.abs(r)) <= tol:
        return _check_unbroken(u, x, t, du0)
    raise NewtonFailure(
        f"characteristics did not converge at t={t} (residual {np.max(np.abs(r)):.2e}); "
        "the solution has probably shocked, use reference_solution instead")


def _check_unbroken(u, x, t, du0, samples=20001):
    """Reject roots once characteristics have crossed anywhere between the feet.

    Past the breaking time u = u0(x - u t) has several roots near the shock
    and Newton may return a non-entropy branch, so the solution is refused.
    """
    feet = x - u * t
    s = np.linspace(np.min(feet), np.max(feet), samples)
    if np.min(1.0 + t * du0(s)) <= 0.0:
        raise NewtonFailure(f"characteristics have crossed by t={t}; "
                            "the solution has shocked, use reference_solution instead")
    return u


def reference_solution(problem: ProblemSpec, grid: Grid1D, t_final=None, n_ref=10000, cfl=0.5):
    """First-order Lax-Friedrichs solution on ``n_ref`` cells, projected onto ``grid``.

    Meant for plot overlays of non-smooth 1D cases, not for orders.
    """
    t_final = problem.t_final if t_final is None else t_final
    fine = Grid1D(grid.a, grid.b, n_ref)
    u = cell_average(problem.u0, fine)
    f = problem.f
    alpha = f.wave_speed_bound(problem.m, problem.M)
    periodic = problem.boundary == "periodic"
    t = 0.0
    while t < t_final and alpha > 0:
        dt = min(cfl * fine.dx / alpha, t_final - t)
        if periodic:
            h = lax_friedrichs(u, np.roll(u, -1), f, alpha)
            u = u - dt / fine.dx * (h - np.roll(h, 1))
        else:
            left = problem.inflow if problem.inflow is not None else u[0]
            ext = np.concatenate([[left], u, [u[-1]]])
            h = lax_friedrichs(ext[:-1], ext[1:], f, alpha)
            u = u - dt / fine.dx * (h[1:] - h[:-1])
        t += dt
    return CellField(project_averages(u, fine.faces, grid.faces), grid)


def project_averages(values, faces_from, faces_to):
    """Exact averages of a piecewise-constant function over new cells."""
    cum = np.concatenate([[0.0], np.cumsum(values * np.diff(faces_from))])
    integral = np.interp(faces_to, faces_from, cum)
    return np.diff(integral) / np.diff(faces_to)


def error_norms(numerical: CellField, exact_avg, normalized=False) -> tuple[float, float]:
    """(L1, Linf) with L1 = sum |e| dV.

    ``normalized`` divides L1 by the domain volume, i.e. reports the mean
    absolute error, which is the scale most published tables use.
    """
    e = np.abs(numerical.values - np.asarray(exact_avg))
    l1 = float(e.sum() * numerical.grid.cell_volume)
    if normalized:
        l1 /= numerical.grid.cell_volume * e.size
    return l1, float(e.max())


# -------------------------------------------------------------- catalog

@dataclass(frozen=True)
class CaseDefinition:
    case_id: str
    problem: object                 # ProblemSpec or VorticityProblem
    grids: tuple
    description: str
    dt_policy: str = "cfl"
    exact: Optional[Callable] = None    # exact(t, x[, y]) point values

    @property
    def short(self) -> str:
        return self.case_id.split("-")[0]

    @property
    def dim(self) -> int:
        return self.problem.dim

    @property
    def incompressible(self) -> bool:
        return isinstance(self.problem, VorticityProblem)

    def grid(self, nx, ny=None):
        a, b = self.problem.domain
        if self.dim == 1:
            return Grid1D(a, b, nx)
        return Grid2D.square(a, b, nx, ny=ny or nx)


def _sin4_shift(x):
    return 0.5 + np.sin(2 * np.pi * x) ** 4


def _jiang_shu(x):
    z, delta, alpha, a = -0.7, 0.0005, 10.0, 0.5
    beta = np.log(2.0) / (36.0 * delta**2)

    def G(x, z):
        return np.exp(-beta * (x - z) ** 2)

    def F(x, a):
        return np.sqrt(np.maximum(1.0 - alpha**2 * (x - a) ** 2, 0.0))

    x = np.asarray(x, dtype=float)
    return np.select(
        [(x > -0.8) & (x < -0.6), (x > -0.4) & (x < -0.2), (x > 0.0) & (x < 0.2),
         (x > 0.4) & (x < 0.6)],
        [(G(x, z - delta) + G(x, z + delta) + 4 * G(x, z)) / 6.0,
         1.0,
         1.0 - np.abs(10.0 * (x - 0.1)),
         (F(x, a - delta) + F(x, a + delta) + 4 * F(x, a)) / 6.0],
        0.0)


def _shu_osher_mix(x):
    # profile given in terms of s = x - 0.5 wrapped to [-1, 1)
    s = np.mod(np.asarray(x, dtype=float) - 0.5 + 1.0, 2.0) - 1.0
    return np.select(
        [s < -1.0 / 3.0, np.abs(s) <= 1.0 / 3.0],
        [-s * np.sin(1.5 * np.pi * s**2), np.abs(np.sin(2 * np.pi * s))],
        2 * s - 1 - np.sin(3 * np.pi * s) / 6.0)


def _sin4(x):
    return np.sin(x) ** 4


def _dsin4(x):
    return 4 * np.sin(x) ** 3 * np.cos(x)


def _buckley_step(x):
    x = np.asarray(x, dtype=float)
    return np.where((x > -0.5) & (x < 0.0), 1.0, 0.0)


def rotation_profile(x, y, r0=0.15):
    """Smooth hump, cone and slotted cylinder on the unit square."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    out = np.zeros(x.shape)
    r = np.hypot(x - 0.25, y - 0.5)
    out = np.where(r <= r0, 0.25 * (1 + np.cos(np.pi * r / r0)), out)
    r = np.hypot(x - 0.5, y - 0.25)
    out = np.where(r <= r0, 1 - r / r0, out)
    r = np.hypot(x - 0.5, y - 0.75)
    slot = (np.abs(x - 0.5) < 0.025) & (y < 0.85)
    return np.where((r <= r0) & ~slot, 1.0, out)


def _burgers2d_exact(t, x, y):
    return exact_burgers(_sin4, 2 * t, x + y, _dsin4)


def _shear_layer(x, y, rho=np.pi / 15, delta=0.05):
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    low = delta * np.cos(x) - 1 / rho / np.cosh((y - np.pi / 2) / rho) ** 2
    high = delta * np.cos(x) + 1 / rho / np.cosh((1.5 * np.pi - y) / rho) ** 2
    return np.where(y <= np.pi, low, high)


def _vortex_patch(x, y):
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    band = (x >= np.pi / 2) & (x <= 1.5 * np.pi)
    neg = band & (y >= np.pi / 4) & (y <= 0.75 * np.pi)
    pos = band & (y >= 1.25 * np.pi) & (y <= 1.75 * np.pi)
    return np.where(neg, -1.0, np.where(pos, 1.0, 0.0))


def _rotation_stream():
    return AnalyticStream(
        psi=lambda x, y, t: 0.5 * ((x - 0.5) ** 2 + (y - 0.5) ** 2),
        u=lambda x, y, t: -(y - 0.5),
        v=lambda x, y, t: x - 0.5)


def _swirl_stream(period=1.5):
    def g(t):
        return np.cos(np.pi * t / period)

    return AnalyticStream(
        psi=lambda x, y, t: -np.sin(np.pi * x) ** 2 * np.sin(np.pi * y) ** 2 * g(t) / np.pi,
        u=lambda x, y, t: np.sin(np.pi * x) ** 2 * np.sin(2 * np.pi * y) * g(t),
        v=lambda x, y, t: -np.sin(np.pi * y) ** 2 * np.sin(2 * np.pi * x) * g(t))


def _catalog():
    lin = flux_catalog("linear")
    burgers = flux_catalog("burgers")
    cases = []

    def add(case_id, problem, grids, description, dt_policy="cfl", exact=None):
        cases.append(CaseDefinition(case_id, problem, tuple(grids), description, dt_policy, exact))

    p = ProblemSpec("ex1-sin4", lin, _sin4_shift, 0.5, 1.5, 0.1, domain=(0.0, 2.0))
    add(p.name, p, (20, 40, 80, 160, 320), "linear advection of 0.5 + sin^4(2 pi x) on [0, 2]",
        "accuracy", lambda t, x: exact_advection(_sin4_shift, t, x, (0.0, 2.0)))

    p = ProblemSpec("ex2-jiang-shu-profile", lin, _jiang_shu, 0.0, 1.0, 8.0, domain=(-1.0, 1.0))
    add(p.name, p, (200,), "Gaussian, square, triangle and half ellipse advected to T=8",
        exact=lambda t, x: exact_advection(_jiang_shu, t, x, (-1.0, 1.0)))

    lo, hi = _data_range(_shu_osher_mix, (-1.0, 1.0))
    p = ProblemSpec("ex3-mixed-profile", lin, _shu_osher_mix, lo, hi, 2.0, domain=(-1.0, 1.0))
    add(p.name, p, (200,), "smooth and discontinuous pieces advected one period",
        exact=lambda t, x: exact_advection(_shu_osher_mix, t, x, (-1.0, 1.0)))

    p = ProblemSpec("ex4-burgers", burgers, _sin4, 0.0, 1.0, 0.5, domain=(0.0, TWO_PI))
    add(p.name, p, (40, 80, 160, 320, 640), "Burgers with sin^4(x), smooth until T=0.5",
        "accuracy", lambda t, x: exact_burgers(_sin4, t, x, _dsin4))

    p = ProblemSpec("ex5-buckley", flux_catalog("buckley-leverett"), _buckley_step, 0.0, 1.0, 0.4,
                    boundary="inflow-outflow", inflow=0.0, domain=(-1.0, 1.0))
    add(p.name, p, (50, 100, 200, 400, 800), "Buckley-Leverett Riemann data with inflow/outflow")

    def u6(x, y):
        return np.sin(2 * np.pi * (x + y)) ** 4

    p = ProblemSpec("ex6-advection2d", lin, u6, 0.0, 1.0, 0.1, g=lin)
    add(p.name, p, (20, 40, 80, 160), "2D advection of sin^4(2 pi (x + y))",
        exact=lambda t, x, y: u6(x - t, y - t))

    p = ProblemSpec("ex7-burgers2d", burgers, lambda x, y: np.sin(x + y) ** 4, 0.0, 1.0, 0.2,
                    g=burgers, domain=(0.0, TWO_PI))
    add(p.name, p, (20, 40, 80, 160, 320), "2D Burgers with sin^4(x + y) before shocking",
        exact=_burgers2d_exact)

    p = ProblemSpec("ex8-buckley2d", flux_catalog("buckley-leverett-2d-x"),
                    lambda x, y: np.where(x**2 + y**2 < 0.5, 1.0, 0.0), 0.0, 1.0, 0.5,
                    g=flux_catalog("buckley-leverett-gravity"), domain=(-1.5, 1.5))
    add(p.name, p, (8, 16, 32, 64, 128), "2D Buckley-Leverett with gravity, disc of ones")

    p = VorticityProblem("ex9-rigid-rotation", rotation_profile, 0.0, 1.0, TWO_PI,
                         domain=(0.0, 1.0), stream=_rotation_stream(),
                         exact=lambda t, x, y: rotation_profile(x, y))
    add(p.name, p, (100,), "solid body rotation of hump, cone and slotted cylinder",
        exact=p.exact)

    p = VorticityProblem("ex10-swirling", rotation_profile, 0.0, 1.0, 1.5,
                         domain=(0.0, 1.0), stream=_swirl_stream(1.5),
                         exact=lambda t, x, y: rotation_profile(x, y))
    add(p.name, p, (100,), "swirling deformation that reverses and restores the data at T",
        exact=p.exact)

    def w11(x, y):
        return -2 * np.sin(x) * np.sin(y)

    p = VorticityProblem("ex11-vortex-smooth", w11, -2.0, 2.0, 1.0,
                         exact=lambda t, x, y: w11(x, y))
    add(p.name, p, (20, 40, 80, 160), "steady smooth vorticity -2 sin x sin y", exact=p.exact)

    rho, delta = np.pi / 15, 0.05
    p = VorticityProblem("ex12-shear", _shear_layer, -delta - 1 / rho, delta + 1 / rho, 6.0)
    add(p.name, p, (64, 128), "double shear layer")

    p = VorticityProblem("ex13-patch", _vortex_patch, -1.0, 1.0, 5.0)
    add(p.name, p, (128,), "vortex patch pair")
    return cases


def _data_range(func, domain, samples=200001):
    x = np.linspace(domain[0], domain[1], samples)
    v = func(x)
    return float(v.min()), float(v.max())


CATALOG = _catalog()


def get_case(name: str) -> CaseDefinition:
    """Look up a case by full id or by its ``exN`` prefix."""
    for case in CATALOG:
        if name in (case.case_id, case.short):
            return case
    raise KeyError(f"unknown case {name!r}; known: {', '.join(c.short for c in CATALOG)}")


# -------------------------------------------------------------- running

@dataclass
class RunResult:
    case_id: str
    n: int
    initial: CellField
    final: CellField
    stats: object
    t_final: float
    errors: Optional[tuple] = None


def initial_field(case: CaseDefinition, nx, ny=None) -> CellField:
    grid = case.grid(nx, ny)
    return CellField(cell_average(case.problem.u0, grid), grid)


def run_case(case: CaseDefinition, config: SchemeConfig, nx, ny=None, t_final=None,
             initial: CellField | None = None, callback=None) -> RunResult:
    t_final = case.problem.t_final if t_final is None else t_final
    field0 = initial_field(case, nx, ny) if initial is None else initial
    if case.incompressible:
        out, stats = advance_vorticity(field0, case.problem, config, t_final, callback)
    elif case.dim == 2:
        out, stats = advance_2d(field0, case.problem, config, t_final, callback)
    else:
        out, stats = advance(field0, case.problem, config, t_final, callback)
    errors = None
    if case.exact is not None:
        try:
            exact_avg = cell_average(lambda *xs: case.exact(t_final, *xs), out.grid)
            errors = error_norms(out, exact_avg)
        except NewtonFailure as exc:
            stats.warn(f"no errors reported: {exc}")
    return RunResult(case.case_id, nx, field0, out, stats, t_final, errors)


class ConvergenceRow(NamedTuple):
    N: int
    L1: Optional[float]
    L1_order: Optional[float]
    Linf: Optional[float]
    Linf_order: Optional[float]
    min: float
    max: float


def observed_order(e_coarse, e_fine, n_coarse, n_fine):
    if not e_coarse or not e_fine:
        return None
    return math.log(e_coarse / e_fine) / math.log(n_fine / n_coarse)


def _row_job(args):
    case_id, config, n, t_final = args
    res = run_case(get_case(case_id), config, n, t_final=t_final)
    return res.errors, res.stats.min, res.stats.max


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("MPPFVCW_THREADS", "1")))
    except ValueError:
        return 1


def run_convergence(case: CaseDefinition, config: SchemeConfig, grids=None, t_final=None,
                    workers=None) -> list[ConvergenceRow]:
    """One row per grid; orders between consecutive rows, empty on the first."""
    grids = tuple(case.grids if grids is None else grids)
    workers = thread_count() if workers is None else workers
    jobs = [(case.case_id, config, n, t_final) for n in grids]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            results = list(pool.map(_row_job, jobs))
    else:
        results = [_row_job(j) for j in jobs]
    rows = []
    prev = None
    for n, (errors, lo, hi) in zip(grids, results):
        l1 = linf = o1 = oinf = None
        if errors is not None:
            l1, linf = errors
            if prev is not None and prev[1] is not None:
                o1 = observed_order(prev[1][0], l1, prev[0], n)
                oinf = observed_order(prev[1][1], linf, prev[0], n)
        rows.append(ConvergenceRow(n, l1, o1, linf, oinf, lo, hi))
        prev = (n, errors)
    return rows


# -------------------------------------------------------------- output

def _fmt(v):
    return "" if v is None else repr(float(v)) if not isinstance(v, int) else str(v)


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def format_table(rows) -> str:
    def col(v, spec):
        return " " * 10 if v is None else format(v, spec)

    lines = [f"{'N':>6} {'L1':>10} {'order':>6} {'Linf':>10} {'order':>6} {'min':>20} {'max':>20}"]
    for r in rows:
        lines.append(f"{r.N:>6} {col(r.L1, '10.3e')} {col(r.L1_order, '6.2f'):>6} "
                     f"{col(r.Linf, '10.3e')} {col(r.Linf_order, '6.2f'):>6} "
                     f"{r.min:20.10e} {r.max:20.10e}")
    return "\n".join(lines)


def write_field(path, field: CellField):
    """Plain text: 'x value' in 1D, 'x y value' in 2D with blank lines between x rows."""
    grid = field.grid
    with open(path, "w") as fh:
        if isinstance(grid, Grid1D):
            for x, v in zip(grid.centers.tolist(), field.values.tolist()):
                fh.write(f"{x!r} {v!r}\n")
            return
        xs, ys = grid.x.centers.tolist(), grid.y.centers.tolist()
        vals = field.values.tolist()
        for x, row in zip(xs, vals):
            for y, v in zip(ys, row):
                fh.write(f"{x!r} {y!r} {v!r}\n")
            fh.write("\n")


def write_gnuplot(path, data_files, dim, title=""):
    """Command file plotting the given dumps (lines in 1D, a heat map in 2D)."""
    names = [os.path.basename(f) for f in data_files]
    with open(path, "w") as fh:
        fh.write(f'set title "{title}"\n')
        if dim == 1:
            plots = ", ".join(f'"{n}" using 1:2 with lines title "{os.path.splitext(n)[0]}"'
                              for n in names)
            fh.write(f"plot {plots}\n")
        else:
            fh.write("set view map\nset size ratio -1\n")
            fh.write(f'splot "{names[0]}" using 1:2:3 with pm3d notitle\n')
        fh.write("pause -1\n")
