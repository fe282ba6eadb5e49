import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mppfvcw.core import Grid1D, SchemeConfig, cell_average, gauss_table
from mppfvcw.reconstruct import (C_COMPACT, SmoothnessTriple, TridiagonalSystem,
                                 assemble_fvcw_system, gauss_point_values, point_weno_table,
                                 reconstruct_faces, smoothness_indicators, solve_tridiagonal,
                                 weno5_left, weno5_right, wenojs_weights, wenoz_weights)

SCHEMES = ("fvcw", "fvc", "weno-js", "weno-z")
finite = st.floats(-10, 10, allow_nan=False)


def quartic(x):
    return 1.0 - 2.0 * x + 0.5 * x**2 + 3.0 * x**3 - 1.5 * x**4


def quartic_averages(faces):
    P = lambda x: x - x**2 + x**3 / 6 + 0.75 * x**4 - 0.3 * x**5  # noqa: E731
    return np.diff(P(faces)) / np.diff(faces)


# ---------------------------------------------------------- indicators

def test_indicators_constant_and_linear():
    s = smoothness_indicators(np.full(5, 3.0))
    assert s == (0.0, 0.0, 0.0, 0.0)
    s = smoothness_indicators(np.arange(5.0))
    assert s.beta0 == pytest.approx(1.0) and s.beta1 == pytest.approx(1.0)
    assert s.beta2 == pytest.approx(1.0) and s.tau5 == pytest.approx(0.0)


def test_indicators_step():
    s = smoothness_indicators(np.array([0.0, 0, 0, 1, 1]))
    assert s.beta0 == 0.0
    assert s.beta1 == pytest.approx(4 / 3)
    assert s.beta2 == pytest.approx(10 / 3)
    assert s.tau5 == pytest.approx(10 / 3)


def test_z_weights_linear_when_tau_vanishes():
    s = smoothness_indicators(np.arange(5.0))
    w = wenoz_weights(s)
    assert tuple(float(x) for x in w) == C_COMPACT


def test_z_weights_step_favour_smooth_side():
    eps, p = 1e-13, 2
    beta = np.array([4 / 3, 4 / 3, 0.0])
    s = SmoothnessTriple(*beta, abs(beta[2] - beta[0]))
    w = wenoz_weights(s, eps, p)
    # direct evaluation of the formula
    tau = abs(beta[2] - beta[0])
    bz = (beta + eps) / (beta + tau + eps)
    a = np.array(C_COMPACT) * (1 + (tau / (bz + eps)) ** p)
    np.testing.assert_allclose(w, a / a.sum(), rtol=1e-14)
    assert w.w2 > 0.3


@settings(max_examples=200, deadline=None)
@given(st.lists(finite, min_size=5, max_size=5))
def test_weights_normalized(vals):
    s = smoothness_indicators(np.array(vals))
    for w in (wenoz_weights(s), wenojs_weights(s)):
        assert abs(sum(float(x) for x in w) - 1.0) < 1e-14
        assert all(0.0 <= float(x) <= 1.0 for x in w)


# --------------------------------------------------------------- WENO5

def test_weno5_constant_and_mirror():
    assert weno5_left(np.full(5, 2.5)) == pytest.approx(2.5, abs=1e-15)
    rng = np.random.default_rng(1)
    s = rng.normal(size=(5, 20))
    np.testing.assert_array_equal(weno5_right(s), weno5_left(s[::-1]))


def test_weno5_linear_weights_quartic_exact():
    faces = np.arange(-2.5, 3.0, 1.0) * 0.1
    assert weno5_left(quartic_averages(faces), "linear") == pytest.approx(quartic(0.05), abs=1e-13)


@pytest.mark.parametrize("mode", ["linear", "js", "z"])
def test_weno5_linear_data_exact(mode):
    lin = 0.3 + 2 * np.arange(-2, 3) * 0.1
    assert weno5_left(lin, mode) == pytest.approx(0.3 + 2 * 0.05, abs=1e-13)


@pytest.mark.parametrize("mode", ["js", "z"])
def test_weno5_nonlinear_converges_on_quartic(mode):
    errs = []
    for h in (0.1, 0.05, 0.025):
        faces = np.arange(-2.5, 3.0, 1.0) * h
        errs.append(abs(weno5_left(quartic_averages(faces), mode) - quartic(h / 2)))
    assert errs[2] < errs[0] / 8


def test_fvc_oscillates_at_a_step():
    # linear weights carry no ENO mechanism; the limiter has to catch this
    u = np.where(np.arange(40) < 20, 0.0, 1.0)
    um, _ = reconstruct_faces(u, SchemeConfig(scheme="fvc"))
    assert um.min() < -0.1


def test_weno5_step_stays_in_range():
    v = weno5_left(np.array([0.0, 0, 1, 1, 1]))
    assert 0.0 <= v <= 1.0


# --------------------------------------------------------- tridiagonal

def random_cyclic(n, rng, dominant=True):
    sub, sup = rng.uniform(-1, 1, n), rng.uniform(-1, 1, n)
    main = rng.uniform(-1, 1, n)
    if dominant:
        main = np.abs(sub) + np.abs(sup) + 0.5 + np.abs(main)
    return TridiagonalSystem(sub, main, sup, rng.normal(size=n), True)


def test_identity_system():
    n = 8
    rhs = np.arange(n, dtype=float)
    sys = TridiagonalSystem(np.zeros(n), np.ones(n), np.zeros(n), rhs, True)
    np.testing.assert_array_equal(solve_tridiagonal(sys), rhs)


@pytest.mark.parametrize("seed", range(5))
def test_cyclic_solve_matches_dense(seed):
    sys = random_cyclic(16, np.random.default_rng(seed))
    x = solve_tridiagonal(sys)
    ref = np.linalg.solve(sys.dense(), sys.rhs)
    assert np.max(np.abs(x - ref)) <= 1e-12


def test_batched_and_open_solves_match_dense():
    rng = np.random.default_rng(7)
    systems = [random_cyclic(12, rng) for _ in range(4)]
    batch = TridiagonalSystem(*(np.stack([s[k] for s in systems]) for k in range(4)), True)
    x = solve_tridiagonal(batch)
    for k, s in enumerate(systems):
        np.testing.assert_allclose(x[k], np.linalg.solve(s.dense(), s.rhs), atol=1e-12)
    s = systems[0]._replace(cyclic=False)
    np.testing.assert_allclose(solve_tridiagonal(s), np.linalg.solve(s.dense(), s.rhs), atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(5, 40), st.integers(0, 2**31))
def test_fvcw_system_matches_dense_oracle(n, seed):
    rng = np.random.default_rng(seed)
    u = rng.uniform(-1, 1, n) * rng.choice([1e-3, 1, 1e3])
    sys = assemble_fvcw_system(u)
    assert np.all(sys.main >= 1 / 3 - 1e-15)
    x = solve_tridiagonal(sys)
    ref = np.linalg.solve(sys.dense(), sys.rhs)
    assert np.max(np.abs(x - ref)) <= 1e-12 * max(1.0, np.max(np.abs(ref)))


def test_compact_rows_are_not_always_dominant():
    # convex weights (1, 0, 0) give sub = 2/3 > main = 1/3: pivoting is needed
    w0, w1, w2 = 1.0, 0.0, 0.0
    main, sub, sup = (w0 + 2 * (w1 + w2)) / 3, (2 * w0 + w1) / 3, w2 / 3
    assert main < sub + sup


def test_linear_system_coefficients():
    u = np.sin(2 * np.pi * np.arange(10) / 10)
    sys = assemble_fvcw_system(u, linear_only=True)
    np.testing.assert_allclose(sys.sub, 0.3)
    np.testing.assert_allclose(sys.main, 0.6)
    np.testing.assert_allclose(sys.sup, 0.1)
    expect = u[np.arange(10) - 1] / 30 + 19 * u / 30 + 10 * np.roll(u, -1) / 30
    np.testing.assert_allclose(sys.rhs, expect, atol=1e-15)


def test_constant_system_solution():
    sys = assemble_fvcw_system(np.full(12, 0.7))
    np.testing.assert_allclose(sys.sub + sys.main + sys.sup, 1.0, atol=1e-15)
    np.testing.assert_allclose(solve_tridiagonal(sys), 0.7, atol=1e-15)


def test_linear_system_fifth_order_on_sine():
    errs = []
    for n in (32, 64):
        g = Grid1D(0, 1, n)
        u = cell_average(lambda x: np.sin(2 * np.pi * x), g)
        x = solve_tridiagonal(assemble_fvcw_system(u, linear_only=True))
        errs.append(np.max(np.abs(x - np.sin(2 * np.pi * g.faces[1:]))))
    assert np.log2(errs[0] / errs[1]) > 4.8


def test_small_line_rejected():
    with pytest.raises(ValueError):
        assemble_fvcw_system(np.zeros(4))


# ------------------------------------------------------ face traces

@pytest.mark.parametrize("scheme", SCHEMES)
def test_constant_preserved_by_all_schemes(scheme):
    um, up = reconstruct_faces(np.full(16, -0.3), SchemeConfig(scheme=scheme))
    np.testing.assert_allclose(um, -0.3, atol=1e-15)
    np.testing.assert_allclose(up, -0.3, atol=1e-15)


def test_fvc_quartic_exact_with_ghosts():
    n, h = 12, 0.1
    faces = -0.3 + h * np.arange(-2, n + 3)
    avg = quartic_averages(faces)
    ghosts = (avg[:2], avg[-2:])
    um, up = reconstruct_faces(avg[2:-2], SchemeConfig(scheme="fvc"), periodic=False,
                               ghosts=ghosts)
    x = faces[2:-2]
    assert np.max(np.abs(um - quartic(x[1:]))) <= 1e-12
    assert np.max(np.abs(up - quartic(x[:-1]))) <= 1e-12


@pytest.mark.parametrize("scheme", SCHEMES)
def test_periodic_fifth_order(scheme):
    errs = []
    for n in (40, 80):
        g = Grid1D(0, 1, n)
        u = cell_average(lambda x: np.sin(2 * np.pi * x), g)
        um, up = reconstruct_faces(u, SchemeConfig(scheme=scheme))
        errs.append(max(np.max(np.abs(um - np.sin(2 * np.pi * g.faces[1:]))),
                        np.max(np.abs(up - np.sin(2 * np.pi * g.faces[:-1])))))
    assert np.log2(errs[0] / errs[1]) > 4.5


@pytest.mark.parametrize("scheme", ["fvcw", "weno-js", "weno-z"])
def test_step_traces_bounded(scheme):
    u = np.where(np.arange(40) < 20, 0.0, 1.0)
    um, up = reconstruct_faces(u, SchemeConfig(scheme=scheme))
    for t in (um, up):
        assert np.all(np.isfinite(t))
        assert t.min() >= -0.1 and t.max() <= 1.1


# ------------------------------------------------------- point values

def test_point_tables():
    g = gauss_table(3)
    outer = point_weno_table(g.points[0])
    np.testing.assert_allclose(outer.linear.sum(), 1.0, atol=1e-14)
    assert np.all(outer.linear > 0)
    centre = point_weno_table(0.0)
    np.testing.assert_allclose(centre.linear, [-9 / 80, 49 / 40, -9 / 80], atol=1e-13)


@pytest.mark.parametrize("mode", ["linear", "z", "js"])
def test_gauss_point_values_constant(mode):
    tables = [point_weno_table(x) for x in gauss_table(3).points]
    out = gauss_point_values(np.full((6, 9), 1.25), tables, axis=1, mode=mode)
    assert out.shape == (3, 6, 9)
    np.testing.assert_allclose(out, 1.25, atol=1e-14)


def test_gauss_point_values_quartic_exact():
    h, n = 0.05, 16
    faces = h * np.arange(n + 1)
    avg = quartic_averages(faces)
    pts = gauss_table(3).points
    out = gauss_point_values(avg, [point_weno_table(x) for x in pts], mode="linear")
    centers = 0.5 * (faces[1:] + faces[:-1])
    for k, xi in enumerate(pts):
        # interior cells only: the periodic wrap does not reproduce a polynomial
        err = out[k, 2:-2] - quartic(centers[2:-2] + xi * h)
        assert np.max(np.abs(err)) <= 1e-12


def test_gauss_point_values_step_bounded():
    tables = [point_weno_table(x) for x in gauss_table(3).points]
    avg = np.where(np.arange(30) < 15, 0.0, 1.0)
    out = gauss_point_values(avg, tables, mode="z")
    assert out.min() >= -0.1 and out.max() <= 1.1
