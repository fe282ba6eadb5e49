import math

import numpy as np
import pytest

from mppfvcw.core import CellField, Grid1D, SchemeConfig
from mppfvcw.harness import (CATALOG, CSV_COLUMNS, ConvergenceRow, NewtonFailure, error_norms,
                             exact_advection, exact_burgers, format_table, get_case,
                             observed_order, project_averages, reference_solution,
                             rotation_profile, rows_to_csv, run_convergence, write_field)


def test_catalog_has_all_cases():
    assert len(CATALOG) == 13
    assert [c.short for c in CATALOG] == [f"ex{i}" for i in range(1, 14)]
    assert get_case("ex7").case_id == get_case("ex7-burgers2d").case_id
    with pytest.raises(KeyError, match="unknown case"):
        get_case("ex99")


def test_exact_advection_period():
    u0 = lambda x: np.sin(np.pi * x) ** 4  # noqa: E731
    x = np.linspace(-1, 1, 41)
    np.testing.assert_allclose(exact_advection(u0, 2.0, x, (-1, 1)), u0(x), atol=1e-14)
    case = get_case("ex2")
    g = case.grid(200)
    np.testing.assert_allclose(case.exact(8.0, g.centers), case.problem.u0(g.centers), atol=1e-12)


def test_exact_burgers_solves_characteristics():
    u0 = lambda x: 0.5 + np.sin(x)  # noqa: E731
    x = np.linspace(0, 2 * np.pi, 200)
    u = exact_burgers(u0, 0.5, x)
    assert np.max(np.abs(u - u0(x - u * 0.5))) <= 1e-13
    with pytest.raises(NewtonFailure):
        exact_burgers(u0, 3.0, x, max_iter=5)


def test_projection_preserves_integral():
    fine = np.linspace(0, 1, 101)
    coarse = np.linspace(0, 1, 11)
    vals = np.random.default_rng(0).uniform(size=100)
    proj = project_averages(vals, fine, coarse)
    assert proj.sum() * 0.1 == pytest.approx(vals.sum() * 0.01, abs=1e-14)
    np.testing.assert_allclose(proj, vals.reshape(10, 10).mean(axis=1), atol=1e-14)


def test_reference_solution_refines():
    case = get_case("ex5")
    g = case.grid(50)
    a, b, c = (reference_solution(case.problem, g, 0.2, n_ref=n) for n in (1000, 2000, 4000))
    assert error_norms(b, c.values)[0] < 0.8 * error_norms(a, b.values)[0]
    for r in (a, b, c):
        assert r.values.min() >= 0.0 and r.values.max() <= 1.0


def test_error_norms_convention():
    g = Grid1D(0, 2, 4)
    f = CellField(np.array([1.0, 2.0, 3.0, 4.0]), g)
    exact = np.array([1.0, 1.0, 3.0, 2.0])
    l1, linf = error_norms(f, exact)
    assert l1 == pytest.approx(3 * 0.5) and linf == 2.0
    assert error_norms(f, exact, normalized=True)[0] == pytest.approx(0.75)


def test_observed_order_formula():
    assert observed_order(1.0, 1 / 32, 10, 20) == pytest.approx(5.0)
    assert observed_order(None, 1.0, 10, 20) is None


def test_convergence_orders_consistent_with_errors():
    rows = run_convergence(get_case("ex1"), SchemeConfig(dt_policy="accuracy"), (20, 40, 80),
                           workers=1)
    assert rows[0].L1_order is None
    for a, b in zip(rows, rows[1:]):
        assert abs(b.L1_order - math.log2(a.L1 / b.L1)) <= 1e-10
        assert abs(b.Linf_order - math.log2(a.Linf / b.Linf)) <= 1e-10


def test_csv_and_table_layout():
    rows = [ConvergenceRow(20, 0.1, None, 0.2, None, 0.5, 1.5),
            ConvergenceRow(40, 0.003125, 5.0, 0.00625, 5.0, 0.5, 1.5)]
    text = rows_to_csv(rows)
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[1] == "20,0.1,,0.2,,0.5,1.5"
    assert lines[2].split(",")[2] == "5.0"
    table = format_table(rows)
    assert "3.125e-03" in table and "5.00" in table


def test_rotation_profile_shapes():
    assert rotation_profile(0.25, 0.5) == pytest.approx(0.5)      # hump centre
    assert rotation_profile(0.5, 0.25) == pytest.approx(1.0)      # cone tip
    assert rotation_profile(0.6, 0.75) == 1.0                     # cylinder body
    assert rotation_profile(0.5, 0.8) == 0.0                      # slot
    assert rotation_profile(0.9, 0.9) == 0.0


def test_field_dump_layout(tmp_path):
    g = Grid1D(0, 1, 3)
    path = tmp_path / "f.dat"
    write_field(path, CellField(np.array([1.0, 2.0, 3.0]), g))
    rows = [list(map(float, ln.split())) for ln in path.read_text().splitlines()]
    np.testing.assert_allclose(rows, np.column_stack([g.centers, [1, 2, 3]]))


def test_run_past_shock_skips_errors():
    from mppfvcw.harness import run_case
    res = run_case(get_case("ex4"), SchemeConfig(), 40, t_final=1.2)
    assert res.errors is None
    assert any("no errors" in w for w in res.stats.warnings)
    assert res.stats.min >= 0.0
