import numpy as np
import pytest

from invsurf.errors import BlowUp, CFLViolation, NoConvergence
from invsurf.grid import ParamGrid, ScalarField, observed_orders
from invsurf.solvers import discrete_laplacian, solve_elliptic, solve_hyperbolic_sine_gordon


def liouville(u, v):
    return np.log(8.0 / (1.0 + u**2 + v**2) ** 2)


def boundary_from(g, fn):
    star = ScalarField.from_function(g, fn)
    b = np.zeros(g.shape)
    b[0], b[-1], b[:, 0], b[:, -1] = star.values[0], star.values[-1], star.values[:, 0], star.values[:, -1]
    return ScalarField(g, b), star


def test_liouville_second_order():
    hs, errs = [], []
    for n in (11, 21, 41):
        g = ParamGrid.from_bounds((0.5, 1.5), (0.5, 1.5), n, n)
        b, star = boundary_from(g, liouville)
        r = solve_elliptic("liouville", b)
        hs.append(g.du)
        errs.append(np.max(np.abs(r.lam.values - star.values)))
        assert r.residual <= 1e-10
    o = observed_orders(hs, errs)
    assert np.all((o > 1.8) & (o < 2.2))


def test_newton_is_quadratic():
    g = ParamGrid.from_bounds((0.5, 1.5), (0.5, 1.5), 21, 21)
    b, _ = boundary_from(g, liouville)
    r = solve_elliptic("liouville", b)
    res = [x for x in r.residuals if x > 1e-13]
    assert r.iterations <= 8
    assert res[-1] < res[-2] ** 1.5 or res[-1] < 1e-12


def test_sinh_gordon_trivial():
    g = ParamGrid.from_bounds((0, 1), (0, 1), 15, 15)
    r = solve_elliptic("sinh_gordon", ScalarField(g, np.zeros(g.shape)), H=0.5,
                       initial=np.full(g.shape, 0.3))
    assert np.max(np.abs(r.lam.values)) < 1e-12 and r.residual <= 1e-12


def test_manufactured_K1():
    star_fn = lambda u, v: -(1.0 + 0.5 * u**2 + 0.25 * v)
    errs = []
    for n in (11, 21, 41):
        g = ParamGrid.from_bounds((0, 1), (0, 1), n, n)
        b, star = boundary_from(g, star_fn)
        src = -1.0 + np.sinh(star.values)   # Laplacian of star is exactly -1
        r = solve_elliptic("sinh_gordon_K1", b, source=src)
        errs.append(np.max(np.abs(r.lam.values - star.values)))
    assert max(errs) < 1e-10   # the discrete Laplacian of a quadratic is exact


def test_discrete_laplacian_quadratic():
    g = ParamGrid.from_bounds((0, 1), (0, 1), 7, 9)
    U, V = g.mesh()
    assert np.allclose(discrete_laplacian(U**2 + V**2, g.du, g.dv), 4.0)


def test_no_convergence():
    g = ParamGrid.from_bounds((0.5, 1.5), (0.5, 1.5), 11, 11)
    b, _ = boundary_from(g, liouville)
    with pytest.raises(NoConvergence):
        solve_elliptic("liouville", b, max_iter=1)


def test_unknown_kind():
    g = ParamGrid.from_bounds((0, 1), (0, 1), 5, 5)
    with pytest.raises(ValueError):
        solve_elliptic("heat", ScalarField(g, np.zeros(g.shape)))


def test_march_zero_data():
    r = solve_hyperbolic_sine_gordon(np.zeros(50), np.zeros(50), 0.0, 0.02, 0.0, 0.3)
    assert np.nanmax(np.abs(r.lam.values[r.cone])) == 0.0


def test_march_kink_second_order():
    c = 0.5
    gam = np.sqrt(1 - c * c)
    kink = lambda u, v: 4 * np.arctan(np.exp((u - c * v) / gam))
    kink_v = lambda u, v: -c / gam * 2 / np.cosh((u - c * v) / gam)
    hs, errs = [], []
    for h in (0.04, 0.02, 0.01):
        u = -5.0 + h * np.arange(int(round(10 / h)) + 1)
        r = solve_hyperbolic_sine_gordon(kink(u, 0.0), kink_v(u, 0.0), -5.0, h, 0.0, 1.0)
        U, V = r.lam.grid.mesh()
        hs.append(h)
        errs.append(np.max(np.abs(r.lam.values - kink(U, V))[r.cone]))
    o = observed_orders(hs, errs)
    assert np.all((o > 1.8) & (o < 2.2))


def test_march_cone_and_admissible():
    r = solve_hyperbolic_sine_gordon(np.full(21, 1.0), np.zeros(21), 0.0, 0.1, 0.0, 0.5)
    assert r.cone[:, 0].all() and not r.cone[0, 1] and r.cone[10, 5]
    assert np.all(r.admissible <= r.cone)


def test_cfl_and_blowup():
    with pytest.raises(CFLViolation):
        solve_hyperbolic_sine_gordon(np.zeros(10), np.zeros(10), 0.0, 0.1, 0.0, 1.0, dv=0.2)
    with pytest.raises(BlowUp):
        solve_hyperbolic_sine_gordon(np.zeros(40), np.full(40, 1e5), 0.0, 0.1, 0.0, 1.0)
