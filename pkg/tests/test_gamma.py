import numpy as np
import pytest
from scipy.integrate import cumulative_trapezoid

from invsurf.errors import CharacteristicDegenerate, DegenerateCurve
from invsurf.fixtures import kuen
from invsurf.frames import rigid_align
from invsurf.gamma import (canal_curvatures, circle_curve, circle_family_test, gamma_surface,
                           helix_curve, profile_from_curvature, rotational_test, space_curve,
                           space_curve_from_points, torse_forming_frame)
from invsurf.grid import ParamGrid, observed_orders
from invsurf.invariants import forms_from_invariants, gauss_residual, principal_line_frenet


def torus(nv=201, nu=101):
    v = np.linspace(0.0, 4 * np.pi, nv)
    u = np.linspace(0.0, 2 * np.pi, nu)
    c = space_curve(v, np.full_like(v, 0.5), np.zeros_like(v))
    return gamma_surface(c, profile_from_curvature(np.ones_like(u), u[1] - u[0])), c


def test_circle_integration_exact():
    v = np.linspace(0, 2 * np.pi, 50)
    c = space_curve(v, np.full_like(v, 0.5), 0.0)
    ref = circle_curve(2.0, v)
    al = rigid_align(c.x, ref.x)
    assert al.rms < 1e-13


def test_helix_integration_exact():
    a, b = 1.5, 0.7
    v = np.linspace(0, 10, 300)
    ref = helix_curve(a, b, v)
    c = space_curve(v, ref.kappa, ref.tau)
    assert rigid_align(c.x, ref.x).rms < 1e-12


def test_curve_from_points():
    v = np.linspace(0, 6, 601)
    ref = helix_curve(1.0, 0.5, v)
    c = space_curve_from_points(v, ref.x)
    assert np.allclose(c.kappa[3:-3], ref.kappa[3:-3], atol=1e-4)
    assert np.allclose(c.tau[3:-3], ref.tau[3:-3], atol=1e-4)


def test_planar_frame():
    v = np.linspace(0, 3, 31)
    c = circle_curve(2.0, v)
    fr = torse_forming_frame(c)
    assert np.all(fr.theta == 0) and np.allclose(fr.e1, c.n) and np.allclose(fr.e2, c.b)


def test_helix_angle_linear():
    v = np.linspace(0, 5, 51)
    c = helix_curve(1.0, 2.0, v)
    assert np.allclose(torse_forming_frame(c).theta, -c.tau * v, atol=1e-14)


def test_curvature_must_be_positive():
    v = np.linspace(0, 1, 5)
    with pytest.raises(DegenerateCurve):
        space_curve(v, np.zeros(5), 0.0)


def test_circle_profile():
    r = 0.8
    u = np.linspace(0, 3, 61)
    p = profile_from_curvature(np.full_like(u, 1 / r), u[1] - u[0])
    assert np.allclose(p.lam, r * np.sin(u / r), atol=1e-13)
    assert np.allclose(p.mu, r * (1 - np.cos(u / r)), atol=1e-13)
    assert np.allclose(p.dlam**2 + p.dmu**2, 1.0)


def test_profile_order_for_varying_curvature():
    errs, hs = [], []
    for n in (41, 81, 161):
        u = np.linspace(0, 2, n)
        p = profile_from_curvature(1 + 0.3 * u, u[1] - u[0])
        phi = u + 0.15 * u**2
        fine = np.linspace(0, 2, 20001)
        lam = cumulative_trapezoid(np.cos(fine + 0.15 * fine**2), fine, initial=0)
        errs.append(abs(p.lam[-1] - lam[-1]))
        hs.append(u[1] - u[0])
        assert np.allclose(p.dlam, np.cos(phi), atol=1e-10)
    assert np.all(observed_orders(hs, errs) > 1.8)


def test_zero_profile_curvature_flagged():
    with pytest.raises(DegenerateCurve):
        profile_from_curvature(np.zeros(10), 0.1)
    assert not profile_from_curvature(np.zeros(10), 0.1, strict=False).nonvanishing


def test_torus_forms_and_values():
    S, _ = torus(nu=5)   # u = 0, pi/2, pi, ...
    assert np.all(S.forms.E.values == 1.0) and np.all(S.forms.F.values == 0.0)
    q = S.quadruple
    assert np.allclose(q.nu1.values[1], 1.0)
    assert np.allclose(q.nu2.values[1], -1.0, atol=1e-14)
    assert np.allclose(q.gamma2.values[1], 0.0, atol=1e-14)
    assert np.all(q.gamma1.values == 0.0)


def test_characteristic_points_masked():
    # a profile reaching the axis of a radius-1 circle touches w = 0
    v = np.linspace(0, 1, 11)
    u = np.linspace(0, np.pi, 5)
    c = space_curve(v, np.full_like(v, 1.0), 0.0)
    p = profile_from_curvature(np.ones_like(u), u[1] - u[0])
    S = gamma_surface(c, p)
    assert not S.mask[2].any() and S.mask[0].all()


def test_torus_gauss_second_order():
    errs, hs = [], []
    for n in (51, 101, 201):
        S, _ = torus(nv=2 * n - 1, nu=n)
        q = S.quadruple
        errs.append(gauss_residual(q, S.forms).max_abs())
        hs.append(q.grid.du)
    assert np.all(observed_orders(hs, errs) > 1.8)


def test_canal_formula():
    nu1, nu2, ok = canal_curvatures(1.0, 0.0, 0.0, 0.5, 0.0)
    assert nu1 == 1.0 and nu2 == pytest.approx(-1.0) and ok
    nu1, nu2, _ = canal_curvatures(2.0, 0.0, 0.0, 0.0, np.linspace(0, 6, 7))
    assert np.all(nu1 == 0.5) and np.all(nu2 == 0.0)
    with pytest.raises(CharacteristicDegenerate):
        canal_curvatures(1.0, 1.0, 0.0, 0.5, 0.0)


def test_rotational_test():
    S, c = torus()
    assert rotational_test(S.quadruple, c, 1e-10)["passed"]
    v = np.linspace(0, 4, 81)
    h = helix_curve(2.0, 0.5, v)
    assert not rotational_test(curve=h)["passed"]
    g = ParamGrid.from_bounds((2.6, 3.4), (0.4, 1.2), 21, 21)
    assert not rotational_test(kuen().quadruple(g))["passed"]


def test_circle_families():
    S, _ = torus()
    fr = principal_line_frenet(S.quadruple, S.forms)
    out = circle_family_test(fr, 1e-6)
    assert out["family1"]["circles"] and out["family2"]["circles"]
    g = ParamGrid.from_bounds((2.6, 3.4), (0.4, 1.2), 41, 41)
    q = kuen().quadruple(g)
    out = circle_family_test(principal_line_frenet(q, forms_from_invariants(q)), 1e-6)
    assert not out["family1"]["circles"] and not out["family2"]["circles"]


def test_gamma_profile_family_planar():
    v = np.linspace(0, 3, 61)
    u = np.linspace(0, 1.5, 31)
    c = helix_curve(2.0, 0.3, v)
    S = gamma_surface(c, profile_from_curvature(1 + 0.5 * u, u[1] - u[0]))
    fr = principal_line_frenet(S.quadruple, S.forms)
    out = circle_family_test(fr, 1e-6)
    assert out["family1"]["max_abs_tau"] < 1e-12 and not out["family1"]["circles"]
