import warnings

import numpy as np
import pytest

from invsurf.errors import NonMonotone
from invsurf.fixtures import kuen
from invsurf.grid import ParamGrid, ScalarField
from invsurf.invariants import FundamentalForms
from invsurf.natural import invariants_from_nu
from invsurf.reparam import geometric_criterion, geometric_reparam, lambda_mu_functions
from invsurf.weingarten import cmc_pair, constant_curvature_pair

WINDOW = ((2.6, 3.4), (0.4, 1.2))


def principal(h=0.01, u=(2.0, 2.5), v=(0.6, 1.4)):
    P = kuen("principal")
    g = ParamGrid.with_spacing(u, v, h)
    nu = P.field("nu1", g)
    pair = constant_curvature_pair(-1.0, nu0=float(nu.values[g.nu // 2, g.nv // 2]))
    return P, g, nu, pair


def test_lambda_mu_constant_on_canonical_chart():
    C = kuen()
    g = ParamGrid.from_bounds(*WINDOW, 81, 81)
    nu = C.field("nu1", g)
    pair = constant_curvature_pair(-1.0, nu0=float(nu.values[40, 40]))
    lm = lambda_mu_functions(C.forms(g), pair, nu)
    assert np.ptp(lm.lam_field) < 1e-10 and np.ptp(lm.mu_field) < 1e-10


def test_separability_detects_injected_violation():
    C = kuen()
    g = ParamGrid.from_bounds(*WINDOW, 41, 41)
    nu = C.field("nu1", g)
    pair = constant_curvature_pair(-1.0, nu0=float(nu.values[20, 20]))
    F = C.forms(g)
    _, V = g.mesh()
    bent = FundamentalForms.principal(g, F.E.values * np.exp(2 * V), F.G.values, F.L.values,
                                      F.N.values)
    sep = lambda_mu_functions(bent, pair, nu).separability["lambda"]
    assert sep == pytest.approx(0.4, abs=0.02)


def test_criterion_values():
    C = kuen()
    g = ParamGrid.from_bounds(*WINDOW, 41, 41)
    crit = geometric_criterion(C.forms(g), C.quadruple(g, oriented=False))
    assert crit.is_constant and np.allclose(np.abs(crit.field.values), 1.0, atol=1e-10)
    P, gp, _, _ = principal(0.05)
    cp = geometric_criterion(P.forms(gp), P.quadruple(gp, oriented=False))
    assert not cp.is_constant
    assert np.allclose(np.abs(cp.field.values), 1 / np.sin(gp.mesh()[1]), rtol=1e-12)


def test_principal_reparam_matches_ln_tan():
    P, g, nu, pair = principal(0.005)
    res = geometric_reparam(P.forms(g), pair, nu, q=P.quadruple(g, oriented=False))
    x = np.log(np.tan(g.v / 2))
    A = np.vstack([x, np.ones_like(x)]).T
    coef = np.linalg.lstsq(A, res.map.vbar_nodes, rcond=None)[0]
    assert np.max(np.abs(A @ coef - res.map.vbar_nodes)) < 1e-8
    # with the canonical scaling the slope is one: vbar = ln tan(v/2) + const
    assert coef[0] == pytest.approx(1.0, rel=1e-8)
    ub = res.map.ubar_nodes
    assert np.allclose(np.diff(ub), np.diff(ub)[0], rtol=1e-10)
    assert all(res.map.monotone.values())
    after = geometric_criterion(res.forms, res.quadruple, tol=1e-3)
    assert after.is_constant


def test_affine_map_on_geometric_input():
    C = kuen()
    g = ParamGrid.from_bounds(*WINDOW, 41, 41)
    nu = C.field("nu1", g)
    pair = constant_curvature_pair(-1.0, nu0=float(nu.values[20, 20]))
    res = geometric_reparam(C.forms(g), pair, nu, q=C.quadruple(g, oriented=False))
    assert np.allclose(np.diff(res.map.ubar_nodes, 2), 0, atol=1e-12)
    assert np.allclose(np.diff(res.map.vbar_nodes, 2), 0, atol=1e-12)


def test_cmc_isothermal():
    # CMC data built in non-geometric parameters: stretch a geometric chart in u
    g0 = ParamGrid.from_bounds((0.2, 0.8), (0.2, 0.8), 61, 61)
    lam = lambda s, v: 0.2 * s + 0.1 * v + 0.3 * s * v
    s_of_u = lambda u: u + 0.1 * u**2
    nu = ScalarField.from_function(g0, lambda u, v: 0.5 * np.exp(lam(s_of_u(u), v)))
    pair = cmc_pair(0.5, nu0=0.5)
    U, _ = g0.mesh()
    E = 1.0 / (2.0 * nu.values) * (1 + 0.2 * U) ** 2
    G = 1.0 / (2.0 * nu.values)
    f, gg = pair.f(nu.values), pair.g(nu.values)
    forms = FundamentalForms.principal(g0, E, G, f * E, gg * G)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = geometric_reparam(forms, pair, nu)
    Eb, Gb = res.forms.E.values, res.forms.G.values
    ok = np.isfinite(Eb) & np.isfinite(Gb)
    assert np.max(np.abs(Eb - Gb)[ok] / Gb[ok]) < 1e-3


def test_nonmonotone():
    P, g, nu, pair = principal(0.05)
    with pytest.raises(NonMonotone):
        geometric_reparam(P.forms(g), pair, nu, a=-1.0)
