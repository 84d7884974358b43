"""Geometric and canonical principal parameters of Weingarten surfaces.

For a Weingarten surface in principal parameters the functions
``lambda = ln(sqrt(E) exp(If))`` and ``mu = ln(sqrt(G) exp(Ig))`` depend on
``u`` and ``v`` alone.  Integrating ``a exp(lambda)`` in ``u`` and
``b exp(mu)`` in ``v`` gives parameters in which ``sqrt(EG)(nu1 - nu2)``
is constant.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import NonMonotone
from .grid import ParamGrid, ScalarField, cumulative_integral, resample_to_grid
from .invariants import FundamentalForms, InvariantQuadruple
from .weingarten import WeingartenPair, canonical_scaling  # noqa: F401  (re-export)


@dataclass
class LambdaMu:
    lam: np.ndarray        # lambda(u), averaged over v
    mu: np.ndarray         # mu(v), averaged over u
    lam_field: np.ndarray
    mu_field: np.ndarray
    separability: Dict[str, float]


def lambda_mu_functions(forms: FundamentalForms, pair: WeingartenPair, nu: ScalarField) -> LambdaMu:
    """Per-node ``lambda, mu`` with their row averages and the deviation from them."""
    n = nu.values
    valid = nu.valid
    pair.check_domain(n, valid)
    lam = np.log(forms.sqrt_E()) + pair.int_f(n)
    mu = np.log(forms.sqrt_G()) + pair.int_g(n)
    lam_m = np.where(valid, lam, np.nan)
    mu_m = np.where(valid, mu, np.nan)
    lam_u = np.nanmean(lam_m, axis=1)
    mu_v = np.nanmean(mu_m, axis=0)
    sep = {"lambda": float(np.nanmax(np.abs(lam_m - lam_u[:, None]))),
           "mu": float(np.nanmax(np.abs(mu_m - mu_v[None, :])))}
    return LambdaMu(lam_u, mu_v, lam, mu, sep)


@dataclass
class GeometricCriterion:
    field: ScalarField
    is_constant: bool
    spread: float
    tol: float


def geometric_criterion(forms: FundamentalForms, q: InvariantQuadruple, tol=1e-10) -> GeometricCriterion:
    """``sqrt(EG)(nu1 - nu2)`` and whether it is constant to relative ``tol``."""
    vals = np.sqrt(forms.E.values * forms.G.values) * (q.nu1.values - q.nu2.values)
    valid = q.valid if forms.mask is None else q.valid & forms.mask
    v = vals[valid]
    spread = float((v.max() - v.min()) / abs(v.mean()))
    return GeometricCriterion(ScalarField(q.grid, vals, valid), bool(spread <= tol), spread, tol)


@dataclass
class ReparamMap:
    ubar: ScalarField
    vbar: ScalarField
    a: float
    b: float
    ubar0: float = 0.0
    vbar0: float = 0.0
    base: Tuple[int, int] = (0, 0)
    monotone: Dict[str, bool] = field(default_factory=dict)
    separability: Dict[str, float] = field(default_factory=dict)

    @property
    def ubar_nodes(self):
        return self.ubar.values[:, 0]

    @property
    def vbar_nodes(self):
        return self.vbar.values[0, :]


@dataclass
class ReparamResult:
    map: ReparamMap
    grid: ParamGrid
    nu: ScalarField
    forms: FundamentalForms
    quadruple: Optional[InvariantQuadruple] = None


def _check_sign(p, name):
    if not np.all(p > 0):
        raise NonMonotone(f"{name} integrand is not positive everywhere "
                          f"(range [{p.min():.3e}, {p.max():.3e}])")


def geometric_reparam(forms: FundamentalForms, pair: WeingartenPair, nu: ScalarField,
                      a=None, b=None, base=None, ubar0=0.0, vbar0=0.0, q=None,
                      separability_tol=None) -> ReparamResult:
    """Change to geometric principal parameters.

    ``ubar = a int sqrt(E) exp(If) du + ubar0`` and
    ``vbar = b int sqrt(G) exp(Ig) dv + vbar0``, both measured from the
    ``base`` node (default: grid centre).  The integrands are averaged
    along the other parameter before composite Simpson integration.  All
    fields are resampled onto a uniform grid in ``(ubar, vbar)`` with the
    same node count.
    """
    g = nu.grid
    a = pair.a if a is None else float(a)
    b = pair.b if b is None else float(b)
    if base is None:
        base = (g.nu // 2, g.nv // 2)
    lm = lambda_mu_functions(forms, pair, nu)
    tol = separability_tol if separability_tol is not None else 10.0 * max(g.du, g.dv) ** 2
    if max(lm.separability.values()) > tol:
        warnings.warn(f"lambda/mu not separable (deviation {lm.separability}); "
                      "using row-averaged integrands")
    pu = a * np.exp(lm.lam)
    pv = b * np.exp(lm.mu)
    _check_sign(pu, "ubar")
    _check_sign(pv, "vbar")
    U = cumulative_integral(pu, g.du)
    V = cumulative_integral(pv, g.dv)
    U = U - U[base[0]] + ubar0
    V = V - V[base[1]] + vbar0
    ubar = ScalarField(g, np.broadcast_to(U[:, None], g.shape))
    vbar = ScalarField(g, np.broadcast_to(V[None, :], g.shape))
    rmap = ReparamMap(ubar, vbar, a, b, ubar0, vbar0, tuple(base),
                      {"ubar": bool(np.all(np.diff(U) > 0)), "vbar": bool(np.all(np.diff(V) > 0))},
                      lm.separability)
    new = ParamGrid.from_bounds((U[0], U[-1]), (V[0], V[-1]), g.nu, g.nv)
    u_of = CubicSpline(U, g.u)(new.u)
    v_of = CubicSpline(V, g.v)(new.v)
    du_dub = CubicSpline(g.u, pu)(u_of)      # dubar/du at the new nodes
    dv_dvb = CubicSpline(g.v, pv)(v_of)
    # keep the endpoints exactly on the old grid
    u_of[[0, -1]] = g.u[[0, -1]]
    v_of[[0, -1]] = g.v[[0, -1]]
    rs = lambda f: resample_to_grid(f, u_of, v_of, new)
    su, sv = du_dub[:, None] ** 2, dv_dvb[None, :] ** 2
    E = rs(forms.E)
    G = rs(forms.G)
    L = rs(forms.L)
    N = rs(forms.N)
    new_forms = FundamentalForms.principal(new, E.values / su, G.values / sv,
                                           L.values / su, N.values / sv,
                                           E.mask)
    quad = None
    if q is not None:
        quad = InvariantQuadruple(rs(q.nu1), rs(q.nu2), rs(q.gamma1), rs(q.gamma2))
    return ReparamResult(rmap, new, rs(nu), new_forms, quad)
