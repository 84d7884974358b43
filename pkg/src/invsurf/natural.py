"""Natural (Gauss) equation of Weingarten surfaces and its specializations.

A strongly regular Weingarten surface in geometric principal parameters
is determined by one scalar ``nu`` solving a second-order PDE.  This
module evaluates that PDE in its general form, in the constant mean and
constant Gauss curvature forms, and after the classical substitutions
``nu -> lambda`` (Liouville, sinh-Gordon, sine-Gordon).  It also maps a
solution to the invariant quadruple of the surface.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from .errors import DomainViolation, PairDomainViolation, ZeroGradient
from .grid import (ScalarField, combine_masks, laplacian, mixed_derivative,
                   partial_derivative, second_derivative)
from .invariants import InvariantQuadruple
from .weingarten import WeingartenPair

CASES = ("minimal", "cmc", "K+1", "K-1")


@dataclass
class NaturalSolution:
    nu: ScalarField
    pair: WeingartenPair
    residuals: Dict[str, float] = field(default_factory=dict)
    lam: Optional[ScalarField] = None
    case: Optional[str] = None


def _derivs(nu: ScalarField):
    nu_u = partial_derivative(nu, "u")
    nu_v = partial_derivative(nu, "v")
    nu_uu = second_derivative(nu, "u")
    nu_vv = second_derivative(nu, "v")
    mask = combine_masks(nu.mask, nu_u.mask, nu_v.mask, nu_uu.mask, nu_vv.mask)
    return nu_u.values, nu_v.values, nu_uu.values, nu_vv.values, mask


def natural_residual_general(nu: ScalarField, pair: WeingartenPair) -> ScalarField:
    """Pointwise residual of the natural PDE for an arbitrary pair.

    ``b^2 e^{2 Ig} [f' nu_vv + (f'' - 2 f'^2/(f-g)) nu_v^2]
    - a^2 e^{2 If} [g' nu_uu + (g'' - 2 g'^2/(g-f)) nu_u^2] - f g (f-g)``
    with ``If, Ig`` the antiderivatives measured from ``nu0``.
    """
    n = nu.values
    pair.check_domain(n, nu.valid)
    nu_u, nu_v, nu_uu, nu_vv, mask = _derivs(nu)
    f, g = pair.f(n), pair.g(n)
    df, dg = pair.df(n), pair.dg(n)
    d2f, d2g = pair.d2f(n), pair.d2g(n)
    Ef = np.exp(2.0 * pair.int_f(n))
    Eg = np.exp(2.0 * pair.int_g(n))
    r = (pair.b**2 * Eg * (df * nu_vv + (d2f - 2.0 * df**2 / (f - g)) * nu_v**2)
         - pair.a**2 * Ef * (dg * nu_uu + (d2g - 2.0 * dg**2 / (g - f)) * nu_u**2)
         - f * g * (f - g))
    return ScalarField(nu.grid, r, mask)


def natural_residual_cmc(nu: ScalarField, H) -> ScalarField:
    """Residual of ``Delta ln nu = (H^2 - nu^2) / nu``."""
    n = nu.values
    if np.any(~(n[nu.valid] > 0)):
        raise DomainViolation("CMC natural equation needs nu > 0")
    with np.errstate(invalid="ignore", divide="ignore"):
        lap = laplacian(nu.replace(np.log(n)))
        r = lap.values - (H**2 - n**2) / n
    return ScalarField(nu.grid, r, lap.mask)


def natural_residual_constK(nu: ScalarField, K) -> ScalarField:
    """Residual of ``nu_vv + K nu_uu - 2 nu (nu_v^2 + K nu_u^2)/(nu^2 - K) - K nu``."""
    n = nu.values
    if np.any(~(n[nu.valid] ** 2 - K > 0)):
        raise DomainViolation("constant curvature natural equation needs nu^2 - K > 0")
    nu_u, nu_v, nu_uu, nu_vv, mask = _derivs(nu)
    r = nu_vv + K * nu_uu - 2.0 * n * (nu_v**2 + K * nu_u**2) / (n**2 - K) - K * n
    return ScalarField(nu.grid, r, mask)


# ---------------------------------------------------------------------------
# lambda substitutions

def nu_to_lambda(nu, case, H=None):
    """Inverse substitution, array in, array out.

    minimal ``lambda = ln nu``; cmc ``lambda = ln(nu/H)``;
    K+1 ``lambda = -2 arcoth(nu)`` (needs ``nu > 1``);
    K-1 ``lambda = 2 arctan(nu)`` (needs ``nu > 0``).
    """
    nu = np.asarray(nu, float)
    if case == "minimal":
        if np.any(~(nu > 0)):
            raise DomainViolation("minimal substitution needs nu > 0")
        return np.log(nu)
    if case == "cmc":
        if not H or np.any(~(nu / H > 0)):
            raise DomainViolation("CMC substitution needs nu / H > 0")
        return np.log(nu / H)
    if case == "K+1":
        if np.any(~(nu > 1)):
            raise DomainViolation("K=+1 substitution needs nu > 1 so that lambda < 0")
        return -np.log((nu + 1.0) / (nu - 1.0))
    if case == "K-1":
        if np.any(~(nu > 0)):
            raise DomainViolation("K=-1 substitution needs nu > 0 so that 0 < lambda < pi")
        return 2.0 * np.arctan(nu)
    raise ValueError(f"unknown case {case!r}")


def lambda_to_nu(lam, case, H=None):
    """Forward substitution: ``e^lam``, ``H e^lam``, ``-coth(lam/2)``, ``tan(lam/2)``."""
    lam = np.asarray(lam, float)
    if case == "minimal":
        return np.exp(lam)
    if case == "cmc":
        if not H:
            raise DomainViolation("CMC substitution needs H != 0")
        return H * np.exp(lam)
    if case == "K+1":
        if np.any(~(lam < 0)):
            raise DomainViolation("K=+1 substitution needs lambda < 0")
        return -1.0 / np.tanh(0.5 * lam)
    if case == "K-1":
        if np.any(~((lam > 0) & (lam < np.pi))):
            raise DomainViolation("K=-1 substitution needs 0 < lambda < pi")
        return np.tan(0.5 * lam)
    raise ValueError(f"unknown case {case!r}")


def substitute_lambda(nu: ScalarField, case, H=None) -> ScalarField:
    return nu.replace(nu_to_lambda(np.where(nu.valid, nu.values, _safe(case, H)), case, H))


def nu_from_lambda(lam: ScalarField, case, H=None) -> ScalarField:
    vals = np.where(lam.valid, lam.values, _safe_lambda(case))
    return lam.replace(lambda_to_nu(vals, case, H))


def _safe(case, H):
    return {"minimal": 1.0, "cmc": H or 1.0, "K+1": 2.0, "K-1": 1.0}[case]


def _safe_lambda(case):
    return {"minimal": 0.0, "cmc": 0.0, "K+1": -1.0, "K-1": 1.0}[case]


def natural_residual_lambda(lam: ScalarField, case, H=None) -> ScalarField:
    """Residual of the substituted equation.

    minimal ``Delta lam + e^lam``; cmc ``Delta lam + 2 H sinh lam``;
    K+1 ``Delta lam + sinh lam``; K-1 ``lam_uu - lam_vv - sin lam``.
    """
    l = lam.values
    if case == "K-1":
        lap = laplacian(lam, "hyperbolic")
        return ScalarField(lam.grid, lap.values - np.sin(l), lap.mask)
    lap = laplacian(lam)
    if case == "minimal":
        src = np.exp(l)
    elif case == "cmc":
        src = 2.0 * H * np.sinh(l)
    elif case == "K+1":
        src = np.sinh(l)
    else:
        raise ValueError(f"unknown case {case!r}")
    return ScalarField(lam.grid, lap.values + src, lap.mask)


def substitution_factor(nu, case):
    """Smooth factor with ``lambda residual = factor * nu residual``.

    The nu residual is the CMC form for minimal/cmc and the constant
    curvature form for K+1/K-1.
    """
    nu = np.asarray(nu, float)
    if case in ("minimal", "cmc"):
        return np.ones_like(nu)
    if case == "K+1":
        return 2.0 / (nu**2 - 1.0)
    if case == "K-1":
        return -2.0 / (1.0 + nu**2)
    raise ValueError(f"unknown case {case!r}")


def specialization_factor(nu, pair: WeingartenPair):
    """Factor with ``general residual = factor * specialized residual``.

    For canonical CMC scaling the specialized residual is the ``Delta ln nu``
    form; for canonical constant K it is the constant curvature form.
    """
    nu = np.asarray(nu, float)
    if pair.case in ("minimal", "cmc"):
        return 2.0 * nu**2
    if pair.case == "constK":
        return pair.eps * (nu**2 - pair.K) / nu**2
    raise ValueError("no specialized form for a general pair")


def specialized_residual(nu: ScalarField, pair: WeingartenPair) -> ScalarField:
    if pair.case in ("minimal", "cmc"):
        return natural_residual_cmc(nu, pair.H)
    if pair.case == "constK":
        return natural_residual_constK(nu, pair.K)
    raise ValueError("no specialized form for a general pair")


# ---------------------------------------------------------------------------
# from a solution to the invariants

def nondegeneracy_mask(nu: ScalarField, tol=1e-12):
    """Nodes where ``nu_u nu_v`` is nonzero (relative to ``tol``)."""
    nu_u = partial_derivative(nu, "u")
    nu_v = partial_derivative(nu, "v")
    scale = max(float(np.max(np.abs(nu_u.values))), float(np.max(np.abs(nu_v.values))), 1e-300)
    return (np.abs(nu_u.values) > tol * scale) & (np.abs(nu_v.values) > tol * scale)


def invariants_from_nu(nu: ScalarField, pair: WeingartenPair, mask_degenerate=False,
                       tol=1e-12) -> InvariantQuadruple:
    """Invariant quadruple generated by a solution ``nu``.

    ``nu1 = f``, ``nu2 = g``,
    ``gamma1 = b e^{Ig} f' nu_v / (f - g)``,
    ``gamma2 = -a e^{If} g' nu_u / (g - f)``.
    With the canonical scalings these reduce to the closed forms of the
    CMC and constant curvature cases.  The derivatives of ``nu1, nu2`` are
    attached through the chain rule.
    """
    n = nu.values
    valid = nu.valid
    pair.check_domain(n, valid)
    nd = nondegeneracy_mask(nu, tol)
    bad = valid & ~nd
    if bad.any():
        if not mask_degenerate:
            i, j = np.argwhere(bad)[0]
            raise ZeroGradient(f"nu_u nu_v vanishes at node ({i}, {j})")
        valid = valid & nd
    nu_u = partial_derivative(nu, "u")
    nu_v = partial_derivative(nu, "v")
    f, g = pair.f(n), pair.g(n)
    df, dg = pair.df(n), pair.dg(n)
    g1 = pair.b * np.exp(pair.int_g(n)) * df * nu_v.values / (f - g)
    g2 = -pair.a * np.exp(pair.int_f(n)) * dg * nu_u.values / (g - f)
    grid = nu.grid
    sf = lambda a: ScalarField(grid, a)
    mask = combine_masks(valid, nu_u.mask, nu_v.mask)
    return InvariantQuadruple(
        sf(f), sf(g), sf(g1), sf(g2), mask,
        {"nu1_u": sf(df * nu_u.values), "nu1_v": sf(df * nu_v.values),
         "nu2_u": sf(dg * nu_u.values), "nu2_v": sf(dg * nu_v.values)})


def invariants_from_lambda(lam: ScalarField, case, H=None, nu0=None) -> InvariantQuadruple:
    """Quadruple from a solution of a substituted equation, canonical scaling."""
    from .weingarten import pair_for_case
    nu = nu_from_lambda(lam, case, H)
    if nu0 is None:
        nu0 = float(nu.values[nu.grid.nu // 2, nu.grid.nv // 2])
    pair = pair_for_case("cmc" if case in ("minimal", "cmc") else case,
                         H=0.0 if case == "minimal" else H, nu0=nu0)
    return invariants_from_nu(nu, pair)


def weingarten_torsions(nu: ScalarField, pair: WeingartenPair, gamma1, gamma2, C):
    """Torsions of both families of curvature lines in geometric parameters.

    ``C = sqrt(EG) (nu1 - nu2)`` is the constant of the geometric chart.
    ``tau1 = -[f f' nu_uv + (f f'' - f'^2 (2f - g)/(f - g)) nu_u nu_v] / (C (f^2 + gamma1^2))``
    and symmetrically ``tau2`` with ``f, g`` swapped and the opposite sign.
    """
    n = nu.values
    nu_u = partial_derivative(nu, "u").values
    nu_v = partial_derivative(nu, "v").values
    nu_uv = mixed_derivative(nu).values
    f, g = pair.f(n), pair.g(n)
    df, dg = pair.df(n), pair.dg(n)
    d2f, d2g = pair.d2f(n), pair.d2g(n)
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = -(f * df * nu_uv + (f * d2f - df**2 * (2 * f - g) / (f - g)) * nu_u * nu_v) \
            / (C * (f**2 + np.asarray(gamma1) ** 2))
        t2 = (g * dg * nu_uv + (g * d2g - dg**2 * (2 * g - f) / (g - f)) * nu_u * nu_v) \
            / (C * (g**2 + np.asarray(gamma2) ** 2))
    return t1, t2


def lambda_validity_mask(lam, case):
    """Solver-output masks: ``lambda < 0`` for K+1, ``0 < lambda < pi`` for K-1."""
    lam = np.asarray(lam, float)
    if case == "K+1":
        return lam < 0
    if case == "K-1":
        return (lam > 0) & (lam < np.pi)
    return np.isfinite(lam)
