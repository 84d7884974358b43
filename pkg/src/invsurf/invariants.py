"""Invariant quadruples and the compatibility conditions they must satisfy.

A principal parametrization is described by the principal curvatures
``nu1, nu2`` and the geodesic curvatures ``gamma1, gamma2`` of the two
families of curvature lines.  This module recovers the fundamental forms
from such a quadruple and evaluates the Codazzi and Gauss residuals and
the Bonnet admissibility conditions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from .errors import (GridMismatch, OrientationViolation, StrongRegularityViolation,
                     VanishingCurvature)
from .grid import (Mask, ParamGrid, ScalarField, combine_masks, diff_array,
                   max_norm, partial_derivative)

DERIVATIVE_KEYS = ("nu1_u", "nu1_v", "nu2_u", "nu2_v", "gamma1_v", "gamma2_u")
DEFAULT_REGULARITY_TOL = 1e-9


@dataclass(frozen=True)
class InvariantQuadruple:
    nu1: ScalarField
    nu2: ScalarField
    gamma1: ScalarField
    gamma2: ScalarField
    mask: Optional[np.ndarray] = None
    derivatives: Dict[str, ScalarField] = field(default_factory=dict)

    def __post_init__(self):
        g = self.nu1.grid
        for f in (self.nu2, self.gamma1, self.gamma2, *self.derivatives.values()):
            if not f.grid.close_to(g):
                raise GridMismatch("quadruple fields live on different grids")
        unknown = set(self.derivatives) - set(DERIVATIVE_KEYS)
        if unknown:
            raise KeyError(f"unknown derivative fields {sorted(unknown)}")
        if self.mask is not None:
            m = np.array(self.mask.flags if isinstance(self.mask, Mask) else self.mask, bool)
            m.setflags(write=False)
            object.__setattr__(self, "mask", m)

    @property
    def grid(self) -> ParamGrid:
        return self.nu1.grid

    @property
    def valid(self):
        """Nodes that are valid in the explicit mask and in every field."""
        m = combine_masks(self.mask, self.nu1.mask, self.nu2.mask,
                          self.gamma1.mask, self.gamma2.mask)
        return np.ones(self.grid.shape, bool) if m is None else m

    @classmethod
    def from_arrays(cls, grid, nu1, nu2, gamma1, gamma2, mask=None, **derivatives):
        sf = lambda a: ScalarField(grid, np.broadcast_to(a, grid.shape))
        return cls(sf(nu1), sf(nu2), sf(gamma1), sf(gamma2), mask,
                   {k: sf(v) for k, v in derivatives.items() if v is not None})

    def with_mask(self, mask):
        return InvariantQuadruple(self.nu1, self.nu2, self.gamma1, self.gamma2,
                                  combine_masks(self.mask, mask), dict(self.derivatives))

    def without_derivatives(self):
        return InvariantQuadruple(self.nu1, self.nu2, self.gamma1, self.gamma2, self.mask)

    def derivative(self, name):
        """Analytic derivative field when supplied, else central differences."""
        if name in self.derivatives:
            return self.derivatives[name].values
        base, axis = name.rsplit("_", 1)
        f = getattr(self, base)
        with np.errstate(invalid="ignore"):
            return diff_array(f.values, self.grid.spacing(axis), 0 if axis == "u" else 1)

    def gauss_curvature(self):
        return self.nu1.values * self.nu2.values


@dataclass(frozen=True)
class FundamentalForms:
    E: ScalarField
    F: ScalarField
    G: ScalarField
    L: ScalarField
    M: ScalarField
    N: ScalarField

    @property
    def grid(self):
        return self.E.grid

    @property
    def mask(self):
        return combine_masks(self.E.mask, self.G.mask)

    @classmethod
    def principal(cls, grid, E, G, L, N, mask=None):
        """Forms of a principal net (``F = M = 0``)."""
        sf = lambda a: ScalarField(grid, np.broadcast_to(a, grid.shape), mask)
        zero = np.zeros(grid.shape)
        return cls(sf(E), sf(zero), sf(G), sf(L), sf(zero), sf(N))

    def sqrt_E(self):
        return np.sqrt(self.E.values)

    def sqrt_G(self):
        return np.sqrt(self.G.values)


@dataclass(frozen=True)
class PrincipalLineFrenet:
    kappa1: ScalarField
    kappa2: ScalarField
    tau1: ScalarField
    tau2: ScalarField
    theta1: ScalarField
    theta2: ScalarField


def strong_regularity_mask(q: InvariantQuadruple, tol=DEFAULT_REGULARITY_TOL) -> Mask:
    """Nodes where ``(nu1 - nu2) gamma1 gamma2 != 0`` with ``nu1 > nu2``."""
    d = q.nu1.values - q.nu2.values
    with np.errstate(invalid="ignore"):
        ok = ((np.abs(d) > tol) & (d > 0)
              & (np.abs(q.gamma1.values) > tol) & (np.abs(q.gamma2.values) > tol))
    return Mask(q.grid, ok & q.valid)


def metric_from_invariants(q: InvariantQuadruple):
    """``sqrt(E)`` and ``sqrt(G)`` expressed through the invariants.

    Returns the raw (signed) values; callers decide what to do with
    non-positive entries.
    """
    d = q.nu1.values - q.nu2.values
    with np.errstate(divide="ignore", invalid="ignore"):
        sE = q.derivative("nu2_u") / (q.gamma2.values * d)
        sG = q.derivative("nu1_v") / (q.gamma1.values * d)
    return sE, sG


def forms_from_invariants(q: InvariantQuadruple, tol=DEFAULT_REGULARITY_TOL) -> FundamentalForms:
    """First and second fundamental forms determined by the quadruple.

    Raises
    ------
    StrongRegularityViolation
        If ``gamma1``, ``gamma2`` or ``nu1 - nu2`` vanish at a valid node.
    OrientationViolation
        If ``sqrt(E)`` or ``sqrt(G)`` comes out non-positive at a valid node.
    """
    valid = q.valid
    if not valid.any():
        raise StrongRegularityViolation("no valid nodes in the quadruple")
    d = q.nu1.values - q.nu2.values
    for name, arr in (("gamma1", q.gamma1.values), ("gamma2", q.gamma2.values),
                      ("nu1 - nu2", d)):
        bad = valid & ~(np.abs(arr) > tol)
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise StrongRegularityViolation(f"{name} vanishes at node ({i}, {j})")
    sE, sG = metric_from_invariants(q)
    for name, arr in (("sqrt(E)", sE), ("sqrt(G)", sG)):
        bad = valid & ~(arr > 0)
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise OrientationViolation(f"{name} = {arr[i, j]:.6g} <= 0 at node ({i}, {j})")
    E = sE**2
    G = sG**2
    return FundamentalForms.principal(q.grid, E, G, q.nu1.values * E, q.nu2.values * G, valid)


def _forms_masks(q, forms):
    return combine_masks(q.valid, forms.mask)


def codazzi_residual(q: InvariantQuadruple, forms: FundamentalForms):
    """Residuals of ``gamma1 = (nu1)_v / (sqrt(G)(nu1-nu2))`` and its partner."""
    d = q.nu1.values - q.nu2.values
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = q.gamma1.values - q.derivative("nu1_v") / (forms.sqrt_G() * d)
        r2 = q.gamma2.values - q.derivative("nu2_u") / (forms.sqrt_E() * d)
    mask = _forms_masks(q, forms)
    return ScalarField(q.grid, r1, mask), ScalarField(q.grid, r2, mask)


def gauss_residual(q: InvariantQuadruple, forms: FundamentalForms) -> ScalarField:
    """``(g1)_v/sqrt(G) - (g2)_u/sqrt(E) - (g1^2 + g2^2) - nu1 nu2``."""
    g1 = q.gamma1.values
    g2 = q.gamma2.values
    with np.errstate(divide="ignore", invalid="ignore"):
        r = (q.derivative("gamma1_v") / forms.sqrt_G()
             - q.derivative("gamma2_u") / forms.sqrt_E()
             - (g1**2 + g2**2) - q.nu1.values * q.nu2.values)
    return ScalarField(q.grid, r, _forms_masks(q, forms))


@dataclass
class AdmissibilityReport:
    tol: float
    condition1: Dict[str, bool]
    residuals: Dict[str, float]
    fields: Dict[str, ScalarField]
    valid_nodes: int

    @property
    def failing(self):
        out = [f"1:{k}" for k, ok in self.condition1.items() if not ok]
        out += [k for k, r in self.residuals.items() if not r <= self.tol]
        return out

    @property
    def passed(self):
        return not self.failing

    def summary(self):
        return {"tol": self.tol, "condition1": dict(self.condition1),
                "residuals": dict(self.residuals), "valid_nodes": self.valid_nodes,
                "passed": self.passed, "failing": self.failing}


def default_admissibility_tol(grid: ParamGrid):
    h = max(grid.du, grid.dv)
    return 10.0 * h * h


def bonnet_admissibility(q: InvariantQuadruple, tol=None) -> AdmissibilityReport:
    """Check the three groups of hypotheses of the invariant Bonnet theorem.

    Condition 1 is pointwise (signs).  Conditions 2.1 (two logarithmic
    identities) and 2.2 (Gauss equation in invariant form) are evaluated as
    residual fields whose max-norms are compared against ``tol``
    (default ``10 h^2``).
    """
    g = q.grid
    if tol is None:
        tol = default_admissibility_tol(g)
    valid = q.valid
    nu1, nu2 = q.nu1.values, q.nu2.values
    g1, g2 = q.gamma1.values, q.gamma2.values
    d = nu1 - nu2
    n1u, n1v = q.derivative("nu1_u"), q.derivative("nu1_v")
    n2u, n2v = q.derivative("nu2_u"), q.derivative("nu2_v")
    with np.errstate(all="ignore"):
        cond1 = {
            "nu1-nu2>0": bool(np.all(d[valid] > 0)),
            "gamma1*(nu1)_v>0": bool(np.all((g1 * n1v)[valid] > 0)),
            "gamma2*(nu2)_u>0": bool(np.all((g2 * n2u)[valid] > 0)),
        }
        log1 = np.log(np.abs(n1v / g1))
        log2 = np.log(np.abs(n2u / g2))
        r211 = diff_array(log1, g.du, 0) - n1u / d
        r212 = diff_array(log2, g.dv, 1) + n2v / d
        dg1sq = 2.0 * g1 * q.derivative("gamma1_v")
        dg2sq = 2.0 * g2 * q.derivative("gamma2_u")
        r22 = 0.5 * d * (dg1sq / n1v - dg2sq / n2u) - (g1**2 + g2**2) - nu1 * nu2
    fields = {
        "2.1a": ScalarField(g, r211, valid),
        "2.1b": ScalarField(g, r212, valid),
        "2.2": ScalarField(g, r22, valid),
    }
    residuals = {k: max_norm(f.values, valid) for k, f in fields.items()}
    for k, f in fields.items():
        if not np.all(np.isfinite(f.values[valid])):
            residuals[k] = float("inf")
    return AdmissibilityReport(float(tol), cond1, residuals, fields, int(valid.sum()))


def principal_line_frenet(q: InvariantQuadruple, forms: FundamentalForms,
                          nu: Optional[ScalarField] = None, pair=None,
                          tol=DEFAULT_REGULARITY_TOL) -> PrincipalLineFrenet:
    """Curvature and torsion of both families of curvature lines.

    By default the torsions are ``tau1 = -X(theta1)``, ``tau2 = -Y(theta2)``
    with ``theta_i = arctan(gamma_i / nu_i)``, evaluated through the
    quotient form so that no branch of ``arctan`` is involved.  When the
    Weingarten generator ``nu`` and its ``pair`` are given and ``(u, v)``
    are geometric parameters, the closed Weingarten expressions are used.
    """
    g = q.grid
    valid = combine_masks(q.valid, forms.mask)
    nu1, nu2 = q.nu1.values, q.nu2.values
    g1, g2 = q.gamma1.values, q.gamma2.values
    k1sq = g1**2 + nu1**2
    k2sq = g2**2 + nu2**2
    for name, ksq in (("family 1", k1sq), ("family 2", k2sq)):
        bad = valid & ~(ksq >= tol)
        if bad.any():
            raise VanishingCurvature(f"gamma^2 + nu^2 vanishes along {name}")
    sE, sG = forms.sqrt_E(), forms.sqrt_G()
    if nu is not None and pair is not None:
        from .natural import weingarten_torsions
        tau1, tau2 = weingarten_torsions(nu, pair, g1, g2, geometric_constant(forms, q))
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            Xn1 = q.derivative("nu1_u") / sE
            Xg1 = diff_array(g1, g.du, 0) / sE
            Yn2 = q.derivative("nu2_v") / sG
            Yg2 = diff_array(g2, g.dv, 1) / sG
            tau1 = (g1 * Xn1 - nu1 * Xg1) / k1sq
            tau2 = (g2 * Yn2 - nu2 * Yg2) / k2sq
    sf = lambda a: ScalarField(g, a, valid)
    return PrincipalLineFrenet(sf(np.sqrt(k1sq)), sf(np.sqrt(k2sq)), sf(tau1), sf(tau2),
                               sf(np.arctan2(g1, nu1)), sf(np.arctan2(g2, nu2)))


def geometric_constant(forms: FundamentalForms, q: InvariantQuadruple):
    """``sqrt(EG) (nu1 - nu2)``, constant exactly for geometric parameters."""
    return np.sqrt(forms.E.values * forms.G.values) * (q.nu1.values - q.nu2.values)
