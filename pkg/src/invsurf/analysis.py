"""Numerical analysis of sampled immersions."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict

import numpy as np
from scipy.interpolate import LSQUnivariateSpline

from .errors import DegenerateImmersion, TooFewSamples
from .grid import ScalarField, _dilate, VectorField3, combine_masks, diff_array, diff2_array
from .invariants import FundamentalForms, InvariantQuadruple


@dataclass
class MeshAnalysis:
    forms: FundamentalForms
    quadruple: InvariantQuadruple
    normal: VectorField3
    defects: Dict[str, float] = field(default_factory=dict)


def _dilated(mask):
    """Nodes whose difference stencils only touch valid samples."""
    m = mask
    for _ in range(2):
        for ax in (0, 1):
            m = _dilate(m, ax, m.shape[ax])
    return m


def mesh_forms(x: VectorField3, tol=1e-12) -> MeshAnalysis:
    """Forms and invariants of a sampled immersion by finite differences.

    The normal is ``x_u x x_v / |x_u x x_v|``.  ``max |F|`` and ``max |M|``
    measure how far the net is from principal and are reported, not
    assumed zero.
    """
    g = x.grid
    X = np.asarray(x.values, float)
    with np.errstate(invalid="ignore"):
        xu = diff_array(X, g.du, 0)
        xv = diff_array(X, g.dv, 1)
        xuu = diff2_array(X, g.du, 0)
        xvv = diff2_array(X, g.dv, 1)
        xuv = diff_array(xu, g.dv, 1)
    n = np.cross(xu, xv)
    area = np.linalg.norm(n, axis=-1)
    valid = x.valid if x.mask is None else _dilated(np.asarray(x.mask, bool))
    if np.any(~(area[valid] > tol)):
        raise DegenerateImmersion("x_u x x_v vanishes at a sampled node")
    with np.errstate(invalid="ignore", divide="ignore"):
        l = n / area[..., None]
    dot = lambda a, b: np.einsum("...k,...k->...", a, b)
    E, F, G = dot(xu, xu), dot(xu, xv), dot(xv, xv)
    L, M, N = dot(xuu, l), dot(xuv, l), dot(xvv, l)
    sf = lambda a: ScalarField(g, a, valid)
    forms = FundamentalForms(sf(E), sf(F), sf(G), sf(L), sf(M), sf(N))
    with np.errstate(invalid="ignore", divide="ignore"):
        nu1, nu2 = L / E, N / G
        g1 = -diff_array(E, g.dv, 1) / (2 * E * np.sqrt(G))
        g2 = diff_array(G, g.du, 0) / (2 * G * np.sqrt(E))
    q = InvariantQuadruple(sf(nu1), sf(nu2), sf(g1), sf(g2), valid)
    vmax = lambda a: float(np.max(np.abs(a[valid]))) if valid.any() else 0.0
    defects = {"max_abs_F": vmax(F), "max_abs_M": vmax(M)}
    return MeshAnalysis(forms, q, VectorField3(g, np.nan_to_num(l), valid), defects)


def weingarten_relation_probe(q: InvariantQuadruple, tol=1e-6, min_samples=100):
    """Detect a functional relation ``nu2 = w(nu1)`` in sampled invariants.

    Candidates, in order: constant Gauss curvature ``nu2 = K/nu1``, constant
    mean curvature ``nu1 + nu2 = 2H``, and a least-squares cubic spline in
    ``nu1``.  The scatter is the largest vertical deviation from the fit.
    """
    valid = q.valid & np.isfinite(q.nu1.values) & np.isfinite(q.nu2.values)
    n1 = q.nu1.values[valid]
    n2 = q.nu2.values[valid]
    if n1.size < min_samples:
        raise TooFewSamples(f"{n1.size} samples, need at least {min_samples}")
    scat = {}
    K = float(np.mean(n1 * n2))
    with np.errstate(divide="ignore", invalid="ignore"):
        scat["K = const"] = float(np.max(np.abs(n2 - K / n1)))
    H = float(np.mean(n1 + n2) / 2)
    scat["H = const"] = float(np.max(np.abs(n2 - (2 * H - n1))))
    scat["general"] = _spline_scatter(n1, n2)
    report = {"K": K, "H": H, "scatter": scat, "tol": tol, "samples": int(n1.size)}
    for name in ("K = const", "H = const", "general"):
        if scat[name] <= tol:
            report.update(relation=name, fit_residual=scat[name])
            return report
    best = min(scat, key=scat.get)
    report.update(relation="none", fit_residual=scat[best])
    return report


def _spline_scatter(x, y):
    order = np.argsort(x, kind="stable")
    x, y = x[order], y[order]
    ux, inv = np.unique(x, return_inverse=True)
    if ux.size < 8:
        return float(np.max(np.ptp(y)))
    # several samples sharing one abscissa must agree for a function to exist
    spread = np.zeros(ux.size)
    np.maximum.at(spread, inv, np.abs(y - np.bincount(inv, y)[inv] / np.bincount(inv)[inv]))
    ym = np.bincount(inv, y) / np.bincount(inv)
    nk = int(min(max(ux.size // 20, 1), 50))
    knots = np.quantile(ux, np.linspace(0, 1, nk + 2)[1:-1])
    knots = np.unique(knots[(knots > ux[0]) & (knots < ux[-1])])
    try:
        sp = LSQUnivariateSpline(ux, ym, knots, k=3)
        fit = sp(ux)
    except ValueError:
        fit = np.polyval(np.polyfit(ux, ym, 3), ux)
    return float(max(np.max(np.abs(ym - fit)), np.max(spread)))
