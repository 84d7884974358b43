"""Solvers for the substituted natural equations.

Elliptic cases (Dirichlet problem on a rectangle, five-point Laplacian,
damped Newton):

* ``liouville``      ``Delta lam + e^lam = s``
* ``sinh_gordon``    ``Delta lam + 2 H sinh lam = s``
* ``sinh_gordon_K1`` ``Delta lam + sinh lam = s``

Hyperbolic case: ``lam_vv = lam_uu - sin lam`` marched in ``v`` by
leapfrog from data on one line.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from .errors import BlowUp, CFLViolation, LineSearchFailure, NoConvergence
from .grid import ParamGrid, ScalarField

ELLIPTIC_KINDS = ("liouville", "sinh_gordon", "sinh_gordon_K1")


@dataclass
class EllipticResult:
    lam: ScalarField
    iterations: int
    residuals: List[float] = field(default_factory=list)
    updates: List[float] = field(default_factory=list)
    damping: List[float] = field(default_factory=list)

    @property
    def residual(self):
        return self.residuals[-1]


def _nonlinearity(kind, H):
    if kind == "liouville":
        return np.exp, np.exp
    if kind == "sinh_gordon":
        if H is None:
            raise ValueError("sinh_gordon needs H")
        return (lambda x: 2.0 * H * np.sinh(x)), (lambda x: 2.0 * H * np.cosh(x))
    if kind == "sinh_gordon_K1":
        return np.sinh, np.cosh
    raise ValueError(f"unknown elliptic kind {kind!r}")


def _laplacian_matrix(m, n, du, dv):
    """Five-point Laplacian on an ``m x n`` block of interior unknowns (C order)."""
    Du = sp.diags([np.ones(m - 1), -2.0 * np.ones(m), np.ones(m - 1)], [-1, 0, 1]) / du**2
    Dv = sp.diags([np.ones(n - 1), -2.0 * np.ones(n), np.ones(n - 1)], [-1, 0, 1]) / dv**2
    return (sp.kron(Du, sp.identity(n)) + sp.kron(sp.identity(m), Dv)).tocsc()


def discrete_laplacian(lam, du, dv):
    """Five-point Laplacian at interior nodes of a full array."""
    return ((lam[2:, 1:-1] - 2 * lam[1:-1, 1:-1] + lam[:-2, 1:-1]) / du**2
            + (lam[1:-1, 2:] - 2 * lam[1:-1, 1:-1] + lam[1:-1, :-2]) / dv**2)


def solve_elliptic(kind, boundary: ScalarField, H=None, source=None, initial=None,
                   update_tol=1e-11, residual_tol=1e-10, max_iter=500,
                   min_damping=1e-10) -> EllipticResult:
    """Damped Newton for the discrete Dirichlet problem.

    ``boundary`` supplies the values on the edge nodes (interior values are
    used as the initial guess unless ``initial`` is given).  ``source`` is
    an optional forcing array on the full grid.  Iteration stops when the
    max-norm update is at most ``update_tol`` and the max-norm discrete
    residual at most ``residual_tol``.
    """
    N, dN = _nonlinearity(kind, H)
    g = boundary.grid
    lam = np.array(boundary.values if initial is None else initial, float)
    lam[0], lam[-1] = boundary.values[0], boundary.values[-1]
    lam[:, 0], lam[:, -1] = boundary.values[:, 0], boundary.values[:, -1]
    if not np.all(np.isfinite(lam)):
        raise ValueError("boundary data and initial guess must be finite")
    s = np.zeros((g.nu - 2, g.nv - 2)) if source is None else np.asarray(source, float)[1:-1, 1:-1]
    Lap = _laplacian_matrix(g.nu - 2, g.nv - 2, g.du, g.dv)

    def F(x):
        return discrete_laplacian(x, g.du, g.dv) + N(x[1:-1, 1:-1]) - s

    r = F(lam)
    rn = float(np.max(np.abs(r)))
    out = EllipticResult(None, 0, [rn], [], [])
    for it in range(1, max_iter + 1):
        J = Lap + sp.diags(dN(lam[1:-1, 1:-1]).ravel())
        delta = -spsolve(J, r.ravel()).reshape(r.shape)
        alpha = 1.0
        while True:
            trial = lam.copy()
            trial[1:-1, 1:-1] += alpha * delta
            with np.errstate(over="ignore", invalid="ignore"):
                rt = F(trial)
            rtn = float(np.max(np.abs(rt)))
            if rtn <= (1.0 - 1e-4 * alpha) * rn or rtn <= residual_tol:
                break
            alpha *= 0.5
            if alpha < min_damping:
                raise LineSearchFailure(f"damping underflow at Newton step {it} (residual {rn:.3e})")
        lam, r, rn = trial, rt, rtn
        upd = alpha * float(np.max(np.abs(delta)))
        out.residuals.append(rn)
        out.updates.append(upd)
        out.damping.append(alpha)
        if upd <= update_tol and rn <= residual_tol:
            out.iterations = it
            out.lam = ScalarField(g, lam)
            return out
    raise NoConvergence(max_iter, rn)


@dataclass
class HyperbolicResult:
    lam: ScalarField
    cone: np.ndarray
    admissible: np.ndarray


def solve_hyperbolic_sine_gordon(lam0, lam_v0, u0, du, v0, span, dv=None,
                                 blowup=1e3) -> HyperbolicResult:
    """March ``lam_vv = lam_uu - sin lam`` from ``v = v0`` over ``span``.

    ``lam0`` and ``lam_v0`` are samples on ``u0 + i du``.  Leapfrog in
    ``v`` with a Taylor first step; every step loses one node at each end
    (the domain of dependence).  ``cone`` marks those nodes; ``admissible``
    also requires ``0 < lam < pi`` where ``nu = tan(lam/2)`` is a valid
    generator.
    """
    lam0 = np.asarray(lam0, float)
    lam_v0 = np.asarray(lam_v0, float)
    dv = du if dv is None else float(dv)
    if dv > du * (1 + 1e-12):
        raise CFLViolation(f"dv = {dv} exceeds du = {du}")
    nv = int(round(span / dv)) + 1
    nu = lam0.size
    grid = ParamGrid(u0, v0, du, dv, nu, max(nv, 3))
    out = np.full(grid.shape, np.nan)
    out[:, 0] = lam0

    def rhs(x):
        r = np.full_like(x, np.nan)
        r[1:-1] = (x[2:] - 2 * x[1:-1] + x[:-2]) / du**2 - np.sin(x[1:-1])
        return r

    out[:, 1] = lam0 + dv * lam_v0 + 0.5 * dv**2 * rhs(lam0)
    for k in range(1, grid.nv - 1):
        out[:, k + 1] = 2 * out[:, k] - out[:, k - 1] + dv**2 * rhs(out[:, k])
        if np.nanmax(np.abs(out[:, k + 1]), initial=0.0) > blowup:
            raise BlowUp(f"|lambda| exceeded {blowup} at v = {v0 + (k + 1) * dv}")
    i = np.arange(nu)[:, None]
    k = np.arange(grid.nv)[None, :]
    cone = (i >= k) & (i <= nu - 1 - k)
    with np.errstate(invalid="ignore"):
        admissible = cone & (out > 0) & (out < np.pi)
    out[~cone] = np.nan
    return HyperbolicResult(ScalarField(grid, out, cone), cone, admissible)
