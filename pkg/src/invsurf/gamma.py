"""Surfaces whose first family of curvature lines are geodesics (class Gamma).

A plane profile ``(lambda(u), mu(u))`` is carried along a space curve
``x(v)`` in the plane spanned by a torse-forming normal pair ``e1, e2``:
``Z(u, v) = x(v) + lambda(u) e1(v) + mu(u) e2(v)``.  The module also
holds the canal-surface curvature formula and the rotational and
circle-family tests.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import CharacteristicDegenerate, DegenerateCurve
from .frames import expm_skew
from .grid import ParamGrid, ScalarField, VectorField3, cumulative_integral, diff_array
from .invariants import FundamentalForms, InvariantQuadruple, PrincipalLineFrenet


@dataclass(frozen=True)
class SpaceCurve:
    v: np.ndarray
    x: np.ndarray
    t: np.ndarray
    n: np.ndarray
    b: np.ndarray
    kappa: np.ndarray
    tau: np.ndarray

    @property
    def h(self):
        return float(self.v[1] - self.v[0])


@dataclass(frozen=True)
class TorseFrame:
    t: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    theta: np.ndarray


@dataclass(frozen=True)
class PlaneProfile:
    u: np.ndarray
    lam: np.ndarray
    mu: np.ndarray
    dlam: np.ndarray
    dmu: np.ndarray
    kappa1: np.ndarray
    nonvanishing: bool = True

    @property
    def h(self):
        return float(self.u[1] - self.u[0])


def _frenet_generator(kappa, tau):
    S = np.zeros(np.shape(kappa) + (3, 3))
    S[..., 0, 1] = kappa
    S[..., 1, 2] = tau
    return S - np.swapaxes(S, -1, -2)


def _step_integral(S, h):
    """``int_0^h exp(s S) ds`` for skew ``S`` (batched)."""
    w = np.stack([S[..., 2, 1], S[..., 0, 2], S[..., 1, 0]], axis=-1)
    th = np.linalg.norm(w, axis=-1)[..., None, None]
    x = th * h
    small = x < 1e-4
    safe = np.where(small, 1.0, th)
    c1 = np.where(small, h**2 / 2 - x**2 * h**2 / 24, (1 - np.cos(x)) / safe**2)
    c2 = np.where(small, h**3 / 6 - x**2 * h**3 / 120, (x - np.sin(x)) / safe**3)
    return h * np.eye(3) + c1 * S + c2 * (S @ S)


def space_curve(v, kappa, tau, x0=(0.0, 0.0, 0.0), frame0=None) -> SpaceCurve:
    """Integrate the Frenet equations for curvature and torsion samples.

    Each step uses the constant Darboux rotation built from the step
    averages of ``kappa`` and ``tau``; frame and position updates are exact
    when both are constant (circles, helices).
    """
    v = np.asarray(v, float)
    kappa = np.broadcast_to(np.asarray(kappa, float), v.shape)
    tau = np.broadcast_to(np.asarray(tau, float), v.shape)
    if np.any(~(kappa > 0)):
        raise DegenerateCurve("curvature must be positive along the curve")
    h = v[1] - v[0]
    S = _frenet_generator(0.5 * (kappa[1:] + kappa[:-1]), 0.5 * (tau[1:] + tau[:-1]))
    R = expm_skew(h * S)
    Q = _step_integral(S, h)
    F = np.empty((v.size, 3, 3))
    x = np.empty((v.size, 3))
    F[0] = np.eye(3) if frame0 is None else np.asarray(frame0, float)
    x[0] = x0
    for k in range(v.size - 1):
        x[k + 1] = x[k] + Q[k][0] @ F[k]
        F[k + 1] = R[k] @ F[k]
    return SpaceCurve(v, x, F[:, 0], F[:, 1], F[:, 2], np.array(kappa), np.array(tau))


def circle_curve(radius, v) -> SpaceCurve:
    """Unit-speed circle of the given radius in the ``xy`` plane (``tau = 0``)."""
    v = np.asarray(v, float)
    s = v / radius
    z = np.zeros_like(v)
    x = radius * np.stack([np.cos(s), np.sin(s), z], -1)
    t = np.stack([-np.sin(s), np.cos(s), z], -1)
    n = np.stack([-np.cos(s), -np.sin(s), z], -1)
    b = np.stack([z, z, z + 1.0], -1)
    return SpaceCurve(v, x, t, n, b, np.full_like(v, 1.0 / radius), z)


def helix_curve(a, b, v) -> SpaceCurve:
    """Unit-speed helix ``(a cos s, a sin s, b s)``, ``s = v / sqrt(a^2 + b^2)``."""
    v = np.asarray(v, float)
    c = np.hypot(a, b)
    s = v / c
    x = np.stack([a * np.cos(s), a * np.sin(s), b * s], -1)
    t = np.stack([-a * np.sin(s), a * np.cos(s), np.full_like(s, b)], -1) / c
    n = np.stack([-np.cos(s), -np.sin(s), np.zeros_like(s)], -1)
    bb = np.cross(t, n)
    return SpaceCurve(v, x, t, n, bb, np.full_like(v, a / c**2), np.full_like(v, b / c**2))


def space_curve_from_points(v, x) -> SpaceCurve:
    """Frenet data of a sampled unit-speed curve by finite differences."""
    v = np.asarray(v, float)
    x = np.asarray(x, float)
    h = v[1] - v[0]
    d1 = diff_array(x, h, 0)
    t = d1 / np.linalg.norm(d1, axis=-1, keepdims=True)
    dt = diff_array(t, h, 0)
    kappa = np.linalg.norm(dt, axis=-1)
    if np.any(~(kappa > 0)):
        raise DegenerateCurve("curvature vanishes on the sampled curve")
    n = dt / kappa[:, None]
    b = np.cross(t, n)
    tau = -np.einsum("ij,ij->i", diff_array(b, h, 0), n)
    return SpaceCurve(v, x, t, n, b, kappa, tau)


def torse_forming_frame(c: SpaceCurve, theta0=0.0) -> TorseFrame:
    """Torse-forming normals ``e1 = cos th n + sin th b``, ``e2 = -sin th n + cos th b``.

    ``th(v) = theta0 - int_0^v tau``.
    """
    if np.any(~(c.kappa > 0)):
        raise DegenerateCurve("curvature must be positive along the curve")
    theta = theta0 - cumulative_integral(c.tau, c.h)
    ct, st = np.cos(theta)[:, None], np.sin(theta)[:, None]
    return TorseFrame(c.t, ct * c.n + st * c.b, -st * c.n + ct * c.b, theta)


def profile_from_curvature(kappa1, h, strict=True) -> PlaneProfile:
    """Plane unit-speed curve with ``phi' = kappa1``, ``lambda' = cos phi``, ``mu' = sin phi``.

    Starts at the origin with unit tangent ``(1, 0)``.  The angle is the
    Simpson antiderivative of ``kappa1``; each step follows the circular
    arc with the step's turning angle, so circles are reproduced exactly
    and the speed is one to round-off.
    """
    k1 = np.asarray(kappa1, float)
    nonvanishing = bool(np.all(k1 > 0) or np.all(k1 < 0))
    if strict and not nonvanishing:
        raise DegenerateCurve("profile curvature kappa1 must not vanish")
    phi = cumulative_integral(k1, h)
    d = np.diff(phi)
    mid = 0.5 * (phi[1:] + phi[:-1])
    sinc = np.sinc(d / (2 * np.pi))
    lam = np.concatenate([[0.0], np.cumsum(h * np.cos(mid) * sinc)])
    mu = np.concatenate([[0.0], np.cumsum(h * np.sin(mid) * sinc)])
    u = h * np.arange(k1.size)
    return PlaneProfile(u, lam, mu, np.cos(phi), np.sin(phi), k1, nonvanishing)


@dataclass
class GammaSurface:
    points: VectorField3
    forms: FundamentalForms
    quadruple: InvariantQuadruple
    curve: SpaceCurve
    frame: TorseFrame
    profile: PlaneProfile
    mask: np.ndarray


def gamma_surface(c: SpaceCurve, profile: PlaneProfile, frame: Optional[TorseFrame] = None,
                  margin=1e-6) -> GammaSurface:
    """Sample ``Z = x + lambda e1 + mu e2`` with its forms and invariants.

    With ``w = 1 - kappa (lambda cos th - mu sin th)``: ``E = 1``,
    ``G = w^2``, ``L = kappa1``, ``N = -kappa (lam' sin th + mu' cos th) w``,
    ``nu1 = kappa1``, ``nu2 = N / G``, ``gamma1 = 0`` and
    ``gamma2 = -kappa (lam' cos th - mu' sin th) / w``.  Nodes on the
    characteristic set ``w = 0`` (within ``margin / kappa``) are masked.
    """
    if frame is None:
        frame = torse_forming_frame(c)
    grid = ParamGrid(float(profile.u[0]), float(c.v[0]), profile.h, c.h,
                     profile.u.size, c.v.size)
    lam, mu = profile.lam[:, None], profile.mu[:, None]
    dl, dm = profile.dlam[:, None], profile.dmu[:, None]
    th = frame.theta[None, :]
    k = c.kappa[None, :]
    p = lam * np.cos(th) - mu * np.sin(th)
    w = 1.0 - k * p
    mask = ~(np.abs(p - 1.0 / k) < margin / k)
    Z = (c.x[None, :, :] + profile.lam[:, None, None] * frame.e1[None]
         + profile.mu[:, None, None] * frame.e2[None])
    with np.errstate(divide="ignore", invalid="ignore"):
        nu2 = -k * (dl * np.sin(th) + dm * np.cos(th)) / w
        g2 = -k * (dl * np.cos(th) - dm * np.sin(th)) / w
    shape = grid.shape
    E = np.ones(shape)
    G = w**2
    L = np.broadcast_to(profile.kappa1[:, None], shape)
    N = -k * (dl * np.sin(th) + dm * np.cos(th)) * w
    forms = FundamentalForms.principal(grid, E, G, L, N, mask)
    q = InvariantQuadruple.from_arrays(grid, L, nu2, np.zeros(shape), g2, mask)
    return GammaSurface(VectorField3(grid, Z, mask), forms, q, c, frame, profile, mask)


def canal_curvatures(R, dR, d2R, k, v):
    """Principal curvatures of a canal surface along its characteristic circles.

    ``nu1 = 1/R`` and
    ``nu2 = -(R'' + s k cos v) / (1 - R'^2 - R R'' - R s k cos v)`` with
    ``s = sqrt(1 - R'^2)``.  Returns ``(nu1, nu2, valid)``; nodes with a
    vanishing denominator are marked invalid.
    """
    R, dR, d2R, k, v = np.broadcast_arrays(*(np.asarray(a, float) for a in (R, dR, d2R, k, v)))
    disc = 1.0 - dR**2
    if np.any(~(disc > 0)):
        raise CharacteristicDegenerate("1 - R'^2 must be positive (real characteristic circles)")
    s = np.sqrt(disc)
    den = disc - R * d2R - R * s * k * np.cos(v)
    valid = np.abs(den) > 1e-14
    with np.errstate(divide="ignore", invalid="ignore"):
        nu2 = np.where(valid, -(d2R + s * k * np.cos(v)) / den, np.nan)
    return 1.0 / R, nu2, valid


def rotational_test(q: Optional[InvariantQuadruple] = None, curve: Optional[SpaceCurve] = None,
                    tol=1e-8):
    """Rotational-surface test: ``gamma1 = 0`` and, for Gamma data, ``kappa`` constant and ``tau = 0``."""
    report = {"tol": tol}
    checks = []
    if q is not None:
        g1 = q.gamma1.values[q.valid]
        report["max_abs_gamma1"] = float(np.max(np.abs(g1)))
        checks.append(report["max_abs_gamma1"] <= tol)
    if curve is not None:
        report["kappa_variation"] = float(np.max(np.abs(curve.kappa - curve.kappa.mean())))
        report["max_abs_tau"] = float(np.max(np.abs(curve.tau)))
        checks += [report["kappa_variation"] <= tol, report["max_abs_tau"] <= tol]
    if not checks:
        raise ValueError("rotational_test needs a quadruple or a curve")
    report["passed"] = bool(all(checks))
    return report


def circle_family_test(frenet: PrincipalLineFrenet, tol=1e-8, mask=None):
    """Which families of curvature lines consist of circles.

    Family 1 (``v = const``) needs ``tau1 = 0`` and ``kappa1`` constant
    along ``u``; family 2 (``u = const``) needs ``tau2 = 0`` and ``kappa2``
    constant along ``v``.
    """
    valid = frenet.kappa1.valid if mask is None else np.asarray(mask, bool)
    out = {}
    for name, kap, tau, axis in (("family1", frenet.kappa1, frenet.tau1, 0),
                                 ("family2", frenet.kappa2, frenet.tau2, 1)):
        k = np.where(valid, kap.values, np.nan)
        var = float(np.nanmax(np.nanmax(k, axis=axis) - np.nanmin(k, axis=axis)))
        t = float(np.max(np.abs(tau.values[valid])))
        out[name] = {"max_abs_tau": t, "kappa_variation": var,
                     "circles": bool(t <= tol and var <= tol)}
    return out
