"""Closed-form test surfaces.

The Kuen surface is provided in its usual principal chart and in the
canonical chart of constant Gauss curvature ``-1``.  ``fields`` holds the
classical closed forms as printed in the literature; ``oriented`` holds
the quadruple that is consistent with a right-handed frame
``l = X x Y`` and the sign conventions of the reconstruction, and
``oriented_immersion`` is the surface that this quadruple reconstructs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from .grid import ParamGrid, ScalarField, VectorField3
from .invariants import DERIVATIVE_KEYS, FundamentalForms, InvariantQuadruple

Evaluator = Callable[[np.ndarray, np.ndarray], np.ndarray]

MIRROR_Y = np.diag([1.0, -1.0, 1.0])


@dataclass(frozen=True)
class AnalyticSurface:
    name: str
    immersion: Evaluator
    fields: Dict[str, Evaluator]
    domain: Tuple[Tuple[float, float], Tuple[float, float]]
    singular: Optional[Evaluator] = None
    oriented: Dict[str, Evaluator] = field(default_factory=dict)
    oriented_immersion: Optional[Evaluator] = None
    violates: Optional[str] = None

    def mask(self, grid: ParamGrid):
        U, V = grid.mesh()
        if self.singular is None:
            return np.ones(grid.shape, bool)
        with np.errstate(all="ignore"):
            return ~np.asarray(self.singular(U, V), bool)

    def evaluate(self, name, u, v, oriented=False):
        src = self.oriented if oriented and name in self.oriented else self.fields
        with np.errstate(all="ignore"):
            return src[name](np.asarray(u, float), np.asarray(v, float))

    def points(self, grid: ParamGrid, oriented=False) -> VectorField3:
        U, V = grid.mesh()
        fn = self.oriented_immersion if oriented and self.oriented_immersion else self.immersion
        with np.errstate(all="ignore"):
            return VectorField3(grid, fn(U, V), self.mask(grid))

    def field(self, name, grid: ParamGrid, oriented=False) -> ScalarField:
        U, V = grid.mesh()
        vals = np.broadcast_to(self.evaluate(name, U, V, oriented), grid.shape)
        return ScalarField(grid, vals, self.mask(grid))

    def forms(self, grid: ParamGrid) -> FundamentalForms:
        m = self.mask(grid)
        get = lambda k: np.broadcast_to(self.evaluate(k, *grid.mesh()), grid.shape)
        return FundamentalForms.principal(grid, get("E"), get("G"), get("L"), get("N"), m)

    def quadruple(self, grid: ParamGrid, oriented=True, derivatives=True) -> InvariantQuadruple:
        U, V = grid.mesh()
        src = self.oriented if oriented and self.oriented else self.fields
        vals = {}
        with np.errstate(all="ignore"):
            for k in ("nu1", "nu2", "gamma1", "gamma2") + (DERIVATIVE_KEYS if derivatives else ()):
                if k in src:
                    vals[k] = np.broadcast_to(src[k](U, V), grid.shape)
        q = InvariantQuadruple.from_arrays(grid, vals.pop("nu1"), vals.pop("nu2"),
                                           vals.pop("gamma1"), vals.pop("gamma2"),
                                           self.mask(grid), **vals)
        return q


def _stack(*c):
    return np.stack(np.broadcast_arrays(*c), axis=-1)


def _kuen_principal():
    w = lambda u, v: u * np.sin(v)
    D = lambda u, v: 1 + w(u, v) ** 2

    def x(u, v):
        s = np.sin(v)
        return _stack(2 * (np.cos(u) + u * np.sin(u)) * s / D(u, v),
                      2 * (np.sin(u) - u * np.cos(u)) * s / D(u, v),
                      np.log(np.tan(v / 2)) + 2 * np.cos(v) / D(u, v))

    f = {
        "E": lambda u, v: 4 * w(u, v) ** 2 / D(u, v) ** 2,
        "F": lambda u, v: 0 * u * v,
        "G": lambda u, v: (1 - w(u, v) ** 2) ** 2 / (np.sin(v) ** 2 * D(u, v) ** 2),
        "L": lambda u, v: -2 * w(u, v) * (1 - w(u, v) ** 2) / D(u, v) ** 2,
        "M": lambda u, v: 0 * u * v,
        "N": lambda u, v: 2 * u / np.sin(v) * (1 - w(u, v) ** 2) / D(u, v) ** 2,
        "nu1": lambda u, v: -(1 - w(u, v) ** 2) / (2 * w(u, v)),
        "nu2": lambda u, v: 2 * w(u, v) / (1 - w(u, v) ** 2),
        "gamma1": lambda u, v: -np.cos(v) + 0 * u,
        "gamma2": lambda u, v: -2 * np.sin(v) / (1 - w(u, v) ** 2),
        "nu1_u": lambda u, v: np.sin(v) * D(u, v) / (2 * w(u, v) ** 2),
        "nu1_v": lambda u, v: u * np.cos(v) * D(u, v) / (2 * w(u, v) ** 2),
        "nu2_u": lambda u, v: np.sin(v) * 2 * D(u, v) / (1 - w(u, v) ** 2) ** 2,
        "nu2_v": lambda u, v: u * np.cos(v) * 2 * D(u, v) / (1 - w(u, v) ** 2) ** 2,
        "gamma1_v": lambda u, v: np.sin(v) + 0 * u,
        "gamma2_u": lambda u, v: -4 * w(u, v) * np.sin(v) ** 2 / (1 - w(u, v) ** 2) ** 2,
    }
    # the closed forms use the signed root of G, which is negative for u sin v > 1;
    # a right-handed frame flips the normal there, hence nu1, nu2 and gamma1
    sig = lambda u, v: np.sign(1 - w(u, v) ** 2)
    flip = {"nu1", "nu2", "gamma1", "nu1_u", "nu1_v", "nu2_u", "nu2_v", "gamma1_v"}
    oriented = {k: ((lambda fn: lambda u, v: sig(u, v) * fn(u, v))(fn) if k in flip else fn)
                for k, fn in f.items()}
    singular = lambda u, v: (np.abs(1 - w(u, v)) < 1e-6) | (w(u, v) <= 0) | (np.sin(v) <= 0)
    return AnalyticSurface("kuen-principal", x, f, ((0.0, 2 * np.pi), (0.0, np.pi / 2)),
                           singular, oriented, x)


def _kuen_canonical():
    c = lambda v: np.cosh(v)
    D = lambda u, v: u**2 + c(v) ** 2
    P = lambda u, v: u**2 - c(v) ** 2

    def x(u, v):
        return _stack(2 * (np.cos(u) + u * np.sin(u)) * c(v) / D(u, v),
                      2 * (np.sin(u) - u * np.cos(u)) * c(v) / D(u, v),
                      v - np.sinh(2 * v) / D(u, v))

    nu1 = lambda u, v: P(u, v) / (2 * u * c(v))
    nu1_u = lambda u, v: D(u, v) / (2 * u**2 * c(v))
    nu1_v = lambda u, v: -np.sinh(v) * D(u, v) / (2 * u * c(v) ** 2)
    f = {
        "E": lambda u, v: 4 * u**2 * c(v) ** 2 / D(u, v) ** 2,
        "F": lambda u, v: 0 * u * v,
        "G": lambda u, v: P(u, v) ** 2 / D(u, v) ** 2,
        "L": lambda u, v: 2 * u * c(v) * P(u, v) / D(u, v) ** 2,
        "M": lambda u, v: 0 * u * v,
        "N": lambda u, v: -2 * u * c(v) * P(u, v) / D(u, v) ** 2,
        "nu1": nu1,
        "nu2": lambda u, v: -2 * u * c(v) / P(u, v),
        "gamma1": lambda u, v: np.tanh(v) + 0 * u,
        "gamma2": lambda u, v: 2 * c(v) / P(u, v),
        "nu1_u": nu1_u,
        "nu1_v": nu1_v,
        "nu2_u": lambda u, v: nu1_u(u, v) / nu1(u, v) ** 2,
        "nu2_v": lambda u, v: nu1_v(u, v) / nu1(u, v) ** 2,
        "gamma1_v": lambda u, v: 1 / c(v) ** 2 + 0 * u,
        "gamma2_u": lambda u, v: -4 * u * c(v) / P(u, v) ** 2,
    }
    # the closed-form quadruple with gamma1 = -tanh v belongs to the mirror
    # image diag(1, -1, 1) x; on the other side of u = cosh v the signed
    # root of G flips the normal
    sig = lambda u, v: np.sign(P(u, v))
    oriented = dict(f)
    for k in ("nu1", "nu2", "nu1_u", "nu1_v", "nu2_u", "nu2_v"):
        oriented[k] = (lambda fn: lambda u, v: sig(u, v) * fn(u, v))(f[k])
    oriented["gamma1"] = lambda u, v: -sig(u, v) * np.tanh(v) + 0 * u
    oriented["gamma1_v"] = lambda u, v: -sig(u, v) / c(v) ** 2 + 0 * u
    mirrored = lambda u, v: x(u, v) @ MIRROR_Y
    singular = lambda u, v: (np.abs(u - c(v)) < 1e-6) | (np.abs(v) < 1e-9) | (u <= 0)
    return AnalyticSurface("kuen-canonical", x, f, ((2.6, 3.4), (0.4, 1.2)),
                           singular, oriented, mirrored)


def kuen(chart="canonical") -> AnalyticSurface:
    """Kuen surface in the ``'principal'`` or ``'canonical'`` chart."""
    if chart == "principal":
        return _kuen_principal()
    if chart == "canonical":
        return _kuen_canonical()
    raise ValueError(f"unknown chart {chart!r}")


def sphere(r=2.0) -> AnalyticSurface:
    x = lambda u, v: r * _stack(np.cos(u) * np.cos(v), np.sin(u) * np.cos(v), np.sin(v))
    z = lambda u, v: 0 * u * v
    f = {
        "E": lambda u, v: r**2 * np.cos(v) ** 2 + 0 * u, "F": z,
        "G": lambda u, v: r**2 + 0 * u * v,
        "L": lambda u, v: -r * np.cos(v) ** 2 + 0 * u, "M": z,
        "N": lambda u, v: -r + 0 * u * v,
        "nu1": lambda u, v: -1 / r + 0 * u * v, "nu2": lambda u, v: -1 / r + 0 * u * v,
        "gamma1": lambda u, v: np.tan(v) / r + 0 * u, "gamma2": z,
    }
    return AnalyticSurface("sphere", x, f, ((0.1, 6.0), (-1.2, 1.2)),
                           lambda u, v: np.abs(np.cos(v)) < 1e-9, dict(f), x, "umbilical")


def catenoid() -> AnalyticSurface:
    x = lambda u, v: _stack(np.cosh(u) * np.cos(v), np.cosh(u) * np.sin(v), u + 0 * v)
    z = lambda u, v: 0 * u * v
    ch2 = lambda u, v: np.cosh(u) ** 2 + 0 * v
    f = {
        "E": ch2, "F": z, "G": ch2,
        "L": lambda u, v: -1 + 0 * u * v, "M": z, "N": lambda u, v: 1 + 0 * u * v,
        "nu1": lambda u, v: -1 / ch2(u, v), "nu2": lambda u, v: 1 / ch2(u, v),
        "gamma1": z, "gamma2": lambda u, v: np.sinh(u) / ch2(u, v),
    }
    return AnalyticSurface("catenoid", x, f, ((-1.0, 1.0), (0.0, 6.0)),
                           None, dict(f), x, "gamma1 = 0")


def pseudosphere() -> AnalyticSurface:
    x = lambda u, v: _stack(np.cos(v) / np.cosh(u), np.sin(v) / np.cosh(u), u - np.tanh(u))
    z = lambda u, v: 0 * u * v
    f = {
        "E": lambda u, v: np.tanh(u) ** 2 + 0 * v, "F": z,
        "G": lambda u, v: 1 / np.cosh(u) ** 2 + 0 * v,
        "L": lambda u, v: -np.tanh(u) ** 2 / np.sinh(u) + 0 * v, "M": z,
        "N": lambda u, v: np.sinh(u) / np.cosh(u) ** 2 + 0 * v,
        "nu1": lambda u, v: -1 / np.sinh(u) + 0 * v, "nu2": lambda u, v: np.sinh(u) + 0 * v,
        "gamma1": z, "gamma2": lambda u, v: -1 + 0 * u * v,
    }
    return AnalyticSurface("pseudosphere", x, f, ((0.3, 2.0), (0.0, 6.0)),
                           lambda u, v: u <= 0, dict(f), x, "nu_u nu_v = 0")


def negative_fixtures():
    """Controls violating strong regularity or the Weingarten nondegeneracy."""
    return [sphere(2.0), catenoid(), pseudosphere()]


FIXTURES = {
    "kuen-canonical": lambda: kuen("canonical"),
    "kuen-principal": lambda: kuen("principal"),
    "sphere": sphere,
    "catenoid": catenoid,
    "pseudosphere": pseudosphere,
}


def get_fixture(name) -> AnalyticSurface:
    try:
        return FIXTURES[name]()
    except KeyError:
        raise ValueError(f"unknown fixture {name!r}; expected one of {sorted(FIXTURES)}") from None
