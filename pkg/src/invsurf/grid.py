"""Uniform parameter grids, sampled fields and finite-difference calculus.

Arrays are stored with ``indexing='ij'``: axis 0 runs along ``u`` and
axis 1 along ``v``, so ``values[i, j]`` is the sample at
``(u0 + i*du, v0 + j*dv)``.  A mask is a boolean array that is ``True`` at
valid nodes and ``False`` where some regularity condition fails.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import GridMismatch, GridTooSmall, OutOfDomain, TooFewSamples

AXES = {"u": 0, "v": 1}


def _axis_index(axis):
    if axis in AXES:
        return AXES[axis]
    if axis in (0, 1):
        return int(axis)
    raise ValueError(f"axis must be 'u' or 'v', got {axis!r}")


@dataclass(frozen=True)
class ParamGrid:
    u0: float
    v0: float
    du: float
    dv: float
    nu: int
    nv: int

    def __post_init__(self):
        if not (self.du > 0 and self.dv > 0):
            raise ValueError("grid spacings must be positive")
        if self.nu < 3 or self.nv < 3:
            raise GridTooSmall(f"grid needs at least 3x3 nodes, got {self.nu}x{self.nv}")

    @classmethod
    def from_bounds(cls, u_range, v_range, nu, nv):
        """Grid with ``nu x nv`` nodes spanning the closed rectangle."""
        (ua, ub), (va, vb) = u_range, v_range
        return cls(float(ua), float(va), (ub - ua) / (nu - 1), (vb - va) / (nv - 1),
                   int(nu), int(nv))

    @classmethod
    def with_spacing(cls, u_range, v_range, h):
        """Grid of spacing ``h`` (rounded to fit) on both axes."""
        (ua, ub), (va, vb) = u_range, v_range
        nu = int(round((ub - ua) / h)) + 1
        nv = int(round((vb - va) / h)) + 1
        return cls.from_bounds(u_range, v_range, nu, nv)

    @property
    def shape(self):
        return (self.nu, self.nv)

    @property
    def u(self):
        return self.u0 + self.du * np.arange(self.nu)

    @property
    def v(self):
        return self.v0 + self.dv * np.arange(self.nv)

    @property
    def u1(self):
        return self.u0 + self.du * (self.nu - 1)

    @property
    def v1(self):
        return self.v0 + self.dv * (self.nv - 1)

    def mesh(self):
        return np.meshgrid(self.u, self.v, indexing="ij")

    def node(self, i, j):
        return (self.u0 + i * self.du, self.v0 + j * self.dv)

    def spacing(self, axis):
        return self.du if _axis_index(axis) == 0 else self.dv

    def subgrid(self, i0, i1, j0, j1):
        """Grid of the nodes ``i0 <= i < i1``, ``j0 <= j < j1``."""
        return ParamGrid(self.u0 + i0 * self.du, self.v0 + j0 * self.dv,
                         self.du, self.dv, i1 - i0, j1 - j0)

    def close_to(self, other, rtol=1e-12):
        if self.shape != other.shape:
            return False
        a = np.array([self.u0, self.v0, self.du, self.dv])
        b = np.array([other.u0, other.v0, other.du, other.dv])
        return bool(np.allclose(a, b, rtol=rtol, atol=rtol * max(1.0, np.abs(a).max())))


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Mask:
    grid: ParamGrid
    flags: np.ndarray

    def __post_init__(self):
        flags = _frozen(self.flags, bool)
        if flags.shape != self.grid.shape:
            raise GridMismatch(f"mask shape {flags.shape} != grid {self.grid.shape}")
        object.__setattr__(self, "flags", flags)

    @classmethod
    def full(cls, grid):
        return cls(grid, np.ones(grid.shape, bool))

    @property
    def count(self):
        return int(self.flags.sum())

    def __and__(self, other):
        return Mask(self.grid, self.flags & _flags(other))


def _flags(m):
    if m is None:
        return None
    return m.flags if isinstance(m, Mask) else np.asarray(m, bool)


def combine_masks(*masks):
    """Logical AND of masks; ``None`` entries mean "all valid"."""
    out = None
    for m in masks:
        f = _flags(m)
        if f is None:
            continue
        out = f.copy() if out is None else out & f
    return out


@dataclass(frozen=True)
class ScalarField:
    grid: ParamGrid
    values: np.ndarray
    mask: Optional[np.ndarray] = None

    def __post_init__(self):
        values = _frozen(self.values)
        if values.shape != self.grid.shape:
            raise GridMismatch(f"field shape {values.shape} != grid {self.grid.shape}")
        object.__setattr__(self, "values", values)
        if self.mask is not None:
            object.__setattr__(self, "mask", _frozen(_flags(self.mask), bool))

    @classmethod
    def from_function(cls, grid, fn, mask=None):
        U, V = grid.mesh()
        with np.errstate(all="ignore"):
            return cls(grid, np.broadcast_to(fn(U, V), grid.shape), mask)

    @property
    def valid(self):
        if self.mask is None:
            return np.ones(self.grid.shape, bool)
        return self.mask

    def valid_values(self):
        return self.values[self.valid]

    def max_abs(self):
        vals = self.valid_values()
        return float(np.max(np.abs(vals))) if vals.size else 0.0

    def with_mask(self, mask):
        return ScalarField(self.grid, self.values, combine_masks(self.mask, mask))

    def replace(self, values, mask=None):
        return ScalarField(self.grid, values, combine_masks(self.mask, mask))


@dataclass(frozen=True)
class VectorField3:
    grid: ParamGrid
    values: np.ndarray
    mask: Optional[np.ndarray] = None

    def __post_init__(self):
        values = _frozen(self.values)
        if values.shape != self.grid.shape + (3,):
            raise GridMismatch(f"vector field shape {values.shape} != grid {self.grid.shape}+(3,)")
        object.__setattr__(self, "values", values)
        if self.mask is not None:
            object.__setattr__(self, "mask", _frozen(_flags(self.mask), bool))

    @property
    def valid(self):
        if self.mask is None:
            return np.ones(self.grid.shape, bool)
        return self.mask


def check_same_grid(*fields):
    grids = [f.grid for f in fields if f is not None]
    for g in grids[1:]:
        if not g.close_to(grids[0]):
            raise GridMismatch("fields live on different grids")
    return grids[0]


# ---------------------------------------------------------------------------
# differentiation

def _dilate(mask, axis, n):
    """Validity of a 3-node stencil output along ``axis``."""
    if mask is None:
        return None
    m = np.moveaxis(mask, axis, 0)
    out = m.copy()
    out[1:-1] &= m[:-2] & m[2:]
    out[0] &= m[1] & m[2]
    out[-1] &= m[-2] & m[-3]
    if n >= 4:
        out[0] &= m[3]
        out[-1] &= m[-4]
    return np.moveaxis(out, 0, axis)


def diff_array(a, h, axis):
    """Second-order first derivative of a raw array along ``axis``."""
    if a.shape[axis] < 3:
        raise GridTooSmall("need at least 3 samples to differentiate")
    return np.gradient(a, h, axis=axis, edge_order=2)


def diff2_array(a, h, axis):
    """Second derivative: 3-point centered inside, 4-point one-sided at the ends."""
    n = a.shape[axis]
    if n < 3:
        raise GridTooSmall("need at least 3 samples to differentiate twice")
    b = np.moveaxis(np.asarray(a, float), axis, 0)
    out = np.empty_like(b)
    out[1:-1] = (b[:-2] - 2.0 * b[1:-1] + b[2:]) / h**2
    if n >= 4:
        out[0] = (2.0 * b[0] - 5.0 * b[1] + 4.0 * b[2] - b[3]) / h**2
        out[-1] = (2.0 * b[-1] - 5.0 * b[-2] + 4.0 * b[-3] - b[-4]) / h**2
    else:
        out[0] = out[1]
        out[-1] = out[-2]
    return np.moveaxis(out, 0, axis)


def partial_derivative(f: ScalarField, axis) -> ScalarField:
    """First partial derivative along ``'u'`` or ``'v'``.

    Central differences inside, second-order one-sided differences on the
    boundary, so quadratics along the axis are differentiated exactly.
    Any node whose stencil touches a masked node comes back masked.
    """
    ax = _axis_index(axis)
    g = f.grid
    if g.nu < 3 or g.nv < 3:
        raise GridTooSmall("grid too small")
    with np.errstate(invalid="ignore"):
        vals = diff_array(f.values, g.spacing(ax), ax)
    return ScalarField(g, vals, _dilate(f.mask, ax, g.shape[ax]))


def second_derivative(f: ScalarField, axis) -> ScalarField:
    ax = _axis_index(axis)
    g = f.grid
    with np.errstate(invalid="ignore"):
        vals = diff2_array(f.values, g.spacing(ax), ax)
    return ScalarField(g, vals, _dilate(f.mask, ax, g.shape[ax]))


def mixed_derivative(f: ScalarField) -> ScalarField:
    return partial_derivative(partial_derivative(f, "u"), "v")


def laplacian(f: ScalarField, kind="elliptic") -> ScalarField:
    """``f_uu + f_vv`` (elliptic) or ``f_uu - f_vv`` (hyperbolic)."""
    fuu = second_derivative(f, "u")
    fvv = second_derivative(f, "v")
    if kind == "elliptic":
        vals = fuu.values + fvv.values
    elif kind == "hyperbolic":
        vals = fuu.values - fvv.values
    else:
        raise ValueError(f"unknown Laplacian kind {kind!r}")
    return ScalarField(f.grid, vals, combine_masks(fuu.mask, fvv.mask))


# ---------------------------------------------------------------------------
# quadrature

def cumulative_integral(samples, h, rule="simpson", axis=-1):
    """Antiderivative of uniformly spaced samples, zero at the first sample.

    ``rule='trapezoid'`` is second order.  ``rule='simpson'`` uses composite
    Simpson at even nodes and adds a four-point cubic panel for odd nodes,
    so every node is fourth-order accurate and cubics integrate exactly.
    """
    y = np.moveaxis(np.asarray(samples, float), axis, 0)
    n = y.shape[0]
    if n < 2:
        raise TooFewSamples("cumulative integration needs at least 2 samples")
    out = np.zeros_like(y)
    if rule == "trapezoid" or n == 2:
        out[1:] = np.cumsum(0.5 * h * (y[:-1] + y[1:]), axis=0)
        return np.moveaxis(out, 0, axis)
    if rule != "simpson":
        raise ValueError(f"unknown rule {rule!r}")
    # composite Simpson on pairs of panels
    pairs = h / 3.0 * (y[0:-2:2] + 4.0 * y[1:-1:2] + y[2::2])
    out[2::2] = np.cumsum(pairs, axis=0)
    # single panel [x_k, x_k+1] for odd nodes k+1
    odd = np.arange(1, n, 2)
    k = odd - 1
    if n >= 4:
        lo = np.minimum(k, n - 4)
        # integral over [x_k, x_{k+1}] from a cubic through 4 consecutive nodes
        w = _single_panel_weights(k - lo)
        panel = h * sum(w[:, m][(slice(None),) + (None,) * (y.ndim - 1)] * y[lo + m]
                        for m in range(4))
    else:
        panel = h / 12.0 * (5.0 * y[0:1] + 8.0 * y[1:2] - y[2:3])
    out[odd] = out[k] + panel
    return np.moveaxis(out, 0, axis)


def _single_panel_weights(offset):
    # weights for int_{x_o}^{x_{o+1}} of the cubic through x_0..x_3, o in {0,1,2}
    table = np.array([[9.0, 19.0, -5.0, 1.0],
                      [-1.0, 13.0, 13.0, -1.0],
                      [1.0, -5.0, 19.0, 9.0]]) / 24.0
    return table[np.asarray(offset)]


def integrate(samples, h, rule="simpson", axis=-1):
    return np.take(cumulative_integral(samples, h, rule, axis), -1, axis=axis)


# ---------------------------------------------------------------------------
# interpolation

def _cubic_weights(t):
    return np.stack([-t * (t - 1.0) * (t - 2.0) / 6.0,
                     (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
                     -(t + 1.0) * t * (t - 2.0) / 2.0,
                     (t + 1.0) * t * (t - 1.0) / 6.0], axis=-1)


def _axis_stencil(s, n):
    """Window start and 4 weights per point; linear weights near the edges."""
    i0 = np.clip(np.floor(s).astype(int), 0, n - 2)
    t = s - i0
    cubic = (i0 >= 1) & (i0 <= n - 3)
    start = np.where(cubic, i0 - 1, i0)
    linear = np.zeros(s.shape + (4,))
    linear[..., 0] = 1.0 - t
    linear[..., 1] = t
    w = np.where(cubic[..., None], _cubic_weights(t), linear)
    return start, w


def resample(f: ScalarField, points, return_valid=False):
    """Evaluate ``f`` at arbitrary ``(u, v)`` points.

    Tensor-product cubic Lagrange interpolation (fourth order) inside;
    linear along an axis within one cell of that axis' boundary.
    """
    g = f.grid
    pts = np.asarray(points, float)
    shape = pts.shape[:-1]
    pts = pts.reshape(-1, 2)
    su = (pts[:, 0] - g.u0) / g.du
    sv = (pts[:, 1] - g.v0) / g.dv
    eps = 1e-9
    if (np.any(su < -eps) or np.any(su > g.nu - 1 + eps)
            or np.any(sv < -eps) or np.any(sv > g.nv - 1 + eps)):
        raise OutOfDomain("resample point outside the grid hull")
    su = np.clip(su, 0.0, g.nu - 1)
    sv = np.clip(sv, 0.0, g.nv - 1)
    iu, wu = _axis_stencil(su, g.nu)
    iv, wv = _axis_stencil(sv, g.nv)
    vals = f.values
    valid = f.valid
    out = np.zeros(len(pts))
    ok = np.ones(len(pts), bool)
    for a in range(4):
        ia = np.minimum(iu + a, g.nu - 1)
        for b in range(4):
            jb = np.minimum(iv + b, g.nv - 1)
            w = wu[:, a] * wv[:, b]
            used = w != 0.0
            with np.errstate(invalid="ignore"):
                out += np.where(used, w * vals[ia, jb], 0.0)
            ok &= ~used | valid[ia, jb]
    out = out.reshape(shape)
    ok = ok.reshape(shape)
    out = np.where(ok, out, np.nan)
    if return_valid:
        return out, ok
    return out


def resample_to_grid(f: ScalarField, u_nodes, v_nodes, new_grid):
    """Resample onto the tensor product of ``u_nodes`` x ``v_nodes``."""
    U, V = np.meshgrid(u_nodes, v_nodes, indexing="ij")
    vals, ok = resample(f, np.stack([U, V], axis=-1), return_valid=True)
    return ScalarField(new_grid, np.where(ok, vals, np.nan), None if ok.all() else ok)


def max_norm(values, mask=None):
    a = np.asarray(values)
    if mask is not None:
        a = a[np.asarray(mask, bool)]
    a = a[np.isfinite(a)] if a.size else a
    return float(np.max(np.abs(a))) if a.size else 0.0


def observed_orders(hs: Sequence[float], errors: Sequence[float]):
    """Observed convergence orders between successive resolutions."""
    hs = np.asarray(hs, float)
    e = np.asarray(errors, float)
    return np.log(e[:-1] / e[1:]) / np.log(hs[:-1] / hs[1:])
