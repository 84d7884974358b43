"""Constructive Bonnet reconstruction by moving-frame integration.

The frame ``F`` is stored as a 3x3 matrix whose rows are ``X, Y, l``.  It
obeys ``F_u = A F`` and ``F_v = B F`` with skew ``A, B`` built from the
invariant quadruple.  Each grid step multiplies by the exact rotation
``exp(h S)``, ``S`` being the generator averaged over the step, so
orthonormality is preserved to round-off with no re-orthogonalization.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from .errors import AdmissibilityFailure, BadInitialFrame, DegenerateAlignment, GridMismatch
from .grid import ParamGrid, ScalarField, VectorField3, diff_array
from .invariants import (FundamentalForms, InvariantQuadruple, bonnet_admissibility,
                         forms_from_invariants, metric_from_invariants)


@dataclass(frozen=True)
class ConnectionMatrices:
    grid: ParamGrid
    A: np.ndarray
    B: np.ndarray
    mask: Optional[np.ndarray] = None


@dataclass(frozen=True)
class FrameField:
    X: VectorField3
    Y: VectorField3
    l: VectorField3
    x: Optional[VectorField3] = None

    @property
    def grid(self):
        return self.X.grid

    def matrices(self):
        """Frames as an array of shape ``(nu, nv, 3, 3)`` with rows X, Y, l."""
        return np.stack([self.X.values, self.Y.values, self.l.values], axis=-2)


@dataclass
class ReconstructedSurface:
    frames: FrameField
    forms: FundamentalForms
    quadruple: InvariantQuadruple
    window: Tuple[int, int, int, int]
    diagnostics: Dict[str, float] = field(default_factory=dict)
    admissibility: Optional[object] = None

    @property
    def points(self):
        return self.frames.x.values

    @property
    def grid(self):
        return self.frames.grid


def skew(w):
    """Skew matrix ``[w]_x`` with ``[w]_x y = w x y``; batched over leading axes."""
    w = np.asarray(w, float)
    S = np.zeros(w.shape[:-1] + (3, 3))
    S[..., 0, 1] = -w[..., 2]
    S[..., 0, 2] = w[..., 1]
    S[..., 1, 0] = w[..., 2]
    S[..., 1, 2] = -w[..., 0]
    S[..., 2, 0] = -w[..., 1]
    S[..., 2, 1] = w[..., 0]
    return S


def expm_skew(S):
    """Rodrigues formula for ``exp(S)``, ``S`` skew, batched."""
    S = np.asarray(S, float)
    w = np.stack([S[..., 2, 1], S[..., 0, 2], S[..., 1, 0]], axis=-1)
    theta = np.linalg.norm(w, axis=-1)[..., None, None]
    a = np.sinc(theta / np.pi)                      # sin(t)/t
    b = 0.5 * np.sinc(theta / (2.0 * np.pi)) ** 2   # (1 - cos t)/t^2
    return np.eye(3) + a * S + b * (S @ S)


def transport(F0, generators, h):
    """Propagate ``F0`` through steps ``F_{k+1} = exp(h S_k) F_k``.

    ``generators`` has shape ``(n, 3, 3)`` (or ``(n, m, 3, 3)`` to carry
    ``m`` independent frames side by side).  Returns ``n + 1`` frames.
    """
    R = expm_skew(h * np.asarray(generators, float))
    out = np.empty((R.shape[0] + 1,) + np.shape(F0))
    out[0] = F0
    for k in range(R.shape[0]):
        out[k + 1] = R[k] @ out[k]
    return out


def frame_defects(F):
    """Max orthonormality defect and max ``|det - 1|`` over a stack of frames."""
    F = np.asarray(F, float)
    gram = F @ np.swapaxes(F, -1, -2)
    ortho = float(np.max(np.abs(gram - np.eye(3))))
    det = float(np.max(np.abs(np.linalg.det(F) - 1.0)))
    return ortho, det


def _check_initial(F0):
    F0 = np.asarray(F0, float)
    if F0.shape != (3, 3):
        raise BadInitialFrame("initial frame must be a 3x3 matrix with rows X, Y, l")
    ortho, det = frame_defects(F0)
    if ortho > 1e-10 or det > 1e-10:
        raise BadInitialFrame(
            f"initial frame not orthonormal right-handed (defects {ortho:.2e}, {det:.2e})")
    return F0


def connection_matrices(q: InvariantQuadruple, forms: Optional[FundamentalForms] = None,
                        tol=1e-9) -> ConnectionMatrices:
    """Skew coefficient matrices of the frame equations along ``u`` and ``v``."""
    if forms is None:
        forms = forms_from_invariants(q, tol)
    sE, sG = forms.sqrt_E(), forms.sqrt_G()
    nu1, nu2 = q.nu1.values, q.nu2.values
    g1, g2 = q.gamma1.values, q.gamma2.values
    A = np.zeros(q.grid.shape + (3, 3))
    B = np.zeros(q.grid.shape + (3, 3))
    A[..., 0, 1] = g1 * sE
    A[..., 0, 2] = nu1 * sE
    B[..., 0, 1] = g2 * sG
    B[..., 1, 2] = nu2 * sG
    A -= np.swapaxes(A, -1, -2)
    B -= np.swapaxes(B, -1, -2)
    return ConnectionMatrices(q.grid, A, B, q.valid)


def integrability_residual(C: ConnectionMatrices) -> ScalarField:
    """Frobenius norm of ``B_u - A_v - [A, B]`` per node."""
    g = C.grid
    Bu = diff_array(C.B, g.du, 0)
    Av = diff_array(C.A, g.dv, 1)
    comm = C.A @ C.B - C.B @ C.A
    r = np.linalg.norm(Bu - Av - comm, axis=(-2, -1))
    return ScalarField(g, r, C.mask)


def integrate_frame(C: ConnectionMatrices, initial=None, sweep="u-first") -> FrameField:
    """Integrate the frame system from node ``(0, 0)``.

    ``sweep='u-first'`` integrates the first row along ``u`` and then every
    column along ``v``; ``'v-first'`` does the transpose.  Columns (rows)
    are independent once the first row (column) is known and are advanced
    together.
    """
    g = C.grid
    F0 = np.eye(3) if initial is None else _check_initial(initial)
    Amid = 0.5 * (C.A[1:] + C.A[:-1])          # (nu-1, nv, 3, 3)
    Bmid = 0.5 * (C.B[:, 1:] + C.B[:, :-1])    # (nu, nv-1, 3, 3)
    F = np.empty(g.shape + (3, 3))
    if sweep == "u-first":
        F[:, 0] = transport(F0, Amid[:, 0], g.du)
        F[:] = np.swapaxes(transport(F[:, 0], np.swapaxes(Bmid, 0, 1), g.dv), 0, 1)
    elif sweep == "v-first":
        F[0, :] = transport(F0, Bmid[0], g.dv)
        F[:] = transport(F[0, :], Amid, g.du)
    else:
        raise ValueError(f"unknown sweep {sweep!r}")
    return FrameField(VectorField3(g, F[..., 0, :]), VectorField3(g, F[..., 1, :]),
                      VectorField3(g, F[..., 2, :]))


@dataclass(frozen=True)
class PositionResult:
    x: VectorField3
    loop_defect: ScalarField

    @property
    def max_loop_defect(self):
        return float(np.max(self.loop_defect.values))


def integrate_position(frames: FrameField, forms: FundamentalForms, x0=(0.0, 0.0, 0.0),
                       sweep="u-first") -> PositionResult:
    """Integrate ``x_u = sqrt(E) X``, ``x_v = sqrt(G) Y`` by the trapezoid rule.

    The loop defect of a cell is the trapezoid circulation of ``dx`` around
    its boundary divided by the cell area; it vanishes up to the
    discretization error when the right-hand sides are compatible.
    """
    g = frames.grid
    if not g.close_to(forms.grid):
        raise GridMismatch("frames and forms live on different grids")
    a = forms.sqrt_E()[..., None] * frames.X.values    # x_u
    b = forms.sqrt_G()[..., None] * frames.Y.values    # x_v
    x = np.empty(g.shape + (3,))
    x0 = np.asarray(x0, float)
    if sweep == "u-first":
        x[0, 0] = x0
        x[1:, 0] = x0 + np.cumsum(0.5 * g.du * (a[1:, 0] + a[:-1, 0]), axis=0)
        x[:, 1:] = x[:, :1] + np.cumsum(0.5 * g.dv * (b[:, 1:] + b[:, :-1]), axis=1)
    elif sweep == "v-first":
        x[0, 0] = x0
        x[0, 1:] = x0 + np.cumsum(0.5 * g.dv * (b[0, 1:] + b[0, :-1]), axis=0)
        x[1:, :] = x[:1, :] + np.cumsum(0.5 * g.du * (a[1:] + a[:-1]), axis=0)
    else:
        raise ValueError(f"unknown sweep {sweep!r}")
    circ = (0.5 * g.du * (a[:-1, :-1] + a[1:, :-1])
            + 0.5 * g.dv * (b[1:, :-1] + b[1:, 1:])
            - 0.5 * g.du * (a[:-1, 1:] + a[1:, 1:])
            - 0.5 * g.dv * (b[:-1, :-1] + b[:-1, 1:]))
    defect = np.linalg.norm(circ, axis=-1) / (g.du * g.dv)
    cell_grid = ParamGrid(g.u0 + 0.5 * g.du, g.v0 + 0.5 * g.dv, g.du, g.dv,
                          max(g.nu - 1, 3), max(g.nv - 1, 3))
    if defect.shape != cell_grid.shape:
        defect = np.pad(defect, [(0, cell_grid.nu - defect.shape[0]),
                                 (0, cell_grid.nv - defect.shape[1])])
    return PositionResult(VectorField3(g, x), ScalarField(cell_grid, defect))


def largest_valid_rectangle(valid):
    """Index window ``(i0, i1, j0, j1)`` of the largest all-valid rectangle."""
    valid = np.asarray(valid, bool)
    nu, nv = valid.shape
    heights = np.zeros(nv, int)
    best = (0, (0, 0, 0, 0))
    for i in range(nu):
        heights = np.where(valid[i], heights + 1, 0)
        stack = []
        for j in range(nv + 1):
            h = heights[j] if j < nv else 0
            start = j
            while stack and stack[-1][1] >= h:
                s, sh = stack.pop()
                area = sh * (j - s)
                if area > best[0]:
                    best = (area, (i - sh + 1, i + 1, s, j))
                start = s
            stack.append((start, h))
    return best[1]


def _restrict_quadruple(q, window):
    i0, i1, j0, j1 = window
    sub = q.grid.subgrid(i0, i1, j0, j1)
    cut = lambda f: ScalarField(sub, f.values[i0:i1, j0:j1],
                                None if f.mask is None else f.mask[i0:i1, j0:j1])
    return InvariantQuadruple(cut(q.nu1), cut(q.nu2), cut(q.gamma1), cut(q.gamma2),
                              None if q.mask is None else q.mask[i0:i1, j0:j1],
                              {k: cut(f) for k, f in q.derivatives.items()})


def reconstruct(q: InvariantQuadruple, initial=None, x0=(0.0, 0.0, 0.0), tol=None,
                check=True, sweep="u-first") -> ReconstructedSurface:
    """Surface with prescribed invariants, unique up to a rigid motion.

    Runs the admissibility check, recovers the forms, builds the
    connection matrices, integrates frames and positions and attaches
    diagnostics (integrability residual, loop defect, sweep-order spread,
    frame defects).  Masked holes restrict the computation to the largest
    valid rectangle; the initial data sit at its lower-left node.
    """
    valid = q.valid
    window = (0, q.grid.nu, 0, q.grid.nv)
    if not valid.all():
        window = largest_valid_rectangle(valid)
        i0, i1, j0, j1 = window
        if i1 - i0 < 3 or j1 - j0 < 3:
            raise AdmissibilityFailure("valid-region", None)
        q = _restrict_quadruple(q, window)
    report = None
    if check:
        report = bonnet_admissibility(q, tol)
        if not report.passed:
            raise AdmissibilityFailure(report.failing[0], report)
    forms = forms_from_invariants(q)
    C = connection_matrices(q, forms)
    integ = integrability_residual(C)
    frames = integrate_frame(C, initial, sweep)
    pos = integrate_position(frames, forms, x0, sweep)
    other = "v-first" if sweep == "u-first" else "u-first"
    frames_alt = integrate_frame(C, initial, other)
    pos_alt = integrate_position(frames_alt, forms, x0, other)
    ortho, det = frame_defects(frames.matrices())
    diag = {
        "integrability_max": integ.max_abs(),
        "loop_defect_max": pos.max_loop_defect,
        "sweep_spread_max": float(np.max(np.linalg.norm(pos.x.values - pos_alt.x.values,
                                                         axis=-1))),
        "orthonormality_defect": ortho,
        "determinant_defect": det,
    }
    if diag["integrability_max"] > 1e3 * max(q.grid.du, q.grid.dv) ** 2 * 10:
        warnings.warn("integrability residual is large; reconstruction is path dependent")
    frames = FrameField(frames.X, frames.Y, frames.l, pos.x)
    return ReconstructedSurface(frames, forms, q, window, diag, report)


@dataclass(frozen=True)
class Alignment:
    rotation: np.ndarray
    translation: np.ndarray
    rms: float

    def apply(self, P):
        return np.asarray(P) @ self.rotation.T + self.translation


def rigid_align(P, Q) -> Alignment:
    """Proper rigid motion ``(R, t)`` minimizing ``sum |R p + t - q|^2``."""
    P = np.asarray(P, float).reshape(-1, 3)
    Q = np.asarray(Q, float).reshape(-1, 3)
    if P.shape != Q.shape:
        raise DegenerateAlignment("point sets differ in size")
    if len(P) < 3:
        raise DegenerateAlignment("need at least 3 points")
    pc, qc = P.mean(axis=0), Q.mean(axis=0)
    P0, Q0 = P - pc, Q - qc
    sv = np.linalg.svd(P0, compute_uv=False)
    if sv[0] == 0.0 or sv[1] <= 1e-12 * sv[0]:
        raise DegenerateAlignment("points are collinear")
    U, _, Vt = np.linalg.svd(P0.T @ Q0)
    D = np.diag([1.0, 1.0, np.sign(np.linalg.det(Vt.T @ U.T)) or 1.0])
    R = Vt.T @ D @ U.T
    t = qc - R @ pc
    res = P @ R.T + t - Q
    rms = float(np.sqrt(np.mean(np.sum(res**2, axis=1))))
    return Alignment(R, t, rms)
