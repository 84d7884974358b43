import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from invsurf.errors import AdmissibilityFailure, BadInitialFrame, DegenerateAlignment
from invsurf.fixtures import kuen
from invsurf.frames import (ConnectionMatrices, connection_matrices, expm_skew, frame_defects,
                            integrability_residual, integrate_frame, integrate_position,
                            largest_valid_rectangle, reconstruct, rigid_align, skew, transport)
from invsurf.grid import ParamGrid
from invsurf.invariants import FundamentalForms, InvariantQuadruple, forms_from_invariants

WINDOW = ((2.6, 3.4), (0.4, 1.2))


def rotation(axis, angle):
    axis = np.asarray(axis, float) / np.linalg.norm(axis)
    return expm_skew(skew(angle * axis))


def zero_connection(g):
    z = np.zeros(g.shape + (3, 3))
    return ConnectionMatrices(g, z, z.copy(), np.ones(g.shape, bool))


def test_skew_matches_cross():
    w, y = np.array([0.3, -1.2, 2.0]), np.array([1.0, 0.5, -0.7])
    assert np.allclose(skew(w) @ y, np.cross(w, y))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=3, max_size=3))
def test_rodrigues_orthogonal(w):
    R = expm_skew(skew(np.array(w)))
    o, d = frame_defects(R[None])
    assert o < 1e-13 and d < 1e-13


def test_rodrigues_matches_series():
    from scipy.linalg import expm
    S = skew([0.4, -0.1, 0.7])
    assert np.allclose(expm_skew(S), expm(S), atol=1e-15)


def test_connection_skew():
    q = kuen().quadruple(ParamGrid.with_spacing(*WINDOW, 0.02))
    C = connection_matrices(q)
    assert np.max(np.abs(C.A + np.swapaxes(C.A, -1, -2))) == 0.0
    assert np.max(np.abs(C.B + np.swapaxes(C.B, -1, -2))) == 0.0


def test_connection_entry_at_point():
    g = ParamGrid.from_bounds((1.96, 2.04), (0.96, 1.04), 5, 5)
    K = kuen()
    q = K.quadruple(g)
    qfd = K.quadruple(g, derivatives=False)
    a, b = connection_matrices(q), connection_matrices(qfd, forms_from_invariants(q))
    assert abs(a.A[2, 2, 0, 1] - b.A[2, 2, 0, 1]) < 1e-3
    assert np.isfinite(a.A[2, 2]).all()


def test_zero_connection():
    g = ParamGrid.from_bounds((0, 1), (0, 1), 5, 6)
    C = zero_connection(g)
    assert integrability_residual(C).max_abs() == 0.0
    F = integrate_frame(C)
    assert np.allclose(F.matrices(), np.eye(3))


def test_integrability_closed_form():
    g = ParamGrid.from_bounds((0, 1), (0, 1), 6, 6)
    a, b = np.array([0.2, -0.5, 0.1]), np.array([1.0, 0.3, -0.4])
    U, _ = g.mesh()
    A = np.broadcast_to(skew(a), g.shape + (3, 3)).copy()
    B = U[..., None, None] * skew(b)
    r = integrability_residual(ConnectionMatrices(g, A, B, np.ones(g.shape, bool)))
    want = np.linalg.norm(skew(b)[None, None] - (A @ B - B @ A), axis=(-2, -1))
    assert np.allclose(r.values, want, atol=1e-12)


def test_constant_rotation_along_row():
    n, h = 50, 0.01
    w = np.array([0.3, 0.4, 1.2])
    F = transport(np.eye(3), np.broadcast_to(skew(w), (n, 3, 3)), h)
    # rows of the frame transform as F_{k+1} = exp(h S) F_k
    assert np.allclose(F[-1], rotation(w, n * h * np.linalg.norm(w)), atol=1e-14)
    assert max(frame_defects(F)) <= 1e-14


def test_bad_initial_frame():
    g = ParamGrid.from_bounds((0, 1), (0, 1), 4, 4)
    with pytest.raises(BadInitialFrame):
        integrate_frame(zero_connection(g), initial=np.diag([1.0, 1.0, -1.0]))


def test_position_trivial_cases():
    g = ParamGrid.from_bounds((0, 1), (0, 1), 5, 5)
    F = integrate_frame(zero_connection(g))
    one, zero = np.ones(g.shape), np.zeros(g.shape)
    plane = integrate_position(F, FundamentalForms.principal(g, one, one, zero, zero), (1, 2, 3))
    U, V = g.mesh()
    assert np.allclose(plane.x.values, np.stack([1 + U, 2 + V, 3 + 0 * U], -1))
    assert plane.max_loop_defect == 0.0
    tiny = FundamentalForms.principal(g, 0 * one, 0 * one, zero, zero)
    assert np.allclose(integrate_position(F, tiny, (1, 2, 3)).x.values, [1, 2, 3])


def test_kuen_frames_match_chart():
    K = kuen()
    g = ParamGrid.with_spacing(*WINDOW, 0.01)
    surf = reconstruct(K.quadruple(g))
    x = K.points(g, oriented=True).values
    xu = np.gradient(x, g.du, axis=0, edge_order=2)
    X = xu / np.linalg.norm(xu, axis=-1, keepdims=True)
    al = rigid_align(surf.points.reshape(-1, 3), x.reshape(-1, 3))
    Xr = surf.frames.X.values @ al.rotation.T
    assert np.max(np.linalg.norm(Xr - X, axis=-1)) < 5e-3
    d = surf.diagnostics
    assert d["orthonormality_defect"] < 1e-12 and d["determinant_defect"] < 1e-12
    assert d["sweep_spread_max"] < 1e-3


def test_inadmissible_rejected():
    q = kuen().quadruple(ParamGrid.with_spacing(*WINDOW, 0.02))
    bad = InvariantQuadruple(q.nu1, q.nu2, q.gamma1.replace(-q.gamma1.values), q.gamma2, q.mask,
                             q.derivatives)
    with pytest.raises(AdmissibilityFailure):
        reconstruct(bad)


def test_largest_valid_rectangle():
    m = np.ones((6, 8), bool)
    m[2, 5] = False
    i0, i1, j0, j1 = largest_valid_rectangle(m)
    assert m[i0:i1, j0:j1].all() and (i1 - i0) * (j1 - j0) == 30


def test_align_identity():
    P = np.random.default_rng(0).normal(size=(30, 3))
    al = rigid_align(P, P)
    assert np.allclose(al.rotation, np.eye(3)) and al.rms < 1e-14


def test_align_known_motion():
    P = np.random.default_rng(1).normal(size=(40, 3))
    R, t = rotation([1, 2, -1], 2.1), np.array([0.5, -3.0, 2.0])
    al = rigid_align(P, P @ R.T + t)
    assert np.allclose(al.rotation, R, atol=1e-12) and np.allclose(al.translation, t)
    assert al.rms <= 1e-12


def test_align_noise_scale():
    rng = np.random.default_rng(2)
    P = rng.normal(size=(2000, 3))
    eta = rng.uniform(-1e-3, 1e-3, size=P.shape)
    al = rigid_align(P, P + eta)
    assert al.rms == pytest.approx(np.sqrt(np.mean(np.sum(eta**2, 1))), rel=0.05)


def test_align_collinear():
    P = np.outer(np.arange(5.0), [1.0, 2.0, 3.0])
    with pytest.raises(DegenerateAlignment):
        rigid_align(P, P)
