"""Text file formats: scalar fields, masks, quadruples, OBJ meshes, Gamma data, reports."""
from __future__ import annotations

import json
import math
import re
from pathlib import Path

import numpy as np

from .errors import EmptyMesh, FormatError
from .grid import ParamGrid, ScalarField
from .invariants import InvariantQuadruple

QUADRUPLE_SUFFIXES = (".nu1", ".nu2", ".g1", ".g2", ".mask")


def _fmt(x):
    return "%.17g" % x


def _header(grid):
    return " ".join([str(grid.nu), str(grid.nv)] + [_fmt(x) for x in (grid.u0, grid.v0, grid.du, grid.dv)])


def _write_table(path, tag, grid, values, fmt):
    lines = [tag, _header(grid)]
    for j in range(grid.nv):
        lines.append(" ".join(fmt(x) for x in values[:, j]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _read_table(path, tag):
    lines = Path(path).read_text(encoding="utf-8").split("\n")
    lines = [ln for ln in lines if ln.strip()]
    if not lines or lines[0].strip() != tag:
        raise FormatError(f"{path}: expected header {tag!r}")
    try:
        head = lines[1].split()
        nu, nv = int(head[0]), int(head[1])
        u0, v0, du, dv = (float(x) for x in head[2:6])
        grid = ParamGrid(u0, v0, du, dv, nu, nv)
        rows = [[float(x) for x in ln.split()] for ln in lines[2:]]
    except (IndexError, ValueError) as exc:
        raise FormatError(f"{path}: malformed header or values ({exc})") from None
    if len(rows) != nv or any(len(r) != nu for r in rows):
        raise FormatError(f"{path}: expected {nv} rows of {nu} values")
    return grid, np.array(rows).T


def write_field(path, f: ScalarField):
    _write_table(path, "FIELD v1", f.grid, f.values, _fmt)


def read_field(path) -> ScalarField:
    grid, vals = _read_table(path, "FIELD v1")
    return ScalarField(grid, vals)


def write_mask(path, grid, mask):
    _write_table(path, "MASK v1", grid, np.asarray(mask, bool), lambda b: "1" if b else "0")


def read_mask(path):
    grid, vals = _read_table(path, "MASK v1")
    if not np.all((vals == 0) | (vals == 1)):
        raise FormatError(f"{path}: mask entries must be 0 or 1")
    return grid, vals.astype(bool)


def write_quadruple(stem, q: InvariantQuadruple):
    """Write ``stem.nu1 .nu2 .g1 .g2 .mask``."""
    stem = str(stem)
    for suffix, f in zip(QUADRUPLE_SUFFIXES, (q.nu1, q.nu2, q.gamma1, q.gamma2)):
        write_field(stem + suffix, f)
    write_mask(stem + ".mask", q.grid, q.valid)


def read_quadruple(stem) -> InvariantQuadruple:
    stem = str(stem)
    fields = [read_field(stem + s) for s in QUADRUPLE_SUFFIXES[:4]]
    mask = None
    if Path(stem + ".mask").exists():
        grid, mask = read_mask(stem + ".mask")
        if not grid.close_to(fields[0].grid):
            raise FormatError("mask grid differs from the field grid")
    return InvariantQuadruple(*fields, mask)


def export_obj(path, points, normals=None, mask=None):
    """Triangle mesh of a rectangular sample array.

    Vertices are written row-major with ``v`` (the ``u`` index runs fastest
    within each line of constant ``v``); each cell whose four corners are
    valid gives two triangles.  Masked nodes are left out.
    """
    P = np.asarray(points, float)
    nu, nv = P.shape[:2]
    valid = np.ones((nu, nv), bool) if mask is None else np.asarray(mask, bool)
    valid = valid & np.all(np.isfinite(P), axis=-1)
    if normals is not None:
        normals = np.asarray(normals, float)
    index = -np.ones((nu, nv), int)
    lines = []
    k = 0
    for j in range(nv):
        for i in range(nu):
            if valid[i, j]:
                k += 1
                index[i, j] = k
                lines.append("v " + " ".join(_fmt(c) for c in P[i, j]))
    if k == 0:
        raise EmptyMesh("no valid vertices to export")
    if normals is not None:
        for j in range(nv):
            for i in range(nu):
                if valid[i, j]:
                    lines.append("vn " + " ".join(_fmt(c) for c in normals[i, j]))
    faces = 0
    ref = (lambda a: f"{a}//{a}") if normals is not None else str
    for j in range(nv - 1):
        for i in range(nu - 1):
            a, b, c, d = index[i, j], index[i + 1, j], index[i + 1, j + 1], index[i, j + 1]
            if min(a, b, c, d) > 0:
                lines.append(f"f {ref(a)} {ref(b)} {ref(c)}")
                lines.append(f"f {ref(a)} {ref(c)} {ref(d)}")
                faces += 2
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return k, faces


def read_obj(path):
    """Vertices, normals and triangle indices (0-based) of an OBJ file."""
    V, N, F = [], [], []
    for ln in Path(path).read_text(encoding="utf-8").splitlines():
        parts = ln.split()
        if not parts:
            continue
        if parts[0] == "v":
            V.append([float(x) for x in parts[1:4]])
        elif parts[0] == "vn":
            N.append([float(x) for x in parts[1:4]])
        elif parts[0] == "f":
            F.append([int(p.split("/")[0]) - 1 for p in parts[1:4]])
    return np.array(V), np.array(N), np.array(F, int)


def write_gamma(path, v, kappa, tau, u, kappa1):
    lines = ["GAMMA v1"]
    lines += [f"{_fmt(a)} {_fmt(b)} {_fmt(c)}" for a, b, c in zip(v, kappa, tau)]
    lines.append("PROFILE")
    lines += [f"{_fmt(a)} {_fmt(b)}" for a, b in zip(u, kappa1)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_gamma(path):
    """``(v, kappa, tau, u, kappa1)`` arrays from a Gamma data file."""
    lines = [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines or lines[0] != "GAMMA v1" or "PROFILE" not in lines:
        raise FormatError(f"{path}: not a GAMMA v1 file")
    k = lines.index("PROFILE")
    try:
        curve = np.array([[float(x) for x in ln.split()] for ln in lines[1:k]])
        prof = np.array([[float(x) for x in ln.split()] for ln in lines[k + 1:]])
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None
    if curve.ndim != 2 or curve.shape[1] != 3 or prof.ndim != 2 or prof.shape[1] != 2:
        raise FormatError(f"{path}: expected 'v kappa tau' and 'u kappa1' rows")
    for name, s in (("v", curve[:, 0]), ("u", prof[:, 0])):
        d = np.diff(s)
        if s.size < 3 or not np.allclose(d, d[0], rtol=1e-9, atol=1e-12):
            raise FormatError(f"{path}: {name} samples must be uniform (at least 3)")
    return curve[:, 0], curve[:, 1], curve[:, 2], prof[:, 0], prof[:, 1]


def write_reparam_map(stem, rmap):
    stem = str(stem)
    write_field(stem + ".ubar", rmap.ubar)
    write_field(stem + ".vbar", rmap.vbar)
    Path(stem + ".map").write_text(
        "REPARAM v1\n" + "\n".join(f"{k} = {_fmt(getattr(rmap, k))}"
                                   for k in ("a", "b", "ubar0", "vbar0")) + "\n",
        encoding="utf-8")


_FLOAT_TAG = "@f17:"


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isnan(x):
            return _FLOAT_TAG + "NaN"
        if math.isinf(x):
            return _FLOAT_TAG + ("Infinity" if x > 0 else "-Infinity")
        return _FLOAT_TAG + _fmt(x)
    if isinstance(x, Path):
        return str(x)
    return x


def dumps_report(report):
    """JSON text with every float written to 17 significant digits."""
    text = json.dumps(_jsonable(report), indent=2)
    return re.sub('"' + re.escape(_FLOAT_TAG) + r'([^"]*)"', r"\1", text)


def write_report(path, report):
    Path(path).write_text(dumps_report(report) + "\n", encoding="utf-8")
