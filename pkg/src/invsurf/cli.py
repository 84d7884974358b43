"""Command-line entry point: ``invsurf <subcommand> --config <path> [--out <dir>]``.

Exit status is 0 when a run completes and every verdict passes, 2 when a
verdict fails and 1 on error.  A JSON report is written in every case.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import time
import traceback
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, SCHEMAS, grid_from_config, load_config
from .errors import ConfigError, MissingRequired
from .io import (export_obj, read_field, read_gamma, read_quadruple, write_field,
                 write_mask, write_quadruple, write_reparam_map, write_report)

log = logging.getLogger("invsurf")


class Report(dict):
    def verdict(self, name, value, tol, passed=None, kind="max"):
        """Record a verdict; by default ``value <= tol`` passes."""
        if passed is None:
            passed = bool(value <= tol) if kind == "max" else bool(value >= tol)
        self.setdefault("verdicts", []).append(
            {"name": name, "value": value, "tol": tol, "passed": bool(passed)})
        return passed


# ---------------------------------------------------------------------------
# subcommands

def _fixture_grid(cfg, surface):
    (ua, ub), (va, vb) = surface.domain
    from .grid import ParamGrid
    return grid_from_config(cfg, ParamGrid.from_bounds((ua, ub), (va, vb), 81, 81))


def cmd_fixture(cfg: RunConfig, out: Path, rep: Report):
    from .analysis import mesh_forms
    from .fixtures import get_fixture
    S = get_fixture(cfg["fixture.name"])
    grid = _fixture_grid(cfg, S)
    oriented = cfg["fixture.oriented"]
    pts = S.points(grid, oriented)
    normals = mesh_forms(pts).normal.values
    nv, nf = export_obj(out / f"{cfg.stem}.obj", pts.values, normals, pts.valid)
    rep["mesh"] = {"vertices": nv, "triangles": nf}
    mask = S.mask(grid)
    for name in S.fields:
        write_field(out / f"{cfg.stem}.{name}", S.field(name, grid, oriented))
    write_mask(out / f"{cfg.stem}.mask", grid, mask)
    write_quadruple(out / cfg.stem, S.quadruple(grid, oriented=oriented, derivatives=False))
    if S.name.startswith("kuen"):
        n1, n2 = S.field("nu1", grid), S.field("nu2", grid)
        rep.verdict("max|nu1 nu2 + 1|", float(np.max(np.abs(n1.values * n2.values + 1)[mask])), 1e-12)
        if S.name == "kuen-canonical":
            E, G = S.field("E", grid), S.field("G", grid)
            rep.verdict("max|E + G - 1|", float(np.max(np.abs(E.values + G.values - 1)[mask])), 1e-12)


def cmd_analyze(cfg: RunConfig, out: Path, rep: Report):
    from .analysis import mesh_forms, weingarten_relation_probe
    from .fixtures import get_fixture
    if cfg.get("input.quadruple") is not None:
        q = read_quadruple(cfg["input.quadruple"])
    elif cfg.get("fixture.name") is not None:
        S = get_fixture(cfg["fixture.name"])
        grid = _fixture_grid(cfg, S)
        a = mesh_forms(S.points(grid))
        q = a.quadruple
        rep["principal_net_defect"] = a.defects
        write_quadruple(out / cfg.stem, q)
    else:
        raise MissingRequired("input.quadruple or fixture.name")
    probe = weingarten_relation_probe(q, cfg["probe.tol"], cfg["probe.min_samples"])
    rep["probe"] = probe
    if cfg.get("probe.expect") is not None:
        rep.verdict(f"relation == {cfg['probe.expect']}", probe["fit_residual"], cfg["probe.tol"],
                    passed=probe["relation"] == cfg["probe.expect"])


def _convergence_rows(hs, errs):
    from .grid import observed_orders
    orders = [None] + [float(o) for o in observed_orders(hs, errs)]
    return [{"h": float(h), "error": float(e), "order": o} for h, e, o in zip(hs, errs, orders)]


EXACT = {
    "liouville-quadrant": lambda u, v: np.log(8.0 / (1.0 + u**2 + v**2) ** 2),
}


def cmd_solve_pde(cfg: RunConfig, out: Path, rep: Report):
    from .grid import ParamGrid, ScalarField
    from .solvers import ELLIPTIC_KINDS, solve_elliptic
    case = cfg["case"]
    if case == "sine_gordon":
        return _march(cfg, out, rep)
    if case not in ELLIPTIC_KINDS:
        raise ConfigError(f"unknown case {case!r}")
    H = cfg.get("H")
    if cfg.get("boundary.file") is not None:
        bnd = read_field(cfg["boundary.file"])
    else:
        grid = grid_from_config(cfg)
        if cfg.get("exact") is None:
            raise MissingRequired("boundary.file or exact")
        bnd = ScalarField.from_function(grid, EXACT[cfg["exact"]])
    levels = cfg["convergence.levels"]
    step = 2 ** (levels - 1)
    g = bnd.grid
    if (g.nu - 1) % step or (g.nv - 1) % step or (g.nu - 1) // step < 2 or (g.nv - 1) // step < 2:
        raise ConfigError(f"grid {g.nu}x{g.nv} cannot be coarsened {levels - 1} times")
    sols = []
    for lev in range(levels):
        s = 2 ** (levels - 1 - lev)
        sub = ParamGrid(g.u0, g.v0, g.du * s, g.dv * s, (g.nu - 1) // s + 1, (g.nv - 1) // s + 1)
        b = ScalarField(sub, bnd.values[::s, ::s])
        t = time.perf_counter()
        r = solve_elliptic(case, b, H=H, update_tol=cfg["newton.tol"],
                           residual_tol=cfg["newton.residual_tol"], max_iter=cfg["newton.max_iter"])
        sols.append((sub, r))
        rep.setdefault("newton", []).append(
            {"h": sub.du, "iterations": r.iterations, "residual": r.residual,
             "residual_history": r.residuals, "seconds": time.perf_counter() - t})
    hs = [sub.du for sub, _ in sols]
    if cfg.get("exact") is not None:
        fn = EXACT[cfg["exact"]]
        errs = [float(np.max(np.abs(r.lam.values - ScalarField.from_function(sub, fn).values)))
                for sub, r in sols]
        table = _convergence_rows(hs, errs)
    else:
        # self-convergence: differences of successive levels on the coarse nodes
        diffs = []
        for k in range(levels - 1):
            (sa, ra), (sb, rb) = sols[k], sols[k + 1]
            diffs.append(float(np.max(np.abs(ra.lam.values - rb.lam.values[::2, ::2]))))
        table = _convergence_rows(hs[:-1], diffs)
    rep["convergence"] = table
    write_field(out / f"{cfg.stem}.lambda", sols[-1][1].lam)
    orders = [row["order"] for row in table if row["order"] is not None]
    for o in orders:
        rep.verdict("observed order", o, [cfg["verdict.order_min"], cfg["verdict.order_max"]],
                    passed=cfg["verdict.order_min"] <= o <= cfg["verdict.order_max"])


def _march(cfg: RunConfig, out: Path, rep: Report):
    from .fixtures import kuen
    from .solvers import solve_hyperbolic_sine_gordon
    grid = grid_from_config(cfg)
    u_range = (grid.u0, grid.u1)
    v0, span, cfl = cfg["march.v0"], cfg["march.span"], cfg["march.cfl"]
    if cfg["march.initial"] == "kink":
        c = cfg["march.speed"]
        g = np.sqrt(1 - c * c)
        exact = lambda u, v: 4 * np.arctan(np.exp((u - c * v) / g))
        exact_v = lambda u, v: -c / g * 2 / np.cosh((u - c * v) / g)
    elif cfg["march.initial"] == "kuen":
        K = kuen("canonical")
        exact = lambda u, v: 2 * np.arctan(K.evaluate("nu1", u, v))
        exact_v = lambda u, v: 2 * K.evaluate("nu1_v", u, v) / (1 + K.evaluate("nu1", u, v) ** 2)
    else:
        raise ConfigError(f"unknown march.initial {cfg['march.initial']!r}")
    hs, errs = [], []
    for lev in range(cfg["convergence.levels"]):
        h = grid.du / 2**lev
        n = int(round((u_range[1] - u_range[0]) / h)) + 1
        u = u_range[0] + h * np.arange(n)
        r = solve_hyperbolic_sine_gordon(exact(u, v0), exact_v(u, v0), u_range[0], h, v0, span,
                                         dv=cfl * h)
        U, V = r.lam.grid.mesh()
        errs.append(float(np.max(np.abs(r.lam.values - exact(U, V))[r.cone])))
        hs.append(h)
    write_field(out / f"{cfg.stem}.lambda", r.lam)
    write_mask(out / f"{cfg.stem}.cone", r.lam.grid, r.cone)
    rep["convergence"] = _convergence_rows(hs, errs)
    for row in rep["convergence"][1:]:
        o = row["order"]
        rep.verdict("observed order", o, [cfg["verdict.order_min"], cfg["verdict.order_max"]],
                    passed=cfg["verdict.order_min"] <= o <= cfg["verdict.order_max"])


def cmd_reparam(cfg: RunConfig, out: Path, rep: Report):
    from .fixtures import get_fixture
    from .reparam import geometric_criterion, geometric_reparam
    from .weingarten import cmc_pair, constant_curvature_pair
    S = get_fixture(cfg["fixture.name"])
    grid = _fixture_grid(cfg, S)
    nu = S.field("nu1", grid)
    nu0 = float(nu.values[grid.nu // 2, grid.nv // 2])
    if cfg["pair"] == "constK":
        pair = constant_curvature_pair(cfg["K"], nu0=nu0)
    elif cfg["pair"] == "cmc":
        pair = cmc_pair(cfg["H"], nu0=nu0)
    else:
        raise ConfigError(f"unknown pair {cfg['pair']!r}")
    forms = S.forms(grid)
    res = geometric_reparam(forms, pair, nu, cfg.get("reparam.a"), cfg.get("reparam.b"),
                            ubar0=cfg["reparam.ubar0"], vbar0=cfg["reparam.vbar0"],
                            q=S.quadruple(grid, oriented=False, derivatives=False))
    write_reparam_map(out / cfg.stem, res.map)
    before = geometric_criterion(forms, S.quadruple(grid, oriented=False, derivatives=False))
    after = geometric_criterion(res.forms, res.quadruple)
    rep["separability"] = res.map.separability
    rep["criterion_spread"] = {"before": before.spread, "after": after.spread}
    rep["monotone"] = res.map.monotone
    rep["a"], rep["b"] = res.map.a, res.map.b
    if S.name == "kuen-principal":
        # v-bar must be an affine function of ln tan(v/2), u-bar of u
        for name, x, y in (("vbar vs ln tan(v/2)", np.log(np.tan(grid.v / 2)), res.map.vbar_nodes),
                           ("ubar vs u", grid.u, res.map.ubar_nodes)):
            A = np.vstack([x, np.ones_like(x)]).T
            coef = np.linalg.lstsq(A, y, rcond=None)[0]
            rep.verdict(f"affine fit {name}", float(np.max(np.abs(A @ coef - y))), cfg["verdict.tol"])


def cmd_reconstruct(cfg: RunConfig, out: Path, rep: Report):
    from .fixtures import get_fixture
    from .frames import reconstruct, rigid_align
    S = None
    if cfg.get("input.quadruple") is not None:
        q = read_quadruple(cfg["input.quadruple"])
    elif cfg.get("fixture.name") is not None:
        S = get_fixture(cfg["fixture.name"])
        q = S.quadruple(_fixture_grid(cfg, S))
    else:
        raise MissingRequired("input.quadruple or fixture.name")
    surf = reconstruct(q, tol=cfg.get("admissibility.tol"), check=cfg["admissibility.check"])
    rep["admissibility"] = surf.admissibility.summary() if surf.admissibility else None
    rep["diagnostics"] = surf.diagnostics
    rep["window"] = list(surf.window)
    nv, nf = export_obj(out / f"{cfg.stem}.obj", surf.points, surf.frames.l.values)
    rep["mesh"] = {"vertices": nv, "triangles": nf}
    if S is not None:
        target = S.points(surf.grid, oriented=True).values
        al = rigid_align(surf.points.reshape(-1, 3), target.reshape(-1, 3))
        pts = target.reshape(-1, 3)
        diam = float(np.max(np.linalg.norm(pts - pts.mean(0), axis=1)) * 2)
        rep["alignment"] = {"rms": al.rms, "diameter": diam}
        rep.verdict("round-trip RMS / diameter", al.rms / diam, cfg["verdict.rms_rel"])


def cmd_gamma(cfg: RunConfig, out: Path, rep: Report):
    from .gamma import (circle_family_test, gamma_surface, profile_from_curvature,
                        rotational_test, space_curve)
    from .invariants import principal_line_frenet
    v, kappa, tau, u, kappa1 = read_gamma(cfg["gamma.file"])
    curve = space_curve(v, kappa, tau)
    prof = profile_from_curvature(kappa1, u[1] - u[0])
    S = gamma_surface(curve, prof)
    nv, nf = export_obj(out / f"{cfg.stem}.obj", S.points.values, None, S.mask)
    rep["mesh"] = {"vertices": nv, "triangles": nf}
    write_quadruple(out / cfg.stem, S.quadruple)
    tol = cfg["verdict.tol"]
    rot = rotational_test(S.quadruple, curve, tol)
    rep["rotational_test"] = rot
    rep["circle_families"] = circle_family_test(principal_line_frenet(S.quadruple, S.forms), tol)
    rep["E_minus_1"] = float(np.max(np.abs(S.forms.E.values - 1)))
    rep.verdict("rotational_test", rot["max_abs_gamma1"], tol,
                passed=rot["passed"] == cfg["gamma.expect_rotational"])


COMMANDS = {
    "fixture": cmd_fixture,
    "analyze": cmd_analyze,
    "solve-pde": cmd_solve_pde,
    "reparam": cmd_reparam,
    "reconstruct": cmd_reconstruct,
    "gamma": cmd_gamma,
}


def run(cfg: RunConfig, out_dir=None):
    """Execute a configuration; returns ``(report, exit_code)``."""
    out = Path(out_dir) if out_dir is not None else cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    rep = Report(command=cfg.command, version=__version__, config=cfg.echo(),
                 threads=os.environ.get("THREADS"))
    t0 = time.perf_counter()
    code = 0
    try:
        COMMANDS[cfg.command](cfg, out, rep)
        verdicts = rep.get("verdicts", [])
        ok = all(v["passed"] for v in verdicts)
        rep["verdict"] = ("PASS" if ok else "FAIL") if verdicts else "COMPLETE"
        code = 0 if ok else 2
    except Exception as exc:  # the report is written whatever happens
        rep["verdict"] = "ERROR"
        rep["error"] = {"type": type(exc).__name__, "message": str(exc),
                        "traceback": traceback.format_exc()}
        code = 1
    rep["seconds"] = time.perf_counter() - t0
    write_report(out / f"{cfg.stem}.report.json", rep)
    return rep, code


def main(argv=None):
    parser = argparse.ArgumentParser(prog="invsurf", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SCHEMAS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--out", type=Path, default=None)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if cfg.command != args.subcommand:
            raise ConfigError(f"config is for {cfg.command!r}, not {args.subcommand!r}")
    except (ConfigError, OSError) as exc:
        print(f"invsurf: {type(exc).__name__}: {exc}", file=sys.stderr)
        out = args.out or Path("out")
        out.mkdir(parents=True, exist_ok=True)
        write_report(out / f"{args.subcommand}.report.json",
                     {"command": args.subcommand, "verdict": "ERROR",
                      "error": {"type": type(exc).__name__, "message": str(exc)}})
        return 1
    rep, code = run(cfg, args.out)
    print(f"{cfg.command}: {rep['verdict']}")
    if code == 1:
        print(f"invsurf: {rep['error']['type']}: {rep['error']['message']}", file=sys.stderr)
    log.info("report written to %s", (args.out or cfg.out_dir) / f"{cfg.stem}.report.json")
    return code


if __name__ == "__main__":
    sys.exit(main())
