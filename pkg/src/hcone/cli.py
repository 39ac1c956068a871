"""Command line front end: ``hcone <command> ...``.

Exit status is 0 on success or a passing check, 1 on a failing check and 2 on
usage or input errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from hcone.arcs import ArcFamily
from hcone.calibrate import (
    audit_tolerance,
    build_calibration,
    distributional_divergence_audit,
    verify_minimality_certificate,
)
from hcone.cone import (
    ConeSurface,
    HorizontalPlaneSpec,
    VerticalPlaneSpec,
    characteristic_vector,
    classify,
    evaluate,
    gradient,
    is_c1,
    oscillation_probe,
    singular_set,
)
from hcone.errors import HconeError, NotC1
from hcone.export import MeshSpec, export_mesh, figure_segments, write_figure_csv
from hcone.hgroup import PlanarCurve, balayage_area, lift_curve
from hcone.perimeter import Domain2D, perimeter_of_graph, perturbation_test, truncation_convergence

ARCS_SCHEMA = """\
arcs JSON schema:
  {"arcs": [{"center_rad": float, "half_angle_rad": float}, ...],
   "tail": null | {"accumulate_at_rad": float, "first_center_rad": float,
                   "ratio": float, "first_half_angle_rad": float}}
  every *_rad key may be given as *_deg instead.
curve CSV: one "x,y" pair per line."""


class UsageError(Exception):
    pass


def _floats(text: str, n: int | None = None) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc
    if n is not None and len(vals) != n:
        raise UsageError(f"expected {n} comma-separated numbers, got {text!r}")
    return vals


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from exc


def _load_family(path) -> ArcFamily:
    try:
        with open(path) as fh:
            return ArcFamily.from_json(fh.read())
    except (OSError, json.JSONDecodeError, KeyError, TypeError, HconeError) as exc:
        raise UsageError(f"cannot read arc family from {path}: {exc}") from exc


def _cone(args) -> ConeSurface:
    return ConeSurface(_load_family(args.arcs))


def _emit(obj, out=None) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    (out or sys.stdout).write(text)


def cmd_eval(args):
    x, y = _floats(args.at, 2)
    _emit({"at": [x, y], "u": evaluate(_cone(args), (x, y))})
    return 0


def cmd_grad(args):
    x, y = _floats(args.at, 2)
    cone = _cone(args)
    _emit({
        "at": [x, y],
        "gradient": gradient(cone, (x, y)).to_dict(),
        "characteristic_vector": characteristic_vector(cone, (x, y)).to_dict(),
    })
    return 0


def cmd_lift(args):
    try:
        curve = PlanarCurve.from_csv(args.curve)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read curve from {args.curve}: {exc}") from exc
    pts = lift_curve(curve, args.t0)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", "t"])
    for p in pts:
        w.writerow([repr(p.x), repr(p.y), repr(p.t)])
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(buf.getvalue())
        summary = {"points": len(pts), "final_t": pts[-1].t}
        v0 = curve.vertices[0]
        if v0[0] == 0.0 and v0[1] == 0.0:
            summary["balayage_area"] = balayage_area(curve)
        _emit(summary)
    else:
        sys.stdout.write(buf.getvalue())
    return 0


def cmd_singular(args):
    _emit({"singular_set": singular_set(_cone(args)).to_dict()})
    return 0


def cmd_check_c1(args):
    rep = is_c1(_cone(args))
    _emit(rep.to_dict())
    return 0 if rep.c1 else 1


def cmd_classify(args):
    if args.vertical_plane is not None:
        obj = VerticalPlaneSpec(tuple(_floats(args.vertical_plane, 2)))
    elif args.horizontal_plane:
        obj = HorizontalPlaneSpec()
    elif args.arcs:
        obj = _cone(args)
    else:
        raise UsageError("classify needs --arcs, --vertical-plane or --horizontal-plane")
    try:
        res = classify(obj)
    except NotC1 as exc:
        _emit({"error": "NotC1", "reason": str(exc)})
        return 1
    _emit(res.to_dict())
    return 0


def cmd_check_calibration(args):
    cone = _cone(args)
    cert = verify_minimality_certificate(cone, samples=args.samples, seed=args.seed)
    out = cert.to_dict()
    ok = cert.passed
    if args.audit_grid:
        vals = distributional_divergence_audit(build_calibration(cone), cells=args.audit_grid, seed=args.seed)
        worst = max(abs(v) for v in vals)
        tol = audit_tolerance(args.audit_grid)
        out["audit"] = {"grid": args.audit_grid, "tol": tol, "max_abs": worst, "values": vals, "passed": worst < tol}
        ok = ok and worst < tol
    _emit(out)
    return 0 if ok else 1


def _domain(args) -> Domain2D:
    try:
        return Domain2D.parse(args.domain, args.grid)
    except HconeError as exc:
        raise UsageError(str(exc)) from exc


def cmd_perimeter(args):
    dom = _domain(args)
    _emit({"domain": args.domain, "grid": args.grid, "perimeter": perimeter_of_graph(_cone(args), dom)})
    return 0


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def cmd_perturb(args):
    eps = _floats(args.eps)
    if not args.one_sided:
        eps = [s * e for e in eps for s in (1.0, -1.0)]
    rep = perturbation_test(_cone(args), _domain(args), args.trials, tuple(eps), seed=args.seed)
    if args.csv:
        _write_rows(args.csv, ["trial", "eps", "delta", "cx", "cy", "radius", "amplitude"],
                    [[r["trial"], repr(r["eps"]), repr(r["delta"]), repr(r["center"][0]), repr(r["center"][1]),
                      repr(r["radius"]), repr(r["amplitude"])] for r in rep.rows])
    out = rep.to_dict()
    if not args.full:
        out.pop("trials")
    _emit(out)
    return 0 if rep.passed else 1


def cmd_truncate(args):
    rep = truncation_convergence(_load_family(args.arcs), _domain(args), _ints(args.ks))
    if args.csv:
        _write_rows(args.csv, ["k", "k_next", "sup_diff", "bound", "l1", "l1_voxel"],
                    [[a, b, repr(s), repr(bd), repr(l1), repr(lv)] for a, b, s, bd, l1, lv in
                     zip(rep.ks, rep.ks[1:], rep.sup_diffs, rep.bounds, rep.l1_diffs, rep.l1_voxel)])
    _emit(rep.to_dict())
    return 0 if rep.within_bound and rep.monotone else 1


def cmd_probe(args):
    rep = oscillation_probe(_cone(args), args.radius, args.arcs_probed)
    _emit(rep.to_dict())
    ok = rep.min_amplitude >= 1.0 and rep.sup_grad <= rep.grad_bound and rep.radial_ok
    return 0 if ok else 1


def cmd_mesh(args):
    try:
        spec = MeshSpec(args.radius, args.angular, args.radial, args.out)
    except HconeError as exc:
        raise UsageError(str(exc)) from exc
    mesh = export_mesh(_cone(args), spec)
    _emit({"vertices": int(mesh.vertices.shape[0]), "faces": int(mesh.faces.shape[0]),
           "snapped_rays": mesh.extra_rays, "path": args.out})
    return 0


def cmd_figure(args):
    segs = figure_segments(_cone(args), radius=args.radius, lines=args.lines, with_field=args.with_field)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_figure_csv(fh, segs)
    else:
        write_figure_csv(sys.stdout, segs)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hcone", description=__doc__, epilog=ARCS_SCHEMA,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help, arcs=True):
        sp = sub.add_parser(name, help=help, epilog=ARCS_SCHEMA, formatter_class=argparse.RawDescriptionHelpFormatter)
        if arcs:
            sp.add_argument("--arcs", required=True, help="arc family JSON file")
        sp.set_defaults(func=func)
        return sp

    def domain_opts(sp, grid):
        sp.add_argument("--domain", default="disk:1", help="disk:R, disk:R@cx,cy or rect:x0,x1,y0,y1")
        sp.add_argument("--grid", type=int, default=grid, help="grid resolution n (>= 16)")

    sp = add("eval", cmd_eval, "value of u at a point")
    sp.add_argument("--at", required=True, help="x,y (use --at=-1,2 for negative x)")
    sp = add("grad", cmd_grad, "gradient and characteristic vector at a point")
    sp.add_argument("--at", required=True)
    sp = add("lift", cmd_lift, "horizontal lift of a polyline", arcs=False)
    sp.add_argument("--curve", required=True, help="CSV file of x,y vertices")
    sp.add_argument("--t0", type=float, default=0.0)
    sp.add_argument("--out", help="write the lifted CSV here and print a JSON summary")
    add("singular", cmd_singular, "singular set")
    add("check-c1", cmd_check_c1, "C^1 regularity test")
    sp = add("classify", cmd_classify, "classify a C^1 minimal cone", arcs=False)
    sp.add_argument("--arcs")
    sp.add_argument("--vertical-plane", metavar="NX,NY")
    sp.add_argument("--horizontal-plane", action="store_true")
    sp = add("check-calibration", cmd_check_calibration, "calibration certificate of minimality")
    sp.add_argument("--audit-grid", type=int, default=0, help="also run the test-function audit on an N x N grid")
    sp.add_argument("--samples", type=int, default=2000)
    sp.add_argument("--seed", type=int, default=0)
    sp = add("perimeter", cmd_perimeter, "perimeter of the subgraph over a domain")
    domain_opts(sp, 512)
    sp = add("perturb", cmd_perturb, "perimeter change under random bumps")
    domain_opts(sp, 256)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--eps", default="0.2,0.1,0.05")
    sp.add_argument("--one-sided", action="store_true", help="do not add the negated eps values")
    sp.add_argument("--seed", type=int, default=7)
    sp.add_argument("--csv", help="write per-trial rows here")
    sp.add_argument("--full", action="store_true", help="include per-trial rows in the JSON")
    sp = add("truncate", cmd_truncate, "convergence of truncations of an infinite family")
    domain_opts(sp, 256)
    sp.add_argument("--ks", default="2,4,8,16")
    sp.add_argument("--csv")
    sp = add("probe-oscillation", cmd_probe, "gradient oscillation near the accumulation ray")
    sp.add_argument("--radius", type=float, default=1.0)
    sp.add_argument("--arcs-probed", type=int, default=20)
    sp = add("mesh", cmd_mesh, "export an OBJ triangle mesh of the graph")
    sp.add_argument("--radius", type=float, default=1.0)
    sp.add_argument("--angular", type=int, default=64)
    sp.add_argument("--radial", type=int, default=16)
    sp.add_argument("--out", required=True)
    sp = add("figure", cmd_figure, "CSV of the ruling line arrangement")
    sp.add_argument("--radius", type=float, default=1.0)
    sp.add_argument("--lines", type=int, default=10)
    sp.add_argument("--with-field", action="store_true")
    sp.add_argument("--out")
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"hcone {args.command}: {exc}\n\n{ARCS_SCHEMA}\n")
        return 2
    except HconeError as exc:
        sys.stderr.write(f"hcone {args.command}: {type(exc).__name__}: {exc}\n")
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
