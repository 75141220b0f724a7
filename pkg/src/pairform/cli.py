"""Batch command-line front end.

Every subcommand writes one JSON (or CSV) report holding the command name,
the fully resolved configuration and the result.  Exit codes: 0 success,
2 invalid input, 3 a refinement study that did not reach its tolerance
(the report is still written).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from . import cochain as C
from . import curvature, integrate as I, mesh as M, stochastic as S, vanest as VE
from .errors import PairformError
from .exprlang import compile_expr
from .forms import volume_form

EXIT_OK, EXIT_INVALID, EXIT_NOT_CONVERGED = 0, 2, 3


class UsageError(PairformError):
    pass


# ---------------------------------------------------------------------------
# argument helpers

def parse_function(spec, what="function"):
    if spec is None:
        raise UsageError(f"missing {what}; pass it as expr:<text>")
    if not spec.startswith("expr:"):
        raise UsageError(f"{what} must be given as expr:<text>, got {spec!r}")
    return compile_expr(spec[len("expr:"):])


def parse_floats(text, what):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{what} must be a comma-separated list of numbers, got {text!r}")


def load_mesh_spec(spec):
    if spec is None:
        raise UsageError("missing --mesh")
    kind, _, params = spec.partition(":")
    if kind in M._GENERATORS:
        values = parse_floats(params, "mesh parameters") if params else []
        return M.generate_standard(kind, *values)
    path = Path(spec)
    if path.is_file():
        return M.load_mesh(path)
    raise UsageError(f"--mesh {spec!r} is neither a known kind ({', '.join(sorted(M._GENERATORS))}) "
                     "nor an existing file")


def _pair_expr(spec, what):
    """A degree-1 cochain on R from an expression in x (first point) and y (second)."""
    f = parse_function(spec, what)
    return C.Cochain(1, 1, lambda P: f(P[:, 0, 0], P[:, 1, 0]), math.inf, "none", False,
                     f.source)


def build_cochain(spec, args, degree, dim):
    """Resolve ``builtin:<name>`` or ``expr:`` specs against the other flags."""
    if spec is None:
        raise UsageError("missing cochain; pass builtin:<name> or expr:<text>")
    if spec.startswith("expr:"):
        if (degree, dim) != (1, 1):
            raise UsageError("expr: cochains are degree-1 cochains on R in x and y")
        return _pair_expr(spec, "cochain")
    if not spec.startswith("builtin:"):
        raise UsageError(f"cochain must be builtin:<name> or expr:<text>, got {spec!r}")
    name = spec[len("builtin:"):]
    if name in ("left_riemann", "right_riemann"):
        if degree != dim:
            raise UsageError(f"{name} needs a full-dimensional mesh")
        return C.builtin(name, parse_function(args.f, "--f"), degree)
    if name == "det_volume":
        return C.det_volume(degree)
    if name == "antiderivative":
        if degree != 1:
            raise UsageError("antiderivative is a degree-1 cochain")
        return C.antiderivative(parse_function(args.F, "--F"), dim)
    if name == "density_measure":
        return C.density_measure(parse_function(args.h, "--h"), degree, dim)
    if name == "convex_hull_cocycle":
        if degree != dim:
            raise UsageError("convex_hull_cocycle from the CLI integrates a volume form")
        coeff = parse_function(args.f, "--f") if args.f else 1.0
        return C.convex_hull_cocycle(volume_form(dim, coeff))
    if name == "dirac":
        pt = parse_floats(args.point or "", "--point")
        w = parse_function(args.f, "--f") if args.f else None
        return C.dirac(pt, degree, w)
    if name == "euler":
        return C.euler(degree, dim)
    if name == "winding":
        center = parse_floats(args.center, "--center") if args.center else [0.0, 0.0]
        return C.winding(center)
    if name == "zero":
        return C.zero(degree, dim)
    if name == "random_antisymmetric":
        return C.random_antisymmetric(degree, dim, args.seed)
    raise UsageError(f"unknown builtin {name!r}; choose from {sorted(C.BUILTINS)}")


def _threads():
    raw = os.environ.get("PAIRFORM_THREADS")
    if raw is None:
        return None
    try:
        val = int(raw)
    except ValueError:
        raise UsageError(f"PAIRFORM_THREADS must be a positive integer, got {raw!r}")
    if val < 1:
        raise UsageError("PAIRFORM_THREADS must be a positive integer")
    return val


# ---------------------------------------------------------------------------
# subcommands; each returns (result dict, converged flag)

def _convergence(report):
    return report.to_dict(), report.converged


def cmd_mesh(args):
    T = load_mesh_spec(args.mesh)
    for _ in range(args.refine):
        T = M.refine(T, args.scheme)
    if args.save:
        M.save_mesh(T, args.save)
    B = M.boundary(T) if T.dimension else None
    return {
        "dimension": T.dimension,
        "ambient_dim": T.ambient_dim,
        "manifold_tag": T.manifold_tag,
        "n_vertices": T.n_vertices,
        "n_simplices": T.n_simplices,
        "mesh_size": M.mesh_size(T),
        "face_counts": [len(M.faces(T, k)) for k in range(T.dimension + 1)],
        "chi": I.euler_characteristic(T),
        "n_boundary_simplices": 0 if B is None else B.n_simplices,
    }, True


def cmd_integrate(args):
    T = load_mesh_spec(args.mesh)
    omega = build_cochain(args.cochain, args, T.dimension, T.ambient_dim)
    return _convergence(I.integrate(omega, T, args.scheme, args.tol, args.max_levels))


def cmd_relative(args):
    T = load_mesh_spec(args.mesh)
    if args.interior is None:
        raise UsageError("relative needs --interior")
    om = build_cochain(args.interior, args, T.dimension, T.ambient_dim)
    ob = build_cochain(args.boundary, args, T.dimension - 1, T.ambient_dim)
    R = C.RelativeCochain(om, ob)
    report = I.refinement_study(lambda X: I.relative_pairing(R, X), T, args.scheme, args.tol,
                                args.max_levels, "relative_pairing")
    return _convergence(report)


def cmd_stokes(args):
    T = load_mesh_spec(args.mesh)
    omega = build_cochain(args.cochain, args, T.dimension - 1, T.ambient_dim)
    rep = I.stokes_check(omega, T)
    return {"residual": rep.residual, "n_terms": rep.n_terms, "bound": rep.bound,
            "passed": rep.passed, "boundary_sum": rep.boundary_sum,
            "interior_sum": rep.interior_sum}, True


def cmd_euler(args):
    T = load_mesh_spec(args.mesh)
    return {"chi": I.euler_characteristic(T), "chi_from_cochain": I.euler_cochain_sum(T)}, True


def cmd_rs(args):
    T = load_mesh_spec(args.mesh)
    f = parse_function(args.f, "--f")
    if args.g is not None:
        if T.dimension != 1:
            raise UsageError("--g defines a 0-cochain; use --cochain on higher-dimensional meshes")
        omega = C.function_cochain(parse_function(args.g, "--g"), T.ambient_dim)
    else:
        omega = build_cochain(args.cochain, args, T.dimension - 1, T.ambient_dim)
    result, conv = _convergence(I.rs_integral(f, omega, T, args.scheme, args.tol, args.max_levels))
    tv = I.total_variation(C.differential(omega), T, args.scheme, len(result["levels"]))
    result["total_variation"] = {"values": tv.values, "value": tv.value}
    return result, conv


def cmd_gauss_bonnet(args):
    T = load_mesh_spec(args.mesh)
    if T.manifold_tag == "sphere":
        fn = curvature.gauss_bonnet_sphere
    elif T.manifold_tag == "flat" and T.dimension == 2 and T.ambient_dim == 2:
        fn = curvature.gauss_bonnet_disk
    else:
        raise UsageError("gauss-bonnet needs a sphere mesh or a planar disk mesh")
    report = I.refinement_study(fn, T, args.scheme, args.tol, args.levels, "gauss_bonnet",
                                stop_early=False)
    result = report.to_dict()
    result["target"] = 2 * math.pi * I.euler_characteristic(T)
    return result, report.converged or args.levels == 1


def _mc(args, jet):
    if args.samples < 2:
        raise UsageError("--samples must be at least 2")
    steps = args.steps[-1] if args.steps else 1024
    mean, err = S.expectation(jet, steps, args.samples, args.seed)
    return {"mean": mean, "stderr": err, "n_samples": args.samples, "steps": steps,
            "seed": args.seed}, True


def cmd_ito(args):
    return _mc(args, S.ito_jet(parse_function(args.f, "--f")))


def cmd_strat(args):
    fp = parse_function(args.fprime, "--fprime") if args.fprime else None
    return _mc(args, S.stratonovich_jet(parse_function(args.f, "--f"), fp))


def cmd_jet_study(args):
    o1 = _pair_expr(args.omega1, "--omega1")
    o2 = _pair_expr(args.omega2, "--omega2")
    sizes = args.steps or [2 ** k for k in range(6, 13)]
    rep = S.l2_equivalence_study(o1, o2, sizes, args.samples, args.seed,
                                 require_equal_jets=not args.allow_jet_mismatch)
    return rep.to_dict(), True


def cmd_fk_lattice(args):
    V = parse_function(args.V, "--V")
    psi0 = parse_function(args.psi0, "--psi0")
    n_pts = int(round((args.x_max - args.x_min) / args.dx)) + 1
    if n_pts < 3:
        raise UsageError("grid needs at least three points")
    x = args.x_min + args.dx * np.arange(n_pts)
    steps = args.steps[-1] if args.steps else 64
    psi = S.feynman_kac_lattice(V, psi0, steps, x)
    return {"steps": steps, "x": x.tolist(), "psi": psi.tolist()}, True


def cmd_ve_check(args):
    point = parse_floats(args.point, "--point")
    d = len(point)
    omega = build_cochain(args.cochain, args, args.degree, d)
    if args.vectors:
        vecs = [parse_floats(v, "--vectors") for v in args.vectors.split(";")]
    else:
        vecs = np.eye(d)[: omega.degree].tolist()
    ve = VE.van_est(omega, point, vecs, args.step)
    std = VE.van_est_standard(omega, point, vecs, args.step)
    result = {"van_est": ve, "van_est_standard": std,
              "ratio": std / ve if ve != 0 else None,
              "factorial": math.factorial(omega.degree)}
    if omega.degree == d and omega.degree >= 1:
        ts = [2.0 ** -k for k in range(3, 9)]
        res = [VE.leading_term_residual(omega, point, t, h=args.step) for t in ts]
        ok = [r > 0 for r in res]
        slope = (float(np.polyfit(np.log(np.array(ts)[ok]), np.log(np.array(res)[ok]), 1)[0])
                 if sum(ok) >= 2 else None)
        result["leading_term"] = [{"t": t, "residual": r} for t, r in zip(ts, res)]
        result["leading_term_slope"] = slope
    if omega.symmetry_tag == "completely_antisymmetric":
        extra = np.eye(d)[: omega.degree + 1] if omega.degree + 1 <= d else \
            np.ones((omega.degree + 1, d))
        result["ve_delta_residual"] = VE.ve_delta_commutation(omega, point, extra, args.step)
    return result, True


COMMANDS = {
    "mesh": cmd_mesh,
    "integrate": cmd_integrate,
    "relative": cmd_relative,
    "stokes": cmd_stokes,
    "euler": cmd_euler,
    "rs": cmd_rs,
    "gauss-bonnet": cmd_gauss_bonnet,
    "ito": cmd_ito,
    "strat": cmd_strat,
    "jet-study": cmd_jet_study,
    "fk-lattice": cmd_fk_lattice,
    "ve-check": cmd_ve_check,
}


# ---------------------------------------------------------------------------
# parser

def _common(p, mesh=True, levels=True):
    p.add_argument("--out", help="report path (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    if mesh:
        p.add_argument("--mesh", help="kind:params (e.g. interval:0,1,4) or a mesh JSON file")
    if levels:
        p.add_argument("--scheme", choices=M.SCHEMES, default="edge_midpoint")
        p.add_argument("--tol", type=float, default=1e-10)
        p.add_argument("--max-levels", type=int, default=6)


def _functions(p):
    p.add_argument("--f", help="expr:<text>")
    p.add_argument("--F", help="expr:<text>")
    p.add_argument("--h", dest="h", help="density, expr:<text>")
    p.add_argument("--point", help="comma-separated coordinates")
    p.add_argument("--center", help="comma-separated coordinates")
    p.add_argument("--seed", type=int, default=0)


def build_parser():
    parser = argparse.ArgumentParser(prog="pairform", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"pairform {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mesh", help="generate, refine and describe a mesh")
    _common(p, levels=False)
    p.add_argument("--refine", type=int, default=0)
    p.add_argument("--scheme", choices=M.SCHEMES, default="edge_midpoint")
    p.add_argument("--save", help="write the resulting mesh as JSON")

    p = sub.add_parser("integrate", help="refinement study of a Riemann-like sum")
    _common(p)
    _functions(p)
    p.add_argument("--cochain", required=True)

    p = sub.add_parser("relative", help="interior minus boundary pairing")
    _common(p)
    _functions(p)
    p.add_argument("--interior")
    p.add_argument("--boundary", default="builtin:zero")

    p = sub.add_parser("stokes", help="combinatorial Stokes residual")
    _common(p, levels=False)
    _functions(p)
    p.add_argument("--cochain", default="builtin:random_antisymmetric")

    p = sub.add_parser("euler", help="Euler characteristic")
    _common(p, levels=False)

    p = sub.add_parser("rs", help="Riemann-Stieltjes integral of f against a cochain")
    _common(p)
    _functions(p)
    p.add_argument("--g", help="0-cochain as expr:<text> (1-D meshes)")
    p.add_argument("--cochain")

    p = sub.add_parser("gauss-bonnet", help="angle-cochain Gauss-Bonnet sums per level")
    _common(p, levels=False)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--scheme", choices=M.SCHEMES, default="edge_midpoint")
    p.add_argument("--tol", type=float, default=1e-9)

    for name, helptext in (("ito", "Monte Carlo mean of the Ito integral"),
                           ("strat", "Monte Carlo mean of the Stratonovich integral")):
        p = sub.add_parser(name, help=helptext)
        _common(p, mesh=False, levels=False)
        p.add_argument("--f", required=True)
        p.add_argument("--steps", type=int, action="append")
        p.add_argument("--samples", type=int, default=10000)
        p.add_argument("--seed", type=int, default=0)
        if name == "strat":
            p.add_argument("--fprime", help="derivative of f (default: central difference)")

    p = sub.add_parser("jet-study", help="L2 distance between two representatives")
    _common(p, mesh=False, levels=False)
    p.add_argument("--omega1", required=True, help="expr: in x (start) and y (end)")
    p.add_argument("--omega2", required=True)
    p.add_argument("--steps", type=int, action="append")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--allow-jet-mismatch", action="store_true")

    p = sub.add_parser("fk-lattice", help="Wiener lattice propagation of psi0")
    _common(p, mesh=False, levels=False)
    p.add_argument("--V", default="expr:0")
    p.add_argument("--psi0", required=True)
    p.add_argument("--steps", type=int, action="append")
    p.add_argument("--x-min", type=float, default=-8.0)
    p.add_argument("--x-max", type=float, default=8.0)
    p.add_argument("--dx", type=float, default=1 / 64)

    p = sub.add_parser("ve-check", help="van Est estimates and residuals at a point")
    _common(p, mesh=False, levels=False)
    _functions(p)
    p.add_argument("--cochain", required=True)
    p.add_argument("--degree", type=int, default=1)
    p.add_argument("--vectors", help="semicolon-separated vectors, e.g. 1,0;0,1")
    p.add_argument("--step", type=float, default=None, help="finite-difference step")
    return parser


# ---------------------------------------------------------------------------
# output

def _clean(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, (np.floating,)):
        return _clean(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _to_csv(result):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if "levels" in result:
        w.writerow(["level", "mesh_size", "n_simplices", "sum", "delta"])
        for lv in result["levels"]:
            w.writerow([lv["level"], repr(lv["mesh_size"]), lv["n_simplices"], repr(lv["sum"]),
                        "" if lv["delta"] is None else repr(lv["delta"])])
    elif "grid_sizes" in result:
        w.writerow(["N", "mean", "stderr", "l2_diff"])
        for row in zip(result["grid_sizes"], result["means"], result["stderrs"],
                       result["l2_diffs"]):
            w.writerow(row)
    elif "psi" in result:
        w.writerow(["x", "psi"])
        for row in zip(result["x"], result["psi"]):
            w.writerow([repr(v) for v in row])
    else:
        w.writerow(["key", "value"])
        for k in sorted(result):
            w.writerow([k, json.dumps(result[k], sort_keys=True)])
    return buf.getvalue()


def write_atomic(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render(command, config, result, fmt):
    if fmt == "csv":
        return _to_csv(_clean(result))
    doc = {"command": command, "config": config, "result": result}
    return json.dumps(_clean(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        threads = _threads()
        config = dict(sorted(vars(args).items()))
        config["threads"] = threads
        result, converged = COMMANDS[args.command](args)
        text = render(args.command, config, result, args.format)
    except (PairformError, ValueError) as exc:
        print(f"pairform {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if converged else EXIT_NOT_CONVERGED


if __name__ == "__main__":
    sys.exit(main())
