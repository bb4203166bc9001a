"""Command-line interface: ``frame-map <command> [options]``.

Every command prints a JSON report (schema ``frame-map/1``) echoing the
inputs, the results, the seed, the package version and the wall time.  With
``--format csv`` commands that produce per-sample or per-setting data emit
one row per item instead.

Exit codes: 0 success, 2 invalid input, 3 a numerical contract failed.

CSV columns
  rank-survey        index, x1..xn, s1..sn, rank
  trace-check        eps, samples, max_deviation, bound
  continuity-check   kind, delta, samples, max_jump, max_jump_over_lipschitz_delta
  growth-cert        scale, integral, std_error, lower, L_prime
  other commands     a single row of flattened results
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from importlib import metadata

import numpy as np

from . import analysis, frame_map, jacobian, whitney
from .errors import FrameMapError
from .geometry import ConeId

SCHEMA = "frame-map/1"
EXIT_OK, EXIT_USAGE, EXIT_CONTRACT = 0, 2, 3

# public operation -> the subcommand exposing it
OPERATIONS = {
    "inf_norm": "eval", "cone_of": "eval", "face_chart": "eval", "face_unchart": "eval",
    "quadrant_of": "eval", "base_map": "eval", "u_eval": "eval", "v_eval": "eval",
    "w_eval": "eval", "affine_frame_map": "eval",
    "jac_analytic": "jacobian", "jac_fd": "jacobian", "rank_report": "rank-survey",
    "seminorm_recursive": "seminorm", "seminorm_mc": "seminorm",
    "shell_identity_check": "shell-check", "boundary_trace_scan": "trace-check",
    "continuity_scan": "continuity-check", "growth_certificate": "growth-cert",
    "det_vanishing_scan": "det-scan",
    "ring_bounds": "whitney-locate", "locate": "whitney-locate",
    "ring_cube_count": "whitney-locate", "face_neighbor_kind": "whitney-locate",
    "naive_edge_map": "naive-demo",
}


class UsageError(ValueError):
    pass


class ContractFailure(Exception):
    def __init__(self, message: str, report: dict):
        super().__init__(message)
        self.report = report


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        from . import __version__

        return __version__


def parse_point(text: str) -> np.ndarray:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"points are comma-separated reals, got {text!r}") from exc
    if not vals or not all(math.isfinite(v) for v in vals):
        raise UsageError(f"points need at least one finite coordinate, got {text!r}")
    return np.array(vals)


def parse_matrix(text: str | None, path: str | None) -> np.ndarray | None:
    if text and path:
        raise UsageError("give either --matrix or --matrix-file, not both")
    if path:
        with open(path) as fh:
            rows = json.load(fh)
    elif text:
        rows = [[float(v) for v in r.split(",") if v.strip()] for r in text.split(";") if r.strip()]
    else:
        return None
    try:
        M = np.array(rows, dtype=float)
    except ValueError as exc:
        raise UsageError("matrix rows must have equal length") from exc
    if M.ndim != 2 or not np.all(np.isfinite(M)):
        raise UsageError("matrix must be a finite 2-D array")
    return M


def parse_cones(text: str | None, n: int):
    """``all``, ``none`` or a list like ``1+,2-``."""
    if text is None or text == "none":
        return np.zeros(2 * n, dtype=bool)
    if text == "all":
        return np.ones(2 * n, dtype=bool)
    cones = []
    for tok in text.split(","):
        tok = tok.strip()
        if len(tok) < 2 or tok[-1] not in "+-" or not tok[:-1].isdigit():
            raise UsageError(f"cones are written like 1+ or 3-, got {tok!r}")
        axis = int(tok[:-1])
        if not 1 <= axis <= n:
            raise UsageError(f"cone axis {axis} outside 1..{n}")
        cones.append(ConeId(axis, 1 if tok[-1] == "+" else -1))
    return frame_map.cone_mask(n, cones)


def _spec(args) -> frame_map.MapSpec:
    try:
        return frame_map.MapSpec(args.dim, args.frame, args.k_max)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _need_dim(x: np.ndarray, n: int):
    if x.size != n:
        raise UsageError(f"point has {x.size} coordinates but --dim is {n}")


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


# -- commands ----------------------------------------------------------------------

def cmd_eval(args):
    spec = _spec(args)
    x = parse_point(args.point)
    _need_dim(x, spec.n)
    xi = parse_matrix(args.matrix, args.matrix_file)
    sub = parse_cones(args.subdivide, spec.n) if args.map == "v" else None
    ev = frame_map.evaluate(spec, x[None], args.map, subdivided=sub)
    frame_map._raise_status(int(ev.status[0]))
    value = ev.value[0]
    res = {"value": value.tolist(), "inf_norm": float(np.max(np.abs(x)))}
    if np.any(x != 0):
        c = frame_map.cone_of_batch(x[None])
        res["cone"] = {"axis": int(c[0][0]) + 1, "sign": int(c[1][0])}
    if xi is not None:
        g = frame_map.AffineMap(np.zeros(xi.shape[0]) if args.offset is None else parse_point(args.offset), xi)
        res["affine_value"] = g(value).tolist()
    return res, None


def cmd_jacobian(args):
    spec = _spec(args)
    x = parse_point(args.point)
    _need_dim(x, spec.n)
    sub = parse_cones(args.subdivide, spec.n) if args.map == "v" else None
    rep = jacobian.jac_analytic(spec, x, args.map, sub, tol=args.tol)
    res = {
        "matrix": rep.matrix.tolist(), "singular_values": rep.singular_values.tolist(),
        "numerical_rank": rep.numerical_rank, "piece": list(rep.piece.chain),
    }
    if args.fd_step is not None:
        fd = jacobian.jac_fd(spec, x, args.fd_step, args.map, sub)
        err = np.linalg.norm(fd.matrix - rep.matrix) / max(np.linalg.norm(rep.matrix), 1e-300)
        res["fd_matrix"] = fd.matrix.tolist()
        res["fd_relative_error"] = float(err)
    return res, None


def cmd_rank_survey(args):
    spec = _spec(args)
    rng = np.random.default_rng(args.seed)
    X = rng.uniform(-1.0, 1.0, (args.samples, spec.n))
    ev = frame_map.evaluate(spec, X, args.map, jac=True)
    keep = ev.ok & (ev.margin >= jacobian.STRATUM_TOL)
    sv, rank = jacobian.batch_ranks(ev.jac[keep], args.tol)
    hist = np.bincount(rank, minlength=spec.n + 1)
    ratio = sv[:, spec.k - 2] / sv[:, 0]
    res = {
        "evaluated": int(keep.sum()), "rank_histogram": hist.tolist(),
        "max_rank": int(rank.max()), "bound": spec.k - 1,
        "fraction_attaining_bound": float(np.mean(ratio > 1e-3)),
    }
    rows = [
        {"index": i, **{f"x{j + 1}": X[keep][i, j] for j in range(spec.n)},
         **{f"s{j + 1}": sv[i, j] for j in range(spec.n)}, "rank": int(rank[i])}
        for i in range(rank.size)
    ]
    if res["max_rank"] > spec.k - 1:
        raise ContractFailure("numerical rank exceeds k - 1", res)
    return res, rows


def cmd_seminorm(args):
    spec = _spec(args)
    res = {}
    try:
        if args.method == "recursive":
            res["value"] = analysis.seminorm_recursive(spec.n, spec.k, args.p)
        else:
            est = analysis.seminorm_mc(spec, args.p, args.samples, args.seed, args.map,
                                       method=args.method, workers=args.workers)
            res.update(est.as_dict())
            res["recursive"] = analysis.seminorm_recursive(spec.n, spec.k, args.p)
    except analysis.ExponentOutOfRange as exc:
        raise UsageError(str(exc)) from exc
    return res, None


def cmd_shell_check(args):
    spec = _spec(args)
    gens = [int(g) for g in args.generations.split(",")]
    rep = analysis.shell_identity_check(spec, args.p, args.samples, args.seed, gens, args.workers)
    res = rep.as_dict()
    bad = [c for c in rep.per_cube if not c.consistent]
    if bad or abs(rep.shell_ratio - 1) > 3 * rep.shell_ratio_error:
        raise ContractFailure("per-cube or shell ratio differs from 1 by more than 3 sigma", res)
    return res, None


def cmd_trace_check(args):
    spec = _spec(args)
    rows = [analysis.boundary_trace_scan(spec, e, args.samples, args.seed) for e in _floats(args.eps)]
    res = {"scans": rows}
    if len(rows) > 1:
        res["ratios"] = [rows[i]["max_deviation"] / rows[i + 1]["max_deviation"]
                         for i in range(len(rows) - 1)]
    csv_rows = [{k: r[k] for k in ("eps", "samples", "max_deviation", "bound")} for r in rows]
    if any(r["max_deviation"] > r["bound"] for r in rows):
        raise ContractFailure("deviation exceeds 8 sqrt(n) eps", res)
    return res, csv_rows


def cmd_continuity_check(args):
    spec = _spec(args)
    kinds = ["cone", "quadrant", "cube"] if args.kind == "all" else [args.kind]
    if spec.n == spec.k:
        kinds = [k for k in kinds if k == "cone"]
    rows = []
    for kind in kinds:
        for d in _floats(args.delta):
            r = analysis.continuity_scan(spec, kind, d, args.samples, args.seed)
            rows.append(r)
    res = {"scans": rows}
    csv_rows = [{k: r[k] for k in ("kind", "delta", "samples", "max_jump",
                                   "max_jump_over_lipschitz_delta")} for r in rows]
    if any(r["max_jump"] > args.max_jump for r in rows if r["delta"] == min(_floats(args.delta))):
        raise ContractFailure(f"jump above {args.max_jump:g} at the smallest gap", res)
    return res, csv_rows


def cmd_growth_cert(args):
    spec = _spec(args)
    xi0 = parse_matrix(args.matrix, args.matrix_file)
    if xi0 is None:
        xi0 = np.eye(spec.n)
    if xi0.shape[1] != spec.n:
        raise UsageError(f"matrix needs {spec.n} columns")
    rows = []
    for t in _floats(args.scales):
        rep = analysis.growth_certificate(spec, t * xi0, args.integrand, args.p, args.samples,
                                          args.seed, args.minor_size, args.workers)
        rows.append({"scale": t, "integral": rep.integral.value,
                     "std_error": rep.integral.std_error, "lower": rep.lower,
                     "L_prime": rep.L_prime})
    Ls = [r["L_prime"] for r in rows]
    res = {"rows": rows, "L_prime_max": max(Ls), "L_prime_min": min(Ls)}
    return res, rows


def cmd_det_scan(args):
    spec = _spec(args)
    xi = parse_matrix(args.matrix, args.matrix_file)
    if xi is None:
        xi = np.eye(spec.n)
    res = analysis.det_vanishing_scan(spec, xi, args.samples, args.seed, args.minor_size)
    if res["max_relative_det"] > args.tol:
        raise ContractFailure("a minor determinant does not vanish", res)
    return res, None


def cmd_whitney_locate(args):
    res = {}
    if args.point:
        y = parse_point(args.point)
        cube = whitney.locate(y, args.k_max)
        res["cube"] = {"generation": cube.generation, "center": cube.center.tolist(),
                       "half_side": cube.half_side, "ring_bounds": list(whitney.ring_bounds(cube.generation))}
        res["faces"] = {
            f"{a}{'+' if s > 0 else '-'}": whitney.face_neighbor_kind(cube, ConeId(a, s)).value
            for a in range(1, y.size + 1) for s in (1, -1)
        }
    if args.count:
        res["ring_cube_counts"] = {str(k): whitney.ring_cube_count(k, args.dim)
                                   for k in range(2, args.count + 1)}
    if not res:
        raise UsageError("give --point and/or --count")
    return res, None


def cmd_naive_demo(args):
    x = np.array([0.5, 0.5, 0.25, 0.0])
    naive = frame_map.naive_edge_map(x)
    sub = frame_map.naive_subdivided_map(x, ConeId(1, 1))
    # the naive subdivided map on either side of the C1/C2 boundary
    d = 1e-9
    side1 = frame_map.naive_subdivided_map(x + [d, -d, 0, 0], ConeId(1, 1))
    side2 = frame_map.naive_subdivided_map(x + [-d, d, 0, 0], ConeId(1, 1))
    jump = float(np.linalg.norm(side1 - side2))
    res = {
        "point": x.tolist(), "naive": naive.tolist(), "subdivided": sub.tolist(),
        "one_sided": {"C1": side1.tolist(), "C2": side2.tolist()}, "jump": jump,
        "discontinuity_confirmed": bool(jump > 0.1 and not np.allclose(naive, sub)),
    }
    if not res["discontinuity_confirmed"]:
        raise ContractFailure("expected a jump across the cone boundary", res)
    res["flag"] = "discontinuity confirmed"
    return res, None


COMMANDS = {
    "eval": cmd_eval, "jacobian": cmd_jacobian, "rank-survey": cmd_rank_survey,
    "seminorm": cmd_seminorm, "shell-check": cmd_shell_check, "trace-check": cmd_trace_check,
    "continuity-check": cmd_continuity_check, "growth-cert": cmd_growth_cert,
    "det-scan": cmd_det_scan, "whitney-locate": cmd_whitney_locate, "naive-demo": cmd_naive_demo,
}


def _default_seed() -> int:
    env = os.environ.get("FRAME_MAP_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"FRAME_MAP_SEED must be an integer, got {env!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dim", type=int, default=2, help="ambient dimension n")
    common.add_argument("--frame", type=int, default=2, help="frame parameter k (2 <= k <= n)")
    common.add_argument("--k-max", type=int, default=whitney.DEFAULT_K_MAX, help="Whitney depth cap")
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default: $FRAME_MAP_SEED or 0)")
    common.add_argument("--samples", type=int, default=100_000)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--output", help="write the report here instead of stdout")

    parser = argparse.ArgumentParser(prog="frame-map", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    maps = ["w", "u", "v", "subface", "base"]

    p = sub.add_parser("eval", parents=[common], help="evaluate a map at a point")
    p.add_argument("--map", choices=maps, default="w")
    p.add_argument("--point", required=True)
    p.add_argument("--subdivide", help="cones for --map v: all, none or e.g. 1+,2-")
    p.add_argument("--matrix", help="compose with z + xi y; rows separated by ';'")
    p.add_argument("--matrix-file")
    p.add_argument("--offset")

    p = sub.add_parser("jacobian", parents=[common], help="analytic Jacobian and rank")
    p.add_argument("--map", choices=maps, default="w")
    p.add_argument("--point", required=True)
    p.add_argument("--subdivide")
    p.add_argument("--tol", type=float, default=jacobian.RANK_TOL)
    p.add_argument("--fd-step", type=float, help="also compute central differences")

    p = sub.add_parser("rank-survey", parents=[common], help="ranks at random points")
    p.add_argument("--map", choices=maps, default="w")
    p.add_argument("--tol", type=float, default=jacobian.RANK_TOL)

    p = sub.add_parser("seminorm", parents=[common], help="integral of |grad w|^p")
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--method", choices=["recursive", "radial", "plain"], default="radial")
    p.add_argument("--map", choices=maps, default="w")

    p = sub.add_parser("shell-check", parents=[common], help="Whitney per-cube and shell identities")
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--generations", default="2,3,4")

    p = sub.add_parser("trace-check", parents=[common], help="|w(x) - x| near the boundary")
    p.add_argument("--eps", default="1e-2,1e-3,1e-4")

    p = sub.add_parser("continuity-check", parents=[common], help="jumps across strata")
    p.add_argument("--kind", choices=["cone", "quadrant", "cube", "all"], default="all")
    p.add_argument("--delta", default="1e-4,1e-6,1e-8")
    p.add_argument("--max-jump", type=float, default=1e-6)

    p = sub.add_parser("growth-cert", parents=[common], help="integral of f(xi grad w) along a ray")
    p.add_argument("--matrix")
    p.add_argument("--matrix-file")
    p.add_argument("--integrand", choices=["frobenius-power", "det-power", "minor-det"],
                   default="frobenius-power")
    p.add_argument("--p", type=float, default=1.0, help="integrand exponent")
    p.add_argument("--minor-size", type=int)
    p.add_argument("--scales", default="1,10,100,1000")

    p = sub.add_parser("det-scan", parents=[common], help="minor determinants of xi grad w")
    p.add_argument("--matrix")
    p.add_argument("--matrix-file")
    p.add_argument("--minor-size", type=int)
    p.add_argument("--tol", type=float, default=1e-8)

    p = sub.add_parser("whitney-locate", parents=[common], help="locate a point of D = (-3,3)^n")
    p.add_argument("--point")
    p.add_argument("--count", type=int, help="print ring cube counts up to this generation")

    sub.add_parser("naive-demo", parents=[common], help="discontinuity of the naive edge map")
    return parser


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, list):
            out[key] = json.dumps(_jsonable(v))
        else:
            out[key] = v
    return out


def _render(report: dict, rows, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"
    rows = rows or [_flatten(report["results"])]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow(_jsonable(r))
    return buf.getvalue()


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    start = time.perf_counter()
    code = EXIT_OK
    rows = None
    try:
        if args.seed is None:
            args.seed = _default_seed()
        if args.samples < 1 or args.workers < 1:
            raise UsageError("--samples and --workers must be positive")
        results, rows = COMMANDS[args.command](args)
    except ContractFailure as exc:
        results, code = dict(exc.report, contract_failure=str(exc)), EXIT_CONTRACT
    except (UsageError, FrameMapError, ValueError) as exc:
        print(f"frame-map {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    inputs = {k: v for k, v in vars(args).items() if k not in ("output", "format")}
    report = {
        "schema": SCHEMA, "command": args.command, "inputs": inputs, "results": results,
        "seed": args.seed, "version": _version(),
        "wall_time_s": round(time.perf_counter() - start, 6), "exit_code": code,
    }
    text = _render(report, rows, args.format)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
