"""Command-line front end.

Every subcommand writes a table (CSV with a header row, or a JSON array of
records carrying a ``paper_ref`` field that names the checked identity) and
prints one summary line to stderr. Exit status: 0 on success, 1 when a gate
is violated, 2 on usage errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from . import __version__
from .core import Dimensions, Drift, GrushinMultiIndex, GrushinPoint, dilate, rotate, rotate_drift
from .errors import GrushinError
from .quadrature import DEFAULT_SPEC, QuadratureSpec

EXIT_OK, EXIT_GATE, EXIT_USAGE = 0, 1, 2


@dataclass
class RunConfig:
    """Options shared by all subcommands."""

    dims: Dimensions
    q: QuadratureSpec
    seed: int
    fmt: str
    output: Optional[str]


@dataclass
class Result:
    """Rows plus the gate outcome of one subcommand."""

    columns: list
    rows: list
    paper_ref: str
    summary: str
    violated: Optional[str] = None


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------

def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> list:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _point(vals: Sequence[float], dims: Dimensions, name: str) -> GrushinPoint:
    """``n + m`` coordinates, or ``n`` coordinates with ``x'' = 0``."""
    if len(vals) == dims.n + dims.m:
        return GrushinPoint.from_flat(vals, dims)
    if len(vals) == dims.n:
        return GrushinPoint(vals, np.zeros(dims.m))
    raise UsageError(f"--{name} needs {dims.n} or {dims.n + dims.m} coordinates")


def _drift(vals: Optional[Sequence[float]], dims: Dimensions) -> Drift:
    if vals is None:
        return Drift(np.zeros(dims.n))
    if len(vals) == dims.n:
        return Drift(vals)
    if len(vals) == 1:
        return Drift.along_e1(vals[0], dims.n)
    raise UsageError(f"--a needs {dims.n} components (or one magnitude along e1)")


def _multi_index(args, dims: Dimensions) -> GrushinMultiIndex:
    ap = args.alpha_prime if args.alpha_prime is not None else [1] + [0] * (dims.n - 1)
    ad = args.alpha_dprime if args.alpha_dprime is not None else [0] * (dims.n * dims.m)
    if len(ap) != dims.n or len(ad) != dims.n * dims.m:
        raise UsageError("--alpha-prime needs n entries and --alpha-dprime n*m entries")
    return GrushinMultiIndex(ap, np.reshape(ad, (dims.n, dims.m)))


def _fmt_vec(v) -> str:
    return " ".join(f"{float(c):.10g}" for c in np.ravel(v))


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_heat_kernel(args, cfg: RunConfig) -> Result:
    from .heat import heat_kernel_drift

    x = _point(args.x, cfg.dims, "x")
    y = _point(args.y, cfg.dims, "y")
    a = _drift(args.a, cfg.dims)
    rows, worst = [], 0.0
    for t in args.t:
        hv = heat_kernel_drift(t, a, x, y, cfg.q)
        rows.append([t, _fmt_vec(x.flat()), _fmt_vec(y.flat()), _fmt_vec(a.a), hv.value, hv.est_error])
        # positivity gate: value >= -est_error
        worst = max(worst, -hv.value - hv.est_error)
    violated = "heat kernel positivity (value >= -est_error)" if worst > 0 else None
    return Result(["t", "x", "y", "a", "value", "est_error"], rows,
                  "H_{t,a}(x,y) = exp(-|a|^2 t - a.(x'+y')) (2 pi)^-m int k_{t,|lam|}(x',y') exp(-i lam.(x''-y'')) dlam",
                  f"heat-kernel: {len(rows)} values, max positivity violation {max(worst, 0.0):.3g} (gate 0)",
                  violated)


def cmd_riesz_kernel(args, cfg: RunConfig) -> Result:
    from .riesz import RieszKernelRequest, riesz_kernel_detailed, riesz_kernel_fast

    x = _point(args.x, cfg.dims, "x")
    y = _point(args.y, cfg.dims, "y")
    a = _drift(args.a, cfg.dims)
    alpha = _multi_index(args, cfg.dims)
    rv = riesz_kernel_detailed(RieszKernelRequest(alpha, a, x, y, cfg.q))
    row = [_fmt_vec(x.flat()), _fmt_vec(y.flat()), _fmt_vec(a.a), _fmt_vec(alpha.alpha_prime),
           _fmt_vec(alpha.alpha_dprime), alpha.order, rv.value, rv.est_error]
    fast, rel = float("nan"), float("nan")
    if cfg.dims.m == 1:
        fast = float(riesz_kernel_fast(alpha, a.a, x.x_prime[None, :], y.x_prime[None, :],
                                       x.x_dprime - y.x_dprime)[0, 0])
        rel = abs(fast - rv.value) / max(abs(rv.value), 1e-300)
    row += [fast, rel]
    violated = None
    if np.isfinite(rel) and rel > args.tol:
        violated = f"route agreement (rel diff {rel:.3g} > {args.tol:g})"
    return Result(["x", "y", "a", "alpha_prime", "alpha_dprime", "k", "value", "est_error",
                   "value_bessel", "rel_diff"], [row],
                  "R_{alpha,a}(x,y) = Gamma(k/2)^-1 int_0^inf t^{k/2-1} X^alpha H_{t,a}(x,y) dt",
                  f"riesz-kernel: value {rv.value:.10g}, route rel diff {rel:.3g} (gate {args.tol:g})",
                  violated)


def cmd_distance(args, cfg: RunConfig) -> Result:
    from .geometry import grushin_distance

    x = _point(args.x, cfg.dims, "x")
    y = _point(args.y, cfg.dims, "y")
    d = grushin_distance(x, y)
    dd = float(np.linalg.norm(x.x_dprime - y.x_dprime))
    s = float(np.linalg.norm(x.x_prime) + np.linalg.norm(y.x_prime))
    regime = 1 if (s > 0 and np.sqrt(dd) <= s) else 2
    return Result(["x", "y", "d", "regime"], [[_fmt_vec(x.flat()), _fmt_vec(y.flat()), d, regime]],
                  "d(x,y) = |x'-y'| + |x''-y''|/(|x'|+|y'|) if |x''-y''|^{1/2} <= |x'|+|y'|, else |x'-y'| + |x''-y''|^{1/2}",
                  f"distance: d = {d:.10g} (regime {regime})")


def cmd_ball_volume(args, cfg: RunConfig) -> Result:
    from .geometry import ball_volume_mu_asymptotic, ball_volume_mu_mc

    x = _point(args.x, cfg.dims, "x")
    a = _drift(args.a, cfg.dims)
    if a.is_zero:
        raise UsageError("ball-volume needs a nonzero drift --a")
    rows, worst = [], 1.0
    bad = []
    for r in args.r_sweep:
        est = ball_volume_mu_mc(x, r, a, samples=args.samples, seed=cfg.seed)
        asym = ball_volume_mu_asymptotic(x, r, a)
        ratio = est.value / asym
        rows.append([r, float(np.linalg.norm(x.x_prime)), est.value, est.std_err, asym, ratio,
                     est.std_err / est.value])
        worst = max(worst, ratio, 1 / ratio)
        if not 1 / args.C <= ratio <= args.C:
            bad.append(r)
    violated = f"ball-volume ratio outside [1/{args.C:g}, {args.C:g}] at r = {bad}" if bad else None
    return Result(["r", "x_prime_norm", "mc", "std_err", "asymptotic", "ratio", "rel_std_err"], rows,
                  "mu_a(B(x,r)) ~ exp(2a.x') r^{n+m}(r+|x'|)^m (r <= 1/|a|), "
                  "|a|^{-(n+1)/2-m} exp(2(a.x'+|a|r)) r^{(n-1)/2}(r+|x'|)^m (r > 1/|a|)",
                  f"ball-volume: max ratio deviation {worst:.3g} (gate {args.C:g})", violated)


def cmd_norm_sweep(args, cfg: RunConfig) -> Result:
    from .lab import TestFamily, norm_sweep

    alpha = _multi_index(args, cfg.dims)
    rep = norm_sweep(alpha, args.p, args.drifts, TestFamily(), levels=args.levels,
                     matched=not args.no_matched, q=cfg.q)
    rows = []
    for i, s in enumerate(rep.drift_magnitudes):
        for lvl, est in zip(rep.levels, rep.level_estimates[i]):
            rows.append([s, lvl, "plain", est])
        if rep.matched_estimates is not None:
            rows.append([s, rep.levels[-1], "matched", rep.matched_estimates[i]])
    gated = rep.matched_estimates if rep.matched_estimates is not None else rep.estimates
    spread = max(gated) / min(gated)
    violated = None
    if not np.isfinite(spread) or spread > args.gate:
        violated = f"drift uniformity (max/min {spread:.3g} > {args.gate:g})"
    for fl in rep.flags:
        print(f"norm-sweep flag: {fl}", file=sys.stderr)
    return Result(["drift", "npts", "family", "estimate"], rows,
                  "||R_{alpha,se1}||_{p->p} = ||R_{alpha,e1}||_{p->p} (dilation identity); lower bounds from test families",
                  f"norm-sweep: estimates {', '.join(f'{v:.4g}' for v in gated)}; max/min {spread:.4g} (gate {args.gate:g})",
                  violated)


def cmd_drift_limit(args, cfg: RunConfig) -> Result:
    from .euclid import DriftLimitConfig, bump, default_probe_points, euclid_drift_riesz, scaled_conjugated_riesz
    from .lab import default_grid

    if cfg.dims != Dimensions(1, 1):
        raise UsageError("drift-limit runs with n = m = 1")
    grid = default_grid(cfg.dims, args.npts)
    f = bump(grid, args.bump_radius)
    dl = DriftLimitConfig(args.k, R_list=tuple(args.r_list))
    probes = default_probe_points(grid)
    E = euclid_drift_riesz(f, args.k)
    ev = np.array([E.value_at(p) for p in probes])
    rows, sups = [], []
    for R in dl.R_list:
        v = scaled_conjugated_riesz(f, replace(dl, probe_points=probes), R, cfg.q)
        err = np.abs(v - ev)
        sups.append(float(err.max()))
        for j, p in enumerate(probes):
            rows.append([R, j, _fmt_vec(p.x_prime), _fmt_vec(p.x_dprime), v[j], ev[j], err[j]])
    dec = all(b < a for a, b in zip(sups, sups[1:]))
    violated = None if dec else "sup error not strictly decreasing along R_list"
    return Result(["R", "probe", "x_prime", "x_dprime", "grushin", "euclid", "abs_err"], rows,
                  "(Lambda_R U) X_1^k G_{e1/R}^{-k/2} (Lambda_R U)^-1 f -> d^k_{x'_1} Delta_{e1}^{-k/2} f as R -> 0",
                  f"drift-limit: sup errors {', '.join(f'{s:.4g}' for s in sups)} (gate: strictly decreasing)",
                  violated)


def cmd_blowup(args, cfg: RunConfig) -> Result:
    from .lab import weak11_blowup_experiment

    rep = weak11_blowup_experiment(args.k, tuple(args.r_list), bump_radius=args.bump_radius,
                                   npts=args.npts, q=cfg.q)
    rows = [[R, w, wp] for R, w, wp in zip(rep.R_list, rep.W, rep.W_pulled)]
    if args.k >= 3:
        ok = rep.increasing()
        gate = "increasing along R_list"
    else:
        ok = rep.spread() < 3
        gate = "max/min < 3"
    violated = None if ok else f"W_{args.k}(R) not {gate}"
    return Result(["R", "W", "W_pulled"], rows,
                  "W_k(R) = ||R_{k e1, e1/R} g_R||_{L^{1,inf}(mu)} / ||g_R||_{L^1(mu)}; unbounded for some k >= 3",
                  f"blowup: W = {', '.join(f'{w:.4g}' for w in rep.W)}, identity residual "
                  f"{rep.identity_residual:.2g} (gate: {gate})", violated)


def cmd_covariance_check(args, cfg: RunConfig) -> Result:
    from .riesz import RieszKernelRequest, riesz_kernel

    rng = np.random.default_rng(cfg.seed)
    rows, worst = [], 0.0
    if args.kind == "dilation":
        dims = cfg.dims
        for k in args.orders:
            alpha = GrushinMultiIndex.unit(0, dims, k)
            for i in range(args.pairs):
                x = GrushinPoint(rng.uniform(-1.5, 1.5, dims.n), rng.uniform(-1.5, 1.5, dims.m))
                y = GrushinPoint(rng.uniform(-1.5, 1.5, dims.n), rng.uniform(-1.5, 1.5, dims.m))
                for s in args.scales:
                    lhs = riesz_kernel(RieszKernelRequest(alpha, Drift.along_e1(s, dims.n), x, y, cfg.q))
                    rhs = s ** dims.Q * riesz_kernel(RieszKernelRequest(
                        alpha, Drift.along_e1(1.0, dims.n), dilate(x, s), dilate(y, s), cfg.q))
                    rel = abs(lhs - rhs) / abs(rhs)
                    worst = max(worst, rel)
                    rows.append(["dilation", k, i, s, 0, lhs, rhs, rel])
        ref = "R_{alpha,s e1}(x,y) = s^{n+2m} R_{alpha,e1}(delta_s x, delta_s y)"
    else:
        dims = Dimensions(2, cfg.dims.m)
        a = Drift([0.8, -0.3])
        for i in range(args.pairs):
            th = rng.uniform(0, 2 * np.pi)
            A = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
            x = GrushinPoint(rng.uniform(-1.5, 1.5, 2), rng.uniform(-1.5, 1.5, dims.m))
            y = GrushinPoint(rng.uniform(-1.5, 1.5, 2), rng.uniform(-1.5, 1.5, dims.m))
            Aa = rotate_drift(a, A)
            Ax, Ay = rotate(x, A), rotate(y, A)
            rot = [riesz_kernel(RieszKernelRequest(GrushinMultiIndex.unit(l, dims), Aa, Ax, Ay, cfg.q))
                   for l in range(2)]
            for j in range(2):
                lhs = riesz_kernel(RieszKernelRequest(GrushinMultiIndex.unit(j, dims), a, x, y, cfg.q))
                rhs = sum(A[l, j] * rot[l] for l in range(2))
                rel = abs(lhs - rhs) / max(abs(lhs), abs(rhs))
                worst = max(worst, rel)
                rows.append(["rotation", 1, i, float(th), j, lhs, rhs, rel])
        ref = "R_{e_j,a}(x,y) = sum_l a_{lj} R_{e_l,Aa}(Ax,Ay)"
    violated = f"{args.kind} covariance (max rel err {worst:.3g} > {args.tol:g})" if worst > args.tol else None
    return Result(["kind", "k", "pair", "param", "component", "lhs", "rhs", "rel_err"], rows, ref,
                  f"covariance-check: {len(rows)} comparisons, max rel err {worst:.3g} (gate {args.tol:g})",
                  violated)


def cmd_transference_check(args, cfg: RunConfig) -> Result:
    from .group import random_instance, transference_apply, transference_check
    from .lab import default_grid

    rng = np.random.default_rng(cfg.seed)
    grid = default_grid(Dimensions(1, 1), args.npts)
    rows, worst = [], 0.0
    for i in range(args.instances):
        k, f = random_instance(rng, grid, signed=bool(i % 2))
        Tf = transference_apply(k, f)
        for c in transference_check(k, f, args.p, Tf=Tf):
            worst = max(worst, c.ratio)
            rows.append([i, c.p, c.lhs, c.bound, c.ratio])
    violated = None
    if worst > 1 + args.slack:
        violated = f"transference bound (max ratio {worst:.4g} > 1 + {args.slack:g})"
    return Result(["instance", "p", "lhs", "bound", "ratio"], rows,
                  "||Tf||_{L^p(mu_a)} <= ||k||_{L^1(exp(2 a.v/p) dg)} ||f||_{L^p(mu_a)}",
                  f"transference-check: max ratio {worst:.4g} (gate 1 + {args.slack:g})", violated)


COMMANDS: dict = {
    "heat-kernel": cmd_heat_kernel,
    "riesz-kernel": cmd_riesz_kernel,
    "distance": cmd_distance,
    "ball-volume": cmd_ball_volume,
    "norm-sweep": cmd_norm_sweep,
    "drift-limit": cmd_drift_limit,
    "blowup": cmd_blowup,
    "covariance-check": cmd_covariance_check,
    "transference-check": cmd_transference_check,
}


# ---------------------------------------------------------------------------
# argument parser and driver
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=1, help="dimension of x'")
    common.add_argument("--m", type=int, default=1, help="dimension of x''")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("csv", "json"), default="csv", dest="fmt")
    common.add_argument("--output", "-o", default=None, help="output path (default: stdout)")
    common.add_argument("--lam-max", type=float, default=None)
    common.add_argument("--lam-nodes", type=int, default=None)
    common.add_argument("--rel-tol", type=float, default=None)
    common.add_argument("--t-sub", type=_floats, default=None, metavar="U_LO,U_HI,NODES")

    p = argparse.ArgumentParser(prog="grushin-drift",
                                description="Grushin operators with drift: kernels, geometry and experiments.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_)

    s = add("heat-kernel", "H_{t,a}(x, y) by lam-quadrature")
    s.add_argument("--t", type=_floats, required=True)
    s.add_argument("--x", type=_floats, required=True)
    s.add_argument("--y", type=_floats, required=True)
    s.add_argument("--a", type=_floats, default=None)

    def alpha_opts(s):
        s.add_argument("--alpha-prime", type=_ints, default=None, help="powers of X_j (n entries)")
        s.add_argument("--alpha-dprime", type=_ints, default=None, help="powers of X_{j,k} (n*m entries, row major)")

    s = add("riesz-kernel", "R_{alpha,a}(x, y), cross-checked by the Bessel route when m = 1")
    s.add_argument("--x", type=_floats, required=True)
    s.add_argument("--y", type=_floats, required=True)
    s.add_argument("--a", type=_floats, default=[1.0])
    alpha_opts(s)
    s.add_argument("--tol", type=float, default=1e-4)

    s = add("distance", "Grushin quasi-metric d(x, y)")
    s.add_argument("--x", type=_floats, required=True)
    s.add_argument("--y", type=_floats, required=True)

    s = add("ball-volume", "mu_a ball volume: Monte Carlo vs two-regime asymptotic")
    s.add_argument("--x", type=_floats, required=True)
    s.add_argument("--a", type=_floats, required=True)
    s.add_argument("--r-sweep", type=_floats, default=[0.25, 0.5, 1, 2, 4, 8])
    s.add_argument("--samples", type=int, default=100_000)
    s.add_argument("--C", type=float, default=50.0)

    s = add("norm-sweep", "empirical L^p(mu_a) norms of R_{alpha,a} along a = |a| e1")
    alpha_opts(s)
    s.add_argument("--p", type=float, default=2.0)
    s.add_argument("--drifts", type=_floats, default=[0.5, 1, 2, 4])
    s.add_argument("--levels", type=_ints, default=[64])
    s.add_argument("--no-matched", action="store_true", help="skip the dilation-matched family")
    s.add_argument("--gate", type=float, default=3.0)

    s = add("drift-limit", "scaled conjugated Riesz transform vs the Euclidean drifted one")
    s.add_argument("--k", type=int, default=1)
    s.add_argument("--r-list", type=_floats, default=[1, 0.5, 0.25])
    s.add_argument("--npts", type=int, default=64)
    s.add_argument("--bump-radius", type=float, default=2.0)

    s = add("blowup", "weak-(1,1) quotients W_k(R)")
    s.add_argument("--k", type=int, default=3)
    s.add_argument("--r-list", type=_floats, default=[1, 0.5, 0.25])
    s.add_argument("--npts", type=int, default=64)
    s.add_argument("--bump-radius", type=float, default=1.0)

    s = add("covariance-check", "dilation or rotation covariance of Riesz kernels")
    s.add_argument("--kind", choices=("dilation", "rotation"), default="dilation")
    s.add_argument("--pairs", type=int, default=10)
    s.add_argument("--orders", type=_ints, default=[1, 2])
    s.add_argument("--scales", type=_floats, default=[0.5, 2.0])
    s.add_argument("--tol", type=float, default=1e-4)

    s = add("transference-check", "Minkowski bound for transferred operators on H_{1,1}")
    s.add_argument("--instances", type=int, default=20)
    s.add_argument("--p", type=_floats, default=[1.0, 2.0])
    s.add_argument("--npts", type=int, default=64)
    s.add_argument("--slack", type=float, default=1e-2)
    return p


def _quadrature(args) -> QuadratureSpec:
    over = {}
    if args.lam_max is not None:
        over["lam_max"] = args.lam_max
    if args.lam_nodes is not None:
        over["lam_nodes"] = args.lam_nodes
    if args.rel_tol is not None:
        over["rel_tol"] = args.rel_tol
    if args.t_sub is not None:
        if len(args.t_sub) != 3:
            raise UsageError("--t-sub needs U_LO,U_HI,NODES")
        over["t_sub"] = (args.t_sub[0], args.t_sub[1], int(args.t_sub[2]))
    return replace(DEFAULT_SPEC, **over) if over else DEFAULT_SPEC


def render(res: Result, fmt: str) -> str:
    if fmt == "json":
        recs = [dict(zip(res.columns, _jsonable(r)), paper_ref=res.paper_ref) for r in res.rows]
        return json.dumps(recs, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(res.columns)
    for r in res.rows:
        w.writerow([f"{v:.12g}" if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def _jsonable(row):
    out = []
    for v in row:
        if isinstance(v, (np.floating, float)):
            v = float(v)
            out.append(v if np.isfinite(v) else None)
        elif isinstance(v, np.integer):
            out.append(int(v))
        else:
            out.append(v)
    return out


_NEGATIVE = re.compile(r"^-\.?\d")


def _attach_negative_values(argv: Sequence[str]) -> list:
    """Rewrite ``--y -1,0`` as ``--y=-1,0``; argparse takes ``-1,0`` for an option."""
    out: list = []
    for tok in argv:
        if out and _NEGATIVE.match(tok) and out[-1].startswith("--") and "=" not in out[-1]:
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = _attach_negative_values(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 for --help / --version
        return int(exc.code or 0)
    try:
        dims = Dimensions(args.n, args.m)
        cfg = RunConfig(dims, _quadrature(args), args.seed, args.fmt, args.output)
        res = COMMANDS[args.command](args, cfg)
    except (UsageError, ValueError) as exc:
        print(f"{args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GrushinError as exc:
        # accuracy or estimation failures are gate failures, not usage errors
        print(f"{args.command}: gate violated: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_GATE
    text = render(res, cfg.fmt)
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(res.summary, file=sys.stderr)
    if res.violated:
        print(f"gate violated: {res.violated}", file=sys.stderr)
        return EXIT_GATE
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
