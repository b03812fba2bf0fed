"""Command-line interface: ``kickweb <subcommand> [options]``.

Exit codes: 0 success, 2 usage error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .diagnostics import (
    disk_ensemble,
    eigenvalue_sweep,
    lyapunov_divergence,
    lyapunov_tangent,
    survival_probability,
)
from .physical import OptomechanicalParams, check_regime, derive_scales
from .portrait import (
    GridInitials,
    PortraitSpec,
    RandomInitials,
    magnify,
    render_portrait,
    write_cloud_csv,
    write_grid,
)
from .webmap import EscapeError, MapParams, PhaseState, find_fixed_points, fixed_line_slope

EXIT_USAGE = 2
EXIT_NUMERIC = 3

# laboratory values used when a physical flag is omitted
LAB_SETUP = {"L": 2e-3, "delta_hz": 1e7, "mass": 50e-15, "omega_hz": 134e3, "omega_a_hz": 7e14}
PHYSICAL_FLAGS = ("L", "delta_hz", "mass", "omega_hz", "omega_a_hz", "xi0", "nu_hz")


class UsageError(Exception):
    pass


def _q_value(text: str) -> Fraction:
    try:
        q = Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not an integer or ratio: {text!r}")
    if q <= 1:
        raise argparse.ArgumentTypeError(f"q must exceed 1, got {text!r}")
    return q


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, complex):
        return [_jsonable(obj.real), _jsonable(obj.imag)]
    return obj


def _provenance(args) -> dict:
    config = {k: v for k, v in vars(args).items()
              if k not in ("out", "threads", "func", "config") and v is not None}
    return {
        "kickweb_version": __version__,
        "numpy_version": np.__version__,
        "float": "IEEE-754 binary64",
        "command": args.command,
        "seed": args.seed,
        "deterministic": bool(args.deterministic),
        "config": _jsonable(config),
    }


def _emit_text(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(args, report: dict) -> None:
    report = dict(report)
    report["metadata"] = _provenance(args)
    _emit_text(args, json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n")


def _emit_csv(args, columns: dict, extra: dict | None = None) -> None:
    meta = _provenance(args)
    meta.update(extra or {})
    names = list(columns)
    lines = ["# " + json.dumps(_jsonable(meta), sort_keys=True), ",".join(names)]
    cols = [np.asarray(columns[n]) for n in names]
    for row in zip(*cols):
        lines.append(",".join(repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)
                              for v in row))
    _emit_text(args, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# parameter resolution


def _physical_given(args) -> list[str]:
    return [f for f in PHYSICAL_FLAGS if getattr(args, f, None) is not None]


def _physical_params(args) -> OptomechanicalParams:
    vals = {f: getattr(args, f, None) for f in PHYSICAL_FLAGS}
    for f, v in LAB_SETUP.items():
        if vals[f] is None:
            vals[f] = v
    if vals["xi0"] is None:
        vals["xi0"] = 0.0
    if vals["nu_hz"] is None:
        q = getattr(args, "q", None)
        if q is None:
            raise UsageError("--nu-hz (or --q) is required with physical parameters")
        vals["nu_hz"] = float(q) * vals["omega_hz"]
    try:
        return OptomechanicalParams.from_hz(vals["L"], vals["delta_hz"], vals["mass"],
                                            vals["omega_hz"], vals["omega_a_hz"],
                                            vals["xi0"], vals["nu_hz"])
    except ValueError as exc:
        raise UsageError(f"physical parameters: {exc}")


def _map_params_list(args) -> list[MapParams]:
    """Resolve ``--K`` with ``--q``/``--theta``, or a physical parameter set."""
    Ks = args.K if isinstance(args.K, list) else ([args.K] if args.K is not None else [])
    phys = _physical_given(args)
    if phys and (Ks or args.theta is not None):
        flag = "--K" if Ks else "--theta"
        raise UsageError(f"{flag} cannot be combined with physical parameters (--{phys[0].replace('_', '-')})")
    if phys:
        if args.q is not None and args.nu_hz is not None:
            raise UsageError("--q cannot be combined with --nu-hz")
        scales = derive_scales(_physical_params(args))
        return [scales.map_params()]
    if not Ks:
        raise UsageError("--K is required (or a physical parameter set)")
    if (args.q is None) == (args.theta is None):
        raise UsageError("exactly one of --q or --theta is required")
    out = []
    for K in Ks:
        try:
            if args.q is not None:
                out.append(MapParams.from_q(K, args.q))
            else:
                out.append(MapParams.from_theta(K, args.theta))
        except ValueError as exc:
            flag = "--K" if K < 0 or not math.isfinite(K) else ("--q" if args.q is not None else "--theta")
            raise UsageError(f"{flag}: {exc}")
    return out


def _single_params(args) -> MapParams:
    ps = _map_params_list(args)
    if len(ps) != 1:
        raise UsageError("--K may be given only once for this subcommand")
    return ps[0]


# ---------------------------------------------------------------------------
# subcommands


def _portrait_spec(args, mode: str) -> PortraitSpec:
    params = _single_params(args)
    vp = tuple(args.viewport)
    if args.single_random:
        initials = RandomInitials(1, (-0.5, 0.5, -0.5, 0.5), args.seed)
    elif args.random is not None:
        initials = RandomInitials(args.random, vp, args.seed)
    elif args.x0 is not None or args.p0 is not None:
        initials = np.array([[args.x0 or 0.0, args.p0 or 0.0]])
    else:
        initials = GridInitials((vp[0], vp[1]), (vp[2], vp[3]), args.grid_initials, args.grid_initials)
    try:
        return PortraitSpec(params, initials, args.kicks, vp, mode, tuple(args.bins))
    except ValueError as exc:
        raise UsageError(f"--viewport/--bins: {exc}")


def cmd_portrait(args) -> int:
    if args.format == "csv":
        spec = _portrait_spec(args, "points")
        cloud = render_portrait(spec, threads=args.threads)
        meta = _provenance(args)
        if args.out:
            write_cloud_csv(args.out, cloud, meta)
        else:
            raise UsageError("--out is required for portrait output")
    else:
        spec = _portrait_spec(args, "grid")
        grid = render_portrait(spec, threads=args.threads)
        if not args.out:
            raise UsageError("--out is required for grid output")
        write_grid(args.out, grid, _provenance(args), binary=not args.text_grid)
    return 0


def cmd_magnify(args) -> int:
    spec = _portrait_spec(args, "grid")
    if not args.out:
        raise UsageError("--out is required for grid output")
    try:
        grid = magnify(spec, tuple(args.window), args.refine, threads=args.threads)
    except ValueError as exc:
        raise UsageError(f"--window/--refine: {exc}")
    write_grid(args.out, grid, _provenance(args), binary=not args.text_grid)
    return 0


def cmd_lyapunov(args) -> int:
    params = _single_params(args)
    s0 = PhaseState(args.x0, args.p0)
    report = {"params": params.as_dict(), "initial": list(s0), "n": args.n}
    if args.n < 100:
        raise UsageError("--n must be >= 100")
    if not (0 < args.offset < 1):
        raise UsageError("--offset must lie in (0, 1)")
    tangent = div = None
    if args.method in ("tangent", "both"):
        tangent = lyapunov_tangent(s0, params, args.n)
        report["tangent"] = tangent.as_dict()
    if args.method in ("divergence", "both"):
        ang = math.radians(args.offset_angle)
        div = lyapunov_divergence(s0, (args.offset * math.cos(ang), args.offset * math.sin(ang)),
                                  params, args.n)
        report["divergence"] = dict(div.estimate.as_dict(), radius_scale=div.radius_scale,
                                    fit_window=list(div.fit_window), offset=args.offset,
                                    offset_angle_deg=args.offset_angle)
    if tangent is not None and div is not None:
        tv, dv = tangent.value, div.estimate.value
        report["agreement_ratio"] = dv / tv if tv not in (0.0,) and math.isfinite(tv) else None
    if args.format == "csv":
        if div is None:
            raise UsageError("--format csv needs --method divergence or both (series output)")
        n = np.arange(len(div.log_distance))
        _emit_csv(args, {"n": n, "ln_distance": div.log_distance}, {"report": report})
    else:
        if div is not None:
            report["divergence"]["ln_distance"] = div.log_distance
        _emit_json(args, report)
    return 0


def cmd_survive(args) -> int:
    params_list = _map_params_list(args)
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    if args.ensemble < 1:
        raise UsageError("--ensemble must be >= 1")
    ens = disk_ensemble(tuple(args.center), args.spread, args.ensemble, args.seed)
    if np.any(np.hypot(ens[:, 0], ens[:, 1]) >= args.rc):
        raise UsageError("--rc must enclose the whole ensemble (see --center/--spread)")
    curves = [survival_probability(ens, p, args.rc, args.n) for p in params_list]
    report = {
        "r_c": args.rc,
        "n_total": args.ensemble,
        "ensemble": {"kind": "disk", "center": list(args.center), "radius": args.spread, "seed": args.seed},
        "curves": [{"params": c.params.as_dict(), "p_s": c.p_s, "final": c.p_s[-1]} for c in curves],
    }
    if len(curves) >= 2:
        finals = [(c.params.K, c.p_s[-1]) for c in curves]
        order = sorted(finals, key=lambda t: (-t[1], t[0]))
        report["ordering_by_final_survival"] = [{"K": k, "final": f} for k, f in order]
        # claim under test: larger K keeps more trajectories
        lo, hi = min(finals), max(finals)
        if hi[1] > lo[1]:
            verdict = "larger K survives more"
        elif hi[1] < lo[1]:
            verdict = "smaller K survives more"
        else:
            verdict = "equal"
        report["observed_ordering"] = verdict
    if args.format == "csv":
        cols = {"n": np.arange(args.n + 1)}
        for c in curves:
            cols[f"p_s_K={c.params.K!r}"] = c.p_s
        _emit_csv(args, cols, {"report": {k: v for k, v in report.items() if k != "curves"}})
    else:
        _emit_json(args, report)
    return 0


def cmd_stability(args) -> int:
    if args.theta is not None or _physical_given(args):
        raise UsageError("stability sweeps over --qs; use --K and --qs only")
    try:
        params_list = [MapParams.from_q(args.K, q) for q in args.qs]
    except ValueError as exc:
        raise UsageError(f"--K/--qs: {exc}")
    xs = np.linspace(args.x_range[0], args.x_range[1], args.points)
    sw = eigenvalue_sweep(params_list, xs)
    if args.format == "csv":
        _emit_csv(args, sw)
    else:
        prod = sw["product_re"] + 1j * sw["product_im"]
        _emit_json(args, {"rows": {k: v for k, v in sw.items()},
                          "max_reciprocity_error": float(np.max(np.abs(prod - 1.0)))})
    return 0


def cmd_fixed_points(args) -> int:
    params = _single_params(args)
    try:
        pts = find_fixed_points(params, args.radius, args.tol)
        nominal = fixed_line_slope(params)
    except ValueError as exc:
        raise UsageError(f"--q/--theta: {exc}")
    nz = [fp for fp in pts if fp.state.x != 0.0]
    verified = -nominal
    collinear = max((abs(fp.state.p - verified * fp.state.x) for fp in nz), default=0.0)
    report = {
        "params": params.as_dict(),
        "search_radius": args.radius,
        "tolerance": args.tol,
        "nominal_slope": nominal,
        "verified_slope": verified,
        "max_collinearity_error": collinear,
        "fixed_points": [{"x": fp.state.x, "p": fp.state.p, "residual": fp.residual,
                          "trace": fp.trace, "stability": fp.stability} for fp in pts],
    }
    _emit_json(args, report)
    return 0


def cmd_physical(args) -> int:
    if args.K is not None or args.theta is not None:
        raise UsageError("--K/--theta are not accepted by 'physical'; give physical parameters")
    if args.q is not None and args.nu_hz is not None:
        raise UsageError("--q cannot be combined with --nu-hz")
    p = _physical_params(args)
    try:
        sc = derive_scales(p)
    except ValueError as exc:
        raise UsageError(f"--nu-hz/--q: {exc}")
    reg = check_regime(p, args.x_max)
    report = {
        "alpha": sc.alpha, "k": sc.k, "T": sc.T, "K": sc.K, "theta": sc.theta, "q": sc.q,
        "regime_ratio": reg.ratio, "regime_warn": reg.warn, "x_max_dimless": args.x_max,
        "x_max_m": reg.x_max_m, "regime_limit_m": reg.limit_m,
        "inputs_angular": {"L": p.L, "delta": p.delta, "m": p.m, "omega": p.omega,
                           "omega_A": p.omega_A, "xi0": p.xi0, "nu": p.nu},
    }
    _emit_json(args, report)
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_common(p, default_format="json"):
    g = p.add_argument_group("common")
    g.add_argument("--out", help="output path (stdout when omitted, where allowed)")
    g.add_argument("--format", choices=("csv", "json"), default=default_format)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--threads", type=int, default=1)
    g.add_argument("--deterministic", action="store_true",
                   help="fixed merge order (always on; recorded in metadata)")
    g.add_argument("--config", help="key = value file supplying any flag")


def _add_map(p, multi_K=False):
    g = p.add_argument_group("map parameters")
    if multi_K:
        g.add_argument("--K", type=float, action="append", help="kick strength (repeatable)")
    else:
        g.add_argument("--K", type=float)
    g.add_argument("--q", type=_q_value, help="resonance order, integer or ratio like 5/2")
    g.add_argument("--theta", type=float, help="rotation angle per kick, radians")
    _add_physical(p)


def _add_physical(p):
    g = p.add_argument_group("physical parameters (frequencies in Hz)")
    g.add_argument("--L", type=float, help="cavity length, m")
    g.add_argument("--delta-hz", type=float, help="detuning Delta/2pi")
    g.add_argument("--mass", type=float, help="membrane mass, kg")
    g.add_argument("--omega-hz", type=float, help="membrane frequency omega/2pi")
    g.add_argument("--omega-a-hz", type=float, help="cavity frequency omega_A/2pi")
    g.add_argument("--xi0", type=float, help="drive amplitude xi0 (as used in k = 2 xi0^2/Delta)")
    g.add_argument("--nu-hz", type=float, help="kick frequency nu/2pi")


def _add_portrait(p):
    p.add_argument("--kicks", type=int, default=15_000)
    p.add_argument("--viewport", type=float, nargs=4, default=[-30.0, 30.0, -30.0, 30.0],
                   metavar=("XMIN", "XMAX", "PMIN", "PMAX"))
    p.add_argument("--bins", type=int, nargs=2, default=[600, 600], metavar=("NX", "NP"))
    p.add_argument("--grid-initials", type=int, default=21,
                   help="n x n lattice of initial conditions over the viewport, plus the origin")
    p.add_argument("--random", type=int, help="N uniform random initial conditions in the viewport")
    p.add_argument("--single-random", action="store_true",
                   help="one initial condition uniform in (-0.5, 0.5)^2")
    p.add_argument("--x0", type=float)
    p.add_argument("--p0", type=float)
    p.add_argument("--text-grid", action="store_true", help="text count block instead of binary")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kickweb", description="Kicked-membrane web map simulator")
    parser.add_argument("--version", action="version", version=f"kickweb {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("portrait", help="stroboscopic phase portrait (CSV cloud or occupancy grid)")
    _add_map(p)
    _add_portrait(p)
    _add_common(p, default_format="csv")
    p.set_defaults(func=cmd_portrait)

    p = sub.add_parser("magnify", help="occupancy grid of a sub-window at refined resolution")
    _add_map(p)
    _add_portrait(p)
    p.add_argument("--window", type=float, nargs=4, required=True, metavar=("XMIN", "XMAX", "PMIN", "PMAX"))
    p.add_argument("--refine", type=int, default=4)
    _add_common(p)
    p.set_defaults(func=cmd_magnify)

    p = sub.add_parser("lyapunov", help="largest Lyapunov exponent")
    _add_map(p)
    p.add_argument("--x0", type=float, default=15.0)
    p.add_argument("--p0", type=float, default=0.0)
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--method", choices=("tangent", "divergence", "both"), default="both")
    p.add_argument("--offset", type=float, default=1e-5)
    p.add_argument("--offset-angle", type=float, default=0.0, help="direction of the offset, degrees")
    _add_common(p)
    p.set_defaults(func=cmd_lyapunov)

    p = sub.add_parser("survive", help="survival probability curves")
    _add_map(p, multi_K=True)
    p.add_argument("--rc", type=float, default=20.0)
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--ensemble", type=int, default=10_000)
    p.add_argument("--center", type=float, nargs=2, default=[15.0, 0.0])
    p.add_argument("--spread", type=float, default=0.1, help="ensemble disk radius")
    _add_common(p)
    p.set_defaults(func=cmd_survive)

    p = sub.add_parser("stability", help="Jacobian eigenvalue sweep over x and q")
    p.add_argument("--K", type=float, default=0.5)
    p.add_argument("--qs", type=_q_value, nargs="+", default=[Fraction(q) for q in range(3, 9)])
    p.add_argument("--theta", type=float, help=argparse.SUPPRESS)
    p.add_argument("--x-range", type=float, nargs=2, default=[-10.0, 10.0])
    p.add_argument("--points", type=int, default=2001)
    _add_physical(p)
    _add_common(p, default_format="csv")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("fixed-points", help="fixed points and their stability")
    _add_map(p)
    p.add_argument("--radius", type=float, default=10.0)
    p.add_argument("--tol", type=float, default=1e-10)
    _add_common(p)
    p.set_defaults(func=cmd_fixed_points)

    p = sub.add_parser("physical", help="dimensionless parameters from a physical setup")
    p.add_argument("--K", type=float, help=argparse.SUPPRESS)
    p.add_argument("--theta", type=float, help=argparse.SUPPRESS)
    p.add_argument("--q", type=_q_value, help="kick/oscillator frequency ratio (sets nu)")
    _add_physical(p)
    p.add_argument("--x-max", type=float, default=20.0, help="dimensionless excursion for the regime check")
    _add_common(p)
    p.set_defaults(func=cmd_physical)
    return parser


# ---------------------------------------------------------------------------
# config file


def read_config(path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"--config {path}:{lineno}: expected 'key = value'")
            k, v = line.split("=", 1)
            out[k.strip().replace("_", "-")] = v.strip()
    return out


def _merge_config(argv: list[str]) -> list[str]:
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise UsageError("--config needs a path")
    cfg = read_config(argv[i + 1])
    present = {a.split("=", 1)[0] for a in argv if a.startswith("--")}
    extra = []
    for key, val in cfg.items():
        flag = "--" + key
        if flag in present:
            continue  # command line wins
        if val.lower() in ("true", "yes", "on"):
            extra.append(flag)
        elif val.lower() in ("false", "no", "off"):
            continue
        else:
            extra.append(flag)
            extra.extend(val.split())
    # subcommand first, then config-supplied flags, then the command line
    return argv[:1] + extra + argv[1:]


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _merge_config(argv)
    except (UsageError, OSError) as exc:
        parser.print_usage(sys.stderr)
        print(f"kickweb: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads < 1:
        parser.print_usage(sys.stderr)
        print("kickweb: error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"kickweb {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EscapeError, ArithmeticError, FloatingPointError) as exc:
        print(f"kickweb {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
