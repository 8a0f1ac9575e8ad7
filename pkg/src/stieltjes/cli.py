"""Command-line interface: ``stieltjes <command> [options]``.

Every failure is reported as a JSON object ``{"error": {"code": ..., "message": ...}}``
on stderr with a non-zero exit status.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, QuadratureWarning, StieltjesError
from .functions import HalfLineFunction, Table, parse_complex, parse_gspec
from .kernels import BlendFunction, Kernel, KernelSpec, r_profile, resolvent_point
from .quadrature import DEFAULT_CONFIG, QuadConfig

COMMANDS = ("solve", "verify", "kernel", "mellin", "norm", "growth", "tbeta", "bound", "repro")


class UsageError(StieltjesError, ValueError):
    code = "usage_error"
    exit_code = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=False, default=_jsonable)


def _jsonable(v):
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    raise TypeError(f"not serialisable: {type(v).__name__}")


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _c(v: complex) -> list:
    v = complex(v)
    return [float(v.real), float(v.imag)]


# --------------------------------------------------------------------------
# parsing helpers


def parse_grid(text: str) -> np.ndarray:
    """``log:<lo>:<hi>:<n>``, ``lin:<lo>:<hi>:<n>`` or a comma list of points."""
    text = str(text).strip()
    try:
        if text.startswith(("log:", "lin:")):
            kind, lo, hi, n = text.split(":")
            lo, hi, n = float(lo), float(hi), int(n)
            if n < 1 or not 0 < lo <= hi:
                raise ValueError
            if kind == "log":
                return np.logspace(math.log10(lo), math.log10(hi), n)
            return np.linspace(lo, hi, n)
        pts = np.array([float(p) for p in text.split(",")])
    except ValueError:
        raise UsageError(f"bad grid {text!r}; use log:<lo>:<hi>:<n> or a comma list") from None
    if pts.size == 0 or np.any(pts <= 0):
        raise UsageError("grid points must be positive")
    return pts


def parse_blend(text: str | None) -> BlendFunction:
    if text is None:
        return BlendFunction(1.0)
    text = text.strip()
    if text.startswith("m="):
        try:
            return BlendFunction(float(text[2:]))
        except ValueError as exc:
            raise UsageError(f"bad blend {text!r}: {exc}") from None
    raise UsageError(f"bad blend {text!r}; use m=<real>")


def parse_space(text: str):
    from .analysis import SpaceSpec

    t = str(text).strip()
    try:
        if t == "E":
            return SpaceSpec.E()
        if t.startswith("Ek:"):
            return SpaceSpec.Ek(float(t[3:]))
        if t.startswith("B:"):
            eps, eta = (float(v) for v in t[2:].split(","))
            return SpaceSpec.Beh(eps, eta)
    except ValueError as exc:
        raise UsageError(f"bad space {text!r}: {exc}") from None
    raise UsageError(f"bad space {text!r}; use E, Ek:<k> or B:<eps>,<eta>")


def parse_windows(text: str):
    try:
        parts = [tuple(float(v) for v in w.split(":")) for w in text.split(",")]
        if len(parts) != 2 or any(len(p) != 2 for p in parts):
            raise ValueError
    except ValueError:
        raise UsageError(f"bad windows {text!r}; use lo:hi,lo:hi (infinity window first)") from None
    return parts[0], parts[1]


def _complex_arg(text, name):
    try:
        return parse_complex(text)
    except ValueError as exc:
        raise UsageError(f"--{name}: {exc}") from None


def load_function(text: str, base_dir=None) -> HalfLineFunction:
    """A g-spec, or a path to a CSV table (columns x, re_f[, im_f])."""
    p = Path(text)
    if text.endswith(".csv") and not text.startswith("table:"):
        return Table.from_csv(p if p.is_absolute() or base_dir is None else Path(base_dir) / p)
    return parse_gspec(text, base_dir=base_dir)


# --------------------------------------------------------------------------
# argument parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--rel-tol", type=float, dest="rel_tol")
    g.add_argument("--abs-tol", type=float, dest="abs_tol")
    g.add_argument("--max-subdiv", type=int, dest="max_subdivisions")
    g.add_argument("--diag-window", type=float, dest="diagonal_window")
    g.add_argument("--out", help="output file (or directory for repro); stdout if omitted")
    g.add_argument("--seed", type=int)
    g.add_argument("--config", help="JSON file mirroring the command-line flags, quad settings under 'quad'")

    parser = _Parser(prog="stieltjes", description="Solve and analyse the Stieltjes integral equation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, help_):
        return sub.add_parser(name, help=help_, parents=[common])

    for name in ("solve", "verify"):
        p = add(name, "solve the equation on a grid" if name == "solve" else "residual report as JSON")
        p.add_argument("--lambda", dest="lam")
        p.add_argument("--g")
        space = p.add_mutually_exclusive_group()
        space.add_argument("--k", type=float)
        space.add_argument("--space", choices=["E"])
        p.add_argument("--phi1")
        p.add_argument("--A")
        p.add_argument("--B")
        p.add_argument("--grid")
        if name == "verify":
            p.add_argument("--f", help="candidate solution (g-spec or CSV); default: the computed solution")

    p = add("kernel", "evaluate a profile or point kernel")
    p.add_argument("--which", choices=["r1", "r2", "r3", "R1", "R2", "R3", "R23"])
    p.add_argument("--alpha")
    p.add_argument("--x")
    p.add_argument("--y")
    p.add_argument("--phi1")

    p = add("mellin", "Mellin transform")
    p.add_argument("--f")
    p.add_argument("--s")

    p = add("norm", "norm in E, E_k or B(eps, eta)")
    p.add_argument("--f")
    p.add_argument("--space", help="E | Ek:<k> | B:<eps>,<eta>")

    p = add("growth", "fit power-law exponents at infinity and zero")
    p.add_argument("--f", help="function to fit")
    p.add_argument("--g", help="fit the particular solution for this g (with --lambda)")
    p.add_argument("--lambda", dest="lam")
    p.add_argument("--phi1")
    p.add_argument("--windows", help="lo:hi,lo:hi (infinity window first)")

    p = add("tbeta", "apply T^beta")
    p.add_argument("--f")
    p.add_argument("--beta")
    p.add_argument("--x")

    p = add("bound", "compare the B-norm of S f with its explicit bound")
    p.add_argument("--f")
    p.add_argument("--eps", type=float)
    p.add_argument("--eta", type=float)

    p = add("repro", "run the acceptance suite")
    p.add_argument("--only", help="comma-separated check names or groups")
    p.add_argument("--no-figures", action="store_true", dest="no_figures")
    return parser


_QUAD_KEYS = ("rel_tol", "abs_tol", "max_subdivisions", "diagonal_window")


def resolve_args(ns: argparse.Namespace) -> tuple[dict, QuadConfig]:
    """Merge command-line flags over an optional JSON config."""
    cfg_file = {}
    if ns.config:
        try:
            cfg_file = json.loads(Path(ns.config).read_text())
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {ns.config}: {exc}") from None
        if not isinstance(cfg_file, dict):
            raise ConfigError("config must be a JSON object")
    quad = dict(cfg_file.get("quad", {}))
    for key in _QUAD_KEYS:
        v = getattr(ns, key, None)
        if v is not None:
            quad[key] = v
    try:
        qcfg = QuadConfig.from_json(quad) if quad else DEFAULT_CONFIG
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    args = {k: v for k, v in cfg_file.items() if k != "quad"}
    aliases = {"lambda": "lam"}
    args = {aliases.get(k, k): v for k, v in args.items()}
    for k, v in vars(ns).items():
        if k in _QUAD_KEYS or k == "config":
            continue
        if v is not None and v is not False:
            args[k] = v
        else:
            args.setdefault(k, v)
    if args.get("k") is not None and args.get("space") is not None and ns.command in ("solve", "verify"):
        raise UsageError("--k and --space E are mutually exclusive")
    return args, qcfg


def _require(args, *names):
    missing = [n for n in names if args.get(n) in (None, "")]
    if missing:
        flags = ", ".join("--" + ("lambda" if n == "lam" else n) for n in missing)
        raise UsageError(f"missing required option(s): {flags}")


# --------------------------------------------------------------------------
# commands


def _build_solution(args, cfg):
    from .solver import solve_E, solve_Ek

    _require(args, "lam", "g")
    lam = _complex_arg(args["lam"], "lambda")
    base = Path(args["config"]).parent if args.get("config") else None
    g = load_function(args["g"], base)
    A = _complex_arg(args["A"], "A") if args.get("A") else 0
    B = _complex_arg(args["B"], "B") if args.get("B") else 0
    if args.get("k") is not None:
        if A or B:
            raise UsageError("--A/--B apply to --space E only")
        return g, lam, solve_Ek(g, lam, float(args["k"]), cfg=cfg)
    return g, lam, solve_E(g, lam, parse_blend(args.get("phi1")), A, B, cfg=cfg)


def _grid(args):
    return parse_grid(args.get("grid") or "log:1e-3:1e3:40")


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_solve(args, cfg):
    g, lam, sol = _build_solution(args, cfg)
    grid = _grid(args)
    ev = sol.evaluate(grid)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "re_f", "im_f", "quad_err"])
    for x, v, e in zip(ev.x, ev.values, ev.quad_err):
        w.writerow([_fmt(x), _fmt(v.real), _fmt(v.imag), _fmt(e)])
    _emit(buf.getvalue(), args.get("out"))
    if not np.all(ev.converged):
        warnings.warn(f"{int(np.sum(~ev.converged))} grid point(s) did not reach tolerance", QuadratureWarning)
    return 0


def cmd_verify(args, cfg):
    from .solver import residual_check

    g, lam, sol = _build_solution(args, cfg)
    f = sol
    if args.get("f"):
        f = load_function(args["f"])
    rep = residual_check(f, g, lam, _grid(args), cfg)
    out = rep.to_json()
    out["lambda"] = _c(lam)
    out["solution"] = sol.to_json() if f is sol else {"f": args["f"]}
    _emit(_dump(out) + "\n", args.get("out"))
    return 0


def cmd_kernel(args, cfg):
    _require(args, "which", "alpha", "x")
    which = args["which"]
    alpha = _complex_arg(args["alpha"], "alpha")
    xs = parse_grid(args["x"])
    lines = []
    if which in ("r1", "r2", "r3"):
        vals = np.atleast_1d(r_profile(which, xs, alpha))
    else:
        _require(args, "y")
        ys = parse_grid(args["y"])
        if ys.size not in (1, xs.size):
            raise UsageError("--y must be a single value or match --x in length")
        spec = KernelSpec(Kernel(which), parse_blend(args.get("phi1")))
        vals = np.atleast_1d(resolvent_point(spec, xs, np.broadcast_to(ys, xs.shape), alpha))
    for v in vals:
        lines.append(f"{_fmt(v.real)} {_fmt(v.imag)}")
    _emit("\n".join(lines) + "\n", args.get("out"))
    return 0


def cmd_mellin(args, cfg):
    from .analysis import mellin

    _require(args, "f", "s")
    f = load_function(args["f"])
    s = _complex_arg(args["s"], "s")
    res = mellin(f, s, cfg, full_output=True)
    _emit(_dump({"f": args["f"], "s": _c(s), **res.to_json()}) + "\n", args.get("out"))
    return 0


def cmd_norm(args, cfg):
    from .analysis import norm

    _require(args, "f", "space")
    f = load_function(args["f"])
    space = parse_space(args["space"])
    out = norm(f, space, cfg, full_output=True)
    out = {"f": args["f"], "space": space.label, **out}
    if not math.isfinite(out["value"]):
        out["value"] = None
        out["diverged"] = True
    if out.get("abs_error_estimate") is not None and not math.isfinite(out["abs_error_estimate"]):
        out["abs_error_estimate"] = None
    _emit(_dump(out) + "\n", args.get("out"))
    return 0


def cmd_growth(args, cfg):
    from .analysis import fit_growth
    from .solver import solve_E

    wi, wz = ((1e2, 1e6), (1e-6, 1e-2))
    if args.get("windows"):
        wi, wz = parse_windows(args["windows"])
    if args.get("g"):
        _require(args, "lam")
        lam = _complex_arg(args["lam"], "lambda")
        sol = solve_E(load_function(args["g"]), lam, parse_blend(args.get("phi1")), cfg=cfg)
        target, label = sol.particular, {"g": args["g"], "lambda": _c(lam), "alpha": _c(sol.param.alpha)}
    else:
        _require(args, "f")
        target, label = load_function(args["f"]), {"f": args["f"]}
    fit = fit_growth(target, wi, wz, abs_tol=cfg.abs_tol)
    _emit(_dump({**label, **fit.to_json()}) + "\n", args.get("out"))
    return 0


def cmd_tbeta(args, cfg):
    from .analysis import t_beta_apply

    _require(args, "f", "beta", "x")
    f = load_function(args["f"])
    beta = _complex_arg(args["beta"], "beta")
    xs = parse_grid(args["x"])
    res = t_beta_apply(f, beta, xs, cfg, full_output=True)
    out = {
        "f": args["f"],
        "beta": _c(beta),
        "x": xs.tolist(),
        "value": [_c(v) for v in res.values],
        "abs_error_estimate": [float(e) for e in res.errors],
        "converged": bool(np.all(res.converged)),
    }
    _emit(_dump(out) + "\n", args.get("out"))
    return 0


def cmd_bound(args, cfg):
    from .analysis import check_s_bound

    _require(args, "f", "eps", "eta")
    rep = check_s_bound(load_function(args["f"]), float(args["eps"]), float(args["eta"]), cfg)
    _emit(_dump({"f": args["f"], "eps": args["eps"], "eta": args["eta"], **rep.to_json()}) + "\n", args.get("out"))
    return 0


def cmd_repro(args, cfg):
    from .report import write_repro

    only = [s.strip() for s in args["only"].split(",") if s.strip()] if args.get("only") else None
    out_dir = Path(args.get("out") or "repro_out")
    seed = int(args.get("seed") or 0)
    results = write_repro(out_dir, only=only, cfg=cfg, seed=seed, figures=not args.get("no_figures"),
                          progress=lambda r: print(r.line(), flush=True))
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed; report in {out_dir}")
    if failed:
        print(_dump({"failed": failed}), file=sys.stderr)
        return 1
    return 0


HANDLERS = {
    "solve": cmd_solve,
    "verify": cmd_verify,
    "kernel": cmd_kernel,
    "mellin": cmd_mellin,
    "norm": cmd_norm,
    "growth": cmd_growth,
    "tbeta": cmd_tbeta,
    "bound": cmd_bound,
    "repro": cmd_repro,
}


def _error(exc: StieltjesError) -> int:
    print(json.dumps(exc.to_json()), file=sys.stderr)
    return exc.exit_code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if ns.command is None:
            raise UsageError(f"choose a command: {', '.join(COMMANDS)}")
        args, cfg = resolve_args(ns)
        with warnings.catch_warnings():
            warnings.simplefilter("default", QuadratureWarning)
            return HANDLERS[ns.command](args, cfg)
    except StieltjesError as exc:
        return _error(exc)
    except (ValueError, OSError) as exc:
        print(json.dumps({"error": {"code": "invalid_argument", "message": str(exc)}}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
