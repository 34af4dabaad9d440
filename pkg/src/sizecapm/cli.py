"""Command-line front end.

Subcommands: ``fit``, ``simulate``, ``stability``, ``curve``, ``extremes``.
Every file written gets a ``<file>.meta.json`` sidecar holding the command,
the fully resolved parameters and the seed, which is enough to rerun it.
Defaults for the global flags may come from ``SIZECAPM_SEED``,
``SIZECAPM_FORMAT`` and ``SIZECAPM_WORKERS``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .curves import CurvePoints
from .data import DataError, load_fred_series, load_panel, build_dataset
from .extremes import (
    gumbel_constants,
    hall_residual,
    lower_curve,
    lower_reference,
    normal_market_curve,
    simulate_arrivals,
    upper_curve,
    upper_reference,
)
from .market import (
    ModelParams,
    capital_curve,
    conditional_moments,
    simulate_market,
    standardize_curve,
    weight_curve,
)
from .regression import DEFAULT_LAGS, fit_all
from .stability import estimate_log_contraction, stability_region
from .volatility import fit_log_ar1

ENV_PREFIX = "SIZECAPM_"
RUN_KEYS = {"T", "lnv0"}


class UsageError(Exception):
    pass


def read_keyfile(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def _parse_sets(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise UsageError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def resolve_params(args, flag_overrides: dict) -> tuple[ModelParams, dict]:
    """Defaults < --params file < --set < explicit flags."""
    flat = {}
    if getattr(args, "params", None):
        flat.update(read_keyfile(args.params))
    flat.update(_parse_sets(getattr(args, "set", None)))
    flat.update({k: v for k, v in flag_overrides.items() if v is not None})
    if "c" in flat:
        flat["b"] = -float(flat.pop("c"))
    run = {k: flat.pop(k) for k in list(flat) if k in RUN_KEYS}
    try:
        params = ModelParams.from_flat(flat)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    return params, run


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def _clean(obj):
    """Replace non-finite floats so the JSON stays standard."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def embedded(meta: dict) -> dict:
    """Metadata copy for inclusion in a primary output: no argv, so the
    output does not depend on file names or the worker count."""
    return {k: v for k, v in meta.items() if k != "argv"}


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, default=_json_default) + "\n"


def metadata(args, params: ModelParams | None = None, extra=None) -> dict:
    meta = {
        "command": args.command,
        "argv": list(args.argv),
        "seed": int(args.seed),
        "version": __version__,
    }
    if params is not None:
        meta["params"] = params.to_flat()
    if extra:
        meta.update(extra)
    return meta


def emit(args, text: str, meta: dict, path=None):
    """Write ``text`` to ``path`` (default ``--out``) with a sidecar, or to stdout."""
    path = path or args.out
    if path is None:
        sys.stdout.write(text)
        return
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with p.open("w", newline="\n") as fh:
        fh.write(text)
    with Path(str(p) + ".meta.json").open("w", newline="\n") as fh:
        fh.write(dumps(meta))


def _table_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def _curve_text(curve: CurvePoints, fmt: str, meta: dict) -> str:
    if fmt == "json":
        return dumps({"metadata": embedded(meta), "points": curve.points})
    return curve.to_csv()


# commands


def cmd_fit(args) -> int:
    if args.deciles_dir is None and args.vix is None:
        raise UsageError("fit needs --deciles-dir (with --vix and --rf) or --vix")
    result = {}
    if args.deciles_dir is not None:
        if args.vix is None or args.rf is None:
            raise UsageError("--deciles-dir requires --vix and --rf")
        panel = load_panel(args.deciles_dir, args.vix, args.rf)
        ds = build_dataset(panel)
        fits = fit_all(ds, args.lags)
        result["returns"] = [f.as_row() for f in fits if f.kind == "returns"]
        result["premia"] = [f.as_row() for f in fits if f.kind == "premia"]
        result["range"] = [str(panel.range[0]), str(panel.range[1])]
        vix_values = panel.vix
    else:
        vix_values = load_fred_series(args.vix, "vix")
    ar = fit_log_ar1(vix_values)
    result["vix_ar1"] = {
        "alpha": ar.alpha,
        "beta": ar.beta,
        "beta_ci95": list(ar.beta_ci95),
        "alpha_stderr": ar.alpha_stderr,
        "beta_stderr": ar.beta_stderr,
        "innovations": ar.innovation_moments(),
    }
    meta = metadata(args, extra={"inputs": {"deciles_dir": args.deciles_dir, "vix": args.vix, "rf": args.rf}, "lags": args.lags})
    if args.format == "csv":
        if "returns" in result:
            text = _table_csv(result["returns"] + result["premia"])
        else:
            flat = {"alpha": ar.alpha, "beta": ar.beta, "beta_ci_low": ar.beta_ci95[0], "beta_ci_high": ar.beta_ci95[1]}
            flat.update({f"innovation_{k}": v for k, v in ar.innovation_moments().items()})
            text = _table_csv([flat])
    else:
        text = dumps({"metadata": embedded(meta), **result})
    emit(args, text, meta)
    return 0


def _paths_csv(paths) -> str:
    T = paths.T
    N = paths.N
    buf = io.StringIO()
    buf.write("t,V,R0,Z," + ",".join(f"C{k}" for k in range(1, N + 1)) + "\n")
    for t in range(T + 1):
        head = [str(t)]
        if t < T:
            head += [repr(float(paths.V[t])), repr(float(paths.R0[t])), repr(float(paths.Z[t]))]
        else:
            head += ["", "", ""]
        buf.write(",".join(head + [repr(float(c)) for c in paths.C[:, t]]) + "\n")
    return buf.getvalue()


def read_paths(path):
    """Parse a paths CSV written by ``simulate --emit-paths``."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if header[:4] != ["t", "V", "R0", "Z"]:
        raise DataError(f"{path}: not a paths file")
    T = len(body) - 1
    V = np.array([float(r[1]) for r in body[:T]])
    R0 = np.array([float(r[2]) for r in body[:T]])
    Z = np.array([float(r[3]) for r in body[:T]])
    C = np.array([[float(x) for x in r[4:]] for r in body]).T
    return V, R0, Z, C


def cmd_simulate(args) -> int:
    params, run = resolve_params(
        args,
        {"N": args.N, "c": args.c, "rho": args.rho, "vix_units": args.units, "a": args.a, "b": args.b, "m": args.m},
    )
    T = int(args.T if args.T is not None else run.get("T", 400))
    lnv0 = float(args.lnv0 if args.lnv0 is not None else run.get("lnv0", 3.0))
    paths = simulate_market(params, T, c0=args.c0, lnv0=lnv0, seed=args.seed, workers=args.workers)
    final = paths.C[:, -1]
    curve = weight_curve(final) if args.curve == "weights" else capital_curve(final)
    extra = {"T": T, "lnv0": lnv0, "c0": args.c0, "curve": args.curve}
    meta = metadata(args, params, extra)
    emit(args, _curve_text(curve, args.format, meta), meta)
    if args.emit_paths:
        emit(args, _paths_csv(paths), meta, path=args.emit_paths)
    return 0


def cmd_stability(args) -> int:
    if args.region:
        grid = stability_region(
            (args.mu_min, args.mu_max),
            (args.rho_min, args.rho_max),
            args.grid_n,
            args.samples_per_cell,
            args.seed,
            workers=args.workers,
        )
        extra = {
            "region": {
                "mu_range": [args.mu_min, args.mu_max],
                "rho_range": [args.rho_min, args.rho_max],
                "grid_n": args.grid_n,
                "samples_per_cell": args.samples_per_cell,
            }
        }
        meta = metadata(args, extra=extra)
        if args.format_explicit == "json":
            text = dumps({"metadata": embedded(meta), "rows": list(grid.rows()), "boundary": grid.boundary})
        else:
            text = grid.to_csv()
        emit(args, text, meta)
        return 0
    params, run = resolve_params(args, {"a": args.a, "b": args.b, "rho": args.rho, "vix_units": args.units})
    lnv0 = float(run.get("lnv0", 3.0))
    report = estimate_log_contraction(params, args.samples, args.burn_in, args.seed, lnv0=lnv0)
    meta = metadata(args, params, {"samples": args.samples, "burn_in": args.burn_in, "lnv0": lnv0})
    if args.format == "csv":
        text = _table_csv([report.as_dict()])
    else:
        text = dumps({"metadata": embedded(meta), **report.as_dict()})
    emit(args, text, meta)
    return 0


def cmd_curve(args) -> int:
    V, R0, Z, C = read_paths(args.paths)
    T = C.shape[1] - 1
    t = T if args.time is None else args.time
    if not 0 <= t <= T:
        raise DataError(f"--time must be in 0..{T}")
    Ct = C[:, t]
    extra = {"paths": args.paths, "time": t, "kind": args.kind}
    if args.kind == "weights":
        curve = weight_curve(Ct)
        params = None
    elif args.kind == "standardized":
        params, _ = resolve_params(args, {"a": args.a, "b": args.b, "m": args.m})
        if t < 1:
            raise DataError("standardization needs at least one step of history")
        cm = conditional_moments(V[:t], Z[:t], params)
        extra["conditional_moments"] = {"M": cm.M_cond, "S": cm.S_cond, "terms": cm.truncation_terms}
        curve = capital_curve(standardize_curve(Ct, cm))
    else:
        curve = capital_curve(Ct)
        params = None
    meta = metadata(args, params, extra)
    emit(args, _curve_text(curve, args.format, meta), meta)
    return 0


def _reference_path(out: str) -> str:
    p = Path(out)
    return str(p.with_name(p.stem + ".reference" + p.suffix))


def cmd_extremes(args) -> int:
    if args.gumbel:
        n = float(args.N if args.N is not None else 100_000)
        c = gumbel_constants(n, args.method)
        res = {"n": n, "method": c.method, "a_n": c.a_n, "b_n": c.b_n}
        if c.method == "hall":
            res["residual"] = hall_residual(c)
        meta = metadata(args, extra={"mode": "gumbel", **res})
        emit(args, dumps({"metadata": embedded(meta), **res}), meta)
        return 0
    if args.normal_curve:
        N = args.N if args.N is not None else 100
        curve = normal_market_curve(N, args.seed)
        meta = metadata(args, extra={"mode": "normal-curve", "N": N})
        emit(args, _curve_text(curve, args.format, meta), meta)
        return 0
    m = args.m
    arrivals = simulate_arrivals(m, args.seed)
    if args.lower:
        N = args.N if args.N is not None else 500
        curve, ref = lower_curve(arrivals, N), lower_reference(m, N)
        extra = {"mode": "lower", "m": m, "N": N}
    else:
        curve, ref = upper_curve(arrivals), upper_reference(m)
        extra = {"mode": "upper", "m": m}
    meta = metadata(args, extra=extra)
    emit(args, _curve_text(curve, args.format, meta), meta)
    if args.out is not None:
        emit(args, _curve_text(ref, args.format, {**meta, "reference": True}), {**meta, "reference": True}, path=_reference_path(args.out))
    return 0


# parser


def _env_default(name, default, cast=str):
    v = os.environ.get(ENV_PREFIX + name)
    return default if v is None else cast(v)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=_env_default("SEED", 0, int), help="64-bit unsigned seed")
    common.add_argument("--out", default=None, help="output file (stdout when omitted)")
    common.add_argument("--format", choices=["csv", "json"], default=None)
    common.add_argument("--workers", type=int, default=_env_default("WORKERS", 1, int))

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--params", help="flat key=value parameter file")
    model.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one parameter")

    parser = argparse.ArgumentParser(prog="sizecapm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", parents=[common], help="fit regressions and the VIX autoregression")
    p.add_argument("--deciles-dir")
    p.add_argument("--vix")
    p.add_argument("--rf")
    p.add_argument("--lags", type=int, default=DEFAULT_LAGS)
    p.set_defaults(func=cmd_fit, default_format="json")

    p = sub.add_parser("simulate", parents=[common, model], help="simulate the market and emit the ranked curve")
    p.add_argument("--T", type=int)
    p.add_argument("--N", "-N", type=int)
    p.add_argument("--c", type=float, help="sets b = -c")
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--m", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--lnv0", type=float)
    p.add_argument("--c0", type=float, default=0.0, help="common initial relative size")
    p.add_argument("--units", choices=["index", "decimal"])
    p.add_argument("--curve", choices=["relative", "weights"], default="relative")
    p.add_argument("--emit-paths")
    p.set_defaults(func=cmd_simulate, default_format="csv")

    p = sub.add_parser("stability", parents=[common, model], help="check the log-contraction condition")
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--units", choices=["index", "decimal"])
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--burn-in", type=int, default=200)
    p.add_argument("--region", action="store_true", help="map the constant-volatility Gaussian region")
    p.add_argument("--grid-n", type=int, default=61)
    p.add_argument("--samples-per-cell", type=int, default=100_000)
    p.add_argument("--mu-min", type=float, default=0.0)
    p.add_argument("--mu-max", type=float, default=3.0)
    p.add_argument("--rho-min", type=float, default=0.0)
    p.add_argument("--rho-max", type=float, default=3.0)
    p.set_defaults(func=cmd_stability, default_format="json")

    p = sub.add_parser("curve", parents=[common, model], help="capital distribution curve from a paths file")
    p.add_argument("--paths", required=True)
    p.add_argument("--time", type=int)
    p.add_argument("--kind", choices=["relative", "weights", "standardized"], default="relative")
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--m", type=float)
    p.set_defaults(func=cmd_curve, default_format="csv")

    p = sub.add_parser("extremes", parents=[common], help="Poisson curve ends, normal market curve, Gumbel constants")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--upper", action="store_true")
    mode.add_argument("--lower", action="store_true")
    mode.add_argument("--normal-curve", action="store_true")
    mode.add_argument("--gumbel", action="store_true")
    p.add_argument("-m", type=int, default=100)
    p.add_argument("-N", "--N", type=int)
    p.add_argument("--method", choices=["classic", "hall"], default="hall")
    p.set_defaults(func=cmd_extremes, default_format="csv")
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv
    args.format_explicit = args.format or os.environ.get(ENV_PREFIX + "FORMAT")
    if args.format is None:
        args.format = _env_default("FORMAT", args.default_format)
    if args.seed < 0 or args.seed >= 2**64:
        parser.error("--seed must be a 64-bit unsigned integer")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (DataError, ValueError, KeyError, OverflowError, ArithmeticError, OSError, np.linalg.LinAlgError) as exc:
        msg = str(exc.args[0]) if isinstance(exc, KeyError) and exc.args else str(exc)
        print(f"error: {msg}".splitlines()[0], file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
