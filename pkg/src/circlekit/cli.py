"""Command-line front end: subcommands, config/caching, JSON and CSV reports.

Every JSON report embeds the tool version, the sha256 of the input
polynomial, the fully resolved configuration and the wall time.  With fixed
config and seeds, reruns are byte-identical except for the wall_time_s
field.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import asdict, is_dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .arch import QuadratureSpec, mu_infinity, sigma_measure, sigma_scaled
from .arcs import build_arcs, classify_alpha, estimate_gd, T_sum, z_count
from .count import (count_direct, count_mitm, mangoldt_table, predict,
                    regularity_exponent)
from .hinv import Decomposition, build_gm_fm, quadratic_h
from .local import mu_p, singular_series
from .poly import load_polynomial, parse_polynomial

_FLAG_EXIT = 1
_USAGE_EXIT = 2


def _jsonable(obj):
    if is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if obj is None or isinstance(obj, (bool, int, float, str)):
        return obj
    return str(obj)


def _cache_dir(args):
    if getattr(args, "cache", None):
        return Path(args.cache)
    env = os.environ.get("CIRCLEKIT_CACHE")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "circlekit"


def _cached_table(args, poly_hash, N):
    base = _cache_dir(args) / poly_hash
    path = base / f"mangoldt-{N}.bin"
    if path.exists():
        with open(path, "rb") as fh:
            data = np.load(fh)
            table = mangoldt_table(0)
            table.N = N
            table.values = data["values"]
            table.base = data["base"]
            return table
    table = mangoldt_table(N)
    base.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        np.savez(fh, values=table.values, base=table.base)
    return table


def _cached_local_factors(args, poly, poly_hash, prime_bound, t_max):
    """singular_series with a per-polynomial JSON cache of local factors."""
    base = _cache_dir(args) / poly_hash
    path = base / "localfactors.json"
    cache = {}
    if path.exists():
        cache = json.loads(path.read_text())
    key = f"series:{prime_bound}:{t_max}"
    if key not in cache:
        series, factors = singular_series(poly, prime_bound, t_max=t_max)
        cache[key] = _jsonable({"series": series, "factors": factors})
        base.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(cache, sort_keys=True, indent=2))
    return cache[key]


def _load_poly(args):
    try:
        return load_polynomial(args.poly)
    except (OSError, ValueError) as exc:
        raise SystemExit(f"error: cannot read polynomial: {exc}") from None


def _emit(args, command, poly, config, result, t0, flags=()):
    config = {k: v for k, v in config.items()
              if k not in ("func", "output")}
    report = {
        "tool": "circlekit",
        "version": __version__,
        "command": command,
        "poly_sha256": poly.sha256() if poly is not None else None,
        "config": _jsonable(config),
        "result": _jsonable(result),
        "flags": list(flags),
        "wall_time_s": round(time.monotonic() - t0, 6),
    }
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if getattr(args, "output", None):
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return _FLAG_EXIT if flags else 0


def _spec_from(args):
    return QuadratureSpec(
        box_points=getattr(args, "box_points", 1 << 20),
        eta_L=getattr(args, "eta_L", 16.0),
        eps=getattr(args, "eps", 0.01),
        seed=getattr(args, "seed", 7))


# -- subcommand handlers ----------------------------------------------------

def _cmd_predict(args, t0):
    b = _load_poly(args)
    table = _cached_table(args, b.sha256(), args.N) if args.ground_truth \
        else None
    rep = predict(b, args.N, prime_bound=args.prime_bound, t_max=args.tmax,
                  spec=_spec_from(args), ground_truth=args.ground_truth,
                  strategy=args.strategy, split=args.split, table=table)
    flags = tuple(rep.sigma.flags)
    return _emit(args, "predict", b, vars(args), rep, t0, flags)


def _cmd_count(args, t0):
    b = _load_poly(args)
    table = _cached_table(args, b.sha256(), args.N)
    if args.strategy == "mitm":
        res = count_mitm(b, args.N, table,
                         args.split if args.split is not None else b.n // 2)
    else:
        res = count_direct(b, args.N, table)
    if args.primes_only:
        # variant count: restrict the weighted sum to first prime powers
        sols = [s for s in res.solutions
                if all(table.base[k] == k for k in s)]
        value = math.fsum(
            math.prod(table.values[k] for k in s) for s in sorted(sols))
        out = {"full": res, "primes_only_value": value,
               "primes_only_solutions": len(sols),
               "note": "primes-only restricts the standard weighted count "
                       "to first powers"}
    else:
        out = res
    return _emit(args, "count", b, vars(args), out, t0)


def _cmd_local(args, t0):
    b = _load_poly(args)
    factor = mu_p(b, args.p, t_max=args.tmax)
    flags = ("budget",) if factor.warning else ()
    return _emit(args, "local", b, vars(args), factor, t0, flags)


def _cmd_series(args, t0):
    b = _load_poly(args)
    res = _cached_local_factors(args, b, b.sha256(), args.prime_bound,
                                args.tmax)
    return _emit(args, "series", b, vars(args), res, t0)


def _cmd_sigma_inf(args, t0):
    b = _load_poly(args)
    form = b.top_degree_part()
    mu = mu_infinity(form, _spec_from(args))
    meas = sigma_measure(form, _spec_from(args))
    flags = tuple(set(mu.flags) | set(meas.flags))
    return _emit(args, "sigma-inf", b, vars(args),
                 {"quadrature": mu, "measure": meas}, t0, flags)


def _cmd_arcs(args, t0):
    dis = build_arcs(args.N, args.C, args.d)
    result = {"N": dis.N, "C": dis.C, "d": dis.d,
              "radius": dis.radius(),
              "total_measure": dis.total_measure,
              "centers": [{"m": f.m, "q": f.q} for f, _ in dis.arcs]}
    return _emit(args, "arcs", None, vars(args), result, t0)


def _cmd_weyl_scan(args, t0):
    b = _load_poly(args)
    table = _cached_table(args, b.sha256(), args.N)
    alphas = [k / args.points for k in range(args.points)]
    rows = ["alpha,re_T,im_T,abs_T,classification"]
    for a in alphas:
        v = T_sum(b, a, args.N, table)
        cls = classify_alpha(a, args.N, b.degree, args.Delta)
        tag = "minor" if cls == "minor" else f"{cls[1]}/{cls[0]}"
        rows.append(f"{a},{v.real!r},{v.imag!r},{abs(v)!r},{tag}")
    text = "\n".join(rows) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_zcount(args, t0):
    b = _load_poly(args)
    form = b.top_degree_part()
    Rs = sorted(args.R)
    if len(Rs) >= 3:
        result = estimate_gd(form, form.degree, Rs)
    else:
        result = {"R_values": Rs,
                  "z_counts": [z_count(form, form.degree, R) for R in Rs]}
    return _emit(args, "zcount", b, vars(args), result, t0)


def _cmd_hinv(args, t0):
    b = _load_poly(args)
    data = quadratic_h(b.top_degree_part())
    return _emit(args, "hinv", b, vars(args), data, t0)


def _parse_decomposition(path, target):
    """Decomposition file: polynomial blocks separated by lines of dashes,
    in the order U_1, V_1, U_2, V_2, ..."""
    blocks = [blk.strip() for blk in Path(path).read_text().split("---")
              if blk.strip()]
    if len(blocks) % 2:
        raise SystemExit("error: decomposition file needs U/V block pairs")
    polys = [parse_polynomial(blk) for blk in blocks]
    pairs = [(polys[i], polys[i + 1]) for i in range(0, len(polys), 2)]
    return Decomposition(target=target, pairs=pairs)


def _cmd_gm_split(args, t0):
    b = _load_poly(args)
    dec = _parse_decomposition(args.dec, b.top_degree_part())
    try:
        g_M, f_M = build_gm_fm(dec.target, dec, args.M)
    except ValueError as exc:
        raise SystemExit(f"error: {exc}") from None
    result = {"M": args.M, "g_M": g_M.to_text(), "f_M": f_M.to_text()}
    return _emit(args, "gm-split", b, vars(args), result, t0)


def _cmd_regularity(args, t0):
    system = [load_polynomial(p) for p in args.poly]
    rep = regularity_exponent(system, args.N_list)
    flags = () if rep.regular else ("not_regular",)
    return _emit(args, "regularity", system[0], vars(args), rep, t0, flags)


# -- argument plumbing ------------------------------------------------------

def _add_common(sp, poly=True):
    if poly:
        sp.add_argument("--poly", required=True, help="polynomial text file")
    sp.add_argument("--output", help="report path (default: stdout)")
    sp.add_argument("--cache", help="cache directory "
                    "(default: $CIRCLEKIT_CACHE or ~/.cache/circlekit)")
    sp.add_argument("--config", help="key=value config file; flags win")
    sp.add_argument("--threads", type=int, default=1,
                    help="worker cap for parallel internals")


def _add_quadrature(sp):
    sp.add_argument("--box-points", dest="box_points", type=int,
                    default=1 << 20)
    sp.add_argument("--eta-L", dest="eta_L", type=float, default=16.0)
    sp.add_argument("--eps", type=float, default=0.01)
    sp.add_argument("--seed", type=int, default=7)


def build_parser():
    ap = argparse.ArgumentParser(
        prog="circlekit",
        description="desk-scale circle-method computations")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("predict", help="main-term prediction vs ground truth")
    _add_common(sp)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--prime-bound", dest="prime_bound", type=int, default=100)
    sp.add_argument("--tmax", type=int, default=6)
    _add_quadrature(sp)
    sp.add_argument("--ground-truth", action="store_true")
    sp.add_argument("--strategy", choices=["direct", "mitm"],
                    default="direct")
    sp.add_argument("--split", type=int)
    sp.set_defaults(func=_cmd_predict)

    sp = sub.add_parser("count", help="exact weighted count M_b(N)")
    _add_common(sp)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--strategy", choices=["direct", "mitm"],
                    default="direct")
    sp.add_argument("--split", type=int)
    sp.add_argument("--primes-only", action="store_true",
                    help="also report the count restricted to first "
                    "prime powers")
    sp.set_defaults(func=_cmd_count)

    sp = sub.add_parser("local", help="one local factor mu(p)")
    _add_common(sp)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--tmax", type=int, default=6)
    sp.set_defaults(func=_cmd_local)

    sp = sub.add_parser("series", help="truncated singular series")
    _add_common(sp)
    sp.add_argument("--prime-bound", dest="prime_bound", type=int,
                    default=100)
    sp.add_argument("--tmax", type=int, default=6)
    sp.set_defaults(func=_cmd_series)

    sp = sub.add_parser("sigma-inf", help="singular integral estimates")
    _add_common(sp)
    _add_quadrature(sp)
    sp.set_defaults(func=_cmd_sigma_inf)

    sp = sub.add_parser("arcs", help="major-arc dissection")
    _add_common(sp, poly=False)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--C", type=float, default=1.0)
    sp.add_argument("--d", type=int, required=True)
    sp.set_defaults(func=_cmd_arcs)

    sp = sub.add_parser("weyl-scan",
                        help="CSV sweep of T(b; alpha) over a frequency grid")
    _add_common(sp)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--points", type=int, default=64)
    sp.add_argument("--Delta", type=float, default=0.5)
    sp.set_defaults(func=_cmd_weyl_scan)

    sp = sub.add_parser("zcount", help="degeneracy counts z_R / fitted g_d")
    _add_common(sp)
    sp.add_argument("--R", type=int, action="append", required=True,
                    help="box radius; repeat for a growth fit")
    sp.set_defaults(func=_cmd_zcount)

    sp = sub.add_parser("hinv", help="exact h for a quadratic form")
    _add_common(sp)
    sp.set_defaults(func=_cmd_hinv)

    sp = sub.add_parser("gm-split",
                        help="echelonized g_M/f_M split of a decomposition")
    _add_common(sp)
    sp.add_argument("--dec", required=True,
                    help="file of U/V polynomial blocks separated by ---")
    sp.add_argument("--M", type=int, required=True)
    sp.set_defaults(func=_cmd_gm_split)

    sp = sub.add_parser("regularity", help="growth exponent of a system")
    sp.add_argument("--poly", action="append", required=True)
    sp.add_argument("--N-list", dest="N_list", type=int, action="append",
                    required=True)
    sp.add_argument("--output")
    sp.add_argument("--cache")
    sp.add_argument("--config")
    sp.add_argument("--threads", type=int, default=1)
    sp.set_defaults(func=_cmd_regularity)
    return ap


def _apply_config_file(args, argv):
    """Merge key=value lines under explicit flags (flags win)."""
    if not getattr(args, "config", None):
        return args
    explicit = {a.split("=")[0] for a in argv if a.startswith("--")}
    for line in Path(args.config).read_text().splitlines():
        line = line.split("#")[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SystemExit(f"error: bad config line: {line}")
        key, val = (s.strip() for s in line.split("=", 1))
        flag = "--" + key.replace("_", "-")
        attr = key.replace("-", "_")
        if flag in explicit or not hasattr(args, attr):
            continue
        cur = getattr(args, attr)
        if isinstance(cur, bool):
            setattr(args, attr, val.lower() in ("1", "true", "yes"))
        elif isinstance(cur, int):
            setattr(args, attr, int(val))
        elif isinstance(cur, float):
            setattr(args, attr, float(val))
        else:
            setattr(args, attr, val)
    return args


def main(argv=None):
    t0 = time.monotonic()
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        args = _apply_config_file(args, sys.argv[1:] if argv is None else argv)
        return args.func(args, t0)
    except SystemExit as exc:
        if isinstance(exc.code, str):
            print(exc.code, file=sys.stderr)
            return _USAGE_EXIT
        raise
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _USAGE_EXIT


if __name__ == "__main__":
    sys.exit(main())
