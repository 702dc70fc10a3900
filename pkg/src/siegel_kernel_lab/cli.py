"""Command line entry point (``skl``).

Every command prints one JSON document with the keys ``command``,
``config``, ``result`` and ``diagnostics`` (or CSV rows for sweeps).
Exit codes: 0 success, 1 domain or convergence failure, 2 bad input.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import arithmetic as ar
from . import enumeration as en
from . import kernel as kn
from . import verify
from . import volumes as vol
from .errors import CacheFormatError, PointFormatError, SiegelLabError
from .siegel import SiegelPoint, distance, identity_residual, spectrum

EXIT_OK, EXIT_DOMAIN, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Bad command line input; maps to exit code 2."""


@dataclass
class RunConfig:
    g: int = 2
    k: int = 10
    L: int = 2
    cache: str = None
    nodes: int = 64
    seed: int = 42
    threads: int = 1
    format: str = "json"


def parse_point(text, source="<point>"):
    """Parse the point format: ``g=<g>``, then g rows of X, then g rows of Y.

    Blank lines and anything after ``#`` are ignored.
    """
    rows = []
    raw_lines = text.splitlines()
    for lineno, raw in enumerate(raw_lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append((lineno, line))
    if not rows:
        raise PointFormatError(f"{source}: empty point file")
    lineno, head = rows[0]
    if not head.startswith("g="):
        raise PointFormatError(f"{source}: expected 'g=<g>'", lineno, 1)
    try:
        g = int(head[2:])
    except ValueError:
        raise PointFormatError(f"{source}: bad genus {head[2:]!r}", lineno, 3) from None
    if g < 1:
        raise PointFormatError(f"{source}: genus must be >= 1", lineno, 3)
    body = rows[1:]
    if len(body) != 2 * g:
        where = body[-1][0] if body else lineno
        raise PointFormatError(f"{source}: expected {2 * g} matrix rows, found {len(body)}", where)
    mat = np.zeros((2 * g, g))
    for i, (ln, line) in enumerate(body):
        toks = line.split()
        if len(toks) != g:
            raise PointFormatError(f"{source}: expected {g} numbers, found {len(toks)}", ln)
        pos = 0
        for j, tok in enumerate(toks):
            pos = raw_lines[ln - 1].index(tok, pos)
            try:
                mat[i, j] = float(tok)
            except ValueError:
                raise PointFormatError(f"{source}: not a number: {tok!r}", ln, pos + 1) from None
            pos += len(tok)
    return SiegelPoint(mat[:g], mat[g:])


def format_point(z):
    lines = [f"g={z.g}", "# X"]
    lines += [" ".join(repr(float(v)) for v in row) for row in z.X]
    lines.append("# Y")
    lines += [" ".join(repr(float(v)) for v in row) for row in z.Y]
    return "\n".join(lines) + "\n"


def _read_point(path, flag):
    if not path:
        raise InputError(f"{flag} is required")
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {flag} {path}: {exc}") from None
    return parse_point(text, path)


def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _to_jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _cache_for(cfg):
    if cfg.cache and Path(cfg.cache).exists():
        cache = en.load_cache(cfg.cache)
        if cache.g != cfg.g:
            raise InputError(f"cache genus {cache.g} does not match --g {cfg.g}")
        return cache
    return en.bfs_enumerate(cfg.g, L=cfg.L)


def _radii(text):
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        raise InputError(f"--r expects comma-separated numbers, got {text!r}") from None
    return vals


# --- commands ------------------------------------------------------------------

def cmd_distance(args, cfg):
    z = _read_point(args.z_file, "--z-file")
    w = _read_point(args.w_file, "--w-file")
    spec = spectrum(z, w)
    result = {"distance": distance(z, w), "rho": spec.rho, "radii": spec.radii,
              "identity_residual": identity_residual(z, w)}
    return result, {"g": z.g}


def cmd_enumerate(args, cfg):
    cache = en.bfs_enumerate(cfg.g, L=cfg.L)
    if cfg.cache:
        en.save_cache(cache, cfg.cache)
    return ({"size": len(cache), "truncated": cache.truncated, "descriptor": cache.descriptor},
            {"saved_to": cfg.cache})


def cmd_count(args, cfg):
    z = _read_point(args.z_file, "--z-file")
    w = _read_point(args.w_file, "--w-file")
    if args.r is None:
        raise InputError("--r (radius) is required")
    cache = _cache_for(cfg)
    counts = [{"radius": r, "count": en.count_gamma(cache, en.CountQuery(z, w, r, args.mode))}
              for r in _radii(args.r)]
    return counts, {"cache_size": len(cache), "mode": args.mode,
                    "note": "counts are restricted to the cache window"}


def cmd_reduce(args, cfg):
    z = _read_point(args.z_file, "--z-file")
    cfg.g = z.g
    cache = _cache_for(cfg)
    red = ar.siegel_reduce(z, cache, max_iter=args.max_iter)
    diag = ar.is_siegel_reduced(red.point, cache)
    result = {"gamma": red.gamma.matrix, "X": red.point.X, "Y": red.point.Y,
              "complete": red.complete, "iterations": red.iterations}
    return result, {"reduced": diag.reduced, "notes": diag.notes,
                    "min_abs_det": diag.min_abs_det}


def cmd_volume(args, cfg):
    if args.r is None:
        raise InputError("--r is required")
    quad = vol.QuadratureSpec(nodes=cfg.nodes)
    rows = []
    for r in _radii(args.r):
        row = {"g": cfg.g, "r": r, "volume": vol.polydisk_volume(cfg.g, r, quad)}
        if cfg.g == 2:
            cf = vol.closed_form_vol2(r)
            row.update(closed_form=cf.total, I1=cf.I1, I3=cf.I3, prop1_bound=vol.prop1_bound(r))
        if cfg.g >= 2:
            row["prop2_shape"] = vol.prop2_bound(cfg.g, r)
        rows.append(row)
    return rows, {"nodes": cfg.nodes}


def cmd_kernel(args, cfg):
    params = kn.KernelParams(cfg.g, cfg.k)
    if args.d is not None:
        return {"thm1_rhs": kn.thm1_rhs(params, args.d), "d": args.d}, {"mode": "thm1_rhs"}
    z = _read_point(args.z_file, "--z-file")
    w = _read_point(args.w_file, "--w-file")
    if z.g != cfg.g:
        params = kn.KernelParams(z.g, cfg.k)
        cfg.g = z.g
    cache = _cache_for(cfg)
    d = distance(z, w)
    result = {"truncated_norm": kn.truncated_norm(params, z, w, cache),
              "majorant_sum": kn.majorant_sum(params, z, w, cache), "distance": d}
    diagnostics = {"cache_size": len(cache), "weight": params.weight}
    if params.decay_exponent > 0:
        result["thm1_rhs"] = kn.thm1_rhs(params, d)
        try:
            result["thm2_rhs"] = kn.thm2_rhs_ordered(params, z, w)
        except SiegelLabError as exc:
            diagnostics["thm2"] = str(exc)
    return result, diagnostics


def cmd_verify(args, cfg):
    try:
        results = verify.run_suite(args.suite)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    rows = [{"criterion": r.number, "name": r.name, "passed": r.passed,
             "measured": r.measured, "seconds": r.seconds} for r in results]
    failed = [r.number for r in results if not r.passed]
    return rows, {"failed": failed}


COMMANDS = {
    "distance": cmd_distance,
    "enumerate": cmd_enumerate,
    "count": cmd_count,
    "reduce": cmd_reduce,
    "volume": cmd_volume,
    "kernel": cmd_kernel,
    "verify": cmd_verify,
}


def build_parser():
    p = argparse.ArgumentParser(prog="skl", description="Siegel upper half space laboratory")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--g", type=int, default=2)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--L", type=int, default=2)
    p.add_argument("--cache")
    p.add_argument("--nodes", type=int, default=64)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--threads", type=int)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--suite", default="all")
    p.add_argument("--r")
    p.add_argument("--d", type=float)
    p.add_argument("--z-file")
    p.add_argument("--w-file")
    p.add_argument("--mode", choices=(en.COCOMPACT, en.ARITHMETIC), default=en.COCOMPACT)
    p.add_argument("--max-iter", type=int, default=50)
    return p


def _threads(arg):
    if arg is not None:
        return arg
    env = os.environ.get("SKL_THREADS")
    if env is None:
        return 1
    try:
        return int(env)
    except ValueError:
        raise InputError(f"SKL_THREADS must be an integer, got {env!r}") from None


def _emit_csv(rows, out):
    rows = rows if isinstance(rows, list) else [rows]
    flat = [{k: json.dumps(_to_jsonable(v)) if isinstance(v, (list, dict, np.ndarray)) else v
             for k, v in row.items()} for row in rows]
    fields = list(dict.fromkeys(k for row in flat for k in row))
    writer = csv.DictWriter(out, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    writer.writerows(flat)


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        cfg = RunConfig(args.g, args.k, args.L, args.cache, args.nodes, args.seed,
                        _threads(args.threads), args.format)
        if not 1 <= cfg.g <= 4:
            raise InputError("--g must lie in [1, 4]")
        if cfg.k < 1 or cfg.L < 0:
            raise InputError("--k must be >= 1 and --L >= 0")
        result, diagnostics = COMMANDS[args.command](args, cfg)
    except (InputError, PointFormatError, CacheFormatError) as exc:
        print(f"skl: input error: {exc}", file=err)
        return EXIT_INPUT
    except SiegelLabError as exc:
        print(f"skl: {type(exc).__name__}: {exc}", file=err)
        return EXIT_DOMAIN
    if cfg.format == "csv":
        buf = io.StringIO()
        _emit_csv(result, buf)
        out.write(buf.getvalue())
    else:
        doc = {"command": args.command, "config": asdict(cfg), "result": result,
               "diagnostics": diagnostics}
        out.write(json.dumps(_to_jsonable(doc), indent=2) + "\n")
    if args.command == "verify" and diagnostics["failed"]:
        return EXIT_DOMAIN
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
