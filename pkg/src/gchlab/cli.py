"""Command-line entry point: simulate, verify, sweep, exact."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import initial as lib
from .config import ConfigError, load_config
from .core import Grid, ModelParams, ParameterError
from .runner import EXIT_ERROR, EXIT_OK, fmt, simulate
from .sweep import parse_axis, sweep
from .verify import SUITES, run_suite

log = logging.getLogger("gchlab")

# kind -> (function, accepted parameters with defaults)
EXACT_KINDS = {
    "ch_peakon": (lib.ch_peakon, {"c": 1.0, "center": 0.0}),
    "novikov_peakon": (lib.novikov_exact_peakon, {"c": 1.0, "center": 0.0}),
    "uniform_decay": (lib.uniform_decay, {"c": 1.0, "lambda": 0.0}),
}


def write_exact(kind: str, params: dict, grid: Grid, times, out_dir: Path):
    """Sample a closed-form solution at each time into out_dir/exact_XXXX.csv (columns x, u)."""
    try:
        fn, defaults = EXACT_KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown exact kind {kind!r}; known: {', '.join(EXACT_KINDS)}") from None
    unknown = set(params) - set(defaults)
    if unknown:
        raise ValueError(f"unknown parameters for {kind}: {', '.join(sorted(unknown))}")
    args = {**defaults, **params}
    if kind == "uniform_decay":
        args["lam"] = args.pop("lambda")
    else:
        args["half_length"] = grid.half_length
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, t in enumerate(times):
        u = fn(grid.x, t, **args)
        path = out_dir / f"exact_{i:04d}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "u"])
            w.writerows((fmt(x), fmt(v)) for x, v in zip(grid.x, u))
        paths.append(path)
    with (out_dir / "times.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "t"])
        w.writerows((i, fmt(t)) for i, t in enumerate(times))
    return paths


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _cmd_simulate(args):
    cfg = load_config(args.config)
    result = simulate(cfg, Path(args.out) if args.out else None)
    s = result.summary
    print(f"{s['status']} at t={s['t_final']:.6g} after {s['steps']} steps -> {result.out_dir}")
    if s["blowup"]:
        b = s["blowup"]
        print(f"blow-up ({b['reason']}) at t={b['t']:.6g}: sup|u_x|={b['linf_ux']:.6g}, sup|u|={b['linf_u']:.6g}")
    return result.exit_code


def _cmd_verify(args):
    params = None
    if args.params:
        d = json.loads(args.params)
        params = ModelParams(int(d["N"]), float(d["beta"]), float(d.get("k", 0.0)), float(d.get("lambda", 0.0)))
    checks = run_suite(args.suite, params)
    for c in checks:
        print(c.line())
    ok = all(c.passed for c in checks)
    print(f"suite {args.suite}: {'PASS' if ok else 'FAIL'} ({sum(c.passed for c in checks)}/{len(checks)})")
    return EXIT_OK if ok else EXIT_ERROR


def _cmd_sweep(args):
    path = Path(args.config)
    try:
        template = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    axes = [parse_axis(a) for a in args.axis]
    out = Path(args.out or template.get("output", {}).get("directory", "sweep"))
    rows = sweep(template, axes, out, workers=args.workers)
    for r in rows:
        print(f"{r['cell']}: {r['outcome']}" + (f" ({r['error']})" if r["error"] else ""))
    print(f"wrote {out / 'classification.csv'}")
    return EXIT_OK


def _cmd_exact(args):
    params = json.loads(args.params) if args.params else {}
    if not isinstance(params, dict):
        raise ValueError("--params must be a JSON object")
    L, nx = args.grid.split(",")
    grid = Grid(float(L), int(nx))
    paths = write_exact(args.kind, params, grid, _floats(args.times), Path(args.out))
    print(f"wrote {len(paths)} files to {args.out}")
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="gchlab", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="evolve one configured run")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="output directory (overrides output.directory)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("verify", help="run a property suite")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--params", help='override parameters, e.g. \'{"N":2,"beta":2,"k":0,"lambda":0.1}\'')
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("sweep", help="run a grid of configs")
    p.add_argument("--config", required=True, help="config template")
    p.add_argument("--axis", action="append", required=True, help="field=v1,v2,... (repeatable)")
    p.add_argument("--out")
    p.add_argument("--workers", type=int, help="parallel cells (default: GCHLAB_THREADS or CPU count)")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("exact", help="sample a closed-form solution")
    p.add_argument("--kind", required=True, choices=sorted(EXACT_KINDS))
    p.add_argument("--params", default="{}")
    p.add_argument("--grid", required=True, help="L,nx")
    p.add_argument("--times", required=True, help="t1,t2,...")
    p.add_argument("--out", default="exact")
    p.set_defaults(func=_cmd_exact)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ParameterError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
