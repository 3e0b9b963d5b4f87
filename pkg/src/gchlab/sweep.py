"""Parameter sweeps over a config template."""

from __future__ import annotations

import copy
import csv
import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import ConfigError, initial_data, parse_config
from .diagnostics import InapplicableError, threshold_3_1
from .runner import EXIT_ERROR, fmt, simulate
from .spectral import lp_norm


def parse_axis(text: str):
    """'params.lambda=0.1,1,10' -> ('params.lambda', [0.1, 1.0, 10.0])."""
    field, sep, values = text.partition("=")
    if not sep or not field or not values:
        raise ValueError(f"axis must look like field=v1,v2,...; got {text!r}")
    out = []
    for v in values.split(","):
        v = v.strip()
        try:
            out.append(int(v))
        except ValueError:
            out.append(float(v))
    return field.strip(), out


def set_field(data: dict, dotted: str, value):
    node = data
    keys = dotted.split(".")
    for key in keys[:-1]:
        if not isinstance(node.get(key), dict):
            raise ValueError(f"no config section {key!r} in {dotted!r}")
        node = node[key]
    # unknown leaves are caught later by the strict schema
    node[keys[-1]] = value


def cell_configs(template: dict, axes):
    names = [name for name, _ in axes]
    for values in itertools.product(*(vals for _, vals in axes)):
        data = copy.deepcopy(template)
        for name, v in zip(names, values):
            set_field(data, name, v)
        yield dict(zip(names, values)), data


def _threshold_info(data):
    """(threshold_3_1, l2_y0) for a cell, each None when undefined."""
    try:
        cfg = parse_config(data)
        params = cfg.params.to_params()
        grid = cfg.grid.to_grid()
        thr = threshold_3_1(params)
    except (ConfigError, InapplicableError, ValueError):
        return None, None
    try:
        _, y0, _ = initial_data(cfg, grid, params)
    except (InapplicableError, ValueError):
        return thr, None
    return thr, lp_norm(y0, 2, grid.dx)


def run_cell(data: dict, out_dir: str):
    """Run one sweep cell; errors are recorded rather than raised."""
    try:
        cfg = parse_config(data)
        result = simulate(cfg, Path(out_dir))
        return {"outcome": result.summary["status"], "exit_code": result.exit_code, "error": ""}
    except Exception as exc:  # noqa: BLE001 - a failing cell must not stop the sweep
        return {"outcome": "Error", "exit_code": EXIT_ERROR, "error": f"{type(exc).__name__}: {exc}"}


def worker_count() -> int:
    env = os.environ.get("GCHLAB_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError("GCHLAB_THREADS must be a positive integer") from None
        if n < 1:
            raise ValueError("GCHLAB_THREADS must be a positive integer")
        return n
    return os.cpu_count() or 1


def sweep(template: dict, axes, out_dir: Path, workers=None):
    """Run every cell of the axis grid and write classification.csv; returns its rows."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cells = list(cell_configs(template, axes))
    workers = workers or worker_count()
    dirs = [str(out_dir / f"cell_{i:04d}") for i in range(len(cells))]
    datas = [data for _, data in cells]
    if workers == 1 or len(cells) == 1:
        results = [run_cell(d, p) for d, p in zip(datas, dirs)]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(cells))) as pool:
            results = list(pool.map(run_cell, datas, dirs))

    axis_names = [name for name, _ in axes]
    header = axis_names + ["cell", "outcome", "exit_code", "threshold_3_1", "l2_y0", "below_threshold", "error"]
    rows = []
    for i, ((values, data), res) in enumerate(zip(cells, results)):
        thr, l2 = _threshold_info(data)
        below = None if thr is None or l2 is None else l2 <= thr
        rows.append(
            {
                **values,
                "cell": f"cell_{i:04d}",
                "threshold_3_1": thr,
                "l2_y0": l2,
                "below_threshold": below,
                **res,
            }
        )
    with (out_dir / "classification.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_cell(r[h]) for h in header])
    return rows


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)) or v is None:
        return fmt(v)
    return str(v)
