"""Run orchestration: config in, CSV/JSON files and an exit code out."""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .config import RunConfig, initial_data
from .core import State, classify_reduction
from .diagnostics import classify_global, classify_propagation
from .dynamics import Status, basic_norms, evolve
from .monitors import MonitorSetup, build_monitors, monitor_columns, worst_values

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_BLOWUP = 2

BASE_COLUMNS = ["t", "step", "dt", "linf_u", "linf_ux", "l2_u", "h1_u", "l2_y"]


def fmt(value) -> str:
    """17 significant digits; empty for inapplicable."""
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def exit_code_for(status: Status) -> int:
    if status is Status.REACHED_FINAL_TIME:
        return EXIT_OK
    if status is Status.BLOWUP_DETECTED:
        return EXIT_BLOWUP
    return EXIT_ERROR


def _write_csv(path: Path, header, rows):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_snapshot(path: Path, s: State):
    rows = (
        (fmt(x), fmt(u), fmt(ux), fmt(y))
        for x, u, ux, y in zip(s.grid.x, s.u, s.ux, s.y)
    )
    _write_csv(path, ["x", "u", "u_x", "y"], rows)


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if np.isfinite(v) else str(v)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


@dataclass
class RunResult:
    exit_code: int
    summary: dict
    out_dir: Path


def simulate(cfg: RunConfig, out_dir: Optional[Path] = None) -> RunResult:
    """Evolve the configured run and write timeseries.csv, snapshots/ and summary.json."""
    out = Path(out_dir if out_dir is not None else cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    params = cfg.params.to_params()
    grid = cfg.grid.to_grid()
    ctrl = cfg.time.to_control()
    u0, y0, support = initial_data(cfg, grid, params)
    s0 = State(0.0, u0, grid, params)

    names = list(cfg.monitors)
    setup = MonitorSetup(initial=s0, y0=y0, support=support)
    monitors, flows = build_monitors(names, setup)
    columns = BASE_COLUMNS + monitor_columns(names)

    snap_dir = out / "snapshots"
    if cfg.output.snapshots:
        snap_dir.mkdir(exist_ok=True)
    rows = []
    n_reports = [0]

    def on_report(rep, state):
        idx = n_reports[0]
        n_reports[0] += 1
        rows.append(rep.values | {"t": rep.t, "step": rep.step, "dt": rep.dt})
        if cfg.output.snapshots and idx % cfg.output.snapshot_every == 0:
            write_snapshot(snap_dir / f"u_{idx:04d}.csv", state)

    started = time.perf_counter()
    outcome = evolve(
        s0,
        cfg.time.t_end,
        ctrl,
        monitors=monitors,
        sample_interval=cfg.time.sample_interval,
        flows=flows,
        on_report=on_report,
    )
    wall = time.perf_counter() - started

    _write_csv(
        out / "timeseries.csv",
        columns,
        ([fmt(r.get(c)) for c in columns] for r in rows),
    )

    verdicts = [v.as_dict() for v in classify_global(params, y0, grid)]
    verdicts.append(classify_propagation(params, support).as_dict())
    blowup = None
    if outcome.blowup is not None:
        b = outcome.blowup
        blowup = {"t": b.t, "linf_ux": b.linf_ux, "linf_u": b.linf_u, "reason": b.reason}
    code = exit_code_for(outcome.status)
    summary = {
        "config": cfg.dump(),
        "reduction": classify_reduction(params).value,
        "status": outcome.status.value,
        "exit_code": code,
        "t_final": outcome.state.t,
        "final_norms": basic_norms(outcome.state),
        "max_linf_u": outcome.max_linf_u,
        "max_linf_ux": outcome.max_linf_ux,
        "blowup": blowup,
        "degenerate_flow": outcome.degenerate_flow,
        "monitors": worst_values(names, rows),
        "verdicts": verdicts,
        "steps": outcome.steps,
        "samples": len(rows),
        "wall_clock_s": wall,
    }
    summary = _jsonable(summary)
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    log.info("%s after %d steps (t=%g)", outcome.status.value, outcome.steps, outcome.state.t)
    return RunResult(code, summary, out)
