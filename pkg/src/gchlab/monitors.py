"""Named run-time monitors.

A monitor turns the current State into a few named timeseries columns. A
value of None means the monitor is inapplicable for this run (its hypotheses
fail), which is reported as such rather than as a pass.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .characteristics import FlowMap, lagrangian_invariant_residual
from .core import State
from .diagnostics import (
    InapplicableError,
    SupportEscapeError,
    decay_envelope,
    f_positivity,
    h1_decay_residual,
    slope_dominance_check,
    tail_amplitudes,
)
from .dynamics import Monitor, _rhs_fast, energy_balance_residual, rhs_local_y
from .spectral import lp_norm

log = logging.getLogger(__name__)

PARTICLES = "particles"
SUPPORT = "support"
N_PARTICLES = 64


@dataclass(frozen=True)
class MonitorSetup:
    initial: State
    y0: np.ndarray
    # compact support [a, b] of u0 when known
    support: Optional[tuple] = None


@dataclass(frozen=True)
class MonitorSpec:
    name: str
    # (column, reducer) with reducer "max" or "min" picking the worst sample
    columns: tuple
    build: Callable[[MonitorSetup], Monitor]
    flows: Callable[[MonitorSetup], dict] = lambda setup: {}


def _inapplicable(columns):
    return {c: None for c, _ in columns}


def _guarded(columns, fn):
    """Wrap fn so InapplicableError becomes a row of None values."""

    def monitor(s, ctx):
        try:
            return fn(s, ctx)
        except InapplicableError:
            return _inapplicable(columns)

    return monitor


def _energy_balance(setup):
    return lambda s, ctx: {"energy_balance_residual": energy_balance_residual(s)}


def _form_equivalence(setup):
    def monitor(s, ctx):
        ws = s.workspace
        yt = rhs_local_y(s)
        diff = ws.momentum(_rhs_fast(s.u, s.params, ws)) - yt
        res = lp_norm(diff, 2, s.grid.dx) / (lp_norm(yt, 2, s.grid.dx) + 1.0)
        return {"form_equivalence_residual": res}

    return monitor


def _h1_decay(setup):
    u0 = setup.initial.u
    cols = SPECS["h1_decay"].columns
    return _guarded(cols, lambda s, ctx: {"h1_decay_residual": h1_decay_residual(s, u0, s.params)})


def _lagrangian(setup):
    y0 = setup.y0
    return lambda s, ctx: {
        "lagrangian_residual": lagrangian_invariant_residual(ctx.flows[PARTICLES], s, y0)
    }


def _particle_flows(setup):
    L = setup.initial.grid.half_length
    return {PARTICLES: FlowMap.start(np.linspace(-L / 2, L / 2, N_PARTICLES))}


def _lp_decay(setup):
    p = setup.initial.params
    dx = setup.initial.grid.dx
    # the law holds for the exponent N/beta, which must be positive
    if p.beta <= 0:
        return lambda s, ctx: {"lp_decay_residual": None}
    exponent = p.N / p.beta
    ref = lp_norm(setup.y0, exponent, dx)

    def monitor(s, ctx):
        if ref == 0:
            return {"lp_decay_residual": None}
        now = lp_norm(s.y, exponent, dx)
        return {"lp_decay_residual": abs(now - math.exp(-p.lam * s.t) * ref) / ref}

    return monitor


def _l2_decay(setup):
    p = setup.initial.params
    dx = setup.initial.grid.dx
    ref = lp_norm(setup.y0, 2, dx)
    applies = math.isclose(p.N, 2 * p.beta) and ref > 0

    def monitor(s, ctx):
        if not applies:
            return {"l2_decay_residual": None}
        now = lp_norm(s.y, 2, dx)
        return {"l2_decay_residual": abs(now - math.exp(-p.lam * s.t) * ref) / ref}

    return monitor


def _envelope(setup):
    p = setup.initial.params
    dx = setup.initial.grid.dx
    l2_y0 = lp_norm(setup.y0, 2, dx)

    def monitor(s, ctx):
        try:
            env = decay_envelope(s.t, l2_y0, p)
        except InapplicableError:
            return {"envelope_margin": None, "envelope_margin_rel": None}
        margin = env - lp_norm(s.y, 2, dx) ** p.N
        return {"envelope_margin": margin, "envelope_margin_rel": margin / env}

    return monitor


def _slope_dominance(setup):
    cols = SPECS["slope_dominance"].columns
    return _guarded(cols, lambda s, ctx: {"slope_dominance": slope_dominance_check(s)})


def _sign(setup):
    scale = float(np.max(np.abs(setup.y0)))

    def monitor(s, ctx):
        if scale == 0:
            return {"min_y_rel": None}
        return {"min_y_rel": float(np.min(s.y)) / scale}

    return monitor


_TAIL_COLUMNS = (
    ("E_plus", "min"),
    ("E_minus", "max"),
    ("support_a", None),
    ("support_b", None),
    ("tail_shape_right", "max"),
    ("tail_shape_left", "max"),
    ("tail_const_right", "max"),
    ("tail_const_left", "max"),
)


def _tails(setup):
    if setup.support is None:
        return lambda s, ctx: _inapplicable(_TAIL_COLUMNS)
    warned = []

    def monitor(s, ctx):
        fm = ctx.flows[SUPPORT]
        try:
            r = tail_amplitudes(s, (float(fm.q[0]), float(fm.q[1])))
        except SupportEscapeError as exc:
            if not warned:
                log.warning("tails monitor disabled: %s", exc)
                warned.append(True)
            return _inapplicable(_TAIL_COLUMNS)
        return {
            "E_plus": r.E_plus,
            "E_minus": r.E_minus,
            "support_a": r.support_bounds[0],
            "support_b": r.support_bounds[1],
            "tail_shape_right": r.right_tail_shape_error,
            "tail_shape_left": r.left_tail_shape_error,
            "tail_const_right": r.right_const_error,
            "tail_const_left": r.left_const_error,
        }

    return monitor


def _support_flows(setup):
    if setup.support is None:
        return {}
    return {SUPPORT: FlowMap.start(list(setup.support))}


def _f_positivity(setup):
    cols = SPECS["f_positivity"].columns
    return _guarded(cols, lambda s, ctx: {"F_value": f_positivity(s, s.params)})


SPECS: dict[str, MonitorSpec] = {
    spec.name: spec
    for spec in (
        MonitorSpec("energy_balance", (("energy_balance_residual", "max"),), _energy_balance),
        MonitorSpec("form_equivalence", (("form_equivalence_residual", "max"),), _form_equivalence),
        MonitorSpec("h1_decay", (("h1_decay_residual", "max"),), _h1_decay),
        MonitorSpec("lagrangian", (("lagrangian_residual", "max"),), _lagrangian, _particle_flows),
        MonitorSpec("lp_decay", (("lp_decay_residual", "max"),), _lp_decay),
        MonitorSpec("l2_decay", (("l2_decay_residual", "max"),), _l2_decay),
        MonitorSpec(
            "envelope", (("envelope_margin", "min"), ("envelope_margin_rel", "min")), _envelope
        ),
        MonitorSpec("slope_dominance", (("slope_dominance", "max"),), _slope_dominance),
        MonitorSpec("sign", (("min_y_rel", "min"),), _sign),
        MonitorSpec("tails", _TAIL_COLUMNS, _tails, _support_flows),
        MonitorSpec("f_positivity", (("F_value", "min"),), _f_positivity),
    )
}

MONITOR_NAMES = tuple(SPECS)


def build_monitors(names, setup: MonitorSetup):
    """Monitors and starting flows for the named monitor list, in the given order."""
    monitors, flows = [], {}
    for name in names:
        try:
            spec = SPECS[name]
        except KeyError:
            raise ValueError(f"unknown monitor {name!r}") from None
        monitors.append(spec.build(setup))
        flows.update(spec.flows(setup))
    return monitors, flows


def monitor_columns(names):
    return [c for name in names for c, _ in SPECS[name].columns]


def worst_values(names, rows):
    """Per-column worst value over the report rows, or "inapplicable" when never defined."""
    out = {}
    for name in names:
        for col, reducer in SPECS[name].columns:
            vals = [r[col] for r in rows if r.get(col) is not None]
            if not vals:
                out[col] = "inapplicable"
            elif reducer == "max":
                out[col] = max(vals)
            elif reducer == "min":
                out[col] = min(vals)
            else:
                out[col] = vals[-1]
    return out
