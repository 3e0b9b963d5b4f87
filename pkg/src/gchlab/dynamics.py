"""Right-hand sides, time stepping and the blow-up detector.

The solver evolves the nonlocal u-form

    u_t + (u^N + k) u_x = -d/dx (1 - d^2/dx^2)^{-1} h - (1 - d^2/dx^2)^{-1} g

with h and g from :func:`source_h` and :func:`source_g`. The local momentum
form y_t = -(u^N + k) y_x - (beta/N) y (u^N)_x - lambda y is kept as an
independent cross-check.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .characteristics import FlowMap, advance_flow
from .core import ModelParams, NonFiniteFieldError, State
from .spectral import SpectralWorkspace

log = logging.getLogger(__name__)

CFL_EPS = 1e-14


def _check_finite(arr, what):
    if not np.all(np.isfinite(arr)):
        raise NonFiniteFieldError(f"non-finite values in {what}")
    return arr


def source_h(u, ux, p: ModelParams, ws: SpectralWorkspace):
    """h = beta/(N+1) u^{N+1} + (3N-beta)/2 u^{N-1} u_x^2 - lambda u_x, dealiased."""
    c1, c2 = p.h_coeffs
    un1 = u ** (p.N - 1)
    h = c1 * un1 * u * u + c2 * un1 * ux * ux - p.lam * ux
    return ws.dealias(h)


def source_g(u, ux, p: ModelParams, ws: SpectralWorkspace):
    """g = (N-1)(beta-N)/2 u^{N-2} u_x^3 + lambda u, dealiased.

    The cubic term is skipped when its coefficient vanishes, before any
    u^{N-2} power is formed.
    """
    g = p.lam * u
    if p.g_cubic_active:
        g = g + p.g_coeff * u ** (p.N - 2) * ux**3
    return ws.dealias(g)


@dataclass(frozen=True, eq=False)
class RhsTerms:
    transport: np.ndarray
    h: np.ndarray
    g: np.ndarray
    nonlocal_: np.ndarray
    total: np.ndarray


def rhs_nonlocal(s: State) -> RhsTerms:
    ws, p, u = s.workspace, s.params, s.u
    ux = s.ux
    transport = -ws.dealias(u**p.N * ux) - p.k * ux
    h = source_h(u, ux, p, ws)
    g = source_g(u, ux, p, ws)
    nonlocal_ = -ws.derivative(ws.helmholtz_solve(h), 1) - ws.helmholtz_solve(g)
    total = _check_finite(transport + nonlocal_, "rhs")
    return RhsTerms(transport=transport, h=h, g=g, nonlocal_=nonlocal_, total=total)


def rhs_local_y(s: State):
    """Time derivative of y = u - u_xx from the momentum form."""
    ws, p, u = s.workspace, s.params, s.u
    y = s.y
    yx = ws.derivative(y, 1)
    un1 = u ** (p.N - 1)
    un_x = p.N * un1 * s.ux
    yt = -(un1 * u + p.k) * yx - p.beta_over_n * y * un_x - p.lam * y
    return _check_finite(ws.dealias(yt), "y-form rhs")


def _rhs_fast(u, p: ModelParams, ws: SpectralWorkspace):
    """rhs_nonlocal(...).total with the products and multipliers fused in Fourier space."""
    uh = ws.fft(u)
    ux = ws.ifft(uh * ws.d1)
    N = p.N
    un1 = u ** (N - 1)
    un = un1 * u
    c1, c2 = p.h_coeffs
    h_nl = c1 * un * u + c2 * un1 * ux * ux
    h_hat = ws.fft(h_nl) - p.lam * ws.d1 * uh
    g_hat = p.lam * uh
    if p.g_cubic_active:
        g_hat = g_hat + ws.fft(p.g_coeff * u ** (N - 2) * ux**3)
    total_hat = (
        -ws.fft(un * ux) * ws.mask
        - p.k * ws.d1 * uh
        - ws.mask * ws.helmholtz * (ws.d1 * h_hat + g_hat)
    )
    return ws.ifft(total_hat)


def energy_balance_residual(s: State) -> float:
    """Residual of d/dt int y^2 = (1 - 2 beta/N) int y^2 (u^N)_x - 2 lambda int y^2.

    The left side is 2 int y y_t with y_t from :func:`rhs_local_y`; the
    absolute residual is normalized by int y^2 + 1.
    """
    p = s.params
    dx = s.grid.dx
    y = s.y
    yt = rhs_local_y(s)
    lhs = 2.0 * dx * np.sum(y * yt)
    un_x = p.N * s.u ** (p.N - 1) * s.ux
    y2 = dx * np.sum(y * y)
    rhs = (1.0 - 2.0 * p.beta_over_n) * dx * np.sum(y * y * un_x) - 2.0 * p.lam * y2
    return float(abs(lhs - rhs) / (y2 + 1.0))


@dataclass(frozen=True)
class StepControl:
    cfl: float = 0.3
    dt_max: float = 0.01
    dt_min: float = 1e-10
    blowup_slope_factor: float = 1e4

    def __post_init__(self):
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl must lie in (0, 1]")
        if not 0 < self.dt_min < self.dt_max:
            raise ValueError("need 0 < dt_min < dt_max")
        if not self.blowup_slope_factor > 1:
            raise ValueError("blowup_slope_factor must be > 1")


def cfl_dt(s: State, c: StepControl) -> float:
    """min(dt_max, cfl dx / max_j(|u_j|^N + |k| + eps)); the speed is that of the characteristics."""
    speed = np.max(np.abs(s.u) ** s.params.N) + abs(s.params.k) + CFL_EPS
    return float(min(c.dt_max, c.cfl * s.grid.dx / speed))


def rk4_stages(u, dt: float, p: ModelParams, ws: SpectralWorkspace):
    """One classical RK4 step; returns the dealiased new field and the four stage fields."""
    k1 = _rhs_fast(u, p, ws)
    u2 = u + 0.5 * dt * k1
    k2 = _rhs_fast(u2, p, ws)
    u3 = u + 0.5 * dt * k2
    k3 = _rhs_fast(u3, p, ws)
    u4 = u + dt * k3
    k4 = _rhs_fast(u4, p, ws)
    new = ws.dealias(u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
    return _check_finite(new, "RK4 update"), (u, u2, u3, u4)


def step_rk4(s: State, dt: float) -> State:
    if not dt > 0:
        raise ValueError("dt must be > 0")
    new, _ = rk4_stages(s.u, dt, s.params, s.workspace)
    return s.replace(t=s.t + dt, u=new)


class Status(enum.Enum):
    REACHED_FINAL_TIME = "ReachedFinalTime"
    BLOWUP_DETECTED = "BlowupDetected"
    STEP_UNDERFLOW = "StepUnderflow"


@dataclass(frozen=True)
class BlowupInfo:
    t: float
    linf_ux: float
    linf_u: float
    reason: str  # "slope", "amplitude" or "non-finite"


@dataclass
class MonitorReport:
    t: float
    step: int
    dt: float
    values: dict = field(default_factory=dict)


@dataclass
class EvolveContext:
    """Read-only run information handed to monitors."""

    initial: State
    flows: Mapping[str, FlowMap]
    ws: SpectralWorkspace


# A monitor maps (state, context) to named values; None marks "inapplicable".
Monitor = Callable[[State, EvolveContext], Mapping[str, Optional[float]]]


@dataclass
class EvolveOutcome:
    status: Status
    state: State
    reports: list
    steps: int
    blowup: Optional[BlowupInfo] = None
    flows: dict = field(default_factory=dict)
    max_linf_ux: float = 0.0
    max_linf_u: float = 0.0
    degenerate_flow: bool = False


def sup_norms(s: State) -> tuple[float, float]:
    return float(np.max(np.abs(s.u))), float(np.max(np.abs(s.ux)))


def basic_norms(s: State) -> dict:
    ws = s.workspace
    linf_u, linf_ux = sup_norms(s)
    return {
        "linf_u": linf_u,
        "linf_ux": linf_ux,
        "l2_u": ws.sobolev_norm(s.u, 0),
        "h1_u": ws.sobolev_norm(s.u, 1),
        "l2_y": ws.lp_norm(s.y, 2),
    }


def evolve(
    s0: State,
    t_end: float,
    ctrl: StepControl = StepControl(),
    monitors: Sequence[Monitor] = (),
    sample_interval: Optional[float] = None,
    flows: Optional[Mapping[str, FlowMap]] = None,
    on_report: Optional[Callable[[MonitorReport, State], None]] = None,
) -> EvolveOutcome:
    """Step from ``s0`` to ``t_end`` with CFL-limited RK4, watching for blow-up.

    Steps are shortened to land exactly on every multiple of
    ``sample_interval`` (and on ``t_end``), where the monitors are evaluated.
    The detector fires when sup|u_x| or sup|u| exceeds
    ``ctrl.blowup_slope_factor * max(1, initial value)`` or when the update
    becomes non-finite; a CFL step below ``dt_min`` ends the run as
    StepUnderflow instead.
    """
    if not t_end > s0.t:
        raise ValueError("t_end must exceed the initial time")
    if sample_interval is not None and not sample_interval > 0:
        raise ValueError("sample_interval must be > 0")
    p, ws = s0.params, s0.workspace
    flows = dict(flows or {})
    ctx = EvolveContext(initial=s0, flows=flows, ws=ws)
    reports: list[MonitorReport] = []

    def emit(state, step, dt):
        values = basic_norms(state)
        for mon in monitors:
            values.update(mon(state, ctx))
        rep = MonitorReport(t=state.t, step=step, dt=dt, values=values)
        reports.append(rep)
        if on_report is not None:
            on_report(rep, state)

    u0_sup, ux0_sup = sup_norms(s0)
    slope_limit = ctrl.blowup_slope_factor * max(1.0, ux0_sup)
    amp_limit = ctrl.blowup_slope_factor * max(1.0, u0_sup)
    span = t_end - s0.t
    snap = 1e-12 * max(1.0, abs(t_end))
    n_samples = 0
    if sample_interval is not None:
        n_samples = int(np.floor(span / sample_interval + 1e-9))

    def next_target(t):
        if sample_interval is not None:
            i = int(np.floor((t - s0.t) / sample_interval + 1e-9)) + 1
            if i <= n_samples:
                tgt = s0.t + i * sample_interval
                if tgt < t_end - snap:
                    return tgt, True
        return t_end, True

    emit(s0, 0, 0.0)
    state = s0
    step = 0
    max_u, max_ux = u0_sup, ux0_sup
    status = Status.REACHED_FINAL_TIME
    blowup = None
    degenerate = False
    dt = 0.0
    while state.t < t_end - snap:
        dt_cfl = cfl_dt(state, ctrl)
        if dt_cfl < ctrl.dt_min:
            status = Status.STEP_UNDERFLOW
            log.warning("step underflow at t=%g (dt=%g)", state.t, dt_cfl)
            break
        target, _ = next_target(state.t)
        dt = dt_cfl
        on_sample = False
        if state.t + dt >= target - snap:
            dt = target - state.t
            on_sample = True
        try:
            new_u, stages = rk4_stages(state.u, dt, p, ws)
        except NonFiniteFieldError:
            status = Status.BLOWUP_DETECTED
            blowup = BlowupInfo(t=state.t, linf_ux=max_ux, linf_u=max_u, reason="non-finite")
            break
        for name, fm in flows.items():
            flows[name] = advance_flow(fm, stages, dt, ws, p)
            degenerate = degenerate or flows[name].degenerate
        t_new = target if on_sample else state.t + dt
        state = state.replace(t=t_new, u=new_u)
        step += 1
        sup_u, sup_ux = sup_norms(state)
        max_u, max_ux = max(max_u, sup_u), max(max_ux, sup_ux)
        if sup_ux > slope_limit or sup_u > amp_limit:
            status = Status.BLOWUP_DETECTED
            reason = "slope" if sup_ux > slope_limit else "amplitude"
            blowup = BlowupInfo(t=state.t, linf_ux=sup_ux, linf_u=sup_u, reason=reason)
            emit(state, step, dt)
            break
        if on_sample:
            emit(state, step, dt)

    return EvolveOutcome(
        status=status,
        state=state,
        reports=reports,
        steps=step,
        blowup=blowup,
        flows=flows,
        max_linf_ux=max_ux,
        max_linf_u=max_u,
        degenerate_flow=degenerate,
    )
