"""Lagrangian characteristics q(t, x) and their gradient q_x(t, x).

q solves q_t = u^N(t, q) + k, q(0, x) = x, and q_x solves
q_x' = N u^{N-1}(t, q) u_x(t, q) q_x, q_x(0, x) = 1, whose solution is
q_x = exp(int_0^t N u^{N-1} u_x ds) along the trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .core import ModelParams, State
from .spectral import SpectralWorkspace


@dataclass(frozen=True, eq=False)
class FlowMap:
    labels: np.ndarray
    q: np.ndarray
    qx: np.ndarray
    t: float = 0.0
    # set once any q_x <= 0 has been produced (discretization failure or breaking)
    degenerate: bool = False

    @classmethod
    def start(cls, labels, t: float = 0.0) -> "FlowMap":
        labels = np.asarray(labels, dtype=float).copy()
        return cls(labels=labels, q=labels.copy(), qx=np.ones_like(labels), t=t)

    def __len__(self):
        return self.labels.size


def _velocity(ws: SpectralWorkspace, params: ModelParams, uh, q, qx):
    u = ws.interpolate_spectrum(uh, q)
    ux = ws.interpolate_spectrum(uh, q, derivative=1)
    N = params.N
    un1 = u ** (N - 1)
    return un1 * u + params.k, N * un1 * ux * qx


def advance_flow(
    fm: FlowMap,
    stages: Sequence[np.ndarray],
    dt: float,
    ws: SpectralWorkspace,
    params: ModelParams,
) -> FlowMap:
    """Advance (q, q_x) one RK4 step using the field solver's four stage fields.

    ``stages`` are the fields at which the solver evaluated its right-hand
    side (u_n, the two half-step stages and the full-step stage), so the
    particle update is the same Runge-Kutta step applied to the coupled system.
    """
    if len(stages) != 4:
        raise ValueError("expected the four RK4 stage fields")
    spectra = [ws.fft(s) for s in stages]
    q, qx = fm.q, fm.qx
    k1q, k1g = _velocity(ws, params, spectra[0], q, qx)
    k2q, k2g = _velocity(ws, params, spectra[1], q + 0.5 * dt * k1q, qx + 0.5 * dt * k1g)
    k3q, k3g = _velocity(ws, params, spectra[2], q + 0.5 * dt * k2q, qx + 0.5 * dt * k2g)
    k4q, k4g = _velocity(ws, params, spectra[3], q + dt * k3q, qx + dt * k3g)
    q_new = q + dt / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q)
    qx_new = qx + dt / 6.0 * (k1g + 2 * k2g + 2 * k3g + k4g)
    degenerate = fm.degenerate or bool(np.any(qx_new <= 0))
    return replace(fm, q=q_new, qx=qx_new, t=fm.t + dt, degenerate=degenerate)


def lagrangian_invariant_residual(fm: FlowMap, s: State, y0) -> float:
    """max_i |y(t, q_i) q_x,i^{beta/N} - y0(x_i) e^{-lambda t}| / (max|y0| + 1)."""
    ws = s.workspace
    p = s.params
    if np.any(fm.qx <= 0):
        return float("inf")
    y_at_q = ws.interpolate(s.y, fm.q)
    y0_at_labels = ws.interpolate(y0, fm.labels)
    lhs = y_at_q * fm.qx ** p.beta_over_n
    rhs = y0_at_labels * np.exp(-p.lam * s.t)
    return float(np.max(np.abs(lhs - rhs)) / (np.max(np.abs(y0)) + 1.0))
