"""Theorem-condition classification and runtime verification quantities.

Everything here is a pure function of a State (or a series of reports).
Checks whose hypotheses do not hold raise InapplicableError instead of
returning a vacuous pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import trapezoid

from .core import Grid, ModelParams, State
from .spectral import lp_norm

SIGN_TOL = 1e-12


class InapplicableError(ValueError):
    """The hypotheses of the requested check do not hold for these parameters or data."""


class SupportEscapeError(RuntimeError):
    """The momentum density reaches the periodic boundary; the domain is too small."""


def _isclose(a, b):
    return math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-12)


@dataclass(frozen=True)
class TheoremVerdict:
    theorem: str
    clauses: dict
    thresholds: dict = field(default_factory=dict)

    @property
    def hypotheses_hold(self) -> bool:
        return all(self.clauses.values())

    def as_dict(self):
        return {
            "theorem": self.theorem,
            "hypotheses_hold": self.hypotheses_hold,
            "clauses": dict(self.clauses),
            "thresholds": dict(self.thresholds),
        }


def threshold_3_1(p: ModelParams) -> float:
    """Global-existence bound (2^{N+1} lambda / |N - 2 beta|)^{1/N} on ||y0||_L2."""
    if _isclose(p.beta, p.N / 2):
        raise InapplicableError("beta = N/2: small-data threshold undefined")
    if p.lam <= 0:
        raise InapplicableError("lambda = 0: small-data threshold undefined")
    return (2.0 ** (p.N + 1) * p.lam / abs(p.N - 2 * p.beta)) ** (1.0 / p.N)


def sign_definite(y0, tol: float = SIGN_TOL) -> int:
    """+1 if y0 >= 0, -1 if y0 <= 0 (up to tol * max|y0|), 0 otherwise; +1 for y0 == 0."""
    scale = float(np.max(np.abs(y0)))
    if np.min(y0) >= -tol * scale:
        return 1
    if np.max(y0) <= tol * scale:
        return -1
    return 0


def classify_global(p: ModelParams, y0, grid: Grid) -> list[TheoremVerdict]:
    scale = float(np.max(np.abs(y0)))
    nonzero = scale > 0 and bool(np.any(np.abs(y0) > SIGN_TOL * scale))
    beta_ok = not _isclose(p.beta, p.N / 2)
    clauses = {"beta_not_N_over_2": beta_ok, "y0_nonzero": nonzero, "lambda_positive": p.lam > 0}
    thresholds = {}
    if beta_ok and p.lam > 0:
        thr = threshold_3_1(p)
        norm = lp_norm(y0, 2, grid.dx)
        thresholds = {"threshold_3_1": thr, "l2_y0": norm}
        clauses["l2_y0_below_threshold"] = norm <= thr
    else:
        clauses["l2_y0_below_threshold"] = False
    thm31 = TheoremVerdict("Thm3.1", clauses, thresholds)

    thm32 = TheoremVerdict(
        "Thm3.2",
        {
            "y0_sign_definite": sign_definite(y0) != 0,
            "beta_is_N_plus_1_or_N_over_2": _isclose(p.beta, p.N + 1) or _isclose(p.beta, p.N / 2),
        },
    )
    return [thm31, thm32]


def propagation_hypotheses(p: ModelParams) -> bool:
    odd_balanced = _isclose(p.beta, p.N) and p.N % 2 == 1
    ch_family = p.N == 1 and 0.0 <= p.beta <= 3.0
    return odd_balanced or ch_family


def classify_propagation(p: ModelParams, support: Optional[tuple]) -> TheoremVerdict:
    return TheoremVerdict(
        "Thm4.1",
        {
            "u0_compactly_supported": support is not None,
            "beta_eq_N_odd_or_N1_beta_in_0_3": propagation_hypotheses(p),
        },
        {"support": list(support)} if support is not None else {},
    )


def h1_decay_residual(s: State, u0, p: ModelParams) -> float:
    """|  ||u||_H1^2 - e^{-2 lambda t} ||u0||_H1^2 | / ||u0||_H1^2 (beta = N+1 only)."""
    if not _isclose(p.beta, p.N + 1):
        raise InapplicableError("H1 decay law needs beta = N + 1")
    ws = s.workspace
    e0 = ws.sobolev_norm(u0, 1) ** 2
    e = ws.sobolev_norm(s.u, 1) ** 2
    return abs(e - math.exp(-2 * p.lam * s.t) * e0) / e0


def decay_envelope(t: float, l2_y0: float, p: ModelParams) -> float:
    """Upper bound on ||y(t)||_L2^N under the small-data hypotheses."""
    if _isclose(p.beta, p.N / 2) or p.lam <= 0 or l2_y0 <= 0:
        raise InapplicableError("decay envelope needs beta != N/2, lambda > 0, y0 != 0")
    bracket = l2_y0 ** (-p.N) - abs(p.N - 2 * p.beta) / (2.0 ** (p.N + 1) * p.lam)
    if bracket <= 0:
        raise InapplicableError("||y0||_L2 exceeds the small-data threshold")
    return math.exp(-p.N * p.lam * t) / bracket


def decay_envelope_check(s: State, y0, p: ModelParams) -> float:
    """Margin envelope - ||y||_L2^N; nonnegative when the envelope holds."""
    dx = s.grid.dx
    env = decay_envelope(s.t, lp_norm(y0, 2, dx), p)
    return env - lp_norm(s.y, 2, dx) ** p.N


def slope_dominance_check(s: State, sign_tol: float = 1e-6) -> float:
    """max_j(|u_x| - u), meaningful when y >= 0 (up to sign_tol * max|y|)."""
    y = s.y
    if np.min(y) < -sign_tol * float(np.max(np.abs(y))):
        raise InapplicableError("slope dominance needs y >= 0")
    return float(np.max(np.abs(s.ux) - s.u))


@dataclass(frozen=True)
class TailReport:
    t: float
    E_plus: float
    E_minus: float
    support_bounds: tuple
    right_tail_shape_error: Optional[float]
    left_tail_shape_error: Optional[float]
    right_fit_const: Optional[float]
    left_fit_const: Optional[float]
    F_value: float
    # support estimated by thresholding |y|; a cross-check of the flowed bounds only
    threshold_bounds: Optional[tuple] = None
    # int e^{+-z} |y| over the window, the scale below which E_+- is quadrature noise
    E_plus_scale: float = 0.0
    E_minus_scale: float = 0.0

    @property
    def right_const_error(self) -> Optional[float]:
        return _const_error(self.right_fit_const, self.E_plus, self.E_plus_scale)

    @property
    def left_const_error(self) -> Optional[float]:
        return _const_error(self.left_fit_const, self.E_minus, self.E_minus_scale)


NOISE_REL = 1e-8


def _const_error(fit, E, scale):
    """|fit - E/2| / |E/2|, or None while E is indistinguishable from zero."""
    if fit is None or abs(E) <= NOISE_REL * scale:
        return None
    return abs(fit - E / 2) / abs(E / 2)


def _exp_fit(x, u, sign):
    """Least-squares c for u ~ c e^{sign x}; returns (c, relative L2 misfit)."""
    basis = np.exp(sign * x)
    c = float(np.dot(u, basis) / np.dot(basis, basis))
    model = c * basis
    denom = np.linalg.norm(model)
    if denom == 0:
        return c, None
    return c, float(np.linalg.norm(u - model) / denom)


def f_value(s: State) -> float:
    """Quadrature of F = b/(N+1) int e^z u^{N+1} + (3N-b)/2 int e^z u^{N-1} u_z^2
    + (N-b)(N-1)/2 int e^z u^{N-2} u_z^3 over the periodic cell."""
    p = s.params
    u, ux, x, dx = s.u, s.ux, s.grid.x, s.grid.dx
    N, b = p.N, p.beta
    un1 = u ** (N - 1)
    integrand = b / (N + 1) * un1 * u * u + (3 * N - b) / 2 * un1 * ux * ux
    cubic = (N - b) * (N - 1) / 2
    if cubic != 0:
        integrand = integrand + cubic * u ** (N - 2) * ux**3
    return float(dx * np.sum(np.exp(x) * integrand))


def f_positivity(s: State, p: ModelParams) -> float:
    if not propagation_hypotheses(p):
        raise InapplicableError("F >= 0 needs beta = N with N odd, or N = 1 with 0 <= beta <= 3")
    return f_value(s)


def tail_amplitudes(
    s: State,
    support: tuple,
    margin_x: float = 1.0,
    margin_cells: int = 2,
    support_tol: float = 1e-3,
) -> TailReport:
    """E_+/- over the flowed support window and exponential-tail fits outside it.

    The tails are fitted as u ~ c e^{-x} on (b_t + m, L - m) and u ~ c e^{x}
    on (-L + m, a_t - m), m = margin_x + margin_cells*dx. The shape errors are
    relative L2 misfits of those fits over their windows.
    """
    grid = s.grid
    x, dx, L = grid.x, grid.dx, grid.half_length
    a_t, b_t = support
    if not (-L < a_t < b_t < L):
        raise SupportEscapeError(f"support ({a_t}, {b_t}) left the periodic cell")
    y, u = s.y, s.u
    ymax = float(np.max(np.abs(y)))
    m = margin_x + margin_cells * dx
    edge = np.abs(x) >= L - m
    if ymax > 0 and np.max(np.abs(y[edge])) > support_tol * ymax:
        raise SupportEscapeError("momentum density reaches the periodic boundary")

    inside = (x >= a_t) & (x <= b_t)
    E_plus = E_minus = E_plus_scale = E_minus_scale = 0.0
    if inside.sum() > 1:
        xs, ys = x[inside], y[inside]
        E_plus = float(trapezoid(np.exp(xs) * ys, dx=dx))
        E_minus = float(trapezoid(np.exp(-xs) * ys, dx=dx))
        E_plus_scale = float(trapezoid(np.exp(xs) * np.abs(ys), dx=dx))
        E_minus_scale = float(trapezoid(np.exp(-xs) * np.abs(ys), dx=dx))

    right = (x > b_t + m) & (x < L - m)
    left = (x < a_t - m) & (x > -L + m)
    r_c = r_err = l_c = l_err = None
    if ymax > 0 and right.sum() > 1:
        r_c, r_err = _exp_fit(x[right], u[right], -1.0)
    if ymax > 0 and left.sum() > 1:
        l_c, l_err = _exp_fit(x[left], u[left], 1.0)

    thr = None
    if ymax > 0:
        idx = np.nonzero(np.abs(y) > support_tol * ymax)[0]
        thr = (float(x[idx[0]]), float(x[idx[-1]]))
    return TailReport(
        t=s.t,
        E_plus=E_plus,
        E_minus=E_minus,
        support_bounds=(float(a_t), float(b_t)),
        right_tail_shape_error=r_err,
        left_tail_shape_error=l_err,
        right_fit_const=r_c,
        left_fit_const=l_c,
        F_value=f_value(s),
        threshold_bounds=thr,
        E_plus_scale=E_plus_scale,
        E_minus_scale=E_minus_scale,
    )


@dataclass(frozen=True)
class TailMonotonicity:
    # min over samples of d/dt[e^{(lambda-k)t} E_+]; expected >= -tol
    worst_plus_rate: float
    # max over samples of d/dt[e^{(lambda+k)t} E_-]; expected <= +tol
    worst_minus_rate: float


def tail_monotonicity_check(series: Sequence[TailReport], p: ModelParams) -> TailMonotonicity:
    if len(series) < 2:
        raise ValueError("need at least two tail reports")
    if not propagation_hypotheses(p):
        raise InapplicableError("tail monotonicity needs the tail-propagation hypotheses")
    t = np.array([r.t for r in series])
    ep = np.exp((p.lam - p.k) * t) * np.array([r.E_plus for r in series])
    em = np.exp((p.lam + p.k) * t) * np.array([r.E_minus for r in series])
    dt = np.diff(t)
    return TailMonotonicity(
        worst_plus_rate=float(np.min(np.diff(ep) / dt)),
        worst_minus_rate=float(np.max(np.diff(em) / dt)),
    )
