import math

import numpy as np
import pytest

from gchlab.core import Grid, ModelParams, State
from gchlab.diagnostics import (
    InapplicableError,
    SupportEscapeError,
    TailReport,
    classify_global,
    classify_propagation,
    decay_envelope,
    decay_envelope_check,
    f_positivity,
    f_value,
    h1_decay_residual,
    sign_definite,
    slope_dominance_check,
    tail_amplitudes,
    tail_monotonicity_check,
    threshold_3_1,
)
from gchlab.initial import bump, from_momentum, gaussian
from gchlab.spectral import lp_norm


def test_threshold_values():
    assert threshold_3_1(ModelParams(1, 2, 0, 1)) == 4 / 3
    assert threshold_3_1(ModelParams(2, 3, 0, 2)) == 2.0


@pytest.mark.parametrize("p", [ModelParams(1, 0.5, 0, 1), ModelParams(1, 2, 0, 0)])
def test_threshold_undefined(p):
    with pytest.raises(InapplicableError):
        threshold_3_1(p)


def test_zero_momentum_fails_nonzero_clause(grid256):
    thm31, thm32 = classify_global(ModelParams(1, 2, 0, 1), np.zeros(grid256.nx), grid256)
    assert not thm31.clauses["y0_nonzero"]
    assert not thm31.hypotheses_hold


def test_small_positive_bump_satisfies_both_global_theorems():
    g = Grid(20.0, 1024)
    _, y0 = from_momentum(g, bump(g.x, 1.0, -3, 3), l2_norm=1.0)
    thm31, thm32 = classify_global(ModelParams(1, 2, 0, 1), y0, g)
    assert thm31.hypotheses_hold
    assert thm31.thresholds["threshold_3_1"] == 4 / 3
    assert thm31.thresholds["l2_y0"] == pytest.approx(1.0)
    assert thm32.hypotheses_hold
    assert thm32.as_dict()["clauses"]["beta_is_N_plus_1_or_N_over_2"]


def test_mixed_sign_fails_theorem_32(grid256):
    y0 = np.sin(np.pi * grid256.x / grid256.half_length)
    _, thm32 = classify_global(ModelParams(2, 1, 0, 1), y0, grid256)
    assert not thm32.clauses["y0_sign_definite"]
    assert thm32.clauses["beta_is_N_plus_1_or_N_over_2"]


def test_sign_deadband():
    y = np.array([1.0, 0.5, -1e-13])
    assert sign_definite(y) == 1
    assert sign_definite(-y) == -1
    assert sign_definite(np.array([1.0, -1e-6])) == 0


@pytest.mark.parametrize(
    "N, beta, holds",
    [(1, 1, True), (3, 3, True), (1, 0, True), (1, 3, True), (2, 2, False), (1, 3.5, False), (5, 5, True)],
)
def test_propagation_hypotheses(N, beta, holds):
    assert classify_propagation(ModelParams(N, beta), (-1, 1)).hypotheses_hold is holds


def test_propagation_needs_compact_support():
    v = classify_propagation(ModelParams(1, 1), None)
    assert not v.clauses["u0_compactly_supported"]


def test_h1_decay_residual_exact_law(grid256):
    p = ModelParams(1, 2, 0.3, 0.5)
    u0 = gaussian(grid256.x)
    assert h1_decay_residual(State(0.0, u0, grid256, p), u0, p) == 0
    # a state scaled by e^{-lambda t} obeys the law exactly: norm ratio e^{-1} at t = 1
    s = State(1.0, math.exp(-0.5) * u0, grid256, p)
    assert h1_decay_residual(s, u0, p) < 1e-15
    ws = s.workspace
    assert ws.sobolev_norm(s.u, 1) ** 2 / ws.sobolev_norm(u0, 1) ** 2 == pytest.approx(0.36788, abs=1e-5)


def test_h1_decay_refuses_other_beta(grid256):
    p = ModelParams(1, 3)
    with pytest.raises(InapplicableError):
        h1_decay_residual(State(0.0, gaussian(grid256.x), grid256, p), gaussian(grid256.x), p)


def test_envelope_margin_nonnegative_at_start():
    g = Grid(20.0, 512)
    p = ModelParams(1, 2, 0, 1)
    u0, y0 = from_momentum(g, bump(g.x, 1.0, -3, 3), l2_norm=0.99 * threshold_3_1(p))
    assert decay_envelope_check(State(0.0, u0, g, p), y0, p) >= -1e-12
    u0, y0 = from_momentum(g, bump(g.x, 1.0, -3, 3), l2_norm=1e-3)
    margin = decay_envelope_check(State(0.0, u0, g, p), y0, p)
    assert margin == pytest.approx(1 / (1e3 - 3 / 4) - 1e-3, rel=1e-9)


def test_envelope_inapplicable_above_threshold():
    with pytest.raises(InapplicableError):
        decay_envelope(0.0, 2.0, ModelParams(1, 2, 0, 1))


def test_slope_dominance_on_nonnegative_momentum():
    g = Grid(20.0, 1024)
    u0, y0 = from_momentum(g, bump(g.x, 1.0, -3, 3))
    s = State(0.0, u0, g, ModelParams(1, 2))
    assert slope_dominance_check(s) <= 1e-10 + math.exp(-g.half_length)


def test_slope_dominance_zero_and_mixed(grid256):
    assert slope_dominance_check(State(0.0, np.zeros(grid256.nx), grid256, ModelParams(1, 2))) == 0
    u = np.sin(np.pi * grid256.x / grid256.half_length)
    with pytest.raises(InapplicableError):
        slope_dominance_check(State(0.0, u, grid256, ModelParams(1, 2)))


def test_tail_amplitudes_vanish_for_compact_data():
    g = Grid(10.0, 4096)
    s = State(0.0, bump(g.x, 1.0, -2, 2), g, ModelParams(1, 1, 0.2, 0.3))
    r = tail_amplitudes(s, (-2.0, 2.0))
    l1 = lp_norm(s.y, 1, g.dx)
    assert abs(r.E_plus) <= 1e-8 * l1 and abs(r.E_minus) <= 1e-8 * l1
    assert r.right_const_error is None


def test_tail_amplitudes_of_zero_state(grid256):
    r = tail_amplitudes(State(0.0, np.zeros(grid256.nx), grid256, ModelParams(1, 1)), (-1.0, 1.0))
    assert r.E_plus == 0 and r.E_minus == 0
    assert r.right_tail_shape_error is None and r.left_tail_shape_error is None


def test_tails_of_helmholtz_image_are_exponential():
    # u = G * y for y supported in [-2, 2]: u = (E_+/2) e^{-x} right of the support
    g = Grid(25.0, 4096)
    y = bump(g.x, 1.0, -2, 2)
    u, _ = from_momentum(g, y)
    r = tail_amplitudes(State(0.3, u, g, ModelParams(1, 1)), (-2.0, 2.0))
    assert r.E_plus > 0 and r.E_minus > 0
    assert r.right_tail_shape_error < 1e-6
    assert r.right_const_error < 1e-6 and r.left_const_error < 1e-6


def test_support_escape():
    g = Grid(10.0, 512)
    s = State(0.0, gaussian(g.x, 1.0, 0.0, 4.0), g, ModelParams(1, 1))
    with pytest.raises(SupportEscapeError):
        tail_amplitudes(s, (-3.0, 3.0))
    with pytest.raises(SupportEscapeError):
        tail_amplitudes(s, (-11.0, 3.0))


def _report(t, ep, em):
    return TailReport(t, ep, em, (0, 1), None, None, None, None, 0.0)


def test_tail_monotonicity_of_zero_series():
    m = tail_monotonicity_check([_report(0.0, 0, 0), _report(0.1, 0, 0)], ModelParams(1, 1))
    assert m.worst_plus_rate == 0 and m.worst_minus_rate == 0


def test_tail_monotonicity_rates():
    p = ModelParams(1, 1, 0.2, 0.3)
    series = [_report(t, math.exp(-(p.lam - p.k) * t) * (1 + t), 0.0) for t in (0.0, 0.5, 1.0)]
    m = tail_monotonicity_check(series, p)
    assert m.worst_plus_rate == pytest.approx(1.0)
    with pytest.raises(ValueError):
        tail_monotonicity_check(series[:1], p)
    with pytest.raises(InapplicableError):
        tail_monotonicity_check(series, ModelParams(2, 2))


def test_f_of_zero_and_beta_zero(grid256):
    assert f_positivity(State(0.0, np.zeros(grid256.nx), grid256, ModelParams(1, 0)), ModelParams(1, 0)) == 0
    s = State(0.0, gaussian(grid256.x, 0.3, 1.0), grid256, ModelParams(1, 0))
    expected = 1.5 * grid256.dx * np.sum(np.exp(grid256.x) * s.ux**2)
    assert f_positivity(s, s.params) == pytest.approx(expected, rel=1e-14)
    assert expected > 0


def test_f_on_refined_grid():
    p = ModelParams(3, 3)
    vals = []
    for nx in (2048, 4096):
        g = Grid(10.0, nx)
        vals.append(f_positivity(State(0.0, bump(g.x, 1.0, -2, 2), g, p), p))
    assert vals[0] > 0
    assert abs(vals[0] - vals[1]) / vals[1] < 1e-6


def test_f_inapplicable(grid256):
    with pytest.raises(InapplicableError):
        f_positivity(State(0.0, np.zeros(grid256.nx), grid256, ModelParams(2, 2)), ModelParams(2, 2))


def test_f_value_includes_cubic_term(grid256):
    s = State(0.0, gaussian(grid256.x, 0.5), grid256, ModelParams(3, 5))
    u, ux, x = s.u, s.ux, grid256.x
    integrand = 5 / 4 * u**4 + 2 * u**2 * ux**2 + (-2) * 2 / 2 * u * ux**3
    assert f_value(s) == pytest.approx(grid256.dx * np.sum(np.exp(x) * integrand), rel=1e-13)
