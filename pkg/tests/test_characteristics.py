import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from gchlab.characteristics import FlowMap, advance_flow, lagrangian_invariant_residual
from gchlab.core import Grid, ModelParams, State
from gchlab.dynamics import StepControl, evolve, rk4_stages
from gchlab.initial import bump, gaussian


def _flow_run(p, grid, u0, t_end, labels, dt):
    ws = State(0.0, u0, grid, p).workspace
    fm = FlowMap.start(labels)
    u = u0
    for _ in range(int(round(t_end / dt))):
        u, stages = rk4_stages(u, dt, p, ws)
        fm = advance_flow(fm, stages, dt, ws, p)
    return fm, u


def test_constant_dispersion_translates_labels():
    g = Grid(10.0, 64)
    labels = np.linspace(-5, 5, 7)
    fm, _ = _flow_run(ModelParams(2, 3, 1.5, 0.0), g, np.zeros(g.nx), 1.0, labels, 0.1)
    np.testing.assert_allclose(fm.q, labels + 1.5, atol=1e-13)
    np.testing.assert_allclose(fm.qx, 1.0, atol=1e-15)
    assert fm.t == pytest.approx(1.0)


def test_uniform_state_moves_at_c_to_the_n():
    g = Grid(10.0, 64)
    labels = np.array([-2.0, 0.0, 3.0])
    fm, _ = _flow_run(ModelParams(3, 3), g, np.full(g.nx, 0.8), 0.5, labels, 0.05)
    np.testing.assert_allclose(fm.q, labels + 0.8**3 * 0.5, atol=1e-13)
    np.testing.assert_allclose(fm.qx, 1.0, atol=1e-14)


def test_gradient_matches_exponential_of_accumulated_rate():
    p = ModelParams(2, 3, 0.4, 0.2)
    g = Grid(10.0, 512)
    u = gaussian(g.x, 0.5)
    ws = State(0.0, u, g, p).workspace
    fm = FlowMap.start(np.linspace(-3, 3, 9))
    dt, n = 0.0025, 200
    rates = []

    def rate(u, q):
        uq = ws.interpolate(u, q)
        return p.N * uq ** (p.N - 1) * ws.interpolate(u, q, 1)

    rates.append(rate(u, fm.q))
    for _ in range(n):
        u, stages = rk4_stages(u, dt, p, ws)
        fm = advance_flow(fm, stages, dt, ws, p)
        rates.append(rate(u, fm.q))
    integral = trapezoid(np.array(rates), dx=dt, axis=0)
    assert np.max(np.abs(fm.qx - np.exp(integral)) / np.exp(integral)) < 1e-6


def test_advance_flow_needs_four_stages(grid256):
    fm = FlowMap.start([0.0])
    ws = State(0.0, np.zeros(grid256.nx), grid256, ModelParams(1, 2)).workspace
    with pytest.raises(ValueError):
        advance_flow(fm, [np.zeros(grid256.nx)] * 3, 0.1, ws, ModelParams(1, 2))


def test_invariant_residual_zero_at_start(grid256):
    s = State(0.0, gaussian(grid256.x), grid256, ModelParams(2, 3, 0.4, 0.2))
    assert lagrangian_invariant_residual(FlowMap.start(grid256.x[::16]), s, s.y) < 1e-15


def test_invariant_residual_zero_for_uniform_decay():
    g = Grid(10.0, 64)
    p = ModelParams(1, 2, 0.0, 0.5)
    s0 = State(0.0, np.full(g.nx, 2.0), g, p)
    out = evolve(s0, 1.0, flows={"p": FlowMap.start([-1.0, 0.0, 2.0])})
    assert lagrangian_invariant_residual(out.flows["p"], out.state, s0.y) < 1e-9


def test_invariant_residual_on_bump_run():
    p = ModelParams(2, 3, 0.4, 0.2)
    g = Grid(10.0, 1024)
    s0 = State(0.0, bump(g.x, 1.0, -5.0, 5.0), g, p)
    out = evolve(s0, 0.5, flows={"p": FlowMap.start(np.linspace(-6, 6, 64))})
    assert not out.degenerate_flow
    assert lagrangian_invariant_residual(out.flows["p"], out.state, s0.y) < 1e-4


def test_nonpositive_gradient_gives_infinite_residual(grid256):
    s = State(0.0, gaussian(grid256.x), grid256, ModelParams(1, 2))
    fm = FlowMap(labels=np.array([0.0]), q=np.array([0.0]), qx=np.array([-1.0]))
    assert math.isinf(lagrangian_invariant_residual(fm, s, s.y))


def test_flow_stays_monotone_and_positive():
    p = ModelParams(1, 2, 0.3, 0.1)
    g = Grid(20.0, 512)
    labels = np.linspace(-8, 8, 33)
    out = evolve(State(0.0, gaussian(g.x), g, p), 1.0, StepControl(), flows={"p": FlowMap.start(labels)})
    fm = out.flows["p"]
    assert np.all(np.diff(fm.q) > 0)
    assert np.all(fm.qx > 0)


def test_sign_of_momentum_is_carried_along_characteristics():
    p = ModelParams(1, 2, 0.3, 0.1)
    g = Grid(20.0, 1024)
    y0 = bump(g.x, 1.0, -3.0, 3.0) - 0.5 * bump(g.x, 1.0, 4.0, 8.0)
    u0 = State(0.0, y0, g, p).workspace.helmholtz_solve(y0)
    labels = np.array([-1.0, 0.0, 1.0, 5.0, 6.0, 7.0])
    out = evolve(State(0.0, u0, g, p), 1.0, flows={"p": FlowMap.start(labels)})
    y_at_q = out.state.workspace.interpolate(out.state.y, out.flows["p"].q)
    assert np.all(y_at_q[:3] > 0) and np.all(y_at_q[3:] < 0)
