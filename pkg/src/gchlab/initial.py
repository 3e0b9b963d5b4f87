"""Initial-data library and closed-form reference solutions."""

from __future__ import annotations

import math

import numpy as np

from .core import Grid
from .spectral import lp_norm, workspace_for


def gaussian(x, amplitude=1.0, center=0.0, width=1.0):
    return amplitude * np.exp(-(((x - center) / width) ** 2))


def odd_gaussian(x, amplitude=1.0, center=0.0, width=1.0):
    """amplitude * (x - center) * exp(-((x - center)/width)^2)."""
    return amplitude * (x - center) * np.exp(-(((x - center) / width) ** 2))


def bump(x, amplitude=1.0, a=-1.0, b=1.0):
    """C-infinity bump exp(1 - 1/(1 - s^2)), s = (2x - a - b)/(b - a); zero outside (a, b)."""
    if not b > a:
        raise ValueError("bump needs b > a")
    s = (2 * np.asarray(x, dtype=float) - a - b) / (b - a)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    out[inside] = amplitude * np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def peakon(x, c=1.0, center=0.0, mollify_eps=0.05):
    """c * exp(-sqrt((x - center)^2 + eps^2)); eps = 0 is the exact peaked profile."""
    return c * np.exp(-np.sqrt((x - center) ** 2 + mollify_eps**2))


def novikov_peakon(x, c=1.0, center=0.0, mollify_eps=0.05):
    return math.sqrt(c) * np.exp(-np.sqrt((x - center) ** 2 + mollify_eps**2))


def sine(x, amplitude=1.0, mode=1, half_length=None):
    """amplitude * sin(mode * pi * x / L), periodic on [-L, L)."""
    return amplitude * np.sin(mode * np.pi * x / half_length)


def constant(x, value=1.0):
    return np.full_like(np.asarray(x, dtype=float), value)


def from_momentum(grid: Grid, y0, l2_norm=None):
    """u0 = (1 - d^2/dx^2)^{-1} y0, after optionally rescaling y0 to a given L2 norm.

    Returns (u0, y0) with the rescaled y0.
    """
    y0 = np.asarray(y0, dtype=float)
    if l2_norm is not None:
        current = lp_norm(y0, 2, grid.dx)
        if current == 0:
            raise ValueError("cannot rescale zero momentum")
        y0 = y0 * (l2_norm / current)
    return workspace_for(grid).helmholtz_solve(y0), y0


def periodic_distance(x, half_length):
    """Signed x wrapped into [-L, L)."""
    L = half_length
    return (np.asarray(x) + L) % (2 * L) - L


def ch_peakon(x, t, c=1.0, center=0.0, half_length=None):
    """Camassa-Holm peakon c e^{-|x - center - ct|}, translated periodically if L is given."""
    d = x - center - c * t
    if half_length is not None:
        d = periodic_distance(d, half_length)
    return c * np.exp(-np.abs(d))


def novikov_exact_peakon(x, t, c=1.0, center=0.0, half_length=None):
    """Novikov peakon sqrt(c) e^{-|x - center - ct|}."""
    d = x - center - c * t
    if half_length is not None:
        d = periodic_distance(d, half_length)
    return math.sqrt(c) * np.exp(-np.abs(d))


def uniform_decay(x, t, c=1.0, lam=0.0):
    """Spatially uniform solution c e^{-lambda t}, valid for every (N, beta, k)."""
    return np.full_like(np.asarray(x, dtype=float), c * math.exp(-lam * t))
