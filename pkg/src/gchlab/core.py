"""Parameter, grid and state types shared across the package."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


class ParameterError(ValueError):
    """Raised for model parameters or grids that violate their invariants."""


class NonFiniteFieldError(FloatingPointError):
    """A computed field contains NaN or inf; treated as a blow-up signal."""


class Reduction(enum.Enum):
    CAMASSA_HOLM = "CamassaHolm"
    DEGASPERIS_PROCESI = "DegasperisProcesi"
    NOVIKOV = "Novikov"
    GENERIC = "Generic"


@dataclass(frozen=True)
class ModelParams:
    """The quadruple (N, beta, k, lambda) selecting one member of the gCH family.

    ``lam`` is the dissipation parameter (``lambda`` is a Python keyword).
    """

    N: int
    beta: float
    k: float = 0.0
    lam: float = 0.0

    @property
    def h_coeffs(self) -> tuple[float, float]:
        """Coefficients of u^{N+1} and u^{N-1} u_x^2 in h."""
        return self.beta / (self.N + 1), (3 * self.N - self.beta) / 2

    @property
    def g_coeff(self) -> float:
        """Coefficient of u^{N-2} u_x^3 in g."""
        return (self.N - 1) * (self.beta - self.N) / 2

    @property
    def beta_over_n(self) -> float:
        return self.beta / self.N

    @property
    def g_cubic_active(self) -> bool:
        return self.g_coeff != 0.0


def validate_params(p: ModelParams) -> ModelParams:
    """Check the invariants of ``p`` and return it unchanged.

    Degenerate coefficient cases are exposed through ``p.g_cubic_active``
    so the g term can skip the ``u^{N-2}`` power when it is multiplied by zero.
    """
    if isinstance(p.N, bool) or not isinstance(p.N, (int, np.integer)):
        raise ParameterError(f"N must be an integer, got {p.N!r}")
    if p.N < 1:
        raise ParameterError("N must be >= 1")
    for name in ("beta", "k", "lam"):
        value = getattr(p, name)
        if not math.isfinite(value):
            raise ParameterError(f"{name} must be finite, got {value!r}")
    if p.lam < 0:
        raise ParameterError("lambda must be >= 0")
    derived = (*p.h_coeffs, p.g_coeff, p.beta_over_n)
    if not all(math.isfinite(c) for c in derived):
        raise ParameterError("derived coefficients are not finite")
    return p


def classify_reduction(p: ModelParams) -> Reduction:
    """Name the integrable reduction selected by (N, beta); k and lambda are ignored."""
    pair = (p.N, p.beta)
    if pair == (1, 2):
        return Reduction.CAMASSA_HOLM
    if pair == (1, 3):
        return Reduction.DEGASPERIS_PROCESI
    if pair == (2, 3):
        return Reduction.NOVIKOV
    return Reduction.GENERIC


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [-L, L) with ``nx`` nodes."""

    half_length: float
    nx: int

    def __post_init__(self):
        if not (math.isfinite(self.half_length) and self.half_length > 0):
            raise ParameterError("half_length must be a positive finite number")
        nx = self.nx
        if isinstance(nx, bool) or not isinstance(nx, (int, np.integer)):
            raise ParameterError(f"nx must be an integer, got {nx!r}")
        if nx < 16 or nx & (nx - 1):
            raise ParameterError(f"nx must be a power of two >= 16, got {nx}")

    @property
    def length(self) -> float:
        return 2.0 * self.half_length

    @property
    def dx(self) -> float:
        return self.length / self.nx

    @cached_property
    def x(self) -> np.ndarray:
        x = -self.half_length + self.dx * np.arange(self.nx)
        x.flags.writeable = False
        return x


def as_field(values, grid: Grid) -> np.ndarray:
    """Return ``values`` as a read-only float array sampled on ``grid``.

    Raises NonFiniteFieldError for NaN/inf entries.
    """
    arr = np.array(values, dtype=float)
    if arr.shape != (grid.nx,):
        raise ValueError(f"field has shape {arr.shape}, expected ({grid.nx},)")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteFieldError("field contains non-finite values")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class State:
    """Solution snapshot (t, u). Derived fields are computed on demand."""

    t: float
    u: np.ndarray
    grid: Grid
    params: ModelParams
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.t < 0:
            raise ValueError("t must be >= 0")
        object.__setattr__(self, "u", as_field(self.u, self.grid))

    @property
    def workspace(self):
        from .spectral import workspace_for

        return workspace_for(self.grid, self.params.N)

    @property
    def ux(self) -> np.ndarray:
        if "ux" not in self._cache:
            self._cache["ux"] = self.workspace.derivative(self.u, 1)
        return self._cache["ux"]

    @property
    def y(self) -> np.ndarray:
        if "y" not in self._cache:
            self._cache["y"] = self.workspace.momentum(self.u)
        return self._cache["y"]

    def replace(self, t: float, u) -> "State":
        return State(t=t, u=u, grid=self.grid, params=self.params)
