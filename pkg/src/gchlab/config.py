"""Strict JSON run configuration."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from . import initial as lib
from .core import Grid, ModelParams, ParameterError, validate_params
from .diagnostics import threshold_3_1
from .dynamics import StepControl
from .monitors import MONITOR_NAMES
from .spectral import workspace_for


class ConfigError(ValueError):
    """Unreadable, malformed or invalid configuration."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ParamsConfig(_Strict):
    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

    N: int
    beta: float
    k: float
    lam: float = Field(alias="lambda")

    def to_params(self) -> ModelParams:
        return validate_params(ModelParams(self.N, self.beta, self.k, self.lam))


class GridConfig(_Strict):
    L: float
    nx: int

    def to_grid(self) -> Grid:
        return Grid(self.L, self.nx)


class TimeConfig(_Strict):
    t_end: float
    sample_interval: float
    cfl: float = 0.3
    dt_max: float = 0.01
    dt_min: float = 1e-10
    blowup_slope_factor: float = 1e4

    @field_validator("t_end", "sample_interval")
    @classmethod
    def _positive(cls, v):
        if not v > 0:
            raise ValueError("must be > 0")
        return v

    def to_control(self) -> StepControl:
        return StepControl(self.cfl, self.dt_max, self.dt_min, self.blowup_slope_factor)


class Gaussian(_Strict):
    kind: Literal["gaussian"]
    amplitude: float = 1.0
    center: float = 0.0
    width: float = 1.0


class OddGaussian(_Strict):
    kind: Literal["odd_gaussian"]
    amplitude: float = 1.0
    center: float = 0.0
    width: float = 1.0


class Bump(_Strict):
    kind: Literal["bump"]
    amplitude: float = 1.0
    a: float = -1.0
    b: float = 1.0

    @model_validator(mode="after")
    def _ordered(self):
        if not self.b > self.a:
            raise ValueError("bump needs b > a")
        return self


class Peakon(_Strict):
    kind: Literal["peakon"]
    c: float = 1.0
    center: float = 0.0
    mollify_eps: float = 0.05


class NovikovPeakon(_Strict):
    kind: Literal["novikov_peakon"]
    c: float = 1.0
    center: float = 0.0
    mollify_eps: float = 0.05


class Sine(_Strict):
    kind: Literal["sine"]
    amplitude: float = 1.0
    mode: int = 1


class Constant(_Strict):
    kind: Literal["constant"]
    value: float = 1.0


Profile = Annotated[
    Union[Gaussian, OddGaussian, Bump, Peakon, NovikovPeakon, Sine, Constant],
    Field(discriminator="kind"),
]


class FromMomentum(_Strict):
    kind: Literal["from_momentum"]
    momentum: Profile
    # at most one of the two rescalings
    l2_norm: Optional[float] = None
    l2_norm_over_threshold: Optional[float] = None

    @model_validator(mode="after")
    def _one_scale(self):
        if self.l2_norm is not None and self.l2_norm_over_threshold is not None:
            raise ValueError("give l2_norm or l2_norm_over_threshold, not both")
        return self


Initial = Annotated[Union[Profile, FromMomentum], Field(discriminator="kind")]


class OutputConfig(_Strict):
    directory: str = "out"
    snapshots: bool = True
    # write a snapshot every this many samples
    snapshot_every: int = 1


class RunConfig(_Strict):
    params: ParamsConfig
    grid: GridConfig
    time: TimeConfig
    initial: Initial
    monitors: List[str] = Field(default_factory=list)
    output: OutputConfig = Field(default_factory=OutputConfig)

    @field_validator("monitors")
    @classmethod
    def _known(cls, names):
        for name in names:
            if name not in MONITOR_NAMES:
                raise ValueError(f"unknown monitor {name!r}; known: {', '.join(MONITOR_NAMES)}")
        if len(set(names)) != len(names):
            raise ValueError("duplicate monitor names")
        return names

    def dump(self) -> dict:
        return self.model_dump(mode="json", by_alias=True)


def _profile_values(spec, x, L):
    fields = spec.model_dump(exclude={"kind"})
    if spec.kind == "gaussian":
        return lib.gaussian(x, **fields)
    if spec.kind == "odd_gaussian":
        return lib.odd_gaussian(x, **fields)
    if spec.kind == "bump":
        return lib.bump(x, **fields)
    if spec.kind == "peakon":
        return lib.peakon(x, **fields)
    if spec.kind == "novikov_peakon":
        return lib.novikov_peakon(x, **fields)
    if spec.kind == "sine":
        return lib.sine(x, half_length=L, **fields)
    if spec.kind == "constant":
        return lib.constant(x, **fields)
    raise ConfigError(f"unknown initial kind {spec.kind!r}")


def initial_data(cfg: RunConfig, grid: Grid, params: ModelParams):
    """(u0, y0, support) for the configured initial datum; support is (a, b) for a bump."""
    spec = cfg.initial
    if spec.kind == "from_momentum":
        y0 = _profile_values(spec.momentum, grid.x, grid.half_length)
        target = spec.l2_norm
        if spec.l2_norm_over_threshold is not None:
            target = spec.l2_norm_over_threshold * threshold_3_1(params)
        u0, y0 = lib.from_momentum(grid, y0, target)
        return u0, y0, None
    u0 = np.asarray(_profile_values(spec, grid.x, grid.half_length), dtype=float)
    support = (spec.a, spec.b) if spec.kind == "bump" else None
    return u0, workspace_for(grid).momentum(u0), support


def _format_errors(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"] if not _is_union_tag(p))
        if e["type"] == "missing":
            lines.append(f"{loc} required")
        elif e["type"] == "extra_forbidden":
            lines.append(f"{loc}: unknown key")
        else:
            lines.append(f"{loc}: {e['msg']}")
    return "; ".join(lines)


def _is_union_tag(part) -> bool:
    # discriminated unions insert the tag value into the error location
    return isinstance(part, str) and part in {
        "gaussian", "odd_gaussian", "bump", "peakon", "novikov_peakon", "sine", "constant",
        "from_momentum",
    }


def parse_config(data: dict) -> RunConfig:
    try:
        cfg = RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_errors(exc)) from None
    try:
        cfg.params.to_params()
        cfg.grid.to_grid()
        cfg.time.to_control()
    except (ParameterError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    try:
        return parse_config(data)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None
