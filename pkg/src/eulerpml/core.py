"""Shared domain types, validation, and derived constants.

Sign conventions: plane waves are e^{i omega t + i k y + lambda x}, so the
dual of d/dt is i*omega, of d/dy is i*k, and lambda is the symbol of d/dx.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import (
    CflOutOfRange,
    NonpositiveDensityOrSound,
    OutOfLayer,
    SupersonicFlow,
    ZeroNormalVelocity,
)

PML_SIDES = ("x-min", "x-max", "y-min", "y-max")
SOURCE_TARGETS = ("p", "u", "v")


@dataclass(frozen=True)
class FlowParams:
    """Constant subsonic background state."""

    u_bar: float
    v_bar: float
    rho_bar: float
    c_bar: float

    @property
    def mach_x(self) -> float:
        return self.u_bar / self.c_bar

    @property
    def mach_y(self) -> float:
        return self.v_bar / self.c_bar

    @property
    def speed(self) -> float:
        return math.hypot(self.u_bar, self.v_bar)


@dataclass(frozen=True)
class FourierPoint:
    """One (omega, k) sample in the t/y Fourier plane."""

    omega: float
    k: float

    def s(self, flow: FlowParams) -> complex:
        """i*(omega + k*v_bar), the symbol of d/dt + v_bar d/dy."""
        return 1j * (self.omega + self.k * flow.v_bar)


@dataclass(frozen=True)
class GridSpec:
    """Uniform staggered grid covering [0,lx] x [0,ly]."""

    lx: float
    ly: float
    nx: int
    ny: int
    cfl: float = 0.3

    @property
    def dx(self) -> float:
        return self.lx / self.nx

    @property
    def dy(self) -> float:
        return self.ly / self.ny


@dataclass(frozen=True)
class PmlConfig:
    """Absorbing-layer geometry and damping amplitude.

    The damping profile is the fixed quadratic
    sigma(s) = sigma_pml * s^2 / delta^3 for depth s in [0, delta],
    so sigma(0) = 0 at the Euler/PML interface.
    """

    sides: frozenset = field(default_factory=frozenset)
    delta: float = 0.0
    sigma_pml: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "sides", frozenset(self.sides))
        unknown = self.sides - set(PML_SIDES)
        if unknown:
            raise ValueError(f"unknown PML sides: {sorted(unknown)}")
        if self.sigma_pml < 0:
            raise ValueError("sigma_pml must be >= 0")
        if self.sides and self.delta <= 0:
            raise ValueError("delta must be > 0 when layers are active")

    def n_delta(self, spacing: float) -> int:
        """Layer width in cells along the layer normal."""
        return int(round(self.delta / spacing))


@dataclass(frozen=True)
class SourceSpec:
    """Ricker point source; the spatial Dirac factor is the solver's job."""

    fc: float
    ts: float
    location: tuple
    targets: frozenset = frozenset(SOURCE_TARGETS)

    def __post_init__(self):
        object.__setattr__(self, "targets", frozenset(self.targets))
        unknown = self.targets - set(SOURCE_TARGETS)
        if unknown:
            raise ValueError(f"unknown source targets: {sorted(unknown)}")


@dataclass(frozen=True)
class PmlAuxConstants:
    """mu-type coefficients of the pml derivatives; finite for subsonic flow."""

    mu_x: float
    mu_y: float

    @classmethod
    def from_flow(cls, flow: FlowParams) -> "PmlAuxConstants":
        return cls(
            mu_x=flow.u_bar / (flow.c_bar**2 - flow.u_bar**2),
            mu_y=flow.v_bar / (flow.c_bar**2 - flow.v_bar**2),
        )


def validate_flow(params: FlowParams, for_modes: bool = False) -> FlowParams:
    """Check the background-state invariants; returns params unchanged.

    With for_modes=True additionally rejects u_bar = 0, which the mode and
    factorization formulas divide by.
    """
    if params.rho_bar <= 0 or params.c_bar <= 0:
        raise NonpositiveDensityOrSound(
            f"rho_bar={params.rho_bar}, c_bar={params.c_bar} must be > 0"
        )
    if params.u_bar**2 + params.v_bar**2 >= params.c_bar**2:
        raise SupersonicFlow(
            f"|({params.u_bar}, {params.v_bar})| >= c_bar={params.c_bar}"
        )
    if for_modes and params.u_bar == 0:
        raise ZeroNormalVelocity("mode analysis requires u_bar != 0")
    return params


def sigma_profile(cfg: PmlConfig, depth: float) -> float:
    """Quadratic damping value at the given depth into the layer."""
    if depth < 0 or depth > cfg.delta:
        raise OutOfLayer(f"depth {depth} outside [0, {cfg.delta}]")
    return cfg.sigma_pml * depth**2 / cfg.delta**3


def source_value(src: SourceSpec, t: float) -> float:
    """Ricker amplitude with a hard cutoff at t >= ts."""
    if t >= src.ts:
        return 0.0
    a = math.pi**2 * (src.fc * t - 1.0) ** 2
    return (1.0 - 2.0 * a) * math.exp(-a)


def time_step(grid: GridSpec, flow: FlowParams) -> float:
    """Acoustic-plus-advection CFL time step."""
    vmax = flow.c_bar + max(abs(flow.u_bar), abs(flow.v_bar))
    return grid.cfl * min(grid.dx, grid.dy) / vmax


def validate_grid(grid: GridSpec) -> GridSpec:
    if grid.lx <= 0 or grid.ly <= 0 or grid.nx <= 0 or grid.ny <= 0:
        raise ValueError("grid extents and cell counts must be positive")
    if not 0 < grid.cfl < 1:
        raise CflOutOfRange(f"cfl={grid.cfl} outside (0, 1)")
    return grid
