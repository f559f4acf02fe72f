"""Time-stepping driver: coefficient setup, source injection, probes,
frame recording, and the public step/run entry points."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import (
    FlowParams,
    GridSpec,
    PmlAuxConstants,
    PmlConfig,
    SourceSpec,
    source_value,
    time_step,
    validate_flow,
)
from ..errors import UnstableState
from . import get_backend
from .state import FieldState, RegionMap, init_state, vorticity

BLOWUP_LIMIT = 1e12


@dataclass
class StepCoefs:
    """Everything step_once needs besides the fields themselves.

    df1*/dc1*/dc2* are the implicit denominators of the auxiliary-field
    updates (face a1, center a2/a3, center a4); lam is the implicit
    diagonal relaxation of the p update; mx/my gate each direction's
    correction to its own sigma > 0 cells.
    """

    dt: float
    dx: float
    dy: float
    ub: float
    vb: float
    rho: float
    c_bar: float
    rc2: float
    kx: float
    ky: float
    mux: float
    muy: float
    sx_c: np.ndarray
    sx_f: np.ndarray
    sy_c: np.ndarray
    sy_f: np.ndarray
    df1x: np.ndarray
    dc1x: np.ndarray
    dc2x: np.ndarray
    df1y: np.ndarray
    dc1y: np.ndarray
    dc2y: np.ndarray
    lam: np.ndarray
    mx: np.ndarray
    my: np.ndarray
    has_x: bool
    has_y: bool
    has_pml: bool


def make_coefs(
    flow: FlowParams, grid: GridSpec, regions: RegionMap, dt: float = None
) -> StepCoefs:
    validate_flow(flow)
    aux = PmlAuxConstants.from_flow(flow)
    has_x, has_y = regions.has_x, regions.has_y
    dt = time_step(grid, flow) if dt is None else dt
    cb = flow.c_bar
    kx = cb**2 - flow.u_bar**2
    ky = cb**2 - flow.v_bar**2
    df1x = cb + dt * kx * regions.sx_f
    dc1x = cb + dt * kx * regions.sx_c
    dc2x = cb + dt * cb**2 * regions.sx_c
    df1y = cb + dt * ky * regions.sy_f
    dc1y = cb + dt * ky * regions.sy_c
    dc2y = cb + dt * cb**2 * regions.sy_c
    lam = (flow.u_bar**2 / 4.0) * (
        cb * regions.sx_f[:-1, :] / df1x[:-1, :]
        + cb * regions.sx_f[1:, :] / df1x[1:, :]
    ) + (flow.v_bar**2 / 4.0) * (
        cb * regions.sy_f[:, :-1] / df1y[:, :-1]
        + cb * regions.sy_f[:, 1:] / df1y[:, 1:]
    )
    return StepCoefs(
        dt=dt,
        dx=grid.dx,
        dy=grid.dy,
        ub=flow.u_bar,
        vb=flow.v_bar,
        rho=flow.rho_bar,
        c_bar=cb,
        rc2=flow.rho_bar * cb**2,
        kx=kx,
        ky=ky,
        mux=aux.mu_x,
        muy=aux.mu_y,
        sx_c=regions.sx_c,
        sx_f=regions.sx_f,
        sy_c=regions.sy_c,
        sy_f=regions.sy_f,
        df1x=df1x,
        dc1x=dc1x,
        dc2x=dc2x,
        df1y=df1y,
        dc1y=dc1y,
        dc2y=dc2y,
        lam=lam,
        mx=(regions.sx_c > 0).astype(np.float64),
        my=(regions.sy_c > 0).astype(np.float64),
        has_x=has_x,
        has_y=has_y,
        has_pml=has_x or has_y,
    )


class Stepper:
    """Owns the coefficient bundle and advances a FieldState."""

    def __init__(
        self,
        flow: FlowParams,
        grid: GridSpec,
        regions: RegionMap,
        source: SourceSpec = None,
        dt: float = None,
        source_scale: float = 1.0,
    ):
        self.flow = flow
        self.grid = grid
        self.coefs = make_coefs(flow, grid, regions, dt)
        self.source = source
        self.source_scale = source_scale
        self._kernel = get_backend().step_once
        if source is not None:
            sx, sy = source.location
            # the epsilon nudge keeps cell snapping consistent between a
            # run and its shifted reference when x/dx lands on a boundary
            self._ip = min(max(_snap(sx / grid.dx), 0), grid.nx - 1)
            self._jp = min(max(_snap(sy / grid.dy), 0), grid.ny - 1)
            self._iu = min(max(_snap(sx / grid.dx + 0.5), 0), grid.nx)
            self._jv = min(max(_snap(sy / grid.dy + 0.5), 0), grid.ny)
            self._delta = 1.0 / (grid.dx * grid.dy)

    @property
    def dt(self) -> float:
        return self.coefs.dt

    def step(self, state: FieldState) -> FieldState:
        self._kernel(state, self.coefs)
        if self.source is not None:
            amp = (
                source_value(self.source, state.t)
                * self._delta
                * self.source_scale
                * self.coefs.dt
            )
            if amp != 0.0:
                if "p" in self.source.targets:
                    state.p[self._ip, self._jp] += amp
                if "u" in self.source.targets:
                    state.u[self._iu, self._jp] += amp
                if "v" in self.source.targets:
                    state.v[self._ip, self._jv] += amp
        state.step_index += 1
        state.t += self.coefs.dt
        m = float(np.max(np.abs(state.p)))
        if not m < BLOWUP_LIMIT:
            raise UnstableState(
                f"|p| = {m} at step {state.step_index}",
                step_index=state.step_index,
            )
        return state


def step(
    state: FieldState,
    flow: FlowParams,
    grid: GridSpec,
    pml: PmlConfig,
    src: SourceSpec = None,
    regions: RegionMap = None,
) -> FieldState:
    """Single-step convenience wrapper (builds a throwaway Stepper)."""
    if regions is None:
        from .state import build_region_map

        regions = build_region_map(grid, pml)
    return Stepper(flow, grid, regions, src).step(state)


@dataclass
class RunOutput:
    """Recorded results of one simulation."""

    grid: GridSpec
    dt: float
    n_steps: int
    times: np.ndarray
    probe_xy: tuple
    probes: dict
    frames: dict
    frame_steps: np.ndarray
    block_max: dict
    final: FieldState
    record_box: tuple = None

    def frame_times(self):
        return self.frame_steps * self.dt


def _snap(x: float) -> int:
    return int(np.floor(x + 1e-6))


def _probe_indices(grid, probes):
    out = []
    for (x, y) in probes:
        i = min(max(_snap(x / grid.dx), 0), grid.nx - 1)
        j = min(max(_snap(y / grid.dy), 0), grid.ny - 1)
        out.append((i, j))
    return out


def run(
    cfg,
    *,
    grid: GridSpec = None,
    pml: PmlConfig = None,
    source: SourceSpec = None,
    n_steps: int = None,
    record_fields=("p",),
    record_every: int = None,
    record_box: tuple = None,
    source_scale: float = 1.0,
    block_size: int = 100,
) -> RunOutput:
    """Run a full simulation described by cfg (duck-typed ExperimentConfig).

    Keyword overrides support the reference-run and sweep use cases. Frames
    named in record_fields ("p", "u", "v", "P", "vorticity") are stored every
    record_every steps, restricted to the half-open cell box
    record_box = (i0, i1, j0, j1); u and v frames are averaged to centers so
    all center frames share one geometry. Vorticity frames cover the interior
    corners of the box.
    """
    flow = cfg.flow
    grid = grid if grid is not None else cfg.grid
    pml = pml if pml is not None else cfg.pml
    source = source if source is not None else cfg.source
    n_steps = n_steps if n_steps is not None else cfg.horizon
    record_every = (
        record_every
        if record_every is not None
        else getattr(cfg, "record_every", 1)
    )
    probes = tuple(getattr(cfg, "probes", ()) or ())

    state, regions = init_state(grid, pml)
    stepper = Stepper(flow, grid, regions, source, source_scale=source_scale)

    if record_box is None:
        record_box = (0, grid.nx, 0, grid.ny)
    i0, i1, j0, j1 = record_box

    pidx = _probe_indices(grid, probes)
    probe_series = {name: np.zeros((len(probes), n_steps)) for name in ("p", "u", "v", "vorticity")}
    frames = {name: [] for name in record_fields}
    frame_steps = []
    blocks = {name: [] for name in ("p", "u", "v")}
    cur_block = {name: 0.0 for name in ("p", "u", "v")}

    def grab_frames():
        for name in record_fields:
            if name == "p":
                frames[name].append(state.p[i0:i1, j0:j1].copy())
            elif name == "P":
                frames[name].append(state.P[i0:i1, j0:j1].copy())
            elif name == "u":
                uc = 0.5 * (state.u[1:, :] + state.u[:-1, :])
                frames[name].append(uc[i0:i1, j0:j1].copy())
            elif name == "v":
                vc = 0.5 * (state.v[:, 1:] + state.v[:, :-1])
                frames[name].append(vc[i0:i1, j0:j1].copy())
            elif name == "vorticity":
                w = vorticity(state, grid)
                frames[name].append(w[i0 : i1 - 1, j0 : j1 - 1].copy())
            else:
                raise ValueError(f"unknown recordable field: {name}")
        frame_steps.append(state.step_index)

    for n in range(n_steps):
        stepper.step(state)
        for kidx, (i, j) in enumerate(pidx):
            probe_series["p"][kidx, n] = state.p[i, j]
            probe_series["u"][kidx, n] = 0.5 * (state.u[i, j] + state.u[i + 1, j])
            probe_series["v"][kidx, n] = 0.5 * (state.v[i, j] + state.v[i, j + 1])
            ii = min(max(i, 1), grid.nx - 1)
            jj = min(max(j, 1), grid.ny - 1)
            w = (
                (state.v[ii, jj] - state.v[ii - 1, jj]) / grid.dx
                - (state.u[ii, jj] - state.u[ii, jj - 1]) / grid.dy
            )
            probe_series["vorticity"][kidx, n] = w
        if (n + 1) % record_every == 0 or n == n_steps - 1:
            grab_frames()
        cur_block["p"] = max(cur_block["p"], float(np.max(np.abs(state.p))))
        cur_block["u"] = max(cur_block["u"], float(np.max(np.abs(state.u))))
        cur_block["v"] = max(cur_block["v"], float(np.max(np.abs(state.v))))
        if (n + 1) % block_size == 0 or n == n_steps - 1:
            for name in blocks:
                blocks[name].append(cur_block[name])
                cur_block[name] = 0.0

    return RunOutput(
        grid=grid,
        dt=stepper.dt,
        n_steps=n_steps,
        times=(np.arange(n_steps) + 1) * stepper.dt,
        probe_xy=probes,
        probes=probe_series,
        frames={k: np.array(vlist) for k, vlist in frames.items()},
        frame_steps=np.array(frame_steps, dtype=int),
        block_max={k: np.array(vb) for k, vb in blocks.items()},
        final=state,
        record_box=record_box,
    )
