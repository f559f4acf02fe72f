"""Grid state, PML region geometry, and small field operators.

Layout: pressure p and the auxiliary pressure P live at cell centers
(shape nx x ny), u at x-faces (nx+1 x ny), v at y-faces (nx x ny+1).
P is evolved on the whole domain (it is bounded by outflow transport);
the PML correction itself acts only where sigma > 0.

Four auxiliary fields realize the layer in each direction; for x they are

    a1x = D(P)      on x-faces      (D = d/dx^pml - d/dx)
    a2x = D(dP/dx)  at centers
    a3x = D(a1x)    at centers
    a4x = D(p)      at centers

and the pressure correction is corr_x = u a4x + R with
R = u T(a1x) - (c^2-u^2)(dx a1x + a3x) - c^2 a2x, T = d/dt + v d/dy.
The y-direction mirrors this with u <-> v and x <-> y. In corner regions
the x-layer takes precedence (sigma_y is zeroed where the x-layer is
active) so the two mechanisms never overlap on one cell.

All outer boundaries are homogeneous Dirichlet for the physical fields
(zero ghosts; wall-normal velocities pinned to zero).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import FlowParams, GridSpec, PmlAuxConstants, PmlConfig, validate_grid
from ..errors import LayerTooWide

TAG_INTERIOR = 0
TAG_PML_X = 1
TAG_PML_Y = 2
TAG_PML_CORNER = 3


@dataclass
class FieldState:
    """All evolving arrays at one time level."""

    p: np.ndarray
    u: np.ndarray
    v: np.ndarray
    P: np.ndarray
    a1x: np.ndarray
    a2x: np.ndarray
    a3x: np.ndarray
    a4x: np.ndarray
    a1y: np.ndarray
    a2y: np.ndarray
    a3y: np.ndarray
    a4y: np.ndarray
    step_index: int = 0
    t: float = 0.0

    def copy(self) -> "FieldState":
        return FieldState(
            *(getattr(self, n).copy() for n in _ARRAY_FIELDS),
            step_index=self.step_index,
            t=self.t,
        )


_ARRAY_FIELDS = (
    "p", "u", "v", "P",
    "a1x", "a2x", "a3x", "a4x",
    "a1y", "a2y", "a3y", "a4y",
)


@dataclass
class RegionMap:
    """Cell tags plus precomputed depth and damping arrays.

    Corner cells keep the TAG_PML_CORNER tag for reporting, but the
    damping arrays implement x-precedence: sy_c and sy_f vanish on every
    column whose x-layer depth is positive.
    """

    tag: np.ndarray
    depth_x: np.ndarray
    depth_y: np.ndarray
    sx_c: np.ndarray
    sx_f: np.ndarray
    sy_c: np.ndarray
    sy_f: np.ndarray
    pmask: np.ndarray = field(default=None)

    @property
    def has_x(self) -> bool:
        return bool(np.any(self.sx_f != 0.0)) or bool(np.any(self.depth_x > 0))

    @property
    def has_y(self) -> bool:
        return bool(np.any(self.sy_f != 0.0)) or bool(np.any(self.depth_y > 0))


def _depth(coords, length, delta, lo_active, hi_active):
    d = np.zeros_like(coords)
    if lo_active:
        d = np.maximum(d, delta - coords)
    if hi_active:
        d = np.maximum(d, coords - (length - delta))
    return np.clip(d, 0.0, delta)


def _sigma(pml: PmlConfig, depth):
    if pml.delta <= 0:
        return np.zeros_like(depth)
    return pml.sigma_pml * depth**2 / pml.delta**3


def build_region_map(grid: GridSpec, pml: PmlConfig) -> RegionMap:
    validate_grid(grid)
    nx, ny, dx, dy = grid.nx, grid.ny, grid.dx, grid.dy
    x_lo = "x-min" in pml.sides
    x_hi = "x-max" in pml.sides
    y_lo = "y-min" in pml.sides
    y_hi = "y-max" in pml.sides

    if (x_lo or x_hi) and pml.n_delta(dx) >= nx // 2:
        raise LayerTooWide(f"n_delta={pml.n_delta(dx)} >= nx/2={nx // 2}")
    if (y_lo or y_hi) and pml.n_delta(dy) >= ny // 2:
        raise LayerTooWide(f"n_delta={pml.n_delta(dy)} >= ny/2={ny // 2}")

    xc = (np.arange(nx) + 0.5) * dx
    yc = (np.arange(ny) + 0.5) * dy
    xf = np.arange(nx + 1) * dx
    yf = np.arange(ny + 1) * dy

    dxc = _depth(xc, grid.lx, pml.delta, x_lo, x_hi) if (x_lo or x_hi) else np.zeros(nx)
    dyc = _depth(yc, grid.ly, pml.delta, y_lo, y_hi) if (y_lo or y_hi) else np.zeros(ny)
    dxf = (
        _depth(xf, grid.lx, pml.delta, x_lo, x_hi)
        if (x_lo or x_hi)
        else np.zeros(nx + 1)
    )
    dyf = (
        _depth(yf, grid.ly, pml.delta, y_lo, y_hi)
        if (y_lo or y_hi)
        else np.zeros(ny + 1)
    )

    depth_x = np.broadcast_to(dxc[:, None], (nx, ny)).copy()
    depth_y = np.broadcast_to(dyc[None, :], (nx, ny)).copy()

    tag = np.zeros((nx, ny), dtype=np.int8)
    in_x = depth_x > 0
    in_y = depth_y > 0
    tag[in_x & ~in_y] = TAG_PML_X
    tag[in_y & ~in_x] = TAG_PML_Y
    tag[in_x & in_y] = TAG_PML_CORNER

    sx_c = np.broadcast_to(_sigma(pml, dxc)[:, None], (nx, ny)).copy()
    sx_f = np.broadcast_to(_sigma(pml, dxf)[:, None], (nx + 1, ny)).copy()
    sy_c = np.broadcast_to(_sigma(pml, dyc)[None, :], (nx, ny)).copy()
    sy_f = np.broadcast_to(_sigma(pml, dyf)[None, :], (nx, ny + 1)).copy()

    # x-precedence at corners: columns inside an x-layer carry no y-damping.
    xcol = dxc > 0
    sy_c[xcol, :] = 0.0
    sy_f[xcol, :] = 0.0

    pmask = (tag != TAG_INTERIOR).astype(np.float64)
    return RegionMap(tag, depth_x, depth_y, sx_c, sx_f, sy_c, sy_f, pmask)


def init_state(grid: GridSpec, pml: PmlConfig):
    """Zero initial fields plus the region map."""
    regions = build_region_map(grid, pml)
    nx, ny = grid.nx, grid.ny
    z = np.zeros
    state = FieldState(
        p=z((nx, ny)),
        u=z((nx + 1, ny)),
        v=z((nx, ny + 1)),
        P=z((nx, ny)),
        a1x=z((nx + 1, ny)),
        a2x=z((nx, ny)),
        a3x=z((nx, ny)),
        a4x=z((nx, ny)),
        a1y=z((nx, ny + 1)),
        a2y=z((nx, ny)),
        a3y=z((nx, ny)),
        a4y=z((nx, ny)),
    )
    return state, regions


def vorticity(state: FieldState, grid: GridSpec) -> np.ndarray:
    """Centered staggered curl dv/dx - du/dy at interior cell corners.

    Returned shape is (nx-1, ny-1); entry (m, n) sits at the corner
    x = (m+1) dx, y = (n+1) dy.
    """
    u, v = state.u, state.v
    dvdx = (v[1:, 1:-1] - v[:-1, 1:-1]) / grid.dx
    dudy = (u[1:-1, 1:] - u[1:-1, :-1]) / grid.dy
    return dvdx - dudy


def dx_pml_aux_update(
    dpx,
    phi_new,
    phi_old,
    sigma,
    flow: FlowParams,
    dx: float,
    dt: float,
    dphi_dy=None,
    ddpx_dy=None,
):
    """One step of the auxiliary field d = (d/dx^pml - d/dx) phi.

    Evolution equation (sigma frequency-independent):
        c (d/dt + v d/dy) d + (c^2-u^2) sigma d
            = -(c^2-u^2) sigma [dphi/dx - mu_x (d/dt + v d/dy) phi]
    with implicit treatment of the sigma damping term. Works on 1D x-profiles
    (complex allowed); the optional y-derivative arrays default to zero.
    """
    kx = flow.c_bar**2 - flow.u_bar**2
    mu = PmlAuxConstants.from_flow(flow).mu_x
    dphidx = np.gradient(phi_new, dx)
    gphi = (phi_new - phi_old) / dt
    if dphi_dy is not None:
        gphi = gphi + flow.v_bar * dphi_dy
    rhs = -kx * sigma * (dphidx - mu * gphi)
    transported = dpx if ddpx_dy is None else dpx - dt * flow.v_bar * ddpx_dy
    return (flow.c_bar * transported + dt * rhs) / (flow.c_bar + dt * kx * sigma)
