"""Pure-numpy time step kernel (reference backend).

step_once advances all field arrays by one time step. The compiled
backend (_kernels) implements the same update with explicit loops; both
must produce bit-compatible results on the same inputs up to the usual
reassociation differences of vectorized arithmetic.

The update follows the realization documented in state.py: upwind
convection for p, u, v, centered staggered pressure/velocity coupling,
a globally evolved auxiliary pressure P, and four auxiliary fields per
direction with implicit sigma-damping. Wall faces use one-sided "copy"
closures for the layer source terms (value of the nearest interior
face/cell).

Inflow ghost values for the upwind transport terms are chosen per
field; the choice controls which numerical boundary condition the
scheme imposes at a wall on the transported quantity and is decisive
for the stability of the wall/layer coupling (see _upwind_x_neumann):
zero-gradient for P, u and v; zero-value for p and the aux fields.
"""

import numpy as np

BACKEND = "python"


def _upwind_x(w, dx, ub):
    """Upwind d/dx along axis 0 with zero ghosts."""
    if ub >= 0:
        return np.diff(w, axis=0, prepend=0.0) / dx
    return np.diff(w, axis=0, append=0.0) / dx


def _upwind_y(w, dy, vb):
    if vb >= 0:
        return np.diff(w, axis=1, prepend=0.0) / dy
    return np.diff(w, axis=1, append=0.0) / dy


def _upwind_x_neumann(w, dx, ub):
    """Upwind d/dx along axis 0 with a copy (zero-gradient) inflow ghost.

    Used for the auxiliary pressure P and for the velocities: a zero
    inflow value at the wall makes the coupled wall/layer problem
    strongly unstable (a normal-mode analysis of the half-space problem
    shows one growing wall mode for every sigma), whereas the
    zero-gradient inflow condition admits none.
    """
    if ub >= 0:
        return np.diff(w, axis=0, prepend=w[:1, :]) / dx
    return np.diff(w, axis=0, append=w[-1:, :]) / dx


def _upwind_y_neumann(w, dy, vb):
    if vb >= 0:
        return np.diff(w, axis=1, prepend=w[:, :1]) / dy
    return np.diff(w, axis=1, append=w[:, -1:]) / dy


def _xfaces(center, closure_lo, closure_hi):
    """Centered average of a (nx, ny) array onto x-faces with copy walls."""
    out = np.empty((center.shape[0] + 1, center.shape[1]))
    out[1:-1, :] = 0.5 * (center[1:, :] + center[:-1, :])
    out[0, :] = closure_lo
    out[-1, :] = closure_hi
    return out


def _yfaces(center, closure_lo, closure_hi):
    out = np.empty((center.shape[0], center.shape[1] + 1))
    out[:, 1:-1] = 0.5 * (center[:, 1:] + center[:, :-1])
    out[:, 0] = closure_lo
    out[:, -1] = closure_hi
    return out


def _xgrad(center, dx):
    """d/dx of a (nx, ny) array onto x-faces with copy wall closures."""
    out = np.empty((center.shape[0] + 1, center.shape[1]))
    out[1:-1, :] = (center[1:, :] - center[:-1, :]) / dx
    out[0, :] = out[1, :]
    out[-1, :] = out[-2, :]
    return out


def _ygrad(center, dy):
    out = np.empty((center.shape[0], center.shape[1] + 1))
    out[:, 1:-1] = (center[:, 1:] - center[:, :-1]) / dy
    out[:, 0] = out[:, 1]
    out[:, -1] = out[:, -2]
    return out


def step_once(f, c):
    """Advance the FieldState f in place using coefficient bundle c."""
    dt, dx, dy = c.dt, c.dx, c.dy
    ub, vb, rho, cb = c.ub, c.vb, c.rho, c.c_bar
    p, u, v = f.p, f.u, f.v

    un = u - dt * (
        ub * _upwind_x_neumann(u, dx, ub) + vb * _upwind_y_neumann(u, dy, vb)
    )
    un[1:-1, :] -= (dt / (rho * dx)) * (p[1:, :] - p[:-1, :])
    un[0, :] = 0.0
    un[-1, :] = 0.0

    vn = v - dt * (
        ub * _upwind_x_neumann(v, dx, ub) + vb * _upwind_y_neumann(v, dy, vb)
    )
    vn[:, 1:-1] -= (dt / (rho * dy)) * (p[:, 1:] - p[:, :-1])
    vn[:, 0] = 0.0
    vn[:, -1] = 0.0

    div = (un[1:, :] - un[:-1, :]) / dx + (vn[:, 1:] - vn[:, :-1]) / dy

    corr = np.zeros_like(p)
    if c.has_pml:
        P = f.P
        Pn = (
            P
            - dt * (ub * _upwind_x_neumann(P, dx, ub) + vb * _upwind_y_neumann(P, dy, vb))
            + dt * p
        )

        if c.has_x:
            kx, mux = c.kx, c.mux
            dPdx = _xgrad(Pn, dx)
            pfx = _xfaces(p, p[0, :], p[-1, :])
            dpxf = _xgrad(p, dx)

            rhs1 = -c.sx_f * (cb * cb * dPdx - ub * pfx)
            a1n = (
                cb * (f.a1x - dt * vb * _upwind_y(f.a1x, dy, vb)) + dt * rhs1
            ) / c.df1x
            # discrete T-derivative of a1x, from its own update equation
            ta1 = (rhs1 - kx * c.sx_f * a1n) / cb
            ta1c = 0.5 * (ta1[1:, :] + ta1[:-1, :])
            dxa1 = (a1n[1:, :] - a1n[:-1, :]) / dx

            pxx = (dPdx[1:, :] - dPdx[:-1, :]) / dx
            dpxc = 0.5 * (dpxf[1:, :] + dpxf[:-1, :])
            a2n = (
                cb * (f.a2x - dt * vb * _upwind_y(f.a2x, dy, vb))
                + dt * (-c.sx_c * (cb * cb * pxx - ub * dpxc))
            ) / c.dc1x
            a3n = (
                cb * (f.a3x - dt * vb * _upwind_y(f.a3x, dy, vb))
                + dt * (-kx * c.sx_c * (dxa1 - mux * ta1c))
            ) / c.dc1x
            rx = ub * ta1c - kx * (dxa1 + a3n) - cb * cb * a2n
            a4n = (
                cb * (f.a4x - dt * vb * _upwind_y(f.a4x, dy, vb))
                + dt * (-c.sx_c * (cb * cb * dpxc + ub * c.rc2 * div + ub * rx))
            ) / c.dc2x
            corr += c.mx * (ub * a4n + rx)
            f.a1x, f.a2x, f.a3x, f.a4x = a1n, a2n, a3n, a4n

        if c.has_y:
            ky, muy = c.ky, c.muy
            dPdy = _ygrad(Pn, dy)
            pfy = _yfaces(p, p[:, 0], p[:, -1])
            dpyf = _ygrad(p, dy)

            rhs1 = -c.sy_f * (cb * cb * dPdy - vb * pfy)
            a1n = (
                cb * (f.a1y - dt * ub * _upwind_x(f.a1y, dx, ub)) + dt * rhs1
            ) / c.df1y
            ta1 = (rhs1 - ky * c.sy_f * a1n) / cb
            ta1c = 0.5 * (ta1[:, 1:] + ta1[:, :-1])
            dya1 = (a1n[:, 1:] - a1n[:, :-1]) / dy

            pyy = (dPdy[:, 1:] - dPdy[:, :-1]) / dy
            dpyc = 0.5 * (dpyf[:, 1:] + dpyf[:, :-1])
            a2n = (
                cb * (f.a2y - dt * ub * _upwind_x(f.a2y, dx, ub))
                + dt * (-c.sy_c * (cb * cb * pyy - vb * dpyc))
            ) / c.dc1y
            a3n = (
                cb * (f.a3y - dt * ub * _upwind_x(f.a3y, dx, ub))
                + dt * (-ky * c.sy_c * (dya1 - muy * ta1c))
            ) / c.dc1y
            ry = vb * ta1c - ky * (dya1 + a3n) - cb * cb * a2n
            a4n = (
                cb * (f.a4y - dt * ub * _upwind_x(f.a4y, dx, ub))
                + dt * (-c.sy_c * (cb * cb * dpyc + vb * c.rc2 * div + vb * ry))
            ) / c.dc2y
            corr += c.my * (vb * a4n + ry)
            f.a1y, f.a2y, f.a3y, f.a4y = a1n, a2n, a3n, a4n

        f.P = Pn

    conv = ub * _upwind_x(p, dx, ub) + vb * _upwind_y(p, dy, vb)
    pn = (p - dt * (conv + c.rc2 * div + corr - c.lam * p)) / (1.0 + dt * c.lam)
    f.p, f.u, f.v = pn, un, vn
