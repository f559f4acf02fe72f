# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled time step kernel.

Loop-level translation of kernels_py.step_once; both backends implement
the identical update (same stencils, same ghost rules, same order of
arithmetic per element) so their results agree to rounding.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"


def step_once(f, c):
    """Advance the FieldState f in place using coefficient bundle c."""
    cdef double dt = c.dt, dx = c.dx, dy = c.dy
    cdef double ub = c.ub, vb = c.vb, rho = c.rho, cb = c.c_bar
    cdef double rc2 = c.rc2, kx = c.kx, ky = c.ky, mux = c.mux, muy = c.muy
    cdef bint has_pml = c.has_pml, has_x = c.has_x, has_y = c.has_y

    cdef double[:, ::1] p = f.p, u = f.u, v = f.v
    cdef Py_ssize_t nx = p.shape[0], ny = p.shape[1]
    cdef Py_ssize_t i, j

    cdef double[:, ::1] lam = c.lam
    un_a = np.empty((nx + 1, ny))
    vn_a = np.empty((nx, ny + 1))
    pn_a = np.empty((nx, ny))
    div_a = np.empty((nx, ny))
    corr_a = np.zeros((nx, ny))
    cdef double[:, ::1] un = un_a, vn = vn_a, pn = pn_a
    cdef double[:, ::1] div = div_a, corr = corr_a

    cdef double gx, gy, wl, wr
    # u update: upwind convection with zero-gradient inflow ghosts,
    # centered pressure gradient, pinned wall faces.
    for i in range(nx + 1):
        for j in range(ny):
            if ub >= 0:
                wl = u[i - 1, j] if i > 0 else u[0, j]
                gx = (u[i, j] - wl) / dx
            else:
                wr = u[i + 1, j] if i < nx else u[nx, j]
                gx = (wr - u[i, j]) / dx
            if vb >= 0:
                wl = u[i, j - 1] if j > 0 else u[i, 0]
                gy = (u[i, j] - wl) / dy
            else:
                wr = u[i, j + 1] if j < ny - 1 else u[i, ny - 1]
                gy = (wr - u[i, j]) / dy
            un[i, j] = u[i, j] - dt * (ub * gx + vb * gy)
            if 0 < i < nx:
                un[i, j] -= (dt / (rho * dx)) * (p[i, j] - p[i - 1, j])
    for j in range(ny):
        un[0, j] = 0.0
        un[nx, j] = 0.0

    for i in range(nx):
        for j in range(ny + 1):
            if ub >= 0:
                wl = v[i - 1, j] if i > 0 else v[0, j]
                gx = (v[i, j] - wl) / dx
            else:
                wr = v[i + 1, j] if i < nx - 1 else v[nx - 1, j]
                gx = (wr - v[i, j]) / dx
            if vb >= 0:
                wl = v[i, j - 1] if j > 0 else v[i, 0]
                gy = (v[i, j] - wl) / dy
            else:
                wr = v[i, j + 1] if j < ny else v[i, ny]
                gy = (wr - v[i, j]) / dy
            vn[i, j] = v[i, j] - dt * (ub * gx + vb * gy)
            if 0 < j < ny:
                vn[i, j] -= (dt / (rho * dy)) * (p[i, j] - p[i, j - 1])
    for i in range(nx):
        vn[i, 0] = 0.0
        vn[i, ny] = 0.0

    for i in range(nx):
        for j in range(ny):
            div[i, j] = (un[i + 1, j] - un[i, j]) / dx + (
                vn[i, j + 1] - vn[i, j]
            ) / dy

    cdef double[:, ::1] P, Pn
    cdef double[:, ::1] sx_c, sx_f, sy_c, sy_f
    cdef double[:, ::1] df1x, dc1x, dc2x, df1y, dc1y, dc2y, mx, my
    cdef double[:, ::1] a1, a2, a3, a4
    cdef double[:, ::1] dPd, pf, dpf, rhs1, a1n, ta1, a2n, a3n, a4n
    cdef double ta1c, dxa1, pxx, dpxc, rx, trans

    if has_pml:
        P = f.P
        Pn_a = np.empty((nx, ny))
        Pn = Pn_a
        # P transport: upwind with zero-gradient inflow ghosts, forced by p.
        for i in range(nx):
            for j in range(ny):
                if ub >= 0:
                    wl = P[i - 1, j] if i > 0 else P[0, j]
                    gx = (P[i, j] - wl) / dx
                else:
                    wr = P[i + 1, j] if i < nx - 1 else P[nx - 1, j]
                    gx = (wr - P[i, j]) / dx
                if vb >= 0:
                    wl = P[i, j - 1] if j > 0 else P[i, 0]
                    gy = (P[i, j] - wl) / dy
                else:
                    wr = P[i, j + 1] if j < ny - 1 else P[i, ny - 1]
                    gy = (wr - P[i, j]) / dy
                Pn[i, j] = P[i, j] - dt * (ub * gx + vb * gy) + dt * p[i, j]

        if has_x:
            sx_c = c.sx_c
            sx_f = c.sx_f
            df1x = c.df1x
            dc1x = c.dc1x
            dc2x = c.dc2x
            mx = c.mx
            a1 = f.a1x
            a2 = f.a2x
            a3 = f.a3x
            a4 = f.a4x
            dPd_a = np.empty((nx + 1, ny))
            pf_a = np.empty((nx + 1, ny))
            dpf_a = np.empty((nx + 1, ny))
            rhs1_a = np.empty((nx + 1, ny))
            a1n_a = np.empty((nx + 1, ny))
            ta1_a = np.empty((nx + 1, ny))
            a2n_a = np.empty((nx, ny))
            a3n_a = np.empty((nx, ny))
            a4n_a = np.empty((nx, ny))
            dPd = dPd_a
            pf = pf_a
            dpf = dpf_a
            rhs1 = rhs1_a
            a1n = a1n_a
            ta1 = ta1_a
            a2n = a2n_a
            a3n = a3n_a
            a4n = a4n_a

            # face gradients/averages of P and p with copy wall closures
            for j in range(ny):
                for i in range(1, nx):
                    dPd[i, j] = (Pn[i, j] - Pn[i - 1, j]) / dx
                    dpf[i, j] = (p[i, j] - p[i - 1, j]) / dx
                    pf[i, j] = 0.5 * (p[i, j] + p[i - 1, j])
                dPd[0, j] = dPd[1, j]
                dPd[nx, j] = dPd[nx - 1, j]
                dpf[0, j] = dpf[1, j]
                dpf[nx, j] = dpf[nx - 1, j]
                pf[0, j] = p[0, j]
                pf[nx, j] = p[nx - 1, j]

            for i in range(nx + 1):
                for j in range(ny):
                    rhs1[i, j] = -sx_f[i, j] * (cb * cb * dPd[i, j] - ub * pf[i, j])
                    if vb >= 0:
                        wl = a1[i, j - 1] if j > 0 else 0.0
                        gy = (a1[i, j] - wl) / dy
                    else:
                        wr = a1[i, j + 1] if j < ny - 1 else 0.0
                        gy = (wr - a1[i, j]) / dy
                    a1n[i, j] = (
                        cb * (a1[i, j] - dt * vb * gy) + dt * rhs1[i, j]
                    ) / df1x[i, j]
                    ta1[i, j] = (rhs1[i, j] - kx * sx_f[i, j] * a1n[i, j]) / cb

            for i in range(nx):
                for j in range(ny):
                    ta1c = 0.5 * (ta1[i + 1, j] + ta1[i, j])
                    dxa1 = (a1n[i + 1, j] - a1n[i, j]) / dx
                    pxx = (dPd[i + 1, j] - dPd[i, j]) / dx
                    dpxc = 0.5 * (dpf[i + 1, j] + dpf[i, j])

                    if vb >= 0:
                        wl = a2[i, j - 1] if j > 0 else 0.0
                        trans = a2[i, j] - dt * vb * (a2[i, j] - wl) / dy
                    else:
                        wr = a2[i, j + 1] if j < ny - 1 else 0.0
                        trans = a2[i, j] - dt * vb * (wr - a2[i, j]) / dy
                    a2n[i, j] = (
                        cb * trans
                        + dt * (-sx_c[i, j] * (cb * cb * pxx - ub * dpxc))
                    ) / dc1x[i, j]

                    if vb >= 0:
                        wl = a3[i, j - 1] if j > 0 else 0.0
                        trans = a3[i, j] - dt * vb * (a3[i, j] - wl) / dy
                    else:
                        wr = a3[i, j + 1] if j < ny - 1 else 0.0
                        trans = a3[i, j] - dt * vb * (wr - a3[i, j]) / dy
                    a3n[i, j] = (
                        cb * trans
                        + dt * (-kx * sx_c[i, j] * (dxa1 - mux * ta1c))
                    ) / dc1x[i, j]

                    rx = ub * ta1c - kx * (dxa1 + a3n[i, j]) - cb * cb * a2n[i, j]

                    if vb >= 0:
                        wl = a4[i, j - 1] if j > 0 else 0.0
                        trans = a4[i, j] - dt * vb * (a4[i, j] - wl) / dy
                    else:
                        wr = a4[i, j + 1] if j < ny - 1 else 0.0
                        trans = a4[i, j] - dt * vb * (wr - a4[i, j]) / dy
                    a4n[i, j] = (
                        cb * trans
                        + dt * (
                            -sx_c[i, j]
                            * (cb * cb * dpxc + ub * rc2 * div[i, j] + ub * rx)
                        )
                    ) / dc2x[i, j]
                    corr[i, j] += mx[i, j] * (ub * a4n[i, j] + rx)

            f.a1x, f.a2x, f.a3x, f.a4x = a1n_a, a2n_a, a3n_a, a4n_a

        if has_y:
            sy_c = c.sy_c
            sy_f = c.sy_f
            df1y = c.df1y
            dc1y = c.dc1y
            dc2y = c.dc2y
            my = c.my
            a1 = f.a1y
            a2 = f.a2y
            a3 = f.a3y
            a4 = f.a4y
            dPd_a = np.empty((nx, ny + 1))
            pf_a = np.empty((nx, ny + 1))
            dpf_a = np.empty((nx, ny + 1))
            rhs1_a = np.empty((nx, ny + 1))
            a1n_a = np.empty((nx, ny + 1))
            ta1_a = np.empty((nx, ny + 1))
            a2n_a = np.empty((nx, ny))
            a3n_a = np.empty((nx, ny))
            a4n_a = np.empty((nx, ny))
            dPd = dPd_a
            pf = pf_a
            dpf = dpf_a
            rhs1 = rhs1_a
            a1n = a1n_a
            ta1 = ta1_a
            a2n = a2n_a
            a3n = a3n_a
            a4n = a4n_a

            for i in range(nx):
                for j in range(1, ny):
                    dPd[i, j] = (Pn[i, j] - Pn[i, j - 1]) / dy
                    dpf[i, j] = (p[i, j] - p[i, j - 1]) / dy
                    pf[i, j] = 0.5 * (p[i, j] + p[i, j - 1])
                dPd[i, 0] = dPd[i, 1]
                dPd[i, ny] = dPd[i, ny - 1]
                dpf[i, 0] = dpf[i, 1]
                dpf[i, ny] = dpf[i, ny - 1]
                pf[i, 0] = p[i, 0]
                pf[i, ny] = p[i, ny - 1]

            for i in range(nx):
                for j in range(ny + 1):
                    rhs1[i, j] = -sy_f[i, j] * (cb * cb * dPd[i, j] - vb * pf[i, j])
                    if ub >= 0:
                        wl = a1[i - 1, j] if i > 0 else 0.0
                        gx = (a1[i, j] - wl) / dx
                    else:
                        wr = a1[i + 1, j] if i < nx - 1 else 0.0
                        gx = (wr - a1[i, j]) / dx
                    a1n[i, j] = (
                        cb * (a1[i, j] - dt * ub * gx) + dt * rhs1[i, j]
                    ) / df1y[i, j]
                    ta1[i, j] = (rhs1[i, j] - ky * sy_f[i, j] * a1n[i, j]) / cb

            for i in range(nx):
                for j in range(ny):
                    ta1c = 0.5 * (ta1[i, j + 1] + ta1[i, j])
                    dxa1 = (a1n[i, j + 1] - a1n[i, j]) / dy
                    pxx = (dPd[i, j + 1] - dPd[i, j]) / dy
                    dpxc = 0.5 * (dpf[i, j + 1] + dpf[i, j])

                    if ub >= 0:
                        wl = a2[i - 1, j] if i > 0 else 0.0
                        trans = a2[i, j] - dt * ub * (a2[i, j] - wl) / dx
                    else:
                        wr = a2[i + 1, j] if i < nx - 1 else 0.0
                        trans = a2[i, j] - dt * ub * (wr - a2[i, j]) / dx
                    a2n[i, j] = (
                        cb * trans
                        + dt * (-sy_c[i, j] * (cb * cb * pxx - vb * dpxc))
                    ) / dc1y[i, j]

                    if ub >= 0:
                        wl = a3[i - 1, j] if i > 0 else 0.0
                        trans = a3[i, j] - dt * ub * (a3[i, j] - wl) / dx
                    else:
                        wr = a3[i + 1, j] if i < nx - 1 else 0.0
                        trans = a3[i, j] - dt * ub * (wr - a3[i, j]) / dx
                    a3n[i, j] = (
                        cb * trans
                        + dt * (-ky * sy_c[i, j] * (dxa1 - muy * ta1c))
                    ) / dc1y[i, j]

                    rx = vb * ta1c - ky * (dxa1 + a3n[i, j]) - cb * cb * a2n[i, j]

                    if ub >= 0:
                        wl = a4[i - 1, j] if i > 0 else 0.0
                        trans = a4[i, j] - dt * ub * (a4[i, j] - wl) / dx
                    else:
                        wr = a4[i + 1, j] if i < nx - 1 else 0.0
                        trans = a4[i, j] - dt * ub * (wr - a4[i, j]) / dx
                    a4n[i, j] = (
                        cb * trans
                        + dt * (
                            -sy_c[i, j]
                            * (cb * cb * dpxc + vb * rc2 * div[i, j] + vb * rx)
                        )
                    ) / dc2y[i, j]
                    corr[i, j] += my[i, j] * (vb * a4n[i, j] + rx)

            f.a1y, f.a2y, f.a3y, f.a4y = a1n_a, a2n_a, a3n_a, a4n_a

        f.P = Pn_a

    # p update: zero-value inflow ghosts for its own convection, implicit
    # diagonal relaxation lam.
    for i in range(nx):
        for j in range(ny):
            if ub >= 0:
                wl = p[i - 1, j] if i > 0 else 0.0
                gx = (p[i, j] - wl) / dx
            else:
                wr = p[i + 1, j] if i < nx - 1 else 0.0
                gx = (wr - p[i, j]) / dx
            if vb >= 0:
                wl = p[i, j - 1] if j > 0 else 0.0
                gy = (p[i, j] - wl) / dy
            else:
                wr = p[i, j + 1] if j < ny - 1 else 0.0
                gy = (wr - p[i, j]) / dy
            pn[i, j] = (
                p[i, j]
                - dt * (
                    ub * gx + vb * gy + rc2 * div[i, j] + corr[i, j]
                    - lam[i, j] * p[i, j]
                )
            ) / (1.0 + dt * lam[i, j])

    f.p, f.u, f.v = pn_a, un_a, vn_a
