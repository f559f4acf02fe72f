"""Matrices with univariate polynomial entries in the symbol of d/dx.

Construction of the Euler symbol, its left/diagonal/right factors, the
pressure-reduction product, and the enlarged second-model symbol, all at a
fixed (omega, k); plus an independent Smith-diagonal computation via gcds
of k x k minors.

Coefficient arithmetic is complex floating point; zero tests and gcd degree
decisions use a relative tolerance (default 1e-9), which is ample at the
3x3 / 4x4, degree <= 4 scale of this problem.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .core import FlowParams, FourierPoint, PmlAuxConstants, validate_flow
from .errors import DegenerateFrequency, SingularMatrix

ZERO_TOL = 1e-9


class Poly:
    """Univariate polynomial with complex coefficients, ascending degree.

    The zero polynomial has degree -1.
    """

    __slots__ = ("c",)

    def __init__(self, coeffs=()):
        c = np.asarray(list(coeffs), dtype=complex)
        n = len(c)
        while n > 0 and c[n - 1] == 0:
            n -= 1
        self.c = c[:n].copy()

    @property
    def degree(self) -> int:
        return len(self.c) - 1

    @property
    def is_zero(self) -> bool:
        return len(self.c) == 0

    @property
    def norm(self) -> float:
        return float(np.max(np.abs(self.c))) if len(self.c) else 0.0

    def __call__(self, lam: complex) -> complex:
        acc = 0.0 + 0.0j
        for ck in self.c[::-1]:
            acc = acc * lam + ck
        return acc

    def __add__(self, other):
        other = _as_poly(other)
        n = max(len(self.c), len(other.c))
        a = np.zeros(n, dtype=complex)
        a[: len(self.c)] += self.c
        a[: len(other.c)] += other.c
        return Poly(a)

    def __neg__(self):
        return Poly(-self.c)

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __mul__(self, other):
        other = _as_poly(other)
        if self.is_zero or other.is_zero:
            return Poly()
        return Poly(np.convolve(self.c, other.c))

    __rmul__ = __mul__
    __radd__ = __add__

    def __divmod__(self, other):
        other = _as_poly(other)
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        rem = self.c.copy().astype(complex)
        dq = len(rem) - len(other.c)
        if dq < 0:
            return Poly(), Poly(rem)
        quot = np.zeros(dq + 1, dtype=complex)
        lead = other.c[-1]
        for i in range(dq, -1, -1):
            q = rem[i + len(other.c) - 1] / lead
            quot[i] = q
            rem[i : i + len(other.c)] -= q * other.c
        return Poly(quot), Poly(rem[: len(other.c) - 1])

    def trim(self, abs_tol: float) -> "Poly":
        """Drop coefficients below abs_tol."""
        c = np.where(np.abs(self.c) <= abs_tol, 0.0, self.c)
        return Poly(c)

    def monic(self) -> "Poly":
        if self.is_zero:
            return Poly()
        return Poly(self.c / self.c[-1])

    def __repr__(self):
        return f"Poly({list(self.c)})"


def _as_poly(x) -> Poly:
    if isinstance(x, Poly):
        return x
    return Poly([complex(x)])


def poly_gcd(a: Poly, b: Poly, tol: float = ZERO_TOL) -> Poly:
    """Monic gcd by the Euclidean algorithm with coefficient chopping.

    Both arguments are normalized to monic first (the gcd is defined only up
    to scalars) so that the chop thresholds are meaningful when the inputs
    have very different coefficient magnitudes.
    """
    a, b = _as_poly(a).monic(), _as_poly(b).monic()
    a = a.trim(tol * a.norm)
    b = b.trim(tol * b.norm)
    if a.degree < b.degree:
        a, b = b, a
    while not b.is_zero:
        _, r = divmod(a, b)
        r = r.trim(tol * max(a.norm, b.norm, 1.0))
        a, b = b, r.monic()
    return a.monic()


def poly_gcd_many(polys, tol: float = ZERO_TOL) -> Poly:
    g = Poly()
    for p in polys:
        g = poly_gcd(g, p, tol) if not g.is_zero else _as_poly(p).monic()
        if g.degree == 0:
            break
    return g


class PolyMatrix:
    """Rectangular matrix of Poly entries."""

    def __init__(self, entries):
        self.entries = [[_as_poly(e) for e in row] for row in entries]
        self.rows = len(self.entries)
        self.cols = len(self.entries[0]) if self.rows else 0
        for row in self.entries:
            if len(row) != self.cols:
                raise ValueError("ragged entry rows")

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def evaluate(self, lam: complex) -> np.ndarray:
        out = np.empty((self.rows, self.cols), dtype=complex)
        for i in range(self.rows):
            for j in range(self.cols):
                out[i, j] = self.entries[i][j](lam)
        return out

    def __matmul__(self, other: "PolyMatrix") -> "PolyMatrix":
        if self.cols != other.rows:
            raise ValueError("dimension mismatch")
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = Poly()
                for k in range(self.cols):
                    acc = acc + self.entries[i][k] * other.entries[k][j]
                row.append(acc)
            out.append(row)
        return PolyMatrix(out)

    def __sub__(self, other: "PolyMatrix") -> "PolyMatrix":
        return PolyMatrix(
            [
                [self.entries[i][j] - other.entries[i][j] for j in range(self.cols)]
                for i in range(self.rows)
            ]
        )

    def det(self) -> Poly:
        if self.rows != self.cols:
            raise ValueError("determinant of non-square matrix")
        return _det(self.entries)

    def minor_dets(self, k: int):
        """Determinants of all k x k submatrices."""
        for ri in combinations(range(self.rows), k):
            for ci in combinations(range(self.cols), k):
                sub = [[self.entries[i][j] for j in ci] for i in ri]
                yield _det(sub)


def _det(rows) -> Poly:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    acc = Poly()
    sign = 1.0
    for j in range(n):
        if not rows[0][j].is_zero:
            sub = [[rows[i][jj] for jj in range(n) if jj != j] for i in range(1, n)]
            acc = acc + sign * (rows[0][j] * _det(sub))
        sign = -sign
    return acc


@dataclass
class SmithDiagonal:
    """Diagonal d_k = LD_k / LD_{k-1}, monic, unique up to scalars."""

    d: list

    def divisibility_residual(self) -> float:
        """Max relative remainder norm of d_k | d_{k+1}."""
        worst = 0.0
        for a, b in zip(self.d, self.d[1:]):
            _, r = divmod(b, a)
            worst = max(worst, r.norm / max(b.norm, 1.0))
        return worst


def smith_diagonal(m: PolyMatrix, tol: float = ZERO_TOL) -> SmithDiagonal:
    """Smith diagonal via monic gcds of k x k minor determinants."""
    if m.rows != m.cols:
        raise ValueError("Smith diagonal requires a square matrix")
    n = m.rows
    det = m.det()
    if det.is_zero or det.norm <= tol:
        raise SingularMatrix("determinant is the zero polynomial")
    lds = [Poly([1.0])]
    for k in range(1, n + 1):
        scale = max((p.norm for p in m.minor_dets(k)), default=0.0)
        minors = [p for p in m.minor_dets(k) if p.norm > tol * max(scale, 1.0)]
        lds.append(poly_gcd_many(minors, tol))
    d = []
    for k in range(1, n + 1):
        q, _ = divmod(lds[k], lds[k - 1])
        d.append(q.monic())
    return SmithDiagonal(d)


# --- symbol builders at fixed (omega, k) ----------------------------------


def transport_symbol(flow: FlowParams, pt: FourierPoint) -> Poly:
    """First-order transport operator: u_bar*lambda + i(omega + k v_bar)."""
    return Poly([pt.s(flow), flow.u_bar])


def advective_symbol(flow: FlowParams, pt: FourierPoint) -> Poly:
    """Advective wave operator as a quadratic in lambda."""
    u, v, c = flow.u_bar, flow.v_bar, flow.c_bar
    w, k = pt.omega, pt.k
    c0 = -(w**2) - 2 * w * k * v + (c**2 - v**2) * k**2
    c1 = 2j * u * (w + k * v)
    c2 = -(c**2 - u**2)
    return Poly([c0, c1, c2])


def pml_stretch(flow: FlowParams, pt: FourierPoint, sigma: float):
    """Affine symbol (a, b) of d/dx^pml: lambda -> a*lambda + b.

    a is the rational damping factor; b = (1-a) * mu_x * s.
    """
    c = flow.c_bar
    kx = c**2 - flow.u_bar**2
    s = pt.s(flow)
    den = c * s + kx * sigma
    if den == 0:
        raise DegenerateFrequency(
            f"c*s + (c^2-u^2)*sigma vanishes at omega={pt.omega}, k={pt.k}"
        )
    a = c * s / den
    b = (1 - a) * PmlAuxConstants.from_flow(flow).mu_x * s
    return a, b


def advective_pml_symbol(flow: FlowParams, pt: FourierPoint, sigma: float) -> Poly:
    """Advective wave operator with d/dx replaced by d/dx^pml."""
    a, b = pml_stretch(flow, pt, sigma)
    base = advective_symbol(flow, pt)
    c0, c1, c2 = (base.c.tolist() + [0.0] * 3)[:3]
    return Poly([c2 * b * b + c1 * b + c0, 2 * c2 * a * b + c1 * a, c2 * a * a])


def build_euler_symbol(flow: FlowParams, pt: FourierPoint) -> PolyMatrix:
    """The 3x3 Euler symbol in (p, u, v) at fixed (omega, k)."""
    validate_flow(flow)
    g = transport_symbol(flow, pt)
    rho, c, k = flow.rho_bar, flow.c_bar, pt.k
    return PolyMatrix(
        [
            [g, Poly([0, rho * c**2]), Poly([1j * rho * c**2 * k])],
            [Poly([0, 1 / rho]), g, Poly()],
            [Poly([1j * k / rho]), Poly(), g],
        ]
    )


def build_factors(flow: FlowParams, pt: FourierPoint):
    """Left, diagonal, and right factors with A = E D F and det E = det F = 1.

    E is the unique polynomial left factor matching this F and D; its
    (3,2) entry is quadratic in lambda.
    """
    validate_flow(flow, for_modes=True)
    u, v, rho, c = flow.u_bar, flow.v_bar, flow.rho_bar, flow.c_bar
    w, k = pt.omega, pt.k
    s = pt.s(flow)
    if k == 0 or s == 0:
        raise DegenerateFrequency(f"k={k}, omega+k*v_bar={w + k * v} must be nonzero")
    g = transport_symbol(flow, pt)
    gl = transport_symbol(flow, pt) * advective_symbol(flow, pt)
    kx = c**2 - u**2

    d = PolyMatrix([[1, 0, 0], [0, 1, 0], [0, 0, gl]])

    e2_den = c**2 * k * (w + k * v)
    e2 = Poly(
        [
            u * u * (s * s + c**2 * k**2) / e2_den,
            u * (2 * u**2 - c**2) * s / e2_den,
            -u * u * kx / e2_den,
        ]
    )
    e = PolyMatrix(
        [
            [Poly([-1j * rho * c**2 * k]), 0, 0],
            [0, Poly([-u]), 0],
            [-1 * g, e2, Poly([-1j / (c**2 * k * rho * u)])],
        ]
    )

    f = PolyMatrix(
        [
            [
                Poly([-s / (1j * k * rho * c**2), -u / (1j * k * rho * c**2)]),
                Poly([0, -1 / (1j * k)]),
                Poly([-1.0]),
            ],
            [Poly([0, -1 / (rho * u)]), Poly([-s / u, -1.0]), Poly()],
            [Poly([-u / s]), Poly([-rho * u**2 / s]), Poly()],
        ]
    )
    return e, d, f


def pressure_reduction_matrix(flow: FlowParams, pt: FourierPoint) -> PolyMatrix:
    """Left multiplier that turns the first Euler row into the wave operator."""
    rho, c, k = flow.rho_bar, flow.c_bar, pt.k
    g = transport_symbol(flow, pt)
    return PolyMatrix(
        [
            [g, Poly([0, -rho * c**2]), Poly([-1j * rho * c**2 * k])],
            [0, 1, 0],
            [0, 0, 1],
        ]
    )


def build_model2_symbol(
    flow: FlowParams, pt: FourierPoint, sigma: float
) -> PolyMatrix:
    """The enlarged 4x4 symbol in (P, p, u, v) for the second PML model."""
    validate_flow(flow)
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    rho, c, k = flow.rho_bar, flow.c_bar, pt.k
    g = transport_symbol(flow, pt)
    ldiff = advective_pml_symbol(flow, pt, sigma) - advective_symbol(flow, pt)
    return PolyMatrix(
        [
            [g, Poly([-1.0]), Poly(), Poly()],
            [ldiff, g, Poly([0, rho * c**2]), Poly([1j * rho * c**2 * k])],
            [Poly(), Poly([0, 1 / rho]), g, Poly()],
            [Poly(), Poly([1j * k / rho]), Poly(), g],
        ]
    )


# --- verification ----------------------------------------------------------


def _sample_points(samples, n=20, seed=0):
    if samples is not None:
        return list(samples)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return list(z / np.maximum(1.0, np.abs(z)))


def verify_factorization(flow: FlowParams, pt: FourierPoint, samples=None) -> float:
    """Max relative Frobenius residual of E(l)D(l)F(l) - A(l) over samples."""
    e, d, f = build_factors(flow, pt)
    a = build_euler_symbol(flow, pt)
    worst = 0.0
    for lam in _sample_points(samples):
        am = a.evaluate(lam)
        res = e.evaluate(lam) @ d.evaluate(lam) @ f.evaluate(lam) - am
        worst = max(worst, np.linalg.norm(res) / np.linalg.norm(am))
    return worst


def verify_pressure_reduction(flow: FlowParams, pt: FourierPoint, samples=None) -> float:
    """Max relative residual of El*A against its reduced target."""
    validate_flow(flow)
    el = pressure_reduction_matrix(flow, pt)
    a = build_euler_symbol(flow, pt)
    g = transport_symbol(flow, pt)
    target = PolyMatrix(
        [
            [advective_symbol(flow, pt), Poly(), Poly()],
            [Poly([0, 1 / flow.rho_bar]), g, Poly()],
            [Poly([1j * pt.k / flow.rho_bar]), Poly(), g],
        ]
    )
    prod = el @ a
    worst = 0.0
    for lam in _sample_points(samples):
        tm = target.evaluate(lam)
        res = prod.evaluate(lam) - tm
        worst = max(worst, np.linalg.norm(res) / max(np.linalg.norm(tm), 1e-300))
    return worst
