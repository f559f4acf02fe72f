"""Frequency-domain mode analysis and interface (no-reflection) checks.

Mode exponents of plane waves e^{i omega t + i k y + lambda x}, their PML
counterparts under the rational stretch of d/dx, mode vectors obtained from
the right Smith factor, and the interface systems certifying that the
reflected amplitude alpha3 vanishes for both PML models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import FlowParams, FourierPoint, PmlAuxConstants, validate_flow
from .errors import (
    BranchBoundary,
    DegenerateFrequency,
    SingularF,
    SingularInterfaceSystem,
)
from .polymat import (
    advective_pml_symbol,
    advective_symbol,
    build_factors,
    build_model2_symbol,
    pml_stretch,
    transport_symbol,
)

PROPAGATIVE = "propagative"
EVANESCENT = "evanescent"

_COND_LIMIT = 1e12


@dataclass
class ModeSet:
    lambda1: complex
    lambda2: complex
    lambda3: complex
    regime: str
    w1: np.ndarray = None
    w2: np.ndarray = None
    w3: np.ndarray = None

    @property
    def exponents(self):
        return (self.lambda1, self.lambda2, self.lambda3)


@dataclass
class PmlModeSet:
    lambda1_pml: complex
    lambda2_pml: complex
    lambda3_pml: complex
    a_factor: complex

    @property
    def exponents(self):
        return (self.lambda1_pml, self.lambda2_pml, self.lambda3_pml)


def regime_of(flow: FlowParams, pt: FourierPoint) -> str:
    """Propagative iff the wave-mode exponents are purely imaginary.

    The threshold compares |k| sqrt(c^2 - u^2) with |omega + k v|: it is the
    sign of the discriminant of the advective-wave symbol in lambda.
    """
    lhs = abs(pt.k) * math.sqrt(flow.c_bar**2 - flow.u_bar**2)
    rhs = abs(pt.omega + pt.k * flow.v_bar)
    if lhs == rhs:
        raise BranchBoundary(
            f"|k|sqrt(c^2-u^2) == |omega+k*v| = {rhs}: branch undefined"
        )
    return PROPAGATIVE if lhs < rhs else EVANESCENT


def lambdas(flow: FlowParams, pt: FourierPoint) -> ModeSet:
    """Characteristic exponents of the transport and advective-wave factors."""
    validate_flow(flow, for_modes=True)
    u, v, c = flow.u_bar, flow.v_bar, flow.c_bar
    w, k = pt.omega, pt.k
    kx = c**2 - u**2
    reg = regime_of(flow, pt)
    s = pt.s(flow)
    l1 = -s / u
    if reg == PROPAGATIVE:
        root = math.sqrt(1.0 - k**2 * kx / (w + k * v) ** 2)
        l2 = (u * s - c * s * root) / kx
        l3 = (u * s + c * s * root) / kx
    else:
        root = math.sqrt(k**2 * kx - (w + k * v) ** 2)
        l2 = (u * s - c * root) / kx
        l3 = (u * s + c * root) / kx
    return ModeSet(l1, l2, l3, reg)


def lambdas_pml(flow: FlowParams, pt: FourierPoint, sigma: float) -> PmlModeSet:
    """PML exponents: lambda1 unchanged, lambda_{2,3} stretched by 1/a."""
    base = lambdas(flow, pt)
    s = pt.s(flow)
    if s == 0:
        raise DegenerateFrequency("omega + k*v_bar = 0: stretch factor undefined")
    a, _b = pml_stretch(flow, pt, sigma)
    mu = PmlAuxConstants.from_flow(flow).mu_x
    l2p = (base.lambda2 - mu * s) / a + mu * s
    l3p = (base.lambda3 - mu * s) / a + mu * s
    return PmlModeSet(base.lambda1, l2p, l3p, a)


def mode_vectors(flow: FlowParams, pt: FourierPoint):
    """Mode vectors W_i = F(lambda_i)^{-1} (0,0,1)^T."""
    ms = lambdas(flow, pt)
    _e, _d, f = build_factors(flow, pt)
    e3 = np.array([0.0, 0.0, 1.0], dtype=complex)
    out = []
    for lam in ms.exponents:
        fm = f.evaluate(lam)
        if np.linalg.cond(fm) > _COND_LIMIT:
            raise SingularF(f"F(lambda={lam}) numerically singular")
        out.append(np.linalg.solve(fm, e3))
    return tuple(out)


def mode_set(flow: FlowParams, pt: FourierPoint) -> ModeSet:
    ms = lambdas(flow, pt)
    ms.w1, ms.w2, ms.w3 = mode_vectors(flow, pt)
    return ms


def model2_mode_vectors(flow: FlowParams, pt: FourierPoint, sigma: float):
    """Null vectors of the enlarged 4x4 symbol at the PML exponents.

    Returns (n0, n1, n2): a two-vector basis of the null space at lambda1
    (the transport exponent has multiplicity two in the enlarged system)
    and the single null vector at lambda2_pml.
    """
    pml = lambdas_pml(flow, pt, sigma)
    m2 = build_model2_symbol(flow, pt, sigma)

    def null_space(lam, dim):
        m = m2.evaluate(lam)
        _u, s, vh = np.linalg.svd(m)
        if s[0] > 0 and s[-dim] / s[0] > 1e-7:
            raise SingularInterfaceSystem(
                f"expected {dim}-dimensional null space at lambda={lam}"
            )
        return [vh[-(i + 1)].conj() for i in range(dim)]

    n0, n1 = null_space(pml.lambda1_pml, 2)
    (n2,) = null_space(pml.lambda2_pml, 1)
    return n0, n1, n2


def reflection_model1(
    flow: FlowParams,
    pt: FourierPoint,
    sigma: float,
    alpha1: complex,
    alpha2: complex,
):
    """Solve the first-model interface system for (beta1, beta2, alpha3).

    The three equations are assembled directly from the stated interface
    conditions (continuity of L/G traces and of the pml-stretched x
    derivative of the transport trace), not from their reduced forms.
    """
    ms = lambdas(flow, pt)
    pml = lambdas_pml(flow, pt, sigma)
    lw = advective_symbol(flow, pt)
    lp = advective_pml_symbol(flow, pt, sigma)
    g = transport_symbol(flow, pt)
    a, b = pml_stretch(flow, pt, sigma)
    l1, l2, l3 = ms.exponents
    l1p, l2p, _l3p = pml.exponents

    # unknowns x = (beta1, beta2, alpha3)
    mat = np.array(
        [
            [lp(l1p), lp(l2p), -lw(l3)],
            [g(l1p), g(l2p), -g(l3)],
            [g(l1p) * (a * l1p + b), g(l2p) * (a * l2p + b), -g(l3) * l3],
        ],
        dtype=complex,
    )
    rhs = np.array(
        [
            alpha1 * lw(l1) + alpha2 * lw(l2),
            alpha1 * g(l1) + alpha2 * g(l2),
            alpha1 * g(l1) * l1 + alpha2 * g(l2) * l2,
        ],
        dtype=complex,
    )
    if np.linalg.cond(mat) > _COND_LIMIT:
        raise SingularInterfaceSystem("degenerate exponent coincidence (model 1)")
    beta1, beta2, alpha3 = np.linalg.solve(mat, rhs)
    return beta1, beta2, alpha3


def reflection_model1_closed_form(
    flow: FlowParams,
    pt: FourierPoint,
    sigma: float,
    alpha1: complex,
    alpha2: complex,
):
    """Transmitted amplitudes solved by hand from the interface system."""
    ms = lambdas(flow, pt)
    pml = lambdas_pml(flow, pt, sigma)
    a, _b = pml_stretch(flow, pt, sigma)
    l1, l2, l3 = ms.exponents
    _l1p, l2p, l3p = pml.exponents
    beta1 = alpha1 * (l1 - l2) * (l1 - l3) / (a**2 * (l1 - l2p) * (l1 - l3p))
    beta2 = alpha2 * (l2 - l1) / (l2p - l1)
    return beta1, beta2


def reflection_model2(
    flow: FlowParams,
    pt: FourierPoint,
    sigma: float,
    alpha1: complex,
    alpha2: complex,
):
    """Solve the second-model interface system for (beta0, beta1, beta2, alpha3).

    Conditions at x = 0: the auxiliary pressure vanishes, p and u are
    continuous, and d/dx(p_left) = d/dx^pml(p_right).
    """
    ms = mode_set(flow, pt)
    pml = lambdas_pml(flow, pt, sigma)
    a, b = pml_stretch(flow, pt, sigma)
    n0, n1, n2 = model2_mode_vectors(flow, pt, sigma)
    l1, l2, l3 = ms.exponents
    ws = (ms.w1, ms.w2, ms.w3)
    nv = (n0, n1, n2)
    lam_p = (pml.lambda1_pml, pml.lambda1_pml, pml.lambda2_pml)

    # unknowns x = (beta0, beta1, beta2, alpha3)
    mat = np.zeros((4, 4), dtype=complex)
    rhs = np.zeros(4, dtype=complex)
    for j, (n, lp) in enumerate(zip(nv, lam_p)):
        mat[0, j] = n[0]
        mat[1, j] = n[1]
        mat[2, j] = n[1] * (a * lp + b)
        mat[3, j] = n[2]
    mat[1, 3] = -ws[2][0]
    mat[2, 3] = -ws[2][0] * l3
    mat[3, 3] = -ws[2][1]
    for alpha, w, lam in ((alpha1, ws[0], l1), (alpha2, ws[1], l2)):
        rhs[1] += alpha * w[0]
        rhs[2] += alpha * w[0] * lam
        rhs[3] += alpha * w[1]
    if np.linalg.cond(mat) > _COND_LIMIT:
        raise SingularInterfaceSystem("degenerate exponent coincidence (model 2)")
    beta0, beta1, beta2, alpha3 = np.linalg.solve(mat, rhs)
    return beta0, beta1, beta2, alpha3


def finite_layer_decay(
    flow: FlowParams, pt: FourierPoint, sigma: float, delta: float
) -> float:
    """Magnitude attenuation of the transmitted wave mode across the layer."""
    pml = lambdas_pml(flow, pt, sigma)
    return math.exp(pml.lambda2_pml.real * delta)
