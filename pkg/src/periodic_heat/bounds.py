"""Constructive a priori constants and error bounds.

All values are evaluated in ordinary floating point. They are not rigorous
enclosures: no directed rounding or interval arithmetic is used, and every
:class:`BoundReport` says so through ``rigorous=False``.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .dense_linalg import GenEigDecomp, cholesky, matexp, two_norm

UNDERFLOW_CLAMP = 1e-300
LITERAL_CHECK_MAX_N = 64
LITERAL_CHECK_RTOL = 1e-10


class BoundDomainError(ValueError):
    """Raised when a contraction factor is not strictly below one."""


def _clamped_exp(x):
    v = math.exp(x)
    return (0.0, True) if v < UNDERFLOW_CLAMP else (v, False)


def _check_kappa(kappa1):
    if not 0 <= kappa1 < 1:
        raise BoundDomainError(f"kappa1 must lie in [0, 1), got {kappa1}")


@dataclass(frozen=True)
class BoundInputs:
    nu: float
    T: float
    lambda1: float
    c_p: float
    c_omega: float
    c_inv: float
    c_j: float
    f_norm: float

    def __post_init__(self):
        for name in ("nu", "T", "lambda1", "c_p", "c_omega", "c_inv", "c_j"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not self.f_norm >= 0:
            raise ValueError(f"f_norm must be nonnegative, got {self.f_norm}")


@dataclass(frozen=True)
class ContinuousBounds:
    u0_l2_a: float
    u0_l2_b: float
    u0_grad: float
    ut_norm: float
    energy: float


@dataclass(frozen=True)
class NonhomBounds:
    xi_t: float
    xi_grad: float
    xi_h_t: float
    xi_h_grad: float
    err_grad: float
    err_l2_at_T: float


@dataclass(frozen=True)
class BoundReport:
    kappa1: float
    K1: float
    K2: float
    h1_bound: float
    l2_bound: float
    continuous: ContinuousBounds
    rigorous: bool = False
    underflow_clamped: bool = False
    notes: tuple = field(default_factory=tuple)


def kappa1_literal(stiffness, mass, nu: float, T: float) -> float:
    """2-norm of ``D^{T/2} exp(-nu T L^{-1} D) D^{-T/2}`` formed explicitly.

    ``D = D^{1/2} D^{T/2}`` is the Cholesky factorization.
    """
    stiffness = np.asarray(stiffness, dtype=float)
    mass = np.asarray(mass, dtype=float)
    g = cholesky(stiffness)
    prop = matexp(-nu * T * np.linalg.solve(mass, stiffness))
    left = g.T @ prop
    return two_norm(solve_triangular(g, left.T, lower=True).T)


def kappa1(decomp: GenEigDecomp, nu: float, T: float, fem=None) -> float:
    """Contraction factor of the discrete period map in the discrete H^1_0 norm.

    Computed as ``exp(-nu T mu_min)``. When ``fem`` (a mass/stiffness pair)
    is given and ``n <= 64`` the value is cross-checked against the explicit
    matrix-norm expression.
    """
    if not (nu > 0 and T > 0):
        raise ValueError(f"nu and T must be positive, got nu={nu}, T={T}")
    mu_min = decomp.mu_min
    if not mu_min > 0:
        raise BoundDomainError(f"smallest eigenvalue {mu_min} is not positive; kappa1 would be >= 1")
    value, _ = _clamped_exp(-nu * T * mu_min)
    _check_kappa(value)
    if fem is not None and decomp.n <= LITERAL_CHECK_MAX_N:
        literal = kappa1_literal(fem.stiffness, fem.mass, nu, T)
        if value > 0 and abs(literal - value) > LITERAL_CHECK_RTOL * value:
            raise ArithmeticError(
                f"kappa1 mismatch: spectral {value:.17g} vs matrix norm {literal:.17g}"
            )
    return value


def _period_factor(nu, lambda1, T):
    # (1 - exp(-nu lambda1 T))^{-1}
    return 1.0 / -math.expm1(-nu * lambda1 * T)


def continuous_bounds(inp: BoundInputs) -> ContinuousBounds:
    """A priori bounds for the exact periodic solution."""
    a = _period_factor(inp.nu, inp.lambda1, inp.T)
    f = inp.f_norm
    return ContinuousBounds(
        u0_l2_a=a * inp.c_p / math.sqrt(inp.nu) * f,
        u0_l2_b=a * math.sqrt(inp.T) * f,
        u0_grad=a / math.sqrt(inp.nu) * f,
        ut_norm=f,
        energy=(inp.c_p ** 2 / inp.nu + inp.T * a ** 2) * f ** 2,
    )


def nonhom_bounds(f_norm, grad_xi0, grad_zeta_h, xi0_minus_zeta_h_l2, nu, c_p, c_omega,
                  *, xi0_l2=None, zeta_h_l2=None) -> NonhomBounds:
    """Bounds for the initial-value problem started from ``xi0`` and its
    semidiscretization started from ``zeta_h``.

    ``xi0_l2`` and ``zeta_h_l2`` are the L2 norms of the two initial data;
    when omitted they are replaced by the Poincare upper bounds
    ``c_p * grad_xi0`` and ``c_p * grad_zeta_h``.
    """
    if not nu > 0:
        raise ValueError(f"nu must be positive, got {nu}")
    args = dict(f_norm=f_norm, grad_xi0=grad_xi0, grad_zeta_h=grad_zeta_h,
                xi0_minus_zeta_h_l2=xi0_minus_zeta_h_l2, c_p=c_p, c_omega=c_omega)
    for name, value in args.items():
        if not value >= 0:
            raise ValueError(f"{name} must be nonnegative, got {value}")
    if xi0_l2 is None:
        xi0_l2 = c_p * grad_xi0
    if zeta_h_l2 is None:
        zeta_h_l2 = c_p * grad_zeta_h
    sq = math.sqrt(nu)
    data = 4 * f_norm ** 2 + nu * (grad_xi0 ** 2 + grad_zeta_h ** 2)
    gap2 = xi0_minus_zeta_h_l2 ** 2
    return NonhomBounds(
        xi_t=f_norm + sq * grad_xi0,
        xi_grad=c_p / nu * f_norm + xi0_l2 / sq,
        xi_h_t=f_norm + sq * grad_zeta_h,
        xi_h_grad=c_p / nu * f_norm + zeta_h_l2 / sq,
        err_grad=math.sqrt(c_omega ** 2 / nu ** 2 * data + gap2 / (2 * nu)),
        err_l2_at_T=math.sqrt(2 / nu * c_omega ** 2 * data + gap2),
    )


def k_constants(nu: float, T: float, lambda1: float, kappa1: float) -> tuple[float, float]:
    """The two constants multiplying ``C_Omega(h) ||f||`` in the semidiscrete estimates."""
    _check_kappa(kappa1)
    a = _period_factor(nu, lambda1, T)
    q = (1.0 - kappa1) ** -2
    k1 = 2.0 / math.sqrt(nu) * a * math.sqrt(2.0 + q)
    k2 = math.sqrt(4.0 + 5.0 * a * a + (1.0 + a * a) * q) / nu
    return k1, k2


def full_discrete_bounds(inp: BoundInputs, K2: float, kappa1: float) -> tuple[float, float]:
    """Right-hand sides of the L2(H1_0) and L2(L2) full-discrete error estimates."""
    _check_kappa(kappa1)
    growth = (2.0 - kappa1) / (1.0 - kappa1)
    h1 = (K2 * inp.c_omega + inp.c_inv * inp.c_j * growth) * inp.f_norm
    l2 = (((3.0 - 2.0 * kappa1) / (1.0 - kappa1) * 2.0 / inp.nu + 2.0 * K2) * inp.c_omega ** 2
          + growth * inp.c_j) * inp.f_norm
    return h1, l2


def bound_report(inp: BoundInputs, decomp: GenEigDecomp, fem=None) -> BoundReport:
    """Evaluate every constant and bound for one configuration."""
    raw = -inp.nu * inp.T * decomp.mu_min
    k1v = kappa1(decomp, inp.nu, inp.T, fem)
    _, clamped = _clamped_exp(raw)
    K1, K2 = k_constants(inp.nu, inp.T, inp.lambda1, k1v)
    h1, l2 = full_discrete_bounds(inp, K2, k1v)
    notes = ["floating-point evaluation; not an interval enclosure"]
    if clamped:
        notes.append(f"kappa1 = exp({raw:.6g}) underflows {UNDERFLOW_CLAMP:g}; clamped to 0")
    return BoundReport(
        kappa1=k1v, K1=K1, K2=K2, h1_bound=h1, l2_bound=l2,
        continuous=continuous_bounds(inp), rigorous=False,
        underflow_clamped=clamped, notes=tuple(notes),
    )
