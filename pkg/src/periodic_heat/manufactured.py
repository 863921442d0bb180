"""Manufactured periodic solution ``u = sin(2 pi x) sin(2 pi t + beta)`` and error measurement."""
import math
from dataclasses import dataclass

import numpy as np

from .periodic_solver import FullDiscreteSolution
from .quadrature import reference_rule

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ManufacturedProblem:
    nu: float
    beta: float = 0.0
    T: float = 1.0

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        if self.T != 1.0:
            raise ValueError("the manufactured solution has period 1; only T = 1 is supported")

    def forcing(self, x, t):
        """``f = u_t - nu u_xx``, broadcasting over ``x`` and ``t``."""
        return eval_exact(self, x, t)[2]

    def exact(self, x, t):
        return eval_exact(self, x, t)[0]


def eval_exact(p: ManufacturedProblem, x, t):
    """Return ``(u, du/dx, f)`` at ``(x, t)``."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    sx, cx = np.sin(TWO_PI * x), np.cos(TWO_PI * x)
    phase = TWO_PI * t + p.beta
    st, ct = np.sin(phase), np.cos(phase)
    u = sx * st
    du_dx = TWO_PI * cx * st
    f = sx * (TWO_PI * ct + TWO_PI ** 2 * p.nu * st)
    return u, du_dx, f


def f_norm_analytic(p: ManufacturedProblem) -> float:
    """``||f||`` in L2(0,T; L2(0,1)); the cross term integrates to zero over a period."""
    return math.sqrt(math.pi ** 2 + 4.0 * math.pi ** 4 * p.nu ** 2)


@dataclass(frozen=True)
class ErrorReport:
    err_h1: float
    err_l2: float
    quad_order: int
    n_elements: int
    m: int


def aposteriori_errors(sol: FullDiscreteSolution, p: ManufacturedProblem, quad_order: int = 5,
                       max_points: int = 2_000_000) -> ErrorReport:
    """L2(L2) and L2(H1_0) distance between the exact solution and ``sol``.

    ``sol`` is read as its bilinear space-time interpolant; the integrals use
    a tensor Gauss-Legendre rule of ``quad_order`` points per direction on
    every space-time cell.
    """
    if quad_order < 4:
        raise ValueError(f"quad_order must be >= 4, got {quad_order}")
    mesh, grid = sol.mesh, sol.grid
    if mesh is None:
        raise ValueError("error measurement needs the solution's mesh")
    if sol.coeffs.shape != (mesh.n, grid.m + 1):
        raise ValueError(
            f"coefficient shape {sol.coeffs.shape} does not match mesh/grid ({mesh.n}, {grid.m + 1})"
        )
    if not math.isclose(grid.T, p.T):
        raise ValueError(f"solution period {grid.T} differs from problem period {p.T}")

    ne, h, m, k = mesh.n_elements, mesh.h, grid.m, grid.k
    xi, w = reference_rule(quad_order)
    x = (np.arange(ne)[:, None] + xi[None, :]) * h  # (ne, q)
    full = sol.padded()  # (ne + 1, m + 1)
    values = (1 - xi)[None, :, None] * full[:-1, None, :] + xi[None, :, None] * full[1:, None, :]
    slopes = np.diff(full, axis=0) / h  # (ne, m + 1)
    wx = h * w
    wt = k * w

    chunk = max(1, max_points // (ne * quad_order * quad_order))
    total_l2 = 0.0
    total_h1 = 0.0
    for j0 in range(0, m, chunk):
        j = np.arange(j0, min(m, j0 + chunk))
        t = (j[:, None] + xi[None, :]) * k  # (c, q)
        u, du_dx, _ = eval_exact(p, x[:, :, None, None], t[None, None, :, :])
        lo = values[:, :, j][..., None]
        hi = values[:, :, j + 1][..., None]
        uh = lo + (hi - lo) * xi  # (ne, q, c, q)
        slo = slopes[:, j][:, None, :, None]
        shi = slopes[:, j + 1][:, None, :, None]
        duh = slo + (shi - slo) * xi
        weight = wx[None, :, None, None] * wt[None, None, None, :]
        total_l2 += float(np.sum(weight * (u - uh) ** 2))
        total_h1 += float(np.sum(weight * (du_dx - duh) ** 2))
    return ErrorReport(math.sqrt(total_h1), math.sqrt(total_l2), quad_order, ne, m)


def slope(points) -> float:
    """Least-squares slope of ``log(err)`` against ``log(h)``."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise ValueError("slope needs at least two (h, err) pairs")
    hs, errs = pts[:, 0], pts[:, 1]
    if np.any(hs <= 0) or np.any(errs <= 0):
        raise ValueError("h and err must be positive")
    if np.any(np.diff(hs) >= 0):
        raise ValueError("h must be strictly decreasing")
    return float(np.polyfit(np.log(hs), np.log(errs), 1)[0])
