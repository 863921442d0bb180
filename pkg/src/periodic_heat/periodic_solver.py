"""Time-periodic semidiscrete solution through the fundamental matrix.

Everything is carried out in the eigenbasis of the pencil (stiffness, mass):
with ``D V = L V diag(mu)`` and ``V^T L V = I`` the propagator is
``Theta(t) = V exp(-nu t mu) V^T L`` and the ODE decouples into scalar modes
``w_i' = -nu mu_i w_i + g_i(t)`` with ``g = V^T f~``.
"""
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dense_linalg import GenEigDecomp, generalized_eig
from .fem_space import FemPair, Mesh1D, load_vectors
from .quadrature import TimeQuadrature, composite_rule

CONTRACTION_TOL = 1e-14


class NonContractionError(ArithmeticError):
    pass


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_j = j T / m`` on one period."""

    m: int
    T: float = 1.0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m}")
        if not self.T > 0:
            raise ValueError(f"period T must be positive, got {self.T}")
        object.__setattr__(self, "m", int(self.m))

    @property
    def k(self) -> float:
        return self.T / self.m

    @property
    def c_j(self) -> float:
        """Interpolation constant for piecewise-linear functions in time, ``k / pi``."""
        return self.k / math.pi

    @property
    def times(self) -> np.ndarray:
        return self.T * np.arange(self.m + 1) / self.m


@dataclass(frozen=True)
class SemidiscreteSystem:
    """``L u' + nu D u = f~(t)`` with ``u(0) = u(T)``.

    ``forcing`` is ``f(x, t)`` (numpy-broadcasting) when ``fem.mesh`` is set.
    For an externally assembled pair without a mesh, ``forcing`` must instead
    map an array of times to load vectors of shape ``(len(times), n)``.
    """

    fem: FemPair
    nu: float
    T: float
    forcing: Callable
    decomp: GenEigDecomp | None = None
    space_quad_order: int = 5
    _lv: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        if not self.T > 0:
            raise ValueError(f"T must be positive, got {self.T}")
        if self.decomp is None:
            object.__setattr__(self, "decomp", generalized_eig(self.fem.stiffness, self.fem.mass))
        elif self.decomp.n != self.fem.n:
            raise ValueError(f"decomposition size {self.decomp.n} does not match system size {self.fem.n}")
        # L V, used to map coefficient vectors into the eigenbasis (V^{-1} = V^T L)
        object.__setattr__(self, "_lv", self.fem.mass @ self.decomp.eigenvectors)

    @property
    def n(self) -> int:
        return self.fem.n

    @property
    def rates(self) -> np.ndarray:
        """Modal decay rates ``nu * mu_i``."""
        return self.nu * self.decomp.eigenvalues

    def loads(self, times) -> np.ndarray:
        """Load vectors ``f~(t)`` stacked as rows."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if self.fem.mesh is None:
            out = np.asarray(self.forcing(times), dtype=float)
            if out.shape != (times.size, self.n):
                raise ValueError(f"load callable returned shape {out.shape}, expected {(times.size, self.n)}")
            return out
        return load_vectors(self.forcing, times, self.fem.mesh, self.space_quad_order)

    def modal_loads(self, times) -> np.ndarray:
        """``V^T f~(t)`` stacked as rows."""
        return self.loads(times) @ self.decomp.eigenvectors

    def to_modes(self, v) -> np.ndarray:
        return np.asarray(v, dtype=float) @ self._lv

    def from_modes(self, w) -> np.ndarray:
        return np.asarray(w, dtype=float) @ self.decomp.eigenvectors.T


@dataclass(frozen=True)
class FullDiscreteSolution:
    """Nodal coefficients of the periodic solution sampled on a time grid.

    ``coeffs[:, j]`` holds the interior nodal values at ``t_j``; the full
    discrete approximation is the piecewise-bilinear interpolant of them.
    """

    coeffs: np.ndarray
    grid: TimeGrid
    mesh: Mesh1D | None = None

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.ndim != 2 or c.shape[1] != self.grid.m + 1:
            raise ValueError(f"coeffs must have {self.grid.m + 1} columns, got shape {c.shape}")
        if self.mesh is not None and c.shape[0] != self.mesh.n:
            raise ValueError(f"coeffs have {c.shape[0]} rows, mesh has {self.mesh.n} interior nodes")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def padded(self) -> np.ndarray:
        """Coefficients with the zero boundary rows attached: shape ``(n + 2, m + 1)``."""
        zero = np.zeros((1, self.coeffs.shape[1]))
        return np.vstack([zero, self.coeffs, zero])

    def evaluate(self, x, t):
        """Bilinear interpolant at points ``(x, t)`` (broadcast together)."""
        if self.mesh is None:
            raise ValueError("evaluation needs a mesh")
        x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
        full = self.padded()
        ne, m = self.mesh.n_elements, self.grid.m
        sx = np.clip(x / self.mesh.h, 0.0, ne)
        e = np.minimum(sx.astype(int), ne - 1)
        a = sx - e
        st = np.clip(t / self.grid.k, 0.0, m)
        j = np.minimum(st.astype(int), m - 1)
        b = st - j
        return ((1 - a) * (1 - b) * full[e, j] + a * (1 - b) * full[e + 1, j]
                + (1 - a) * b * full[e, j + 1] + a * b * full[e + 1, j + 1])


def _decay(rates, t):
    return np.exp(-np.multiply.outer(np.asarray(t, dtype=float), rates))


def theta_apply(sys: SemidiscreteSystem, t: float, v) -> np.ndarray:
    """Apply the fundamental matrix ``Theta(t) = exp(-nu t L^{-1} D)`` to ``v``."""
    if t < 0:
        raise ValueError(f"theta_apply needs t >= 0, got {t}")
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != sys.n:
        raise ValueError(f"vector length {v.shape[-1]} does not match system size {sys.n}")
    return sys.from_modes(_decay(sys.rates, t) * sys.to_modes(v))


def _panel_integrals(sys, a, b, panels, order, chunk=2048):
    """Modal ``int exp(-nu mu (b_p - s)) g(s) ds`` over each panel ``[a_p, b_p]``.

    Returns shape ``(panels, n)``; the exponential is taken relative to each
    panel's right end so no factor exceeds one.
    """
    nodes, weights = composite_rule(a, b, panels, order)
    width = (b - a) / panels
    right = a + width * np.arange(1, panels + 1)
    rates = sys.rates
    out = np.empty((panels, sys.n))
    for p0 in range(0, panels, chunk):
        s = nodes[p0:p0 + chunk]
        g = sys.modal_loads(s.ravel()).reshape(s.shape + (sys.n,))
        lag = right[p0:p0 + chunk, None] - s
        kernel = np.exp(-lag[..., None] * rates)
        out[p0:p0 + chunk] = np.einsum("pq,pqn->pn", weights[p0:p0 + chunk], kernel * g)
    return out


def _load_integral_modes(sys, upper, quad):
    if upper == 0:
        return np.zeros(sys.n)
    panels = _panel_integrals(sys, 0.0, upper, quad.panels, quad.order)
    right = upper * np.arange(1, quad.panels + 1) / quad.panels
    return np.sum(_decay(sys.rates, upper - right) * panels, axis=0)


def load_integral(sys: SemidiscreteSystem, upper: float, quad: TimeQuadrature = TimeQuadrature(panels=64)) -> np.ndarray:
    """``int_0^upper Theta(upper - s) L^{-1} f~(s) ds`` by composite Gauss-Legendre."""
    if not 0 <= upper <= sys.T * (1 + 1e-12):
        raise ValueError(f"upper limit {upper} outside [0, T={sys.T}]")
    return sys.from_modes(_load_integral_modes(sys, upper, quad))


def _step_integrals(sys, grid, quad):
    """Modal load integrals ``I(t_j)`` for j = 0..m, marched step by step."""
    m, k = grid.m, grid.k
    p = quad.panels
    panels = _panel_integrals(sys, 0.0, grid.T, m * p, quad.order).reshape(m, p, sys.n)
    # shift each panel's contribution to the end of its step
    offsets = k * (p - 1 - np.arange(p)) / p
    steps = np.einsum("pn,mpn->mn", _decay(sys.rates, offsets), panels)
    step_decay = _decay(sys.rates, k)
    acc = np.zeros((m + 1, sys.n))
    for j in range(m):
        acc[j + 1] = step_decay * acc[j] + steps[j]
    return acc


def _periodic_initial_modes(sys, integral_T):
    gap = -np.expm1(-sys.rates * sys.T)
    if np.any(gap <= CONTRACTION_TOL):
        raise NonContractionError(
            f"I - Theta(T) is not safely invertible: min(1 - exp(-nu T mu)) = {gap.min():.3e}"
        )
    return integral_T / gap


def solve_periodic(sys: SemidiscreteSystem, grid: TimeGrid, quad: TimeQuadrature = TimeQuadrature()) -> FullDiscreteSolution:
    """Sample the periodic semidiscrete solution at every grid time.

    ``u(t) = Theta(t) (I - Theta(T))^{-1} int_0^T Theta(T-s) b(s) ds + int_0^t Theta(t-s) b(s) ds``
    with ``b = L^{-1} f~``; ``(I - Theta(T))^{-1}`` acts diagonally on modes.
    """
    if not math.isclose(grid.T, sys.T, rel_tol=1e-12):
        raise ValueError(f"grid period {grid.T} differs from system period {sys.T}")
    integrals = _step_integrals(sys, grid, quad)
    w0 = _periodic_initial_modes(sys, integrals[-1])
    modes = _decay(sys.rates, grid.times) * w0 + integrals
    return FullDiscreteSolution(sys.from_modes(modes).T, grid, sys.fem.mesh)


def trajectory(sys: SemidiscreteSystem, times, grid: TimeGrid, quad: TimeQuadrature = TimeQuadrature()) -> np.ndarray:
    """Evaluate the periodic semidiscrete solution at arbitrary times in [0, T].

    ``grid`` fixes the panel width used for the period integral and for each
    partial integral. Returns shape ``(len(times), n)``.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    integrals = _step_integrals(sys, grid, quad)
    w0 = _periodic_initial_modes(sys, integrals[-1])
    rows = []
    for t in times:
        steps = max(1, math.ceil(t / grid.k - 1e-9))
        sub = TimeQuadrature(quad.order, steps * quad.panels)
        rows.append(_decay(sys.rates, t) * w0 + _load_integral_modes(sys, t, sub))
    return sys.from_modes(np.array(rows))


_FD_WEIGHTS = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0


def ode_residual(sol: FullDiscreteSolution, sys: SemidiscreteSystem, sample_times,
                 quad: TimeQuadrature = TimeQuadrature(), use_interpolant: bool = False) -> float:
    """Max residual of ``L u' + nu D u - f~(t)`` over sample times and basis functions.

    By default ``u`` is the exact semidiscrete trajectory recomputed at each
    sample time and ``u'`` a fourth-order central difference of it. With
    ``use_interpolant`` the piecewise-linear interpolant of ``sol`` is used
    instead; its residual is only first order in the time step.
    """
    sample_times = np.atleast_1d(np.asarray(sample_times, dtype=float))
    if sample_times.size == 0:
        return 0.0
    grid = sol.grid
    delta = min(1e-3, grid.k / 20)
    offsets = delta * np.arange(-2, 3)
    stencil_times = (sample_times[:, None] + offsets[None, :]).ravel()
    if use_interpolant:
        st = np.clip(stencil_times / grid.k, 0, grid.m)
        j = np.minimum(st.astype(int), grid.m - 1)
        b = st - j
        u = ((1 - b) * sol.coeffs[:, j] + b * sol.coeffs[:, j + 1]).T
    else:
        u = trajectory(sys, stencil_times, grid, quad)
    u = u.reshape(sample_times.size, 5, sys.n)
    du = np.einsum("s,tsn->tn", _FD_WEIGHTS, u) / delta
    centre = u[:, 2, :]
    res = du @ sys.fem.mass.T + sys.nu * centre @ sys.fem.stiffness.T - sys.loads(sample_times)
    return float(np.max(np.abs(res)))
