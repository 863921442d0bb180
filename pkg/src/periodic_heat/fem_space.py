"""Uniform piecewise-linear finite elements on (0, 1) with homogeneous Dirichlet data.

Only interior nodes carry unknowns; boundary values are fixed at zero and
never appear in the matrices.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .quadrature import reference_rule


def _frozen(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Mesh1D:
    """Uniform mesh of (0, 1) with ``n_elements`` cells."""

    n_elements: int
    h: float = field(init=False)
    nodes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if int(self.n_elements) != self.n_elements or self.n_elements < 2:
            raise ValueError(
                f"need at least 2 elements (one interior node), got n_elements={self.n_elements}"
            )
        object.__setattr__(self, "n_elements", int(self.n_elements))
        h = 1.0 / self.n_elements
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "nodes", _frozen(h * np.arange(1, self.n_elements)))

    @property
    def n(self) -> int:
        """Number of interior nodes (dimension of the discrete space)."""
        return self.n_elements - 1

    @property
    def all_nodes(self) -> np.ndarray:
        """Node coordinates including both boundary points."""
        return np.linspace(0.0, 1.0, self.n_elements + 1)

    @classmethod
    def from_nodes(cls, nodes, rtol=1e-12):
        """Build a mesh from interior node coordinates, rejecting nonuniform spacing."""
        nodes = np.asarray(nodes, dtype=float)
        full = np.concatenate(([0.0], nodes, [1.0]))
        widths = np.diff(full)
        if np.any(widths <= 0):
            raise ValueError("nodes must be strictly increasing inside (0, 1)")
        if np.ptp(widths) > rtol * widths.mean():
            raise ValueError("only uniform meshes are supported")
        return cls(len(widths))


@dataclass(frozen=True)
class FemPair:
    """Mass matrix (``L_phi``) and stiffness matrix (``D_phi``) on interior nodes."""

    mass: np.ndarray
    stiffness: np.ndarray
    mesh: Mesh1D | None = None

    def __post_init__(self):
        mass = _frozen(self.mass)
        stiffness = _frozen(self.stiffness)
        if mass.ndim != 2 or mass.shape[0] != mass.shape[1] or mass.shape != stiffness.shape:
            raise ValueError(
                f"mass and stiffness must be square and of equal size, got {mass.shape} and {stiffness.shape}"
            )
        if self.mesh is not None and mass.shape[0] != self.mesh.n:
            raise ValueError(f"matrix size {mass.shape[0]} does not match mesh with {self.mesh.n} interior nodes")
        object.__setattr__(self, "mass", mass)
        object.__setattr__(self, "stiffness", stiffness)

    @property
    def n(self) -> int:
        return self.mass.shape[0]


@dataclass(frozen=True)
class SpaceConstants:
    c_omega: float
    c_inv: float
    c_p: float
    lambda1: float


def _tridiag(n, diag, off):
    a = np.diag(np.full(n, diag))
    if n > 1:
        a += np.diag(np.full(n - 1, off), 1) + np.diag(np.full(n - 1, off), -1)
    return a


def assemble(n_elements: int) -> FemPair:
    """Assemble the P1 mass and stiffness matrices for ``n_elements`` uniform cells."""
    mesh = Mesh1D(n_elements)
    h, n = mesh.h, mesh.n
    mass = _tridiag(n, 4.0 * h / 6.0, h / 6.0)
    stiffness = _tridiag(n, 2.0 / h, -1.0 / h)
    return FemPair(mass, stiffness, mesh)


def _element_quadrature(mesh, quad_order):
    if quad_order < 2:
        raise ValueError(f"quad_order must be >= 2, got {quad_order}")
    xi, w = reference_rule(quad_order)
    left = mesh.h * np.arange(mesh.n_elements)
    x = left[:, None] + mesh.h * xi[None, :]
    return x, xi, w


def _assemble_loads(values, mesh, xi, w):
    # values[..., e, r]: integrand at quadrature point r of element e
    hw = mesh.h * w
    right = values @ (hw * xi)  # contribution to the element's right node
    left = values @ (hw * (1.0 - xi))
    return right[..., :-1] + left[..., 1:]


def load_vector(f, t: float, mesh: Mesh1D, quad_order: int = 5) -> np.ndarray:
    """Return ``(f(., t), phi_i)`` for every interior hat function ``phi_i``.

    ``f(x, t)`` must accept a numpy array ``x`` and broadcast over it.
    """
    x, xi, w = _element_quadrature(mesh, quad_order)
    values = np.broadcast_to(np.asarray(f(x, t), dtype=float), x.shape)
    return _assemble_loads(values, mesh, xi, w)


def load_vectors(f, times, mesh: Mesh1D, quad_order: int = 5, chunk: int = 4096) -> np.ndarray:
    """Batched :func:`load_vector`: returns shape ``(len(times), n)``.

    ``f`` is called with ``x`` of shape ``(1, n_elements, q)`` and ``t`` of
    shape ``(nt, 1, 1)``; it must broadcast.
    """
    times = np.asarray(times, dtype=float).ravel()
    x, xi, w = _element_quadrature(mesh, quad_order)
    out = np.empty((times.size, mesh.n))
    for start in range(0, times.size, chunk):
        tt = times[start:start + chunk]
        shape = (tt.size,) + x.shape
        values = np.broadcast_to(np.asarray(f(x[None], tt[:, None, None]), dtype=float), shape)
        out[start:start + chunk] = _assemble_loads(values, mesh, xi, w)
    return out


def space_constants(mesh: Mesh1D) -> SpaceConstants:
    """Approximation, inverse, and Poincare constants of the uniform P1 space on (0, 1)."""
    h = mesh.h
    return SpaceConstants(
        c_omega=h / math.pi,
        c_inv=math.sqrt(12.0) / h,
        c_p=1.0 / math.pi,
        lambda1=math.pi ** 2,
    )
