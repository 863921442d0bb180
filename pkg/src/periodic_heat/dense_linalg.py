"""Dense kernels: Cholesky, symmetric-definite generalized eigenproblem, 2-norm, expm."""
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

SYMMETRY_RTOL = 1e-13
PIVOT_RTOL = 1e-14


class NotPositiveDefiniteError(ValueError):
    """Raised when a Cholesky pivot is not safely positive.

    ``pivot`` is the 1-based position of the failing pivot.
    """

    def __init__(self, pivot, value):
        self.pivot = pivot
        self.value = value
        super().__init__(f"matrix is not positive definite: pivot {pivot} is {value:.3e}")


class EigenConvergenceError(RuntimeError):
    pass


def _as_square(a, name="A"):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def _check_symmetric(a, name):
    scale = np.max(np.abs(a)) if a.size else 0.0
    if np.max(np.abs(a - a.T), initial=0.0) > SYMMETRY_RTOL * scale:
        raise ValueError(f"{name} is not symmetric")


def cholesky(a) -> np.ndarray:
    """Lower-triangular ``G`` with ``G @ G.T == a``.

    Pivots at or below ``1e-14 * max(diag(a))`` are treated as failures.
    """
    a = _as_square(a)
    _check_symmetric(a, "A")
    n = a.shape[0]
    g = np.zeros_like(a)
    tol = PIVOT_RTOL * max(np.max(np.diag(a), initial=0.0), 0.0)
    for j in range(n):
        row = g[j, :j]
        d = a[j, j] - row @ row
        if not d > tol:
            raise NotPositiveDefiniteError(j + 1, d)
        gjj = math.sqrt(d)
        g[j, j] = gjj
        if j + 1 < n:
            g[j + 1:, j] = (a[j + 1:, j] - g[j + 1:, :j] @ row) / gjj
    return g


@dataclass(frozen=True)
class GenEigDecomp:
    """Eigenpairs of ``D v = mu L v``: ascending ``eigenvalues``, L-orthonormal ``eigenvectors`` columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def mu_min(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]


def generalized_eig(d, l) -> GenEigDecomp:
    """Solve the symmetric-definite pencil ``(d, l)`` by Cholesky reduction.

    With ``l = G G^T`` the reduced matrix ``G^{-1} d G^{-T}`` is symmetric;
    its orthonormal eigenvectors ``Q`` map back as ``V = G^{-T} Q``.
    """
    d = _as_square(d, "D")
    l = _as_square(l, "L")
    if d.shape != l.shape:
        raise ValueError(f"D and L differ in size: {d.shape} vs {l.shape}")
    _check_symmetric(d, "D")
    g = cholesky(l)
    tmp = solve_triangular(g, d, lower=True)
    c = solve_triangular(g, tmp.T, lower=True).T
    c = 0.5 * (c + c.T)
    try:
        mu, q = np.linalg.eigh(c)
    except np.linalg.LinAlgError as exc:
        raise EigenConvergenceError(str(exc)) from exc
    v = solve_triangular(g.T, q, lower=False)
    for arr in (mu, v):
        arr.setflags(write=False)
    return GenEigDecomp(mu, v)


def two_norm(a) -> float:
    """Largest singular value."""
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


# Pade coefficients b_0..b_m and 1-norm thresholds theta_m for
# m in (3, 5, 7, 9, 13), from Higham's scaling-and-squaring analysis.
_PADE_COEFFS = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
         960960.0, 16380.0, 182.0, 1.0),
}
_THETA = {
    3: 1.495585217958292e-2,
    5: 2.539398330063230e-1,
    7: 9.504178996162932e-1,
    9: 2.097847961257068e0,
    13: 5.371920351148152e0,
}
_MAX_SQUARINGS = 1000


def _pade(a, m):
    b = _PADE_COEFFS[m]
    n = a.shape[0]
    ident = np.eye(n)
    a2 = a @ a
    if m == 13:
        a4 = a2 @ a2
        a6 = a4 @ a2
        u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
                 + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident)
        v = (a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2)
             + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident)
    else:
        powers = [ident, a2]
        for _ in range(2, (m + 1) // 2):
            powers.append(powers[-1] @ a2)
        u = sum(b[j] * powers[j // 2] for j in range(m, 0, -2))
        u = a @ u
        v = sum(b[j] * powers[j // 2] for j in range(m - 1, -1, -2))
    return np.linalg.solve(v - u, v + u)


def matexp(a) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a diagonal Pade approximant."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matexp needs a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise OverflowError("matexp input has non-finite entries")
    if a.shape[0] == 0:
        return np.zeros((0, 0))
    norm1 = np.linalg.norm(a, 1)
    for m in (3, 5, 7, 9):
        if norm1 <= _THETA[m]:
            return _pade(a, m)
    s = max(0, math.ceil(math.log2(norm1 / _THETA[13])))
    if s > _MAX_SQUARINGS:
        raise OverflowError(f"matexp: norm {norm1:.3e} needs {s} squarings")
    e = _pade(a / 2.0 ** s, 13)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(s):
            e = e @ e
    if not np.all(np.isfinite(e)):
        raise OverflowError("matexp result overflows")
    return e
