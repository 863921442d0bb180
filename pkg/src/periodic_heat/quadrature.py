"""Composite Gauss-Legendre rules on uniform panels."""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=32)
def _reference_rule(order):
    # nodes mapped to [0, 1], weights summing to 1
    x, w = np.polynomial.legendre.leggauss(order)
    nodes = 0.5 * (x + 1.0)
    weights = 0.5 * w
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def reference_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights of the given order on [0, 1]."""
    if order < 1:
        raise ValueError(f"quadrature order must be >= 1, got {order}")
    return _reference_rule(int(order))


def composite_rule(a: float, b: float, panels: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of a composite rule on ``panels`` equal subintervals of [a, b].

    Returned arrays have shape ``(panels, order)`` so callers can reduce per panel.
    """
    if panels < 1:
        raise ValueError(f"panels must be >= 1, got {panels}")
    xi, wi = reference_rule(order)
    width = (b - a) / panels
    left = a + width * np.arange(panels)
    nodes = left[:, None] + width * xi[None, :]
    weights = np.broadcast_to(width * wi, nodes.shape).copy()
    return nodes, weights


@dataclass(frozen=True)
class TimeQuadrature:
    """Composite Gauss-Legendre settings for integrals in time.

    ``panels`` is the number of panels per time step when used by
    :func:`periodic_heat.periodic_solver.solve_periodic`, and the total
    panel count over ``(0, upper)`` for
    :func:`periodic_heat.periodic_solver.load_integral`.
    """

    order: int = 5
    panels: int = 1

    def __post_init__(self):
        if self.order < 2:
            raise ValueError(f"time quadrature order must be >= 2, got {self.order}")
        if self.panels < 1:
            raise ValueError(f"panels must be >= 1, got {self.panels}")
