"""Tensor-product quadrature on symmetric momentum boxes.

Grids are fixed (no adaptive subdivision) so that the same nodes can be used
both for plain integration and for the weighted-kernel SVD.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "Rule",
    "Grid1D",
    "ExtentPolicy",
    "ConvergenceReport",
    "build_grid",
    "default_extents",
    "integrate_1d",
    "integrate_2d",
    "richardson_check",
    "DEFAULT_N",
]

DEFAULT_N = 512
_TINY = float(np.finfo(float).tiny)


class Rule(str, enum.Enum):
    GAUSS_LEGENDRE = "gauss_legendre"
    TRAPEZOID = "trapezoid"


@dataclass(frozen=True, eq=False)
class Grid1D:
    """Nodes and positive weights on ``[-extent, extent]``."""

    nodes: np.ndarray
    weights: np.ndarray
    extent: float
    rule: Rule

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 1 or nodes.shape != weights.shape or nodes.size < 2:
            raise ValueError("nodes and weights must be 1-D arrays of equal length >= 2")
        if not (np.all(np.diff(nodes) > 0) and np.all(weights > 0)):
            raise ValueError("nodes must be strictly increasing and weights positive")
        if np.any(np.abs(nodes) > self.extent * (1 + 1e-14)):
            raise ValueError("nodes must lie within [-extent, extent]")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return self.nodes.size

    @property
    def sqrt_weights(self) -> np.ndarray:
        return np.sqrt(self.weights)

    def inner(self, f: np.ndarray, g: np.ndarray) -> complex:
        """Quadrature inner product ``sum w conj(f) g`` of sampled functions."""
        return complex(np.sum(self.weights * np.conj(f) * g))


def build_grid(rule: Rule | str = Rule.GAUSS_LEGENDRE, n: int = DEFAULT_N, extent: float = 1.0) -> Grid1D:
    """Build an ``n``-point rule on ``[-extent, extent]``.

    Gauss-Legendre nodes are the roots of ``P_n`` scaled from ``[-1, 1]``;
    the trapezoid rule uses equispaced nodes including both endpoints.
    """
    rule = Rule(rule)
    if int(n) != n or n < 2:
        raise ValueError(f"need at least 2 nodes, got {n!r}")
    if not (np.isfinite(extent) and extent > 0):
        raise ValueError(f"extent must be positive and finite, got {extent!r}")
    n = int(n)
    if rule is Rule.GAUSS_LEGENDRE:
        x, w = np.polynomial.legendre.leggauss(n)
        nodes, weights = extent * x, extent * w
    else:
        nodes = np.linspace(-extent, extent, n)
        h = 2.0 * extent / (n - 1)
        weights = np.full(n, h)
        weights[[0, -1]] = h / 2
    return Grid1D(nodes, weights, float(extent), rule)


@dataclass(frozen=True)
class ExtentPolicy:
    """Box half-widths grow linearly with eta: ``extent = slope * eta + offset``.

    The q axis carries the Gaussian ``exp(-q^2/eta^2)``; the k axis carries a
    Lorentzian whose tails fall off only as ``1/k^2`` and so gets a much larger
    box.
    """

    k_slope: float = 16.0
    k_offset: float = 64.0
    q_slope: float = 8.0
    q_offset: float = 8.0

    def __post_init__(self):
        for name in ("k_slope", "k_offset", "q_slope", "q_offset"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.k_slope + self.k_offset <= 0 or self.q_slope + self.q_offset <= 0:
            raise ValueError("extent policy would give an empty box")


def default_extents(eta: float, policy: ExtentPolicy | None = None) -> tuple[float, float]:
    """Return ``(k_extent, q_extent)`` for control parameter ``eta``."""
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta!r}")
    p = policy or ExtentPolicy()
    return p.k_slope * eta + p.k_offset, p.q_slope * eta + p.q_offset


def integrate_1d(f: Callable[[np.ndarray], np.ndarray], grid: Grid1D):
    return np.sum(grid.weights * f(grid.nodes))


def integrate_2d(f: Callable[[np.ndarray, np.ndarray], np.ndarray], gx: Grid1D, gy: Grid1D):
    """Tensor quadrature ``sum_ij wx_i wy_j f(x_i, y_j)``.

    ``f`` is called once with broadcastable arrays of shape ``(nx, 1)`` and
    ``(1, ny)``. The reduction order is fixed, so the result does not depend
    on BLAS threading.
    """
    values = np.broadcast_to(f(gx.nodes[:, None], gy.nodes[None, :]), (len(gx), len(gy)))
    inner = np.sum(values * gy.weights[None, :], axis=1)
    return np.sum(gx.weights * inner)


@dataclass(frozen=True)
class ConvergenceReport:
    coarse_value: float
    fine_value: float
    relative_delta: float
    converged: bool
    tol: float


def richardson_check(values_at_n_and_2n: tuple[float, float], tol: float = 1e-6) -> ConvergenceReport:
    """Compare a quantity computed on ``n`` and ``2n`` point grids."""
    coarse, fine = (float(v) for v in values_at_n_and_2n)
    if not (np.isfinite(coarse) and np.isfinite(fine)):
        raise ValueError("convergence check needs finite values")
    if not tol > 0:
        raise ValueError("tol must be positive")
    delta = abs(fine - coarse) / max(abs(fine), _TINY)
    return ConvergenceReport(coarse, fine, delta, delta <= tol, float(tol))
