"""Numerical Schmidt analysis of a two-variable amplitude.

A continuous amplitude ``C(k, q)`` is sampled on quadrature grids and
symmetrized with square-root weights (Nystrom discretization),

    A[i, j] = sqrt(wk_i) sqrt(wq_j) C(k_i, q_j),

so that the singular values ``s_i`` of ``A`` approximate the Schmidt
coefficients ``sqrt(lambda_i)`` and the singular vectors, with the weights
divided back out, approximate the Schmidt modes. Working on the amplitude
avoids squaring the condition number, which forming a marginal density
matrix would do.

The marginal-density route (purity ``Tr rho^2``) is kept separately in
:func:`purity_from_marginal` as an independent cross-check.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .quadrature import Grid1D, integrate_1d, integrate_2d

__all__ = [
    "DiscretizedKernel",
    "SchmidtSpectrum",
    "SchmidtModes",
    "EntropyReport",
    "NumericalError",
    "discretize",
    "spectrum",
    "modes",
    "marginal_matrix",
    "purity_from_marginal",
    "marginal_trace",
    "entropy_report",
]

log = logging.getLogger(__name__)

EIGENVALUE_FLOOR = 1e-12  # relative to the largest eigenvalue
NORM_WARN_TOL = 1e-4
HERMITICITY_TOL = 1e-10
HERMITICITY_SAMPLES = 100
PURITY_SLACK = 1e-6


class NumericalError(RuntimeError):
    """A factorization or integration produced an unusable result."""


@dataclass(frozen=True, eq=False)
class DiscretizedKernel:
    matrix: np.ndarray
    k_grid: Grid1D
    q_grid: Grid1D
    norm: float

    def __post_init__(self):
        if self.matrix.shape != (len(self.k_grid), len(self.q_grid)):
            raise ValueError("kernel shape does not match grid sizes")

    def check_normalized(self, tol: float = NORM_WARN_TOL) -> bool:
        """True if the discrete norm is within ``tol`` of 1; logs a warning
        otherwise. Only meaningful for amplitudes normalized on the plane."""
        ok = abs(self.norm - 1.0) <= tol
        if not ok:
            log.warning("discrete norm %.6f differs from 1 by more than %g "
                        "(integration box truncates the state)", self.norm, tol)
        return ok


@dataclass(frozen=True, eq=False)
class SchmidtSpectrum:
    """Unit-trace Schmidt eigenvalues, descending.

    ``trace`` keeps the raw (pre-normalization) sum, which measures how much
    of the state fell outside the integration box.
    """

    eigenvalues: np.ndarray
    trace: float
    schmidt_number: float
    n_significant: int
    n_clamped: int = 0

    @classmethod
    def from_eigenvalues(cls, values: Sequence[float]) -> "SchmidtSpectrum":
        """Build a spectrum from raw eigenvalues (any order, any trace).

        Negative values down to ``-1e-14`` of the largest are rounding noise
        and are clamped to zero; anything more negative is an error.
        """
        lam = np.sort(np.asarray(values, dtype=float).ravel())[::-1]
        if lam.size == 0 or not np.all(np.isfinite(lam)):
            raise ValueError("spectrum needs at least one finite eigenvalue")
        top = lam[0]
        if top <= 0:
            raise ValueError("largest eigenvalue must be positive")
        neg = lam < 0
        if np.any(lam < -1e-14 * top):
            raise ValueError(f"eigenvalue {lam.min():.3e} is not a rounding artefact")
        n_clamped = int(np.count_nonzero(neg))
        if n_clamped:
            log.debug("clamped %d slightly negative eigenvalues", n_clamped)
            lam = np.where(neg, 0.0, lam)
        trace = float(lam.sum())
        unit = lam / trace
        k = 1.0 / float(np.sum(unit**2))
        n_sig = int(np.count_nonzero(unit >= EIGENVALUE_FLOOR * unit[0]))
        unit.setflags(write=False)
        return cls(unit, trace, k, n_sig, n_clamped)

    @property
    def significant(self) -> np.ndarray:
        return self.eigenvalues[: self.n_significant]


@dataclass(frozen=True, eq=False)
class SchmidtModes:
    """Paired Schmidt modes sampled on the grid nodes.

    Row ``i`` of ``field_modes`` / ``atom_modes`` holds the ``i``-th mode.
    With ``s_i`` the singular values the amplitude factorizes as
    ``C(k, q) ~ sum_i s_i field_modes[i](k) atom_modes[i](q)``.
    """

    field_modes: np.ndarray
    atom_modes: np.ndarray
    singular_values: np.ndarray
    k_nodes: np.ndarray
    q_nodes: np.ndarray
    count: int
    truncated: bool = False


@dataclass(frozen=True)
class EntropyReport:
    """Generalized entropies of a unit-trace spectrum.

    Renyi entropies use the nonnegative convention ``ln(Tr rho^p) / (1 - p)``.
    The opposite sign convention is ``-renyi``; ``trace_powers`` holds
    ``Tr rho^p`` so either can be recovered.
    """

    orders: tuple[float, ...]
    trace_powers: tuple[float, ...]
    tsallis: tuple[float, ...]
    renyi: tuple[float, ...]
    linear: float
    von_neumann: float


def discretize(
    amplitude: Callable[[np.ndarray, np.ndarray], np.ndarray],
    k_grid: Grid1D,
    q_grid: Grid1D,
) -> DiscretizedKernel:
    """Sample ``amplitude`` on the tensor grid and apply sqrt-weight scaling.

    ``amplitude`` is called once with arrays of shape ``(n_k, 1)`` and
    ``(1, n_q)``.
    """
    k = k_grid.nodes[:, None]
    q = q_grid.nodes[None, :]
    values = np.broadcast_to(np.asarray(amplitude(k, q), dtype=complex), (len(k_grid), len(q_grid)))
    bad = ~np.isfinite(values)
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise NumericalError(
            f"amplitude is not finite at node (k={k_grid.nodes[i]!r}, q={q_grid.nodes[j]!r})"
        )
    matrix = k_grid.sqrt_weights[:, None] * values * q_grid.sqrt_weights[None, :]
    norm = float(np.sum(matrix.real**2 + matrix.imag**2))
    return DiscretizedKernel(matrix, k_grid, q_grid, norm)


def _svd(matrix: np.ndarray, full: bool):
    try:
        if full:
            return np.linalg.svd(matrix, full_matrices=False)
        return np.linalg.svd(matrix, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        finite = np.isfinite(matrix).all()
        fro = np.linalg.norm(matrix) if finite else float("nan")
        raise NumericalError(
            f"SVD did not converge (shape={matrix.shape}, finite={finite}, frobenius={fro:.3e})"
        ) from exc


def spectrum(kern: DiscretizedKernel) -> SchmidtSpectrum:
    """Schmidt eigenvalues ``lambda_i = s_i^2`` of the weighted kernel.

    ``schmidt_number`` is ``(sum lambda)^2 / sum lambda^2``, i.e. ``1/sum
    lambda^2`` after renormalizing to unit trace, which makes it insensitive
    to norm lost to box truncation.
    """
    s = _svd(kern.matrix, full=False)
    return SchmidtSpectrum.from_eigenvalues(s**2)


def modes(kern: DiscretizedKernel, count: int) -> SchmidtModes:
    """Leading ``count`` Schmidt mode pairs.

    Field mode ``i`` is ``U[:, i] / sqrt(wk)`` and atom mode ``i`` is
    ``conj(V[:, i]) / sqrt(wq)``, so each is unit-norm in its grid's
    quadrature inner product and ``sum_j wq_j C(k, q_j) conj(atom_i(q_j)) =
    s_i field_i(k)``. With this pairing the overlap of field mode ``i`` with
    the kernel applied to atom mode ``i`` is the real positive ``s_i``.

    If ``count`` exceeds the numerical rank only the available modes are
    returned and ``truncated`` is set.
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    if count > min(kern.matrix.shape):
        raise ValueError(f"count={count} exceeds the grid size {min(kern.matrix.shape)}")
    u, s, vh = _svd(kern.matrix, full=True)
    rank = int(np.count_nonzero(s > s[0] * max(kern.matrix.shape) * np.finfo(float).eps)) if s[0] > 0 else 0
    take = min(count, rank)
    field = (u[:, :take] / kern.k_grid.sqrt_weights[:, None]).T
    atom = vh[:take, :] / kern.q_grid.sqrt_weights[None, :]
    return SchmidtModes(
        field_modes=field,
        atom_modes=atom,
        singular_values=s[:take],
        k_nodes=kern.k_grid.nodes,
        q_nodes=kern.q_grid.nodes,
        count=take,
        truncated=take < count,
    )


def marginal_matrix(kern: DiscretizedKernel, side: str = "atom") -> np.ndarray:
    """Weighted marginal density matrix ``sqrt(w w') rho(x, x')``.

    ``side="field"`` traces out the atom (``A A^H``), ``side="atom"`` traces
    out the field (``(A^H A)^T``, so that entry ``[a, b]`` is
    ``rho(q_a, q_b)``).
    """
    a = kern.matrix
    if side == "field":
        return a @ a.conj().T
    if side == "atom":
        return (a.conj().T @ a).T
    raise ValueError(f"side must be 'field' or 'atom', got {side!r}")


def _check_hermitian(rho, grid: Grid1D, rng: np.random.Generator) -> None:
    idx = rng.integers(0, len(grid), size=(HERMITICITY_SAMPLES, 2))
    a = grid.nodes[idx[:, 0]]
    b = grid.nodes[idx[:, 1]]
    gap = np.abs(np.asarray(rho(a, b)) - np.conj(np.asarray(rho(b, a))))
    worst = float(np.max(gap))
    if not worst <= HERMITICITY_TOL:
        raise ValueError(f"marginal is not Hermitian: |rho(a,b) - conj(rho(b,a))| = {worst:.3e}")


def purity_from_marginal(
    rho: Callable[[np.ndarray, np.ndarray], np.ndarray],
    q_grid: Grid1D,
    *,
    seed: int = 0,
) -> float:
    """``Tr rho^2 = int int |rho(q1, q2)|^2 dq1 dq2`` by tensor quadrature.

    ``rho`` is spot-checked for Hermiticity on random node pairs first. A
    result above ``1 + 1e-6`` means the marginal is not normalized and is
    rejected.
    """
    _check_hermitian(rho, q_grid, np.random.default_rng(seed))
    value = integrate_2d(lambda x, y: np.abs(rho(x, y)) ** 2, q_grid, q_grid)
    value = float(np.real(value))
    if not np.isfinite(value) or value <= 0:
        raise NumericalError(f"purity integral gave {value!r}")
    if value > 1.0 + PURITY_SLACK:
        raise NumericalError(f"purity {value:.9f} exceeds 1: marginal is not normalized")
    return value


def marginal_trace(rho, q_grid: Grid1D) -> float:
    """``Tr rho = int rho(q, q) dq``."""
    return float(np.real(integrate_1d(lambda q: rho(q, q), q_grid)))


def entropy_report(spec: SchmidtSpectrum, orders: Sequence[float] = (1.5, 2.0, 3.0)) -> EntropyReport:
    """Tsallis, Renyi, linear and von Neumann entropies of ``spec``.

    Only eigenvalues above the significance floor enter the power sums; the
    spectrum keeps unit trace, so the excluded tail still counts in
    ``1 - Tr rho^p``. That difference is accumulated as
    ``tail - sum lambda expm1((p-1) ln lambda)`` so orders close to 1 do not
    lose digits to cancellation.
    """
    orders = tuple(float(p) for p in orders)
    if any(not p > 1 for p in orders):
        raise ValueError(f"entropy orders must be > 1, got {orders}")
    lam = spec.significant
    tail = float(np.sum(spec.eigenvalues[spec.n_significant:]))
    log_lam = np.log(lam)

    def one_minus_trace_power(p):
        return tail - float(np.sum(lam * np.expm1((p - 1.0) * log_lam)))

    deficits = [one_minus_trace_power(p) for p in orders]
    tsallis = tuple(d / (p - 1.0) for d, p in zip(deficits, orders))
    renyi = tuple(float(np.log1p(-d)) / (1.0 - p) for d, p in zip(deficits, orders))
    linear = one_minus_trace_power(2.0)
    von_neumann = float(-np.sum(lam * log_lam))
    return EntropyReport(
        orders=orders,
        trace_powers=tuple(1.0 - d for d in deficits),
        tsallis=tuple(max(v, 0.0) for v in tsallis),
        renyi=tuple(max(v, 0.0) for v in renyi),
        linear=max(linear, 0.0),
        von_neumann=max(von_neumann, 0.0),
    )
