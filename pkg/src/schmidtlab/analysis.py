"""Per-eta numerical routes to the Schmidt number and the eta sweep.

Three independent ways of getting ``K`` for the scattering model:

* closed form (``ScatteringModel.schmidt_number_exact``),
* SVD of the weighted amplitude on a (k, q) grid,
* purity of the closed-form atom marginal by 2-D quadrature on a q grid.

A fourth, the purity of the *field* marginal built numerically from the
amplitude, is used by ``verify`` to check that both sides of the bipartition
give the same ``K``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .model import ScatteringModel
from .quadrature import (
    DEFAULT_N,
    ConvergenceReport,
    ExtentPolicy,
    Grid1D,
    Rule,
    build_grid,
    default_extents,
    richardson_check,
)
from .schmidt import (
    DiscretizedKernel,
    SchmidtSpectrum,
    discretize,
    marginal_matrix,
    marginal_trace,
    purity_from_marginal,
    spectrum,
)

__all__ = [
    "NumericalSettings",
    "SweepConfig",
    "SweepRow",
    "model_grids",
    "model_kernel",
    "svd_spectrum",
    "svd_schmidt_number_checked",
    "purity_route",
    "field_side_schmidt_number",
    "atom_side_schmidt_number",
    "sweep_etas",
    "sweep_row",
    "run_sweep",
]


@dataclass(frozen=True)
class NumericalSettings:
    grid_n: int = DEFAULT_N
    rule: Rule = Rule.GAUSS_LEGENDRE
    extents: ExtentPolicy = field(default_factory=ExtentPolicy)
    tol: float = 1e-6

    def __post_init__(self):
        if self.grid_n < 2:
            raise ValueError("grid_n must be >= 2")
        object.__setattr__(self, "rule", Rule(self.rule))


def model_grids(eta: float, n: int, settings: NumericalSettings = NumericalSettings()) -> tuple[Grid1D, Grid1D]:
    k_extent, q_extent = default_extents(eta, settings.extents)
    return build_grid(settings.rule, n, k_extent), build_grid(settings.rule, n, q_extent)


def model_kernel(model: ScatteringModel, n: Optional[int] = None,
                 settings: NumericalSettings = NumericalSettings()) -> DiscretizedKernel:
    kg, qg = model_grids(model.eta, n or settings.grid_n, settings)
    return discretize(model.amplitude, kg, qg)


def svd_spectrum(model: ScatteringModel, n: Optional[int] = None,
                 settings: NumericalSettings = NumericalSettings()) -> SchmidtSpectrum:
    return spectrum(model_kernel(model, n, settings))


def svd_schmidt_number_checked(model: ScatteringModel,
                               settings: NumericalSettings = NumericalSettings()) -> ConvergenceReport:
    """SVD Schmidt number at ``grid_n`` and ``2 grid_n``."""
    n = settings.grid_n
    coarse = svd_spectrum(model, n, settings).schmidt_number
    fine = svd_spectrum(model, 2 * n, settings).schmidt_number
    return richardson_check((coarse, fine), settings.tol)


def purity_route(model: ScatteringModel, settings: NumericalSettings = NumericalSettings()) -> ConvergenceReport:
    """``Tr rho^2`` of the closed-form atom marginal on q grids of ``n`` and
    ``2n`` points. The report's ``fine_value`` is the better estimate."""
    values = []
    for n in (settings.grid_n, 2 * settings.grid_n):
        _, qg = model_grids(model.eta, n, settings)
        values.append(purity_from_marginal(model.marginal_density, qg))
    return richardson_check(tuple(values), settings.tol)


def atom_side_schmidt_number(model: ScatteringModel, q_grid: Grid1D) -> float:
    """``(Tr rho_B)^2 / Tr rho_B^2`` from the closed-form atom marginal."""
    trace = marginal_trace(model.marginal_density, q_grid)
    return trace**2 / purity_from_marginal(model.marginal_density, q_grid)


def field_side_schmidt_number(kern: DiscretizedKernel) -> float:
    """``(Tr rho_A)^2 / Tr rho_A^2`` with the field marginal ``rho_A(k, k')``
    obtained by integrating the sampled amplitude over q."""
    m = marginal_matrix(kern, "field")
    trace = float(np.real(np.trace(m)))
    purity = float(np.sum(m.real**2 + m.imag**2))
    return trace**2 / purity


# -- sweep -------------------------------------------------------------------

@dataclass(frozen=True)
class SweepConfig:
    eta_min: float = 0.1
    eta_max: float = 50.0
    steps: int = 100
    scale: str = "linear"
    grid_n: int = DEFAULT_N
    include_numerical: bool = False
    output_format: str = "csv"

    def __post_init__(self):
        if not (self.eta_min > 0 and math.isfinite(self.eta_max)):
            raise ValueError("eta_min must be positive and eta_max finite")
        if not self.eta_min < self.eta_max:
            raise ValueError("eta_min must be smaller than eta_max")
        if self.steps < 2:
            raise ValueError("steps must be at least 2")
        if self.grid_n < 16:
            raise ValueError("grid_n must be at least 16")
        if self.scale not in ("linear", "log"):
            raise ValueError("scale must be 'linear' or 'log'")
        if self.output_format not in ("csv", "json"):
            raise ValueError("output_format must be 'csv' or 'json'")


@dataclass(frozen=True)
class SweepRow:
    eta: float
    k_exact: float
    k_asymptotic: float
    k_fit: float
    k_numerical: Optional[float] = None
    purity_numerical: Optional[float] = None
    converged: bool = True


def sweep_etas(cfg: SweepConfig) -> np.ndarray:
    if cfg.scale == "log":
        return np.geomspace(cfg.eta_min, cfg.eta_max, cfg.steps)
    return np.linspace(cfg.eta_min, cfg.eta_max, cfg.steps)


def sweep_row(eta: float, include_numerical: bool,
              settings: NumericalSettings = NumericalSettings()) -> SweepRow:
    m = ScatteringModel(eta)
    row = SweepRow(
        eta=float(eta),
        k_exact=m.schmidt_number_exact(),
        k_asymptotic=m.schmidt_number_asymptotic(),
        k_fit=m.schmidt_number_fit(),
    )
    if not include_numerical:
        return row
    k_check = svd_schmidt_number_checked(m, settings)
    p_check = purity_route(m, settings)
    return SweepRow(
        eta=row.eta,
        k_exact=row.k_exact,
        k_asymptotic=row.k_asymptotic,
        k_fit=row.k_fit,
        k_numerical=k_check.coarse_value,
        purity_numerical=p_check.coarse_value,
        converged=k_check.converged and p_check.converged,
    )


def run_sweep(cfg: SweepConfig, settings: Optional[NumericalSettings] = None,
              workers: int = 1) -> list[SweepRow]:
    """All rows of the sweep, sorted by eta.

    Rows are independent; with ``workers > 1`` they are computed in a thread
    pool, which does not change the result.
    """
    settings = settings or NumericalSettings(grid_n=cfg.grid_n)
    etas = sweep_etas(cfg)
    if workers > 1 and cfg.include_numerical:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda e: sweep_row(e, True, settings), etas))
    else:
        rows = [sweep_row(e, cfg.include_numerical, settings) for e in etas]
    return sorted(rows, key=lambda r: r.eta)
