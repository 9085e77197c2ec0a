"""Schmidt number and Schmidt decomposition of pure continuous-variable
bipartite states, with a closed-form atom-photon scattering model."""

__version__ = "0.1.0"

from .model import ScatteringModel
from .quadrature import ExtentPolicy, Grid1D, Rule, build_grid, default_extents
from .schmidt import (
    DiscretizedKernel,
    EntropyReport,
    NumericalError,
    SchmidtModes,
    SchmidtSpectrum,
    discretize,
    entropy_report,
    modes,
    purity_from_marginal,
    spectrum,
)
from .specfun import erf, erfc, erfcx

__all__ = [
    "ScatteringModel",
    "ExtentPolicy",
    "Grid1D",
    "Rule",
    "build_grid",
    "default_extents",
    "DiscretizedKernel",
    "EntropyReport",
    "NumericalError",
    "SchmidtModes",
    "SchmidtSpectrum",
    "discretize",
    "entropy_report",
    "modes",
    "purity_from_marginal",
    "spectrum",
    "erf",
    "erfc",
    "erfcx",
]
