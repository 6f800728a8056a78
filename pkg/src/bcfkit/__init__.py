"""Pole-product spectral densities and their exponential correlation functions.

Typical pipeline::

    from bcfkit import fit_sd, FitConfig, LogNormal, decompose, pade
    from bcfkit import g_from_exponential, absorption, default_time_grid

    fit = fit_sd(LogNormal(0.3, 0.7, 38.0), FitConfig(n=5, poles_per_term=(3,)))
    bcf = decompose(fit.model, pade(3), temperature=77.0)
    g = g_from_exponential(bcf, default_time_grid(fit.model))
    spectrum = absorption(g, gamma_add=1.0)
"""

from .bcf import ExponentialBCF, decompose, eval_exponential, exact_bcf, extend_negative_time
from .cothexp import (
    CothExpansion,
    Scheme,
    eval_expansion,
    expansion,
    expansion_error,
    matsubara,
    pade,
    zero_temperature,
)
from .errors import (
    EigenSolverError,
    InvalidTemperatureError,
    NumericalError,
    PoleCollisionError,
    QuadratureError,
    UnresolvedSpectrumError,
    ValidationError,
)
from .fitting import FitConfig, FitResult, GridSpec, fit_sd, multistart_init
from .lineshape import LineshapeSeries, g_from_exponential, g_from_sd_quadrature
from .spectra import (
    Spectrum,
    absorption,
    compare_spectra,
    default_time_grid,
    t0_weak_coupling_spectrum,
)
from .specdens import (
    DampedVibration,
    DrudeLorentz,
    FitSDModel,
    LogNormal,
    OhmicExp,
    PoleTerm,
    SumSD,
    eval_fit_sd,
    eval_reference_sd,
    huang_rhys,
    reorganization_energy,
    sd_from_dict,
    tail_exponents,
)

__version__ = "0.1.0"
