"""Energy density around a pencil beam in an infinite scattering medium.

Deterministic solver built on analytical discrete ordinates in rotated
reference frames, plus an independent Monte Carlo validator and a CLI.
"""

from .errors import (
    AssemblyError,
    DegenerateModeError,
    InversionFailureError,
    NormalizationFailureError,
    NumericalError,
    NumericalSingularityError,
    PoleProximityError,
    SpectralFailureError,
)
from .inversion import (
    DensityField,
    InversionParams,
    de_phi,
    density_curve,
    energy_density,
)
from .mc import McConfig, run_mc, run_mc_fields, sample_hg
from .quadrature import QuadratureSet, gauss_legendre
from .special import (
    ChandrasekharTable,
    PhaseFunction,
    bessel_j0,
    bessel_remainder_d,
    chandrasekhar_g,
    normalized_plm,
    normalized_plm_table,
    wigner_d_continued,
)
from .spectral import (
    EigenSystem,
    MediumParams,
    WaveVector,
    build_w_matrices,
    eigenmode_phi,
    eigenmode_phi_closed_form,
    normalization_factor,
    rotated_mode,
    solve_all_orders,
    solve_eigensystem,
)
from .transport import (
    FourierKernel,
    GreenCoefficients,
    SpectralField,
    exp_diff_C,
    f_kernel,
    greens_function,
    scattered_intensity_hat,
)

__version__ = "0.1.0"

__all__ = [
    "AssemblyError",
    "ChandrasekharTable",
    "DegenerateModeError",
    "DensityField",
    "EigenSystem",
    "FourierKernel",
    "GreenCoefficients",
    "InversionFailureError",
    "InversionParams",
    "McConfig",
    "MediumParams",
    "NormalizationFailureError",
    "NumericalError",
    "NumericalSingularityError",
    "PhaseFunction",
    "PoleProximityError",
    "QuadratureSet",
    "SpectralFailureError",
    "SpectralField",
    "WaveVector",
    "bessel_j0",
    "bessel_remainder_d",
    "build_w_matrices",
    "chandrasekhar_g",
    "de_phi",
    "density_curve",
    "eigenmode_phi",
    "eigenmode_phi_closed_form",
    "energy_density",
    "exp_diff_C",
    "f_kernel",
    "gauss_legendre",
    "greens_function",
    "normalization_factor",
    "normalized_plm",
    "normalized_plm_table",
    "rotated_mode",
    "run_mc",
    "run_mc_fields",
    "sample_hg",
    "scattered_intensity_hat",
    "solve_all_orders",
    "solve_eigensystem",
    "wigner_d_continued",
]
