"""gpplab: simulation and threshold-exceedance estimation for generalized
Pareto processes on the unit interval.

Subpackage map:

    kernels     smoothing densities psi, CDF/quantile, theta <-> beta
    dnorm       grid functions, D-norm and inf-functional quadrature
    generator   bounded generator processes realizing the D-norm
    processes   GPP / neighborhood path simulation, survival oracles
    estimators  exceedance estimators and their limiting moments
    lan         exceedance point process, likelihood ratios, LAN quadratic
    harness     declarative Monte Carlo experiments, diagnostics, CSV/JSON
    backend     compiled core vs NumPy fallback selection
"""

__version__ = "0.1.0"

from .backend import BACKEND, using_native
from .dnorm import GridFunction, QuadratureSettings, d_norm, inf_functional, tail_dependence_mass
from .errors import (
    ConfigError,
    DomainError,
    GpplabError,
    NoRootError,
    ThresholdValidityError,
    UnboundedRatioError,
)
from .generator import GeneratorSpec, build_generator, sample_generator_path, validate_generator
from .kernels import (
    SmoothingKernel,
    beta_from_theta,
    custom_kernel,
    gaussian_kernel,
    kernel_by_name,
    laplace_kernel,
    theta_from_beta,
)
from .processes import (
    ProcessBatch,
    YDistribution,
    bias_coefficient,
    exact_gpp_survival,
    exponential_y,
    expansion_y,
    sample_gpp,
    sample_neighborhood,
    uniform_y,
)

__all__ = [
    "BACKEND",
    "ConfigError",
    "DomainError",
    "GeneratorSpec",
    "GpplabError",
    "GridFunction",
    "NoRootError",
    "ProcessBatch",
    "QuadratureSettings",
    "SmoothingKernel",
    "ThresholdValidityError",
    "UnboundedRatioError",
    "YDistribution",
    "__version__",
    "beta_from_theta",
    "bias_coefficient",
    "build_generator",
    "custom_kernel",
    "d_norm",
    "exact_gpp_survival",
    "expansion_y",
    "exponential_y",
    "gaussian_kernel",
    "inf_functional",
    "kernel_by_name",
    "laplace_kernel",
    "sample_generator_path",
    "sample_gpp",
    "sample_neighborhood",
    "tail_dependence_mass",
    "theta_from_beta",
    "uniform_y",
    "using_native",
    "validate_generator",
]
