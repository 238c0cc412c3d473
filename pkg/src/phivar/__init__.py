"""Phi-variation of Takagi-class fractal functions along dyadic partitions.

Construct coefficient schemes, evaluate the (sign-modified) expansions and
their exact dyadic increments, compute partial Phi_q- and power-variation
sums by exact enumeration, binomial collapse, or Monte Carlo, and check the
limit objects (scaled Bernoulli convolution, CLT, total variation).
"""

from .errors import CapExceededError, ConfigError, GaugeDomainError, PhivarError
from .regvar import PhiFunction, RegularlyVaryingFn, build_ell, parse_g
from .scheme import (CoefficientScheme, ConditionReport, ExponentReport,
                     check_conditions, critical_exponents)
from .dyadic import (DyadicPath, SignField, enumerate_increments, eval_f,
                     gen_path, increment, iter_increment_blocks, tent)
from .variation import (PowerVariationClass, StudyResult, VariationReport,
                        classify_power_variation, convergence_study,
                        theoretical_limit, variation_binomial,
                        variation_enumerate, variation_mc)
from .limits import (ConvolutionSpec, CouplingReport, MomentEstimate,
                     clt_distance, coupling_distance, moment_Z, sample_Z,
                     sampled_coupling_distance, total_variation_expectation,
                     w1_to_normal)

__version__ = "0.1.0"

__all__ = [
    "CapExceededError", "ConfigError", "GaugeDomainError", "PhivarError",
    "PhiFunction", "RegularlyVaryingFn", "build_ell", "parse_g",
    "CoefficientScheme", "ConditionReport", "ExponentReport",
    "check_conditions", "critical_exponents",
    "DyadicPath", "SignField", "enumerate_increments", "eval_f", "gen_path",
    "increment", "iter_increment_blocks", "tent",
    "PowerVariationClass", "StudyResult", "VariationReport",
    "classify_power_variation", "convergence_study", "theoretical_limit",
    "variation_binomial", "variation_enumerate", "variation_mc",
    "ConvolutionSpec", "CouplingReport", "MomentEstimate", "clt_distance",
    "coupling_distance", "moment_Z", "sample_Z", "sampled_coupling_distance",
    "total_variation_expectation", "w1_to_normal",
    "__version__",
]
