from .kernels import (
    CorrelationCache,
    CorrelationMatrix,
    default_phi,
    distance_matrix,
    distances_to,
    exp_correlation,
    factorize,
    max_distance,
    phi_support,
)
from .gaussian import (
    combine_normals,
    combine_precisions,
    inverse_gamma_logpdf,
    mvn_logpdf_centered,
    normal_logpdf,
)
from .kriging import KrigingSystem, krige_conditional, ordinary_kriging_weights, simple_kriging_weights

__all__ = [
    "CorrelationCache",
    "CorrelationMatrix",
    "default_phi",
    "distance_matrix",
    "distances_to",
    "exp_correlation",
    "factorize",
    "max_distance",
    "phi_support",
    "combine_normals",
    "combine_precisions",
    "inverse_gamma_logpdf",
    "mvn_logpdf_centered",
    "normal_logpdf",
    "KrigingSystem",
    "krige_conditional",
    "ordinary_kriging_weights",
    "simple_kriging_weights",
]
