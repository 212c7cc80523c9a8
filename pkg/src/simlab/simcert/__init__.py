from .constants import (KAPPA_MAX, CrSimProfile, contraction_feasible, crsim_profile,
                        neumann_certificate, peripheral_vector, poly_lower_bound,
                        power_lower_bound, quasi_rate, rota_renorm, semigroup_constant,
                        similarity_constant)
from .types import (INFINITY, ConstantResult, MetricCertificate, SemigroupSpec, Verdict,
                    certificate_is_valid, continuous_residual, discrete_residual,
                    make_certificate)

__all__ = [
    "KAPPA_MAX", "CrSimProfile", "contraction_feasible", "crsim_profile",
    "neumann_certificate", "peripheral_vector", "poly_lower_bound", "power_lower_bound",
    "quasi_rate", "rota_renorm", "semigroup_constant", "similarity_constant",
    "INFINITY", "ConstantResult", "MetricCertificate", "SemigroupSpec", "Verdict",
    "certificate_is_valid", "continuous_residual", "discrete_residual", "make_certificate",
]
