from .core import (N_CESARO, SplitResult, assemble_certificate, extract_factor_certificate,
                   growth_bound, split_scaling_discrete, split_scaling_semigroup,
                   tensorially_preserves)

__all__ = [
    "N_CESARO", "SplitResult", "assemble_certificate", "extract_factor_certificate",
    "growth_bound", "split_scaling_discrete", "split_scaling_semigroup",
    "tensorially_preserves",
]
