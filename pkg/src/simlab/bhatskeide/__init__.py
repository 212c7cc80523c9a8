from .core import (CircleGrid, GridTime, InterpolatedSemigroup, align_time, arc_structure,
                   bs_check_interpolation, bs_extract_certificate, bs_matrix, bs_multifactor,
                   bs_semigroup_residual, compose_structure, norm_series, structure_law_holds,
                   write_series_csv)

__all__ = [
    "CircleGrid", "GridTime", "InterpolatedSemigroup", "align_time", "arc_structure",
    "bs_check_interpolation", "bs_extract_certificate", "bs_matrix", "bs_multifactor",
    "bs_semigroup_residual", "compose_structure", "norm_series", "structure_law_holds",
    "write_series_csv",
]
