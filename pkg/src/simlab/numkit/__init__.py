from .core import (DEFAULT_TOL, TolerancePolicy, adjoint, as_hermitian, as_operator,
                   cond_pd, eigenvalues, hermitian_part, is_real, kron, kron_all,
                   kron_sum, matrix_powers, max_eig, min_eig, normalize_form,
                   numerical_abscissa, op_norm, spectral_abscissa, spectral_radius)
from .expm import matexp
from .lyapunov import lyap_residual, lyap_solve
from .matrixio import (dumps_certificate, dumps_matrix, loads_certificate, loads_matrix,
                       matrix_io_roundtrip, read_matrix, write_matrix)

__all__ = [
    "DEFAULT_TOL", "TolerancePolicy", "adjoint", "as_hermitian", "as_operator",
    "cond_pd", "eigenvalues", "hermitian_part", "is_real", "kron", "kron_all",
    "kron_sum", "matrix_powers", "max_eig", "min_eig", "normalize_form",
    "numerical_abscissa", "op_norm", "spectral_abscissa", "spectral_radius",
    "matexp", "lyap_residual", "lyap_solve", "dumps_certificate", "dumps_matrix",
    "loads_certificate", "loads_matrix", "matrix_io_roundtrip", "read_matrix",
    "write_matrix",
]
