"""Finite truncations of classical examples and counterexamples, addressed by name."""
from .core import (MODEL_NAMES, REGISTRY, ModelInstance, ModelSpec, build_model, cogenerator,
                   delta_cells, foguel_matrix, lemerdy_basis, lowest_band, rl_matrix, sample,
                   shift)

__all__ = [
    "MODEL_NAMES", "REGISTRY", "ModelInstance", "ModelSpec", "build_model", "cogenerator",
    "delta_cells", "foguel_matrix", "lemerdy_basis", "lowest_band", "rl_matrix", "sample",
    "shift",
]
