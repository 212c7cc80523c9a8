"""Similarity to contractions for matrices, semigroups and tensor products."""
__version__ = "0.1.0"
