"""Validated steady states and instability proofs for a 1-D triangular cross-diffusion system."""

__version__ = "0.1.0"
