"""Numerical core: matrices, families, Galerkin operators, spectral flow, monodromy."""
