"""hsfl - bifurcation detection for periodic solutions of Hamiltonian systems via spectral flow."""

__version__ = "0.1.0"
