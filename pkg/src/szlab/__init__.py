"""szlab: a desk-scale laboratory for Szego-type trace-ratio limits.

Numerically exercises circle Toeplitz log-determinant asymptotics, Heisenberg
group harmonic analysis (Schrodinger representation, group Fourier transform,
Plancherel and inversion checks), Weyl/Moyal symbol calculus, phase-space
volume asymptotics, Tauberian transform comparisons, and finite-dimensional
spectral-projection models tying them together.
"""

from .backend import ACTIVE_BACKEND, available_backends

__all__ = ["ACTIVE_BACKEND", "available_backends"]
__version__ = "0.1.0"
