"""Resonant semilinear Dirichlet problems on the disc.

Bessel functions and zeros, disc and square spectra, quadrature on the disc,
a small expression language for forcings and nonlinearities, the
solvability test for a double eigenvalue, a Fourier-Bessel Galerkin solver
and a semi-implicit heat flow.
"""

__version__ = "0.1.0"

from .besselkit import bessel_j, bessel_zero, zero_table
from .disc_spectrum import EigenMode, enumerate_eigenvalues, mode_from_indices, mode_from_rank
from .errors import ConvergenceError, NumericalError, QuadratureError, ResodiscError
from .exprlang import Nonlinearity, parse, pretty
from .resonance import SolvabilityReport, Verdict, check_solvability, compute_jnm, project
from .square_spectrum import count_representations

__all__ = [
    "ConvergenceError", "EigenMode", "Nonlinearity", "NumericalError", "QuadratureError",
    "ResodiscError", "SolvabilityReport", "Verdict", "bessel_j", "bessel_zero", "check_solvability",
    "compute_jnm", "count_representations", "enumerate_eigenvalues", "mode_from_indices",
    "mode_from_rank", "parse", "pretty", "project", "zero_table",
]
