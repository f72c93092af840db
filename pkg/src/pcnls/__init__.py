"""Spectral simulation and verification tools for the L2-critical NLS."""
from .field import Field, Grid, Spectrum, inverse_spectral_transform, rescale_grid, spectral_transform
from .linear import GaussianParams, free_propagate, gaussian_exact, gaussian_initial
from .norms import AdmissiblePair, Trajectory
from .solver import SolverConfig, evolve

__version__ = "0.1.0"
