"""Symplectic tomograms of one-dimensional wavefunctions.

Simulation of tomogram slices along arbitrary phase-space directions,
phase reconstruction from incomplete slice sets, classical oscillator
dynamics with initial-state recovery, and information-completeness
reports for Gaussian states.
"""

from . import completeness, core, dynamics, io, reconstruct, transform
from .errors import TomokitError

__version__ = "0.1.0"

__all__ = ["completeness", "core", "dynamics", "io", "reconstruct",
           "transform", "TomokitError", "__version__"]
