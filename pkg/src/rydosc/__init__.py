"""Quench dynamics and oscillation spectra of staggered-field Rydberg rings."""

from .model import ChainSpec, DriveParams, Layout, params_from_dimensionless
from .hilbert import Basis, BasisMode, enumerate_basis, build_sectors
from .hamiltonian import build_hamiltonian, classify, sector_eigensolve, omega_lines
from .config import RunConfig

__all__ = [
    "Basis", "BasisMode", "ChainSpec", "DriveParams", "Layout", "RunConfig",
    "build_hamiltonian", "build_sectors", "classify", "enumerate_basis", "omega_lines",
    "params_from_dimensionless", "sector_eigensolve",
]
__version__ = "0.1.0"
