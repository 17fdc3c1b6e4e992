"""Classical numerics for unitary dilation of ``V(t) = exp(-A t)``.

Nagy dilations, block-encoding contracts, continuous and discretised
Schrödingerisation, resource estimates and a heat-equation test bed.
"""

from .blockenc import BlockEncoding, lcu_combine, product, trotter_pipeline, verify
from .linalg import HermitianSplit, SpectralProfile, hermitian_split, spectral_profile
from .nagy import DilationMatrix, compress, dilate_chain, dilate_single
from .schrod_cv import cv_project
from .schrod_dv import SchrodConfig, build_grid, evolve, initial_modes, recover

__version__ = "0.1.0"

__all__ = [
    "BlockEncoding", "DilationMatrix", "HermitianSplit", "SchrodConfig", "SpectralProfile",
    "build_grid", "compress", "cv_project", "dilate_chain", "dilate_single", "evolve",
    "hermitian_split", "initial_modes", "lcu_combine", "product", "recover",
    "spectral_profile", "trotter_pipeline", "verify",
]
