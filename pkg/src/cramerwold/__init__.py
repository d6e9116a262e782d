"""Recover a probability measure on R^n from the masses it gives to half-spaces.

Pipeline: half-space masses -> distance potential (Crofton integral over
half-spaces) -> iterated Laplacians -> measure. A classical Radon inversion
is included as an independent route.
"""

__version__ = "0.1.0"

from .crofton import CroftonSampler, Estimate, alpha_n, crofton_distance
from .geometry import HalfSpace, contains, sample_sphere, sphere_area
from .inversion import (LaplacianStencil, ReconstructionReport, c_const, embed_query, invert,
                        laplacian_apply, reconstruct, reconstruct_even)
from .measures import (DiscreteMeasure, GaussianMixture, GridDensity, GridSpec, HalfSpaceQuery,
                       halfspace_mass, make_query, query_total, separating_halfspace, total_mass)
from .potential import PotentialField, potential_direct, potential_from_halfspaces, potential_grid
from .radon import OffsetGrid, Sinogram, radon_forward, radon_invert_grid, radon_invert_odd

__all__ = [
    "CroftonSampler", "Estimate", "alpha_n", "crofton_distance",
    "HalfSpace", "contains", "sample_sphere", "sphere_area",
    "LaplacianStencil", "ReconstructionReport", "c_const", "embed_query", "invert",
    "laplacian_apply", "reconstruct", "reconstruct_even",
    "DiscreteMeasure", "GaussianMixture", "GridDensity", "GridSpec", "HalfSpaceQuery",
    "halfspace_mass", "make_query", "query_total", "separating_halfspace", "total_mass",
    "PotentialField", "potential_direct", "potential_from_halfspaces", "potential_grid",
    "OffsetGrid", "Sinogram", "radon_forward", "radon_invert_grid", "radon_invert_odd",
]
