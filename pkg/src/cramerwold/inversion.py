"""Recover a measure from its distance potential by iterated Laplacians.

In odd dimension ``n = 2m - 1`` the potential satisfies
``Delta^m f_mu = c_m mu`` with ``c_m = 2 (-2 pi)^(m-1) (2m-2)!!``. On a grid
``Delta`` is the second-order central stencil, applied ``m`` times; each
pass drops one layer of nodes per face. Even dimensions go through the
embedding ``R^(2m) = R^(2m) x {0}`` inside ``R^(2m+1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.ndimage import gaussian_filter

from .crofton import CroftonSampler
from .geometry import check_same_dim
from .measures import GridDensity, GridSpec, HalfSpaceQuery
from .potential import PotentialField, potential_grid

__all__ = [
    "LaplacianStencil",
    "ReconstructionReport",
    "c_const",
    "double_factorial",
    "laplacian_apply",
    "invert",
    "embed_query",
    "reconstruct",
    "reconstruct_even",
    "relative_errors",
]


def double_factorial(k: int) -> int:
    """``k (k - 2) (k - 4) ...`` with ``0!! = 1``."""
    if k < 0:
        raise ValueError(f"double factorial of {k}")
    return math.prod(range(k, 0, -2))


def c_const(m: int) -> float:
    """``c_m = 2 (-2 pi)^(m-1) (2m-2)!!``: ``Delta^m |x| = c_m delta_0`` in ``R^(2m-1)``."""
    if int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    return 2.0 * (-2.0 * math.pi) ** (m - 1) * double_factorial(2 * m - 2)


@dataclass(frozen=True)
class LaplacianStencil:
    n: int
    h: float
    scheme: str = "central_2nd_order"

    def __post_init__(self):
        if self.scheme != "central_2nd_order":
            raise ValueError(f"unsupported stencil scheme {self.scheme!r}")


def _laplacian_values(v: np.ndarray, h: float) -> np.ndarray:
    n = v.ndim
    inner = tuple(slice(1, -1) for _ in range(n))
    out = -2.0 * n * v[inner]
    for ax in range(n):
        lo = list(inner)
        hi = list(inner)
        lo[ax] = slice(0, -2)
        hi[ax] = slice(2, None)
        out += v[tuple(lo)] + v[tuple(hi)]
    return out / (h * h)


def laplacian_apply(field: GridDensity, stencil: Optional[LaplacianStencil] = None) -> GridDensity:
    """Central second differences summed over axes, on interior nodes only."""
    if stencil is None:
        stencil = LaplacianStencil(field.dim, field.h)
    check_same_dim(stencil.n, field.dim, "stencil dimension")
    if not math.isclose(stencil.h, field.h, rel_tol=1e-12):
        raise ValueError(f"stencil spacing {stencil.h} does not match grid spacing {field.h}")
    if min(field.shape) < 3:
        raise ValueError(f"every axis needs at least 3 nodes, got shape {field.shape}")
    return GridDensity(field.origin + field.h, field.h, _laplacian_values(field.values, field.h))


def relative_errors(density: GridDensity, truth: Callable) -> tuple[float, float]:
    """Relative L1 and L-infinity errors against a density function on the nodes."""
    ref = np.asarray(truth(density.nodes()), dtype=float).reshape(density.shape)
    diff = density.values - ref
    l1 = float(np.abs(diff).sum() / np.abs(ref).sum())
    linf = float(np.abs(diff).max() / np.abs(ref).max())
    return l1, linf


@dataclass(eq=False)
class ReconstructionReport:
    """Reconstructed density on a grid and diagnostics.

    ``negative_mass`` is the total mass of negative cells. For even-dimensional
    runs ``density`` is the slab integral over the extra axis and ``volume``
    keeps the odd-dimensional reconstruction it came from.
    """

    density: GridDensity
    m: int
    c_m: float
    negative_mass: float
    mollify_width: float = 0.0
    l1_error: Optional[float] = None
    linf_error: Optional[float] = None
    samples: int = 0
    seed: Optional[int] = None
    volume: Optional[GridDensity] = None
    extra: dict = field(default_factory=dict)

    @property
    def total_mass(self) -> float:
        return self.density.total_mass()

    def metadata(self) -> dict:
        return {
            "m": self.m,
            "c_m": self.c_m,
            "mollify_width": self.mollify_width,
            "errors": {"l1": self.l1_error, "linf": self.linf_error},
            "negative_mass": self.negative_mass,
            "total_mass": self.total_mass,
            "seeds": [] if self.seed is None else [self.seed],
            "samples": self.samples,
            **self.extra,
        }


def _negative_mass(density: GridDensity) -> float:
    return float(-density.values[density.values < 0].sum() * density.cell_volume) + 0.0


def invert(f, m: Optional[int] = None, mollify_width: Optional[float] = None,
           truth: Optional[Callable] = None) -> ReconstructionReport:
    """Apply ``c_m^-1 Delta^m`` to a potential on a ``(2m-1)``-dimensional grid.

    ``f`` is a :class:`PotentialField` or a :class:`GridDensity` of potential
    values. The result lives on the grid shrunk by ``m`` nodes per face.
    ``mollify_width`` is the standard deviation, in grid cells, of a Gaussian
    smoothing applied after differencing; ``None`` means 1 cell for
    ``m >= 2`` and none for ``m = 1``. ``truth`` (a density function of an
    ``(N, n)`` node array) fills in the relative error fields.
    """
    grid = f.grid if isinstance(f, PotentialField) else f
    n = grid.dim
    if m is None:
        if n % 2 == 0:
            raise ValueError(f"no iterated-Laplacian inversion in even dimension {n}; embed first")
        m = (n + 1) // 2
    if n != 2 * m - 1:
        raise ValueError(f"a {n}-D potential needs m = {(n + 1) / 2}, got m = {m}")
    if min(grid.shape) < 2 * m + 1:
        raise ValueError(f"grid shape {grid.shape} too small for {m} stencil passes")
    if mollify_width is None:
        mollify_width = 1.0 if m >= 2 else 0.0
    out = grid
    stencil = LaplacianStencil(n, grid.h)
    for _ in range(m):
        out = laplacian_apply(out, stencil)
    cm = c_const(m)
    vals = out.values / cm
    if mollify_width > 0:
        vals = gaussian_filter(vals, mollify_width, mode="constant", cval=0.0, truncate=4.0)
    density = out.with_values(vals)
    report = ReconstructionReport(density, m, cm, _negative_mass(density), float(mollify_width))
    if isinstance(f, PotentialField):
        report.samples, report.seed = f.samples, f.seed
    if truth is not None:
        report.l1_error, report.linf_error = relative_errors(density, truth)
    return report


def embed_query(query: HalfSpaceQuery, total: Optional[float] = None) -> HalfSpaceQuery:
    """Lift a half-space query on ``R^d`` to the measure placed on ``R^d x {0}``.

    A half-space of ``R^(d+1)`` with normal ``(omega, omega_z)`` meets the
    plane ``z = 0`` in ``{<omega, x> >= p}``, i.e. the ``d``-dimensional
    half-space ``(omega / |omega|, p / |omega|)``. A vertical normal
    (``omega = 0``) contains the whole plane iff ``p <= 0``.
    """
    d = query.dim
    if total is None:
        e = np.zeros((1, d))
        e[0, 0] = 1.0
        total = float(query.masses(e, np.array([[-np.inf]]))[0, 0])

    def masses(omegas, ps):
        flat = omegas[:, :d]
        r = np.linalg.norm(flat, axis=1)
        out = np.where(ps <= 0.0, total, 0.0)
        tilted = r > 0.0
        if np.any(tilted):
            rt = r[tilted]
            out[tilted] = query.masses(flat[tilted] / rt[:, None], ps[tilted] / rt[:, None])
        return out

    return HalfSpaceQuery(masses, d + 1, query.kind)


def reconstruct(query: HalfSpaceQuery, total: float, grid_spec: GridSpec, sampler: CroftonSampler,
                m: Optional[int] = None, mollify_width: Optional[float] = None,
                truth: Optional[Callable] = None, **potential_options) -> ReconstructionReport:
    """Half-space masses to density on ``grid_spec``, using only ``query``.

    The potential is computed on ``grid_spec`` padded by ``m`` nodes so the
    differenced result covers exactly ``grid_spec``.
    """
    n = grid_spec.dim
    if m is None:
        m = (n + 1) // 2
    if n != 2 * m - 1:
        raise ValueError(f"grid dimension {n} does not match m = {m} (need n = 2m - 1)")
    field_ = potential_grid(query, total, grid_spec.padded(m), sampler, **potential_options)
    report = invert(field_, m, mollify_width, truth)
    report.extra["potential_max_stderr"] = float(np.max(field_.mc_error)) if field_.mc_error is not None else None
    return report


def reconstruct_even(query: HalfSpaceQuery, total: float, grid_spec: GridSpec, sampler: CroftonSampler,
                     z_cells: int = 4, mollify_width: Optional[float] = None,
                     truth: Optional[Callable] = None, **potential_options) -> ReconstructionReport:
    """Reconstruct an even-dimensional measure through the odd pipeline one dimension up.

    The lifted density is concentrated near ``z = 0``; summing it over the
    ``2 z_cells + 1`` nodes of the extra axis (times ``h``) gives the density
    on ``grid_spec``.
    """
    d = grid_spec.dim
    if d % 2:
        raise ValueError(f"reconstruct_even needs an even dimension, got {d}")
    check_same_dim(sampler.n, d + 1, "sampler dimension")
    lifted = embed_query(query, total)
    spec = GridSpec(np.append(grid_spec.origin, -z_cells * grid_spec.h), grid_spec.h,
                    (*grid_spec.shape, 2 * z_cells + 1))
    inner = reconstruct(lifted, total, spec, sampler, (d + 2) // 2, mollify_width, None, **potential_options)
    vol = inner.density
    slab = GridDensity(grid_spec.origin, grid_spec.h, vol.values.sum(axis=-1) * vol.h)
    report = ReconstructionReport(slab, inner.m, inner.c_m, _negative_mass(slab), inner.mollify_width,
                                  samples=inner.samples, seed=inner.seed, volume=vol,
                                  extra={"embedded_dim": d + 1, "z_cells": z_cells})
    if truth is not None:
        report.l1_error, report.linf_error = relative_errors(slab, truth)
    return report
