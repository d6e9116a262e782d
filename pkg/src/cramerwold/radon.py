"""Hyperplane integrals and the odd-dimensional Radon inversion.

``J(omega, p)`` integrates a density over ``{<omega, x> = p}``. For odd ``n``

    f(x) = 1/2 (2 pi)^(1-n) (-Delta)^((n-1)/2) int_{S^(n-1)} J(omega, <omega, x>) dOmega(omega)

which is used here as an independent route to the same reconstructions as
the half-space pipeline. Its cumulative ``int_p^inf J(omega, q) dq`` is the
half-space mass ``mu({<omega, x> >= p})``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.interpolate import CubicSpline

from .geometry import as_vector, check_same_dim, sphere_area
from .inversion import _laplacian_values
from .measures import GridDensity, GridSpec

__all__ = [
    "OffsetGrid",
    "Sinogram",
    "radon_forward",
    "backproject",
    "radon_invert_grid",
    "radon_invert_odd",
]



@njit(cache=True)
def _splat(omegas, nodes, mass, p0, dp, linear, out):
    k, P = out.shape
    N, n = nodes.shape
    for i in range(k):
        for c in range(N):
            proj = 0.0
            for d in range(n):
                proj += omegas[i, d] * nodes[c, d]
            u = (proj - p0) / dp
            if linear:
                b = int(np.floor(u))
                t = u - b
                if 0 <= b < P:
                    out[i, b] += (1.0 - t) * mass[c]
                if 0 <= b + 1 < P:
                    out[i, b + 1] += t * mass[c]
            else:
                b = int(np.floor(u + 0.5))
                if 0 <= b < P:
                    out[i, b] += mass[c]


@njit(cache=True)
def _spline_backproject(omegas, points, coef, start, dp, acc):
    # coef[i, j, :] holds the cubic on segment j of direction i, highest power first.
    k, segs = coef.shape[0], coef.shape[1]
    N, n = points.shape
    for i in range(k):
        for c in range(N):
            proj = 0.0
            for d in range(n):
                proj += omegas[i, d] * points[c, d]
            u = (proj - start) / dp
            if u < 0.0 or u > segs:
                continue
            j = min(int(np.floor(u)), segs - 1)
            t = (u - j) * dp
            acc[c] += ((coef[i, j, 0] * t + coef[i, j, 1]) * t + coef[i, j, 2]) * t + coef[i, j, 3]


@dataclass(frozen=True)
class OffsetGrid:
    """Bin centres ``p0 + dp * j`` for ``j = 0 .. count - 1``."""

    p0: float
    dp: float
    count: int

    def __post_init__(self):
        if not self.dp > 0 or self.count < 1:
            raise ValueError(f"invalid offset grid dp={self.dp}, count={self.count}")

    @classmethod
    def symmetric(cls, half_width: float, dp: float) -> "OffsetGrid":
        k = int(math.ceil(half_width / dp - 1e-9))
        return cls(-k * dp, dp, 2 * k + 1)

    @property
    def values(self) -> np.ndarray:
        return self.p0 + self.dp * np.arange(self.count)


@dataclass(frozen=True, eq=False)
class Sinogram:
    """``values[i, j] = J(directions[i], p_grid.values[j])``."""

    directions: np.ndarray
    p_grid: OffsetGrid
    values: np.ndarray

    @property
    def dim(self) -> int:
        return self.directions.shape[1]

    def masses(self) -> np.ndarray:
        """Per-direction Riemann sum of ``J dp`` (the total integral of ``f``)."""
        return self.values.sum(axis=1) * self.p_grid.dp

    def tail_masses(self, ps) -> np.ndarray:
        """``int_p^inf J(omega_i, q) dq`` per direction, ``ps`` of shape ``(k, P)``.

        ``J`` is treated as constant over each bin, so the result is exact for
        the binned data.
        """
        ps = np.asarray(ps, dtype=float)
        g = self.p_grid
        edges_tail = np.concatenate([np.cumsum(self.values[:, ::-1], axis=1)[:, ::-1],
                                     np.zeros((self.values.shape[0], 1))], axis=1) * g.dp
        u = np.clip((ps - (g.p0 - 0.5 * g.dp)) / g.dp, 0.0, float(g.count))
        j = np.minimum(np.floor(u).astype(np.intp), g.count - 1)
        frac = u - j
        rows = np.arange(ps.shape[0])[:, None]
        return edges_tail[rows, j] - frac * self.values[rows, j] * g.dp

    def save(self, path) -> None:
        g = self.p_grid
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{self.directions.shape[0]},{g.count},{g.p0!r},{g.dp!r}\n")
            for w, row in zip(self.directions, self.values):
                fh.write(",".join(repr(float(v)) for v in (*w, *row)) + "\n")

    @classmethod
    def load(cls, path) -> "Sinogram":
        with open(path, encoding="utf-8") as fh:
            head = fh.readline().strip().split(",")
            if len(head) != 4:
                raise ValueError(f"{path}: header must be ndirs,np,p0,dp")
            ndirs, count = int(head[0]), int(head[1])
            grid = OffsetGrid(float(head[2]), float(head[3]), count)
            rows = np.loadtxt(fh, delimiter=",", ndmin=2)
        if rows.shape[0] != ndirs or rows.shape[1] <= count:
            raise ValueError(f"{path}: expected {ndirs} rows of n + {count} values")
        return cls(rows[:, :-count], grid, rows[:, -count:])


def radon_forward(f: GridDensity, directions, p_grid: OffsetGrid, assignment: str = "nearest") -> Sinogram:
    """Hyperplane integrals of a grid density by projecting node masses onto ``p`` bins.

    ``assignment="nearest"`` puts each node's mass ``f h^n`` into the bin
    ``[p - dp/2, p + dp/2)`` containing ``<omega, node>``. ``"linear"`` splits
    it between the two nearest bin centres in proportion to proximity, which
    suppresses the aliasing produced when lattice planes line up with the
    bins. Values are divided by ``dp`` in both cases, so either way
    ``sum(J) dp`` is the total mass inside the offset range.
    """
    if assignment not in ("nearest", "linear"):
        raise ValueError(f"unknown assignment {assignment!r}")
    omegas = np.atleast_2d(np.asarray(directions, dtype=float))
    check_same_dim(f.dim, omegas.shape[1])
    flat = f.values.reshape(-1)
    keep = flat != 0
    nodes = f.nodes()[keep]
    mass = flat[keep] * f.cell_volume / p_grid.dp
    out = np.zeros((omegas.shape[0], p_grid.count))
    _splat(omegas, nodes, mass, p_grid.p0, p_grid.dp, assignment == "linear", out)
    return Sinogram(omegas, p_grid, out)


def backproject(sino: Sinogram, points: np.ndarray) -> np.ndarray:
    """``int_{S^(n-1)} J(omega, <omega, x>) dOmega`` estimated as ``beta_(n-1)`` times the direction mean.

    ``J`` is interpolated along ``p`` by a cubic spline that is zero (with
    zero slope) one bin beyond either end; the inversion differentiates the
    result twice, so the interpolant must be ``C^2``.
    """
    points = np.atleast_2d(points)
    check_same_dim(sino.dim, points.shape[1])
    g = sino.p_grid
    k, N = sino.directions.shape[0], points.shape[0]
    knots = g.p0 + g.dp * np.arange(-1, g.count + 1)
    padded = np.concatenate([np.zeros((k, 1)), sino.values, np.zeros((k, 1))], axis=1)
    coef = CubicSpline(knots, padded, axis=1, bc_type="clamped").c  # (4, P+1, k)
    acc = np.zeros(N)
    _spline_backproject(sino.directions, points, np.ascontiguousarray(coef.transpose(2, 1, 0)),
                        knots[0], g.dp, acc)
    return sphere_area(sino.dim - 1) * acc / k


def radon_invert_grid(sino: Sinogram, grid_spec: GridSpec) -> GridDensity:
    """Odd-dimensional inversion on every node of ``grid_spec``.

    The backprojection is evaluated on ``grid_spec`` padded by ``(n-1)/2``
    nodes so that the repeated stencil lands exactly on ``grid_spec``.
    """
    n = sino.dim
    check_same_dim(n, grid_spec.dim)
    if n % 2 == 0:
        raise ValueError(f"the odd-dimensional inversion does not apply in dimension {n}")
    passes = (n - 1) // 2
    big = grid_spec.padded(passes)
    vals = backproject(sino, big.nodes()).reshape(big.shape)
    for _ in range(passes):
        vals = -_laplacian_values(vals, grid_spec.h)
    vals *= 0.5 * (2.0 * math.pi) ** (1 - n)
    return GridDensity(grid_spec.origin, grid_spec.h, vals)


def radon_invert_odd(sino: Sinogram, x, h: float) -> float:
    """Inverse Radon transform at one point ``x``, differencing with step ``h``."""
    x = as_vector(x)
    spec = GridSpec(x, h, (1,) * x.size)
    return float(radon_invert_grid(sino, spec).values.reshape(-1)[0])
