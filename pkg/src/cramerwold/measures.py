"""Compactly supported signed measures and the half-space transform ``S -> mu(S)``.

Three representations share one small protocol (``dim``, ``total_mass``,
``halfspace_masses``):

* :class:`DiscreteMeasure` -- weighted atoms.
* :class:`GridDensity` -- a density sampled at the nodes of a regular grid;
  the induced measure puts ``value * h**n`` on every node (cell centre).
* :class:`GaussianMixture` -- isotropic Gaussians with closed-form half-space
  masses, used as smooth ground truth.

Reconstruction code never touches these objects directly; it receives the
black-box evaluator built by :func:`make_query`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc

from .geometry import HalfSpace, as_vector, check_same_dim, sample_sphere

__all__ = [
    "DiscreteMeasure",
    "GridSpec",
    "GridDensity",
    "GaussianMixture",
    "HalfSpaceQuery",
    "total_mass",
    "halfspace_mass",
    "make_query",
    "query_total",
    "separating_halfspace",
]

# Below this many atoms a dense comparison beats per-direction sorting.
_DENSE_ATOMS = 64


def _tail_masses(proj: np.ndarray, weights: np.ndarray, ps: np.ndarray) -> np.ndarray:
    """Row-wise ``sum(weights[proj >= p])`` for every ``p`` in ``ps``.

    ``proj`` is ``(k, N)``, ``ps`` is ``(k, P)``; returns ``(k, P)``.
    """
    k, N = proj.shape
    out = np.empty(ps.shape, dtype=float)
    if N == 0:
        out[:] = 0.0
        return out
    if N <= _DENSE_ATOMS:
        step = max(1, 2_000_000 // max(1, N * ps.shape[1]))
        for i in range(0, k, step):
            inside = proj[i:i + step, None, :] >= ps[i:i + step, :, None]
            out[i:i + step] = inside @ weights
        return out
    for i in range(k):
        order = np.argsort(proj[i], kind="stable")
        s = proj[i, order]
        tail = np.zeros(N + 1)
        tail[:N] = np.cumsum(weights[order][::-1])[::-1]
        out[i] = tail[np.searchsorted(s, ps[i], side="left")]
    return out


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finite signed measure ``sum_i w_i delta_{x_i}``."""

    points: np.ndarray
    weights: np.ndarray
    support_radius: float = field(init=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1) if w.size != 1 else pts.reshape(1, -1)
        if pts.ndim != 2 or pts.shape[1] == 0:
            raise ValueError(f"points must be an (N, n) array, got shape {pts.shape}")
        if pts.shape[0] != w.size:
            raise ValueError(f"{pts.shape[0]} points but {w.size} weights")
        if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(w))):
            raise ValueError("points and weights must be finite")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        radius = float(np.linalg.norm(pts, axis=1).max()) if w.size else 0.0
        object.__setattr__(self, "support_radius", radius)

    @classmethod
    def delta(cls, x, weight: float = 1.0) -> "DiscreteMeasure":
        x = as_vector(x)
        return cls(x.reshape(1, -1), [weight])

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def total_mass(self) -> float:
        return float(self.weights.sum())

    def halfspace_masses(self, omegas: np.ndarray, ps: np.ndarray) -> np.ndarray:
        return _tail_masses(omegas @ self.points.T, self.weights, ps)

    def embed(self, extra_dims: int = 1) -> "DiscreteMeasure":
        """Same atoms placed in ``R^n x {0}`` inside ``R^(n + extra_dims)``."""
        pad = np.zeros((self.points.shape[0], extra_dims))
        return DiscreteMeasure(np.hstack([self.points, pad]), self.weights)

    @classmethod
    def from_text(cls, path) -> "DiscreteMeasure":
        """Read ``weight,x1,...,xn`` records; ``#`` lines and blank lines are skipped."""
        rows = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                try:
                    rows.append([float(tok) for tok in line.split(",")])
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: {exc}") from None
                if len(rows[-1]) < 2 or len(rows[-1]) != len(rows[0]):
                    raise ValueError(f"{path}:{lineno}: expected weight,x1,...,xn "
                                     f"with a fixed dimension")
        if not rows:
            raise ValueError(f"{path}: no records")
        arr = np.array(rows)
        return cls(arr[:, 1:], arr[:, 0])

    def to_text(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("# weight," + ",".join(f"x{i + 1}" for i in range(self.dim)) + "\n")
            for w, x in zip(self.weights, self.points):
                fh.write(",".join(repr(float(v)) for v in (w, *x)) + "\n")


@dataclass(frozen=True, eq=False)
class GridSpec:
    """Regular grid ``origin + h * index`` with ``index`` ranging over ``shape``."""

    origin: np.ndarray
    h: float
    shape: tuple

    def __post_init__(self):
        origin = as_vector(self.origin)
        shape = tuple(int(s) for s in np.atleast_1d(self.shape))
        if len(shape) != origin.size:
            raise ValueError(f"shape {shape} does not match a {origin.size}-D origin")
        if min(shape) < 1:
            raise ValueError(f"empty grid shape {shape}")
        if not self.h > 0:
            raise ValueError(f"spacing must be positive, got {self.h!r}")
        origin.setflags(write=False)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "shape", shape)

    @classmethod
    def centered(cls, half_width: float, h: float, dim: int) -> "GridSpec":
        """Grid covering ``[-half_width, half_width]^dim`` with a node at the origin."""
        k = int(round(half_width / h))
        if abs(k * h - half_width) > 1e-9 * max(1.0, half_width):
            raise ValueError(f"half width {half_width} is not a multiple of h={h}")
        return cls(np.full(dim, -k * h), h, (2 * k + 1,) * dim)

    @classmethod
    def from_bounds(cls, bounds, h: float) -> "GridSpec":
        """Grid with nodes from ``lo`` to ``hi`` on every axis; ``bounds`` is ``[(lo, hi), ...]``."""
        lo = np.array([b[0] for b in bounds], dtype=float)
        hi = np.array([b[1] for b in bounds], dtype=float)
        counts = np.rint((hi - lo) / h).astype(int)
        if np.any(counts < 0) or np.any(np.abs(lo + counts * h - hi) > 1e-9 * np.maximum(1.0, np.abs(hi))):
            raise ValueError(f"bounds {bounds} are not an integer number of steps h={h}")
        return cls(lo, h, tuple(counts + 1))

    @classmethod
    def cell_centered(cls, bounds, h: float) -> "GridSpec":
        """Nodes at the centres of the width-``h`` cells tiling ``[lo, hi]`` on every axis.

        No node lies on ``x_i = lo + k h``, so half-spaces bounded there cut
        no cell in two.
        """
        lo = np.array([b[0] for b in bounds], dtype=float)
        hi = np.array([b[1] for b in bounds], dtype=float)
        counts = np.rint((hi - lo) / h).astype(int)
        if np.any(counts < 1) or np.any(np.abs(lo + counts * h - hi) > 1e-9 * np.maximum(1.0, np.abs(hi))):
            raise ValueError(f"bounds {bounds} are not an integer number of cells h={h}")
        return cls(lo + 0.5 * h, h, tuple(counts))

    @property
    def dim(self) -> int:
        return self.origin.size

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def axes(self) -> list:
        return [self.origin[i] + self.h * np.arange(s) for i, s in enumerate(self.shape)]

    def nodes(self) -> np.ndarray:
        """All node coordinates as an ``(N, n)`` array in row-major order."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=1)

    def padded(self, cells: int) -> "GridSpec":
        """The same lattice grown by ``cells`` nodes on every face."""
        return GridSpec(self.origin - cells * self.h, self.h, tuple(s + 2 * cells for s in self.shape))

    def covers_ball(self, radius: float) -> bool:
        hi = self.origin + self.h * (np.array(self.shape) - 1)
        return bool(np.all(self.origin <= -radius) and np.all(hi >= radius))

    def zeros(self) -> "GridDensity":
        return GridDensity(self.origin, self.h, np.zeros(self.shape))


@dataclass(frozen=True, eq=False)
class GridDensity:
    """Values on the regular grid ``origin + h * index``.

    ``values`` has shape ``shape`` (row-major). As a measure it is the Riemann
    sum ``sum_c values[c] * h**n * delta_{node(c)}``; the same class also
    stores sampled potentials, where ``values`` are plain function values.
    """

    origin: np.ndarray
    h: float
    values: np.ndarray
    support_radius: float = field(init=False)

    def __post_init__(self):
        origin = as_vector(self.origin)
        vals = np.array(self.values, dtype=float)
        if vals.ndim != origin.size:
            raise ValueError(f"values have {vals.ndim} axes but origin has {origin.size} coordinates")
        if not self.h > 0:
            raise ValueError(f"spacing must be positive, got {self.h!r}")
        if min(vals.shape) < 1:
            raise ValueError(f"empty grid shape {vals.shape}")
        origin.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "values", vals)
        nz = vals != 0
        if np.any(nz):
            radius = float(np.linalg.norm(self.nodes()[nz.reshape(-1)], axis=1).max())
        else:
            radius = 0.0
        object.__setattr__(self, "support_radius", radius)

    @classmethod
    def from_function(cls, func, spec: "GridSpec") -> "GridDensity":
        """Sample ``func`` (called with an ``(N, n)`` array of nodes) on ``spec``."""
        vals = np.asarray(func(spec.nodes()), dtype=float).reshape(spec.shape)
        return cls(spec.origin, spec.h, vals)

    @property
    def spec(self) -> "GridSpec":
        return GridSpec(self.origin, self.h, self.shape)

    @property
    def dim(self) -> int:
        return self.origin.size

    @property
    def shape(self) -> tuple:
        return self.values.shape

    @property
    def cell_volume(self) -> float:
        return self.h ** self.dim

    def axes(self) -> list:
        return self.spec.axes()

    def nodes(self) -> np.ndarray:
        """All node coordinates as an ``(N, n)`` array in row-major order."""
        return self.spec.nodes()

    def total_mass(self) -> float:
        return float(self.values.sum() * self.cell_volume)

    def halfspace_masses(self, omegas: np.ndarray, ps: np.ndarray) -> np.ndarray:
        flat = self.values.reshape(-1)
        keep = flat != 0
        nodes = self.nodes()[keep]
        return _tail_masses(omegas @ nodes.T, flat[keep] * self.cell_volume, ps)

    def with_values(self, values) -> "GridDensity":
        return GridDensity(self.origin, self.h, values)

    def crop(self, cells: int) -> "GridDensity":
        """Drop ``cells`` layers of nodes from every face."""
        if cells == 0:
            return self
        if any(s <= 2 * cells for s in self.shape):
            raise ValueError(f"cannot crop {cells} cells from shape {self.shape}")
        sl = tuple(slice(cells, s - cells) for s in self.shape)
        return GridDensity(self.origin + cells * self.h, self.h, self.values[sl])


@dataclass(frozen=True, eq=False)
class GaussianMixture:
    """Mixture of isotropic Gaussians ``sum_j w_j N(mean_j, sigma_j^2 I)``."""

    means: np.ndarray
    sigmas: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        means = np.atleast_2d(np.asarray(self.means, dtype=float))
        sig = np.atleast_1d(np.asarray(self.sigmas, dtype=float))
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if not (means.shape[0] == sig.size == w.size):
            raise ValueError("means, sigmas and weights must have matching lengths")
        if np.any(sig <= 0):
            raise ValueError("sigmas must be positive")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "sigmas", sig)
        object.__setattr__(self, "weights", w)

    @classmethod
    def standard(cls, dim: int, sigma: float = 1.0) -> "GaussianMixture":
        return cls(np.zeros((1, dim)), [sigma], [1.0])

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def total_mass(self) -> float:
        return float(self.weights.sum())

    def density(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        out = np.zeros(x.shape[0])
        n = self.dim
        for m, s, w in zip(self.means, self.sigmas, self.weights):
            r2 = np.sum((x - m) ** 2, axis=1)
            out += w * np.exp(-0.5 * r2 / s**2) / (2 * math.pi * s**2) ** (n / 2)
        return out

    def halfspace_masses(self, omegas: np.ndarray, ps: np.ndarray) -> np.ndarray:
        out = np.zeros(ps.shape)
        for m, s, w in zip(self.means, self.sigmas, self.weights):
            centre = (omegas @ m)[:, None]
            out += w * 0.5 * erfc((ps - centre) / (s * math.sqrt(2.0)))
        return out

    def to_grid(self, spec: "GridSpec") -> GridDensity:
        return GridDensity.from_function(self.density, spec)


def total_mass(mu) -> float:
    """Total signed mass (sum of weights, or Riemann sum of a grid)."""
    return mu.total_mass()


def halfspace_mass(mu, S: HalfSpace) -> float:
    """``mu(S)`` for a closed half-space ``S``."""
    check_same_dim(mu.dim, S.dim)
    return float(mu.halfspace_masses(S.omega[None, :], np.array([[S.p]]))[0, 0])


class HalfSpaceQuery:
    """Black-box evaluator of ``S -> mu(S)``.

    ``query(S)`` answers a single half-space; ``query.masses(omegas, ps)``
    answers the ``(k, P)`` batch ``mu({<omegas[i], x> >= ps[i, j]})`` and is
    what the reconstruction code calls in its inner loops. ``kind`` is a
    quadrature hint: ``"step"`` when the masses jump (atoms), ``"smooth"``
    otherwise.
    """

    def __init__(self, batch, dim: int, kind: str = "smooth"):
        if kind not in ("smooth", "step"):
            raise ValueError(f"unknown query kind {kind!r}")
        self._batch = batch
        self.dim = int(dim)
        self.kind = kind

    def masses(self, omegas, ps) -> np.ndarray:
        omegas = np.atleast_2d(np.asarray(omegas, dtype=float))
        ps = np.asarray(ps, dtype=float)
        if ps.ndim == 1:
            ps = ps[:, None]
        check_same_dim(self.dim, omegas.shape[1])
        if ps.shape[0] != omegas.shape[0]:
            raise ValueError(f"{omegas.shape[0]} normals but {ps.shape[0]} offset rows")
        return self._batch(omegas, ps)

    def __call__(self, S: HalfSpace) -> float:
        check_same_dim(self.dim, S.dim)
        return float(self.masses(S.omega[None, :], np.array([[S.p]]))[0, 0])


def make_query(mu) -> HalfSpaceQuery:
    """Wrap a measure as an opaque half-space evaluator."""
    kind = "step" if isinstance(mu, DiscreteMeasure) else "smooth"
    return HalfSpaceQuery(mu.halfspace_masses, mu.dim, kind)


def query_total(query: HalfSpaceQuery) -> float:
    """Total mass read off the query as the mass of the whole space."""
    e = np.zeros(query.dim)
    e[0] = 1.0
    return query(HalfSpace(e, -np.inf))


def separating_halfspace(query_a: HalfSpaceQuery, query_b: HalfSpaceQuery, radius: float,
                         directions: int = 512, offsets: int = 129, seed=0) -> tuple[HalfSpace, float]:
    """Search for the half-space where two queries disagree most.

    Scans ``directions`` random normals against ``offsets`` evenly spaced
    values in ``[-radius, radius]`` and returns the maximiser of
    ``|query_a(S) - query_b(S)|`` with that gap. A gap of zero only says the
    scan found nothing.
    """
    check_same_dim(query_a.dim, query_b.dim)
    n = query_a.dim
    omegas = np.array([[1.0], [-1.0]]) if n == 1 else sample_sphere(n, directions, seed)
    ps = np.broadcast_to(np.linspace(-radius, radius, offsets), (omegas.shape[0], offsets))
    gap = np.abs(query_a.masses(omegas, ps) - query_b.masses(omegas, ps))
    i, j = np.unravel_index(np.argmax(gap), gap.shape)
    return HalfSpace(omegas[i], ps[i, j]), float(gap[i, j])
