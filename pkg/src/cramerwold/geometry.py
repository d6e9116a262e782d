"""Points, closed half-spaces, sphere areas and uniform sphere sampling.

Points are plain 1-D float arrays. A half-space ``(omega, p)`` is the closed
set ``{x : <omega, x> >= p}`` with ``omega`` a unit normal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

__all__ = [
    "DimensionError",
    "HalfSpace",
    "as_vector",
    "check_same_dim",
    "contains",
    "sphere_area",
    "sample_sphere",
    "unit_vector",
]

NORM_TOL = 1e-12


class DimensionError(ValueError):
    """Raised when two objects that must share a dimension do not."""


def as_vector(x) -> np.ndarray:
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"expected a non-empty 1-D coordinate list, got shape {v.shape}")
    return v


def check_same_dim(a: int, b: int, what: str = "dimension") -> None:
    if a != b:
        raise DimensionError(f"{what} mismatch: {a} != {b}")


def unit_vector(n: int, axis: int = 0) -> np.ndarray:
    e = np.zeros(n)
    e[axis] = 1.0
    return e


@dataclass(frozen=True, eq=False)
class HalfSpace:
    """Closed half-space ``{x : <omega, x> >= p}``.

    ``omega`` is renormalised to unit length at construction; a zero normal is
    rejected. ``p`` may be infinite (``-inf`` gives the whole space).
    """

    omega: np.ndarray
    p: float

    def __post_init__(self):
        w = as_vector(self.omega)
        norm = float(np.linalg.norm(w))
        if not np.isfinite(norm) or norm == 0.0:
            raise ValueError("half-space normal must be a finite non-zero vector")
        if abs(norm - 1.0) > NORM_TOL:
            w = w / norm
        w.setflags(write=False)
        object.__setattr__(self, "omega", w)
        object.__setattr__(self, "p", float(self.p))

    @property
    def dim(self) -> int:
        return self.omega.size

    def __contains__(self, x) -> bool:
        return contains(self, x)

    def __repr__(self):
        return f"HalfSpace(omega={self.omega.tolist()}, p={self.p!r})"


def contains(S: HalfSpace, x) -> bool:
    """True iff ``<S.omega, x> >= S.p``; boundary points are inside."""
    x = as_vector(x)
    check_same_dim(S.dim, x.size)
    return bool(np.dot(S.omega, x) >= S.p)


def sphere_area(k: int) -> float:
    """Surface area of the unit sphere ``S^k`` in ``R^(k+1)``.

    ``beta_k = 2 pi^((k+1)/2) / Gamma((k+1)/2)``; ``beta_0 = 2`` counts the
    two points of ``S^0``.
    """
    if int(k) != k or k < 0:
        raise ValueError(f"sphere dimension must be a non-negative integer, got {k!r}")
    a = 0.5 * (k + 1)
    return float(2.0 * math.exp(a * math.log(math.pi) - gammaln(a)))


def sample_sphere(n: int, count: int, seed=None) -> np.ndarray:
    """Draw ``count`` i.i.d. uniform points on ``S^(n-1)`` as a ``(count, n)`` array.

    Normalised standard Gaussian vectors. ``seed`` is anything accepted by
    :func:`numpy.random.default_rng` (an int or a ``SeedSequence``); the output
    is a pure function of ``(n, count, seed)``.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"dimension must be >= 1, got {n!r}")
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count!r}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((int(count), int(n)))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    # Exact zeros have probability 0 but would poison the batch.
    bad = norms[:, 0] == 0.0
    while np.any(bad):
        g[bad] = rng.standard_normal((int(bad.sum()), int(n)))
        norms = np.linalg.norm(g, axis=1, keepdims=True)
        bad = norms[:, 0] == 0.0
    return g / norms
