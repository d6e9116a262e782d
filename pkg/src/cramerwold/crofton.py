"""The rigid-motion invariant measure on closed half-spaces.

Half-spaces are parametrised as ``(omega, p)`` with ``omega`` on the unit
sphere and ``p`` real; the invariant measure is ``alpha_n`` times surface
measure times Lebesgue measure. With ``alpha_n = (n - 1) / (2 beta_{n-2})``
the half-spaces separating two points ``x, y`` have total mass ``|x - y|``.

Integrals against it are estimated by sampling ``omega`` uniformly and doing
the ``p`` integral exactly (or by quadrature) per direction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .geometry import as_vector, check_same_dim, sample_sphere, sphere_area

__all__ = ["Estimate", "alpha_n", "CroftonSampler", "crofton_distance"]

# In one dimension S^0 = {+1, -1} with counting measure; separating mass |x - y|
# needs alpha_1 = 1/2, which the general formula cannot express.
ALPHA_1 = 0.5


class Estimate(NamedTuple):
    value: float
    stderr: float


def alpha_n(n: int) -> float:
    """Normalisation making the mass of half-spaces separating 0 and a unit vector 1."""
    if int(n) != n or n < 2:
        raise ValueError(f"alpha_n needs n >= 2, got {n!r}")
    return (n - 1) / (2.0 * sphere_area(n - 2))


@dataclass(frozen=True)
class CroftonSampler:
    """Seeded direction sampler for integrals against the half-space measure.

    ``scale = alpha * beta_{n-1}`` turns a mean over uniform directions into an
    integral against ``alpha * Omega_{n-1}``. For ``n == 1`` both directions
    are used exactly and nothing is random.
    """

    n: int
    samples: int = 20_000
    seed: int = 0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"dimension must be >= 1, got {self.n!r}")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")

    @property
    def alpha(self) -> float:
        return ALPHA_1 if self.n == 1 else alpha_n(self.n)

    @property
    def exact(self) -> bool:
        return self.n == 1

    @property
    def scale(self) -> float:
        return self.alpha * sphere_area(self.n - 1)

    def seed_sequence(self, *stream: int) -> np.random.SeedSequence:
        return np.random.SeedSequence(int(self.seed), spawn_key=tuple(int(s) for s in stream))

    def directions(self, *stream: int, samples: int | None = None) -> np.ndarray:
        """Direction set for one estimate, shape ``(k, n)``.

        ``stream`` selects an independent sub-stream of the master seed.
        """
        if self.exact:
            return np.array([[1.0], [-1.0]])
        count = self.samples if samples is None else samples
        return sample_sphere(self.n, count, self.seed_sequence(*stream))

    def with_samples(self, samples: int) -> "CroftonSampler":
        return CroftonSampler(self.n, samples, self.seed)


def mean_estimate(values: np.ndarray, scale: float, exact: bool) -> Estimate:
    values = np.asarray(values, dtype=float)
    mean = float(values.mean())
    if exact or values.size < 2:
        return Estimate(scale * mean, 0.0)
    return Estimate(scale * mean, scale * float(values.std(ddof=1)) / np.sqrt(values.size))


def crofton_distance(sampler: CroftonSampler, x, y, stream: int = 0) -> Estimate:
    """Estimate the measure of half-spaces separating ``x`` and ``y``.

    The expected value is ``|x - y|``. For a fixed direction the separating
    offsets form an interval of length ``|<omega, x - y>|``, so only
    directions are sampled.
    """
    x, y = as_vector(x), as_vector(y)
    check_same_dim(x.size, y.size)
    check_same_dim(sampler.n, x.size, "sampler dimension")
    d = x - y
    if not np.any(d):
        return Estimate(0.0, 0.0)
    omegas = sampler.directions(stream)
    return mean_estimate(np.abs(omegas @ d), sampler.scale, sampler.exact)
