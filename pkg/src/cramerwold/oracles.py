"""Independent numerical checks of the identities the pipeline relies on.

The inversion constant is checked through

    int (|y - x| - |x|) (Delta^m g)(y) dy = c_m g(x)

for a polynomial bump ``g(y) = (1 - |y - c|^2 / a^2)^K`` on ``|y - c| < a``.
For a radial function ``P(s)`` of ``s = |y - c|^2`` in ``R^n`` the Laplacian is
again radial, ``4 s P''(s) + 2 n P'(s)``, so ``Delta^m g`` is an exact
polynomial and only the outer integral is numerical.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial import Polynomial

from .crofton import CroftonSampler, crofton_distance
from .geometry import as_vector, sample_sphere, sphere_area
from .inversion import c_const

__all__ = [
    "bump_polynomial",
    "radial_laplacian",
    "constant_identity",
    "constant_identity_radial",
    "crofton_normalization_check",
]


def bump_polynomial(radius: float = 1.0, power: int = 8) -> Polynomial:
    """``(1 - s / radius^2)^power`` as a polynomial in ``s``."""
    return Polynomial([1.0, -1.0 / radius**2]) ** power


def radial_laplacian(P: Polynomial, n: int, times: int = 1) -> Polynomial:
    """``Delta^times`` of ``y -> P(|y|^2)`` in ``R^n``, as a polynomial in ``|y|^2``."""
    s = Polynomial([0.0, 1.0])
    for _ in range(times):
        P = 4 * s * P.deriv(2) + 2 * n * P.deriv(1)
    return P


def constant_identity(m: int, x, center=None, radius: float = 1.0, power: int | None = None,
                      points: int = 65, chunk: int = 2_000_000) -> tuple[float, float]:
    """Riemann-sum check of the inversion constant at the point ``x``.

    Integrates over ``points`` nodes per axis of the bump's bounding cube in
    ``R^(2m-1)`` and returns ``(integral, c_m * g(x))``.
    """
    n = 2 * m - 1
    x = as_vector(x)
    center = np.zeros(n) if center is None else as_vector(center)
    if x.size != n or center.size != n:
        raise ValueError(f"m = {m} works in dimension {n}")
    power = 2 * m + 4 if power is None else power
    P = bump_polynomial(radius, power)
    Q = radial_laplacian(P, n, m)
    axis = np.linspace(-radius, radius, points)
    h = axis[1] - axis[0]
    total = 0.0
    flat_count = points ** n
    step = max(1, chunk)
    for start in range(0, flat_count, step):
        idx = np.arange(start, min(flat_count, start + step))
        coords = np.stack(np.unravel_index(idx, (points,) * n), axis=1)
        y = center + axis[coords]
        s = np.sum((y - center) ** 2, axis=1)
        inside = s < radius**2
        y, s = y[inside], s[inside]
        kernel = np.linalg.norm(y - x, axis=1) - np.linalg.norm(x)
        total += float(kernel @ Q(s))
    g_x = float(P(np.sum((x - center) ** 2))) if np.sum((x - center) ** 2) < radius**2 else 0.0
    return total * h**n, c_const(m) * g_x


def constant_identity_radial(m: int, radius: float = 1.0, power: int | None = None) -> tuple[float, float]:
    """The same identity with ``x`` at the bump centre, where it is one radial integral.

    ``beta_(n-1) int_0^a r^n Q(r^2) dr`` is integrated exactly as a polynomial.
    """
    n = 2 * m - 1
    power = 2 * m + 4 if power is None else power
    Q = radial_laplacian(bump_polynomial(radius, power), n, m)
    r = Polynomial([0.0, 1.0])
    integrand = r**n * Q(r * r)
    anti = integrand.integ()
    return sphere_area(n - 1) * float(anti(radius) - anti(0.0)), c_const(m)


def crofton_normalization_check(n: int, vectors: int = 20, samples: int = 1_000_000,
                                seed: int = 0) -> list[tuple[float, float]]:
    """Separating mass between 0 and random unit vectors, as ``(estimate, stderr)`` pairs."""
    sampler = CroftonSampler(n, samples, seed)
    units = sample_sphere(n, vectors, np.random.SeedSequence(seed, spawn_key=(99,)))
    return [tuple(crofton_distance(sampler, np.zeros(n), u, stream=i + 1)) for i, u in enumerate(units)]
