"""Per-direction integration of ``g(p) = total - 2 mu({<omega, x> >= p})`` along ``p``."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

GAUSS_ORDER = 16
STEP_PIECES = 16
STEP_DEPTH = 52


@lru_cache(maxsize=None)
def gauss_legendre(order: int):
    t, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (t + 1.0), 0.5 * w


def offset_integrand(query, omegas, ps, total):
    return total - 2.0 * query.masses(omegas, ps)


def integrate_segments(query, omegas, lo, hi, total, rule="gauss", order=GAUSS_ORDER):
    """Signed integrals of ``g`` over ``[lo[i, s], hi[i, s]]`` along ``omegas[i]``.

    ``rule="gauss"`` uses fixed-order Gauss-Legendre on each segment.
    ``rule="step"`` treats ``g`` as piecewise constant and bisects every
    segment whose end and mid values disagree until the jump is pinned down
    to ``2**-STEP_DEPTH`` of the segment width.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if rule == "gauss":
        t, w = gauss_legendre(order)
        k, S = lo.shape
        ps = (lo[..., None] + (hi - lo)[..., None] * t).reshape(k, S * order)
        g = offset_integrand(query, omegas, ps, total).reshape(k, S, order)
        return (g @ w) * (hi - lo)
    if rule == "step":
        return _integrate_steps(query, omegas, lo, hi, total)
    raise ValueError(f"unknown quadrature rule {rule!r}")


def _integrate_steps(query, omegas, lo, hi, total):
    k, S = lo.shape
    out = np.zeros((k, S))
    g_lo = offset_integrand(query, omegas, lo, total).reshape(-1)
    g_hi = offset_integrand(query, omegas, hi, total).reshape(-1)
    rows = np.repeat(np.arange(k), S)
    slots = np.arange(k * S)
    a, b = lo.reshape(-1), hi.reshape(-1)
    live = a != b
    rows, slots, a, b, g_lo, g_hi = (v[live] for v in (rows, slots, a, b, g_lo, g_hi))
    flat = out.reshape(-1)
    for depth in range(STEP_DEPTH + 1):
        if rows.size == 0:
            break
        mid = 0.5 * (a + b)
        g_mid = offset_integrand(query, omegas[rows], mid[:, None], total)[:, 0]
        done = (g_lo == g_mid) & (g_mid == g_hi)
        if depth == STEP_DEPTH:
            done[:] = True
        np.add.at(flat, slots[done], (b - a)[done] * g_mid[done])
        split = ~done
        rows, slots = np.tile(rows[split], 2), np.tile(slots[split], 2)
        a, b, g_lo, g_hi = (
            np.concatenate([a[split], mid[split]]),
            np.concatenate([mid[split], b[split]]),
            np.concatenate([g_lo[split], g_mid[split]]),
            np.concatenate([g_mid[split], g_hi[split]]),
        )
    return out


def integrate_from_zero(query, omegas, ends, total, rule="gauss", order=GAUSS_ORDER,
                        pieces=None):
    """``int_0^{ends[i]} g(p) dp`` along each ``omegas[i]``; ``ends`` has shape ``(k,)``."""
    if pieces is None:
        pieces = 1 if rule == "gauss" else STEP_PIECES
    frac = np.arange(pieces + 1) / pieces
    edges = ends[:, None] * frac
    return integrate_segments(query, omegas, edges[:, :-1], edges[:, 1:], total, rule, order).sum(axis=1)
