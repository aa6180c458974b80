"""Gauss-Legendre quadrature helpers shared across the package.

All rules return plain (nodes, weights) ndarray pairs.  Composite rules
subdivide into equal panels; the adaptive rule bisects panels until the
panel-sum changes by less than the requested tolerance.  Principal values
are computed by symmetric excision of a half-width ``delta`` around the
pole, optionally with one Richardson step in ``delta``.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_legendre(a: float, b: float, n: int):
    """Nodes and weights of the n-point Gauss-Legendre rule on [a, b]."""
    if n not in _GL_CACHE:
        _GL_CACHE[n] = leggauss(n)
    x, w = _GL_CACHE[n]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * x, half * w


def composite_gauss(a: float, b: float, n_panels: int, n_per_panel: int = 16):
    """Composite Gauss-Legendre rule: n_panels equal panels on [a, b]."""
    edges = np.linspace(a, b, n_panels + 1)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        x, w = gauss_legendre(lo, hi, n_per_panel)
        nodes.append(x)
        weights.append(w)
    return np.concatenate(nodes), np.concatenate(weights)


def adaptive_integrate(f, a: float, b: float, tol: float = 1e-10,
                       n_per_panel: int = 16, max_depth: int = 30):
    """Adaptive panel-bisection Gauss-Legendre integral of a vectorized f.

    f maps an ndarray of points to an ndarray of values (real or complex).
    """
    def panel(lo, hi):
        x, w = gauss_legendre(lo, hi, n_per_panel)
        return np.sum(w * f(x))

    def recurse(lo, hi, whole, depth):
        mid = 0.5 * (lo + hi)
        left, right = panel(lo, mid), panel(mid, hi)
        if depth >= max_depth or abs(left + right - whole) <= tol:
            return left + right
        return (recurse(lo, mid, left, depth + 1)
                + recurse(mid, hi, right, depth + 1))

    return recurse(a, b, panel(a, b), 0)


def oscillatory_nodes(a: float, b: float, max_freq: float,
                      points_per_period: int = 10, n_per_panel: int = 16,
                      min_panels: int = 4):
    """Composite GL nodes dense enough to resolve phases up to exp(i*max_freq*t).

    A panel spans at most one period 2π/max_freq divided by
    points_per_period/n_per_panel, so roughly points_per_period nodes land
    in every period of the fastest oscillation.
    """
    span = b - a
    periods = span * max(max_freq, 1e-30) / (2.0 * np.pi)
    n_panels = max(min_panels, int(np.ceil(periods * points_per_period / n_per_panel)))
    return composite_gauss(a, b, n_panels, n_per_panel)


def pv_excised_nodes(a: float, b: float, pole: float, delta: float,
                     n_per_side_panels: int = 8, n_per_panel: int = 16):
    """Nodes/weights on [a,b] with the symmetric window (pole±delta) removed.

    The two remaining intervals are covered by composite GL rules sharing the
    panel count, so the node layout is symmetric about the pole when the pole
    is centred; the O(delta) odd part of the excision error then cancels for
    smooth numerators.
    """
    if not (a + delta < pole < b - delta):
        raise ValueError("pole±delta must lie strictly inside [a, b]")
    xl, wl = composite_gauss(a, pole - delta, n_per_side_panels, n_per_panel)
    xr, wr = composite_gauss(pole + delta, b, n_per_side_panels, n_per_panel)
    return np.concatenate([xl, xr]), np.concatenate([wl, wr])


def principal_value(f, a: float, b: float, pole: float, delta: float = 1e-3,
                    richardson: bool = True, n_per_side_panels: int = 24,
                    n_per_panel: int = 16):
    """PV integral of f over [a,b] with a simple pole at ``pole``.

    Symmetric excision of half-width delta; one Richardson step in delta
    (2*I(δ/2) − I(δ)) removes the leading O(δ) excision error.
    """
    def excised(d):
        x, w = pv_excised_nodes(a, b, pole, d, n_per_side_panels, n_per_panel)
        return np.sum(w * f(x))

    coarse = excised(delta)
    if not richardson:
        return coarse
    fine = excised(0.5 * delta)
    return 2.0 * fine - coarse


def loglog_slope(x, y, lo: float | None = None, hi: float | None = None):
    """Least-squares slope of log(y) versus log(x) on the window [lo, hi].

    Entries with non-positive y are dropped.  Returns (slope, intercept).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    mask = y > 0
    if lo is not None:
        mask &= x >= lo
    if hi is not None:
        mask &= x <= hi
    if np.count_nonzero(mask) < 2:
        raise ValueError("slope fit needs at least two usable points")
    lx, ly = np.log(x[mask]), np.log(y[mask])
    slope, intercept = np.polyfit(lx, ly, 1)
    return float(slope), float(intercept)
