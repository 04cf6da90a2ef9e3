"""Composite Simpson quadrature helpers."""

from __future__ import annotations

import numpy as np


def simpson_uniform(y, dx):
    """Integrate uniformly sampled values.  Needs an odd sample count."""
    y = np.asarray(y)
    n = y.shape[0]
    if n < 3 or n % 2 == 0:
        raise ValueError("composite Simpson needs an odd number of samples >= 3")
    acc = y[0] + y[-1] + 4.0 * np.sum(y[1:-1:2]) + 2.0 * np.sum(y[2:-2:2])
    return acc * (dx / 3.0)


def piecewise_simpson(fun, edges, points_per_unit=4000):
    """Integrate ``fun`` over [edges[0], edges[-1]], one Simpson rule per piece.

    ``fun`` must accept a vector of abscissae.  Splitting at the piece edges
    keeps the rule's full convergence order when the integrand has kinks
    there.
    """
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        width = hi - lo
        if width <= 0.0:
            continue
        n = max(int(np.ceil(width * points_per_unit)), 4)
        if n % 2:
            n += 1
        grid = np.linspace(lo, hi, n + 1)
        total += simpson_uniform(fun(grid), width / n)
    return total
