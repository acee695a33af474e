"""Panel-doubling Gauss-Legendre quadrature in the log variable."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import ConvergenceError

NODES_PER_PANEL = 16


@lru_cache(maxsize=8)
def _legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _panel_rule(a: float, b: float, panels: int):
    x, w = _legendre(NODES_PER_PANEL)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def integrate(f, a: float, b: float, *, tol_rel: float, tol_abs: float, panels_max: int,
              panels_start: int | None = None, label: str = "integral"):
    """Integrate a vectorised ``f`` over [a, b], doubling panels until two levels agree.

    Returns ``(value, error_estimate)``.
    """
    if b <= a:
        return 0.0j, 0.0
    panels = panels_start or max(2, int(np.ceil(b - a)))
    prev = None
    while True:
        nodes, weights = _panel_rule(a, b, panels)
        val = complex(np.dot(weights, f(nodes)))
        if prev is not None:
            err = abs(val - prev)
            if err <= max(tol_abs, tol_rel * abs(val)):
                return val, err
        if 2 * panels > panels_max:
            raise ConvergenceError(f"{label}: quadrature not converged with {panels} panels "
                                   f"(last change {abs(val - prev) if prev is not None else float('nan'):.3g})")
        prev = val
        panels *= 2
