"""Theta series Theta_a(t) = sum_n mult_n exp(-t a_n) and expansion certification."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .config import DEFAULT_CONFIG, NumericConfig
from .errors import ConvergenceError, InputError
from .expansion import RemainderBound, ThetaExpansion, circle_expansion
from .spectrum import SpectralSequence

_FIRST_BLOCK = 2048


def theta_eval(seq: SpectralSequence, t, config: NumericConfig = DEFAULT_CONFIG,
               tol_rel: float | None = None):
    """Evaluate the theta series at ``t`` (scalar or array, all > 0).

    Entries are consumed in storage order until the geometric tail estimate
    falls below ``tol_rel`` times the partial sum.  Infinite sequences are
    materialised in growing blocks up to ``config.max_terms`` entries.
    """
    scalar = np.ndim(t) == 0
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(~(ts > 0)):
        raise InputError("theta series needs t > 0")
    tol = config.tol_rel if tol_rel is None else tol_rel
    out = np.empty(ts.shape, dtype=complex)
    todo = np.arange(ts.size)
    n = seq.head_values.shape[0] + _FIRST_BLOCK
    while True:
        v, m = seq.prefix(n)
        sums, used = kernels.theta_sum(v.real, v.imag, m, ts[todo], tol, 1e-300)
        if seq.is_finite:
            out[todo] = sums
            break
        done = used >= 0
        out[todo[done]] = sums[done]
        todo = todo[~done]
        if todo.size == 0:
            break
        if n >= config.max_terms:
            raise ConvergenceError(
                f"theta series of {seq.name} not converged at t={ts[todo].min():.3g} "
                f"within {config.max_terms} entries")
        n = min(config.max_terms, 4 * n)
    return complex(out[0]) if scalar else out


def circle_theta_expansion(length: float, reduced: bool) -> ThetaExpansion:
    """Closed-form expansion of the circle Laplacian's heat trace.

    Full spectrum: single term length/sqrt(4 pi) t^(-1/2); the reduced
    spectrum adds the constant -1.  Everything else is the exponentially
    small Poisson tail, carried as the certified remainder.
    """
    if not length > 0:
        raise InputError("circumference must be positive")
    return circle_expansion(length, reduced)


@dataclass(frozen=True)
class RemainderRow:
    t: float
    remainder: float
    bound: float
    ok: bool


def expansion_remainder_report(seq: SpectralSequence, expansion: ThetaExpansion, n: int,
                               t_grid, config: NumericConfig = DEFAULT_CONFIG) -> list[RemainderRow]:
    """Compare |Theta(t) - sum_{nu<=n} c_nu t^alpha_nu| with a remainder bound on ``t_grid``.

    When ``n`` is the last declared term and a remainder is declared, that
    bound is used.  Otherwise the constant C of C t^alpha_{n+1} is fitted at
    the largest grid point (with a factor 2 margin), so a wrong low-order
    coefficient shows up as a violation at small t.
    """
    if n > expansion.valid_to:
        raise InputError(f"n={n} exceeds the declared expansion length {expansion.valid_to}")
    ts = np.sort(np.asarray(list(t_grid), dtype=float))[::-1]
    tol = min(config.tol_rel, 1e-15)
    theta = np.atleast_1d(theta_eval(seq, ts, config, tol_rel=tol))
    rem = np.abs(theta - expansion.partial(ts, n))
    roundoff = (64 * np.finfo(float).eps + 2 * tol) * np.abs(theta)
    if n == expansion.valid_to and (expansion.remainder.power or expansion.remainder.expo):
        bound = np.asarray(expansion.remainder(ts)) * (1 + 1e-9) + roundoff
    else:
        a_next = expansion.next_alpha(n)
        if not math.isfinite(a_next):
            a_next = 1.0
        c_fit = 2.0 * rem[0] / ts[0] ** a_next
        bound = c_fit * ts**a_next + roundoff
    return [RemainderRow(float(t), float(r), float(b), bool(r <= b)) for t, r, b in zip(ts, rem, bound)]


__all__ = ["theta_eval", "circle_theta_expansion", "expansion_remainder_report", "RemainderRow",
           "ThetaExpansion", "RemainderBound"]
