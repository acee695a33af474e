"""Meromorphic continuation of spectral zeta functions through the Mellin split.

For an admissible sequence with theta expansion sum c_nu t^alpha_nu,

    zeta(s) Gamma(s) = sum_nu c_nu tau^(s+alpha_nu) / (s+alpha_nu)
                       + int_0^tau t^(s-1) (Theta - sum_nu c_nu t^alpha_nu) dt
                       + int_tau^inf t^(s-1) Theta dt

The pole terms are exact; both integrals are entire in the admissible
half-plane.  ``tau`` defaults to 1 and shrinks to 1/|a_min| when the spectrum
starts far from the origin (large shifts), keeping the pole sum free of
cancellation.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special

from .config import DEFAULT_CONFIG, NumericConfig
from .errors import ConvergenceError, InputError, PoleError
from .expansion import RemainderBound, ThetaExpansion
from .quadrature import integrate
from .spectrum import SpectralSequence
from .theta import theta_eval

EULER_GAMMA = float(np.euler_gamma)
_T_FLOOR = 1e-12


@dataclass(frozen=True)
class MellinSource:
    """Anything with a heat trace: a callable theta, its small-t expansion and its large-t decay.

    ``rate`` > 0 gives |Theta(t)| <= abs_bound(tau) exp(-rate (t - tau)) for t >= tau.
    ``rate`` == 0 requires ``large_t``: monomials (C, p) with Theta(t) = sum C t^p
    exactly for t >= ``large_t_from``.
    """

    theta: Callable[[np.ndarray], np.ndarray]
    expansion: ThetaExpansion
    rate: float
    abs_bound: Callable[[float], float]
    split: float = 1.0
    large_t: tuple[tuple[float, float], ...] = ()
    large_t_from: float = 1.0
    label: str = "source"


@dataclass(frozen=True)
class MellinResult:
    value: complex
    error: float


def sequence_source(seq: SpectralSequence, expansion: ThetaExpansion | None,
                    config: NumericConfig = DEFAULT_CONFIG) -> MellinSource:
    exp = expansion if expansion is not None else seq.expansion
    if exp is None:
        raise InputError(f"{seq.name}: an infinite spectrum needs a theta expansion")
    v, m = seq.prefix(1)
    if v.size == 0:
        raise InputError("empty spectrum")
    a_min = float(v[0].real)
    if not a_min > 0:
        raise InputError(f"{seq.name}: leading eigenvalue {v[0]} has Re <= 0; deflate it first")
    split = min(1.0, 1.0 / abs(complex(v[0])))
    tol = max(1e-16, 1e-3 * config.tol_rel)

    def theta(ts):
        return np.atleast_1d(theta_eval(seq, ts, config, tol_rel=tol))

    abs_seq = SpectralSequence(seq.head_values.real.astype(complex), np.abs(seq.head_mults), seq.epsilon,
                               seq.k, tail=None if seq.tail is None else _AbsRule(seq.tail),
                               tail_offset=seq.tail_offset, name=f"|{seq.name}|")

    def abs_bound(t):
        return float(theta_eval(abs_seq, t, config, tol_rel=1e-6).real) * (1 + 1e-5)

    return MellinSource(theta, exp, a_min, abs_bound, split, label=seq.name)


class _AbsRule:
    def __init__(self, rule):
        self.rule = rule

    def __call__(self, idx):
        v, m = self.rule(idx)
        return np.asarray(v).real.astype(complex), np.abs(np.asarray(m, dtype=float))


def _check_window(src: MellinSource, s: complex) -> None:
    a_next = src.expansion.remainder.leading_alpha
    if not a_next > -s.real + 2:
        raise InputError(f"{src.label}: expansion certified only for Re s > {2 - a_next}; got s={s}")


def _check_poles(src: MellinSource, s: complex, config: NumericConfig) -> None:
    for a, _ in src.expansion.terms:
        if abs(s + a) < config.pole_margin and not (a >= 0 and float(a).is_integer()):
            raise PoleError(f"s={s} within {config.pole_margin} of the pole at {-a}")


def _t_lower(src: MellinSource, sigma: float, tol: float) -> float:
    rem = src.expansion.remainder
    hi = min(src.split, rem.t_max)
    if rem.integral_below(hi, sigma) <= tol:
        return hi
    lo = _T_FLOOR
    if rem.integral_below(lo, sigma) > tol:
        raise ConvergenceError(f"{src.label}: remainder bound too weak to truncate near t=0")
    for _ in range(80):
        mid = math.sqrt(lo * hi)
        if rem.integral_below(mid, sigma) <= tol:
            lo = mid
        else:
            hi = mid
        if hi / lo < 1.05:
            break
    return lo


def _t_upper(src: MellinSource, sigma: float, tol: float, config: NumericConfig) -> float:
    tau = src.split
    B = src.abs_bound(tau)
    rate = src.rate
    T = tau + 1.0 / rate
    while True:
        dec = rate - max(0.0, sigma - 1.0) / T
        if dec > 0:
            bound = B * math.exp(-rate * (T - tau)) * T ** (sigma - 1.0) / dec
            if bound <= tol:
                return T
        if T > config.upper_cutoff_T:
            raise ConvergenceError(f"{src.label}: upper Mellin cutoff exceeds {config.upper_cutoff_T}")
        T *= 1.5


def _roundoff_floor(src: MellinSource, sigma: float, t_lo: float, tau: float) -> float:
    """Size of the rounding noise in int t^(s-1) (Theta - partial) over [t_lo, tau].

    Theta is summed to near machine precision but is itself large near t = 0,
    and the partial sum may cancel against it; both sizes bound the noise.
    """
    eps = np.finfo(float).eps
    scale = 0.0
    for t in (t_lo, tau):
        mag = abs(complex(np.atleast_1d(src.theta(np.array([t])))[0]))
        mag = max(mag, sum(abs(c) * t**a for a, c in src.expansion.terms))
        scale = max(scale, mag * t**sigma)
    return 16 * eps * scale * math.log(tau / t_lo)


def _integrals(src: MellinSource, s: complex, config: NumericConfig) -> MellinResult:
    """Both Mellin integrals (without 1/Gamma) at s; s = 0 gives the t^-1 weighted integrals."""
    tol_abs = config.tol_abs
    sigma = s.real
    exp = src.expansion
    tau = src.split
    t_lo = _t_lower(src, sigma, 0.1 * tol_abs)

    def lower(u):
        t = np.exp(u)
        return np.exp(s * u) * (src.theta(t) - exp.partial(t))

    floor = _roundoff_floor(src, sigma, t_lo, tau) if t_lo < tau else 0.0
    lo_val, lo_err = integrate(lower, math.log(t_lo), math.log(tau), tol_rel=config.tol_rel,
                               tol_abs=max(tol_abs, floor), panels_max=config.quad_panels_max,
                               label=f"{src.label} lower")
    err = lo_err + floor + src.expansion.remainder.integral_below(t_lo, sigma)

    def upper(u):
        t = np.exp(u)
        return np.exp(s * u) * src.theta(t)

    if src.rate > 0:
        T = _t_upper(src, sigma, 0.1 * tol_abs, config)
        panels = max(4, int(math.ceil(4 * math.log(T / tau))))
        up_val, up_err = integrate(upper, math.log(tau), math.log(T), tol_rel=config.tol_rel,
                                   tol_abs=tol_abs, panels_max=config.quad_panels_max,
                                   panels_start=panels, label=f"{src.label} upper")
        err += up_err + 0.1 * tol_abs
    else:
        if not src.large_t:
            raise InputError(f"{src.label}: no exponential decay and no large-t law")
        t1 = max(tau, src.large_t_from)
        up_val, up_err = integrate(upper, math.log(tau), math.log(t1), tol_rel=config.tol_rel,
                                   tol_abs=tol_abs, panels_max=config.quad_panels_max,
                                   label=f"{src.label} upper") if t1 > tau else (0.0j, 0.0)
        for C, p in src.large_t:
            q = s + p
            if not q.real < 0:
                raise InputError(f"{src.label}: s={s} outside the large-time convergence strip")
            up_val += -C * t1**q / q
        err += up_err
    return MellinResult(lo_val + up_val, err)


def _pole_sum(exp: ThetaExpansion, s: complex, tau: float) -> complex:
    total = 0.0j
    for a, c in exp.terms:
        total += c * tau ** (s + a) / (s + a)
    return total


def mellin_zeta(src: MellinSource, s: complex, config: NumericConfig = DEFAULT_CONFIG) -> MellinResult:
    s = complex(s)
    _check_window(src, s)
    _check_poles(src, s, config)
    exp = src.expansion
    m = -s.real
    if s.imag == 0 and m >= -1e-300 and float(m).is_integer():
        # 1/Gamma vanishes at s = -m; only the t^m term survives: (-1)^m m! c_m
        m = int(round(m))
        return MellinResult(complex((-1) ** m * math.factorial(m) * exp.coefficient(float(m))), 0.0)
    inner = _integrals(src, s, config)
    rg = complex(special.rgamma(s))
    return MellinResult(rg * (_pole_sum(exp, s, src.split) + inner.value), abs(rg) * inner.error)


def mellin_deriv_at_zero(src: MellinSource, config: NumericConfig = DEFAULT_CONFIG) -> MellinResult:
    """zeta'(0) = gamma c_0 + c_0 log tau + sum_{alpha != 0} c tau^alpha / alpha + I(0)."""
    exp = src.expansion
    _check_window(src, 0j)
    tau = src.split
    total = 0.0j
    for a, c in exp.terms:
        if a == 0.0:
            total += c * (EULER_GAMMA + math.log(tau))
        else:
            total += c * tau**a / a
    inner = _integrals(src, 0j, config)
    return MellinResult(total + inner.value, inner.error)


# -- public evaluator -----------------------------------------------------------

@dataclass(frozen=True)
class ZetaEvaluator:
    """Spectral zeta function of ``seq`` continued with ``expansion``."""

    seq: SpectralSequence
    expansion: ThetaExpansion | None = None
    config: NumericConfig = field(default=DEFAULT_CONFIG)

    def __post_init__(self):
        if self.expansion is None and not self.seq.is_finite:
            object.__setattr__(self, "expansion", self.seq.expansion)
        if self.expansion is None and not self.seq.is_finite:
            raise InputError(f"{self.seq.name}: no theta expansion available")

    @property
    def source(self) -> MellinSource:
        return sequence_source(self.seq, self.expansion, self.config)


def _finite_values(seq: SpectralSequence):
    v, m = seq.head_values, seq.head_mults
    if np.any(v == 0):
        raise InputError("zero eigenvalue in spectrum; apply kernel_split first")
    return v, m


def zeta_eval(ev: ZetaEvaluator, s: complex) -> complex:
    """zeta_a(s) = sum a_n^(-s) continued meromorphically (principal branch)."""
    return zeta_eval_with_error(ev, s).value


def zeta_eval_with_error(ev: ZetaEvaluator, s: complex) -> MellinResult:
    s = complex(s)
    if ev.seq.is_finite:
        v, m = _finite_values(ev.seq)
        return MellinResult(complex(np.sum(m * np.exp(-s * np.log(v)))), 0.0)
    return mellin_zeta(ev.source, s, ev.config)


def zeta_deriv_at_zero(ev: ZetaEvaluator) -> complex:
    return zeta_deriv_with_error(ev).value


def zeta_deriv_with_error(ev: ZetaEvaluator) -> MellinResult:
    if ev.seq.is_finite:
        v, m = _finite_values(ev.seq)
        return MellinResult(complex(-np.sum(m * np.log(v))), 0.0)
    return mellin_deriv_at_zero(ev.source, ev.config)


def zeta_value_at_zero(ev: ZetaEvaluator) -> complex:
    """zeta(0): the t^0 coefficient of the theta expansion (total multiplicity if finite)."""
    if ev.seq.is_finite:
        _finite_values(ev.seq)
        return complex(np.sum(ev.seq.head_mults))
    return complex(ev.expansion.coefficient(0.0))


def residue_at(ev: ZetaEvaluator, alpha: float) -> complex:
    """Residue c_nu / Gamma(-alpha_nu) of zeta at s = -alpha_nu."""
    if ev.expansion is None:
        raise PoleError("finite spectra have entire zeta functions")
    alpha = float(alpha)
    if alpha >= 0 and alpha.is_integer():
        raise PoleError(f"no pole at s={-alpha}: alpha={alpha} is a nonnegative integer")
    c = ev.expansion.coefficient(alpha)
    if c == 0:
        raise PoleError(f"alpha={alpha} is not an exponent of the expansion")
    return complex(c * special.rgamma(-alpha))


def residue_contour(ev: ZetaEvaluator, alpha: float, radius: float = 0.1, points: int = 32) -> complex:
    """Residue at s = -alpha from the trapezoid rule on a circle (spectrally accurate)."""
    s0 = -float(alpha)
    src = ev.source
    others = [abs(s0 + a) for a, _ in ev.expansion.terms if abs(a - alpha) > 1e-12
              and not (a >= 0 and float(a).is_integer())]
    if others and min(others) <= 2 * radius:
        raise InputError("contour radius too large: another pole inside")
    acc = 0.0j
    for k in range(points):
        w = radius * cmath.exp(2j * math.pi * (k + 0.5) / points)
        acc += mellin_zeta(src, s0 + w, ev.config).value * w
    return acc / points


# -- expansions of transformed spectra ---------------------------------------------

def _affordable_t(seq: SpectralSequence, sigma: float, budget: int = 1_000_000) -> float:
    """Smallest t at which the powered theta series stays within ``budget`` entries."""
    if seq.is_finite:
        return 1e-3
    v, _ = seq.prefix(budget)
    top = float(np.max(np.abs(v))) if v.size else 1.0
    return min(max(40.0 / top**sigma, 1e-3), 0.5)


def power_expansion(seq: SpectralSequence, sigma: float, alpha_max: float = 4.0) -> ThetaExpansion:
    """Theta expansion of (a_n^sigma) from the poles of Gamma(u) zeta_a(sigma u).

    Poles of zeta_a at sigma u = -alpha_nu give t^(alpha_nu/sigma) terms with
    coefficient c_nu Gamma(-alpha_nu/sigma) / (sigma Gamma(-alpha_nu)); poles of
    Gamma at u = -m give t^m terms with coefficient (-1)^m zeta_a(-sigma m) / m!.
    Coinciding poles would produce log terms and are rejected.
    """
    exp = seq.expansion
    if exp is None:
        raise InputError("power_expansion needs the base expansion")
    ev = ZetaEvaluator(seq, exp)
    pairs = []
    fam1 = []
    for a, c in exp.terms:
        if a >= 0 and float(a).is_integer():
            continue
        beta = a / sigma
        if beta >= 0 and float(beta).is_integer():
            raise InputError("power transform produces log terms (coinciding poles)")
        coef = c * special.gamma(-beta) * special.rgamma(-a) / sigma
        fam1.append((beta, coef))
    a_next = exp.remainder.leading_alpha
    m_cap = int(math.floor(alpha_max))
    nxt = []
    for m in range(0, m_cap + 2):
        if not a_next > sigma * m + 2:
            m_cap = min(m_cap, m - 1)
            break
        val = zeta_eval(ev, -sigma * m) if m > 0 else zeta_value_at_zero(ev)
        coef = (-1) ** m * val / math.factorial(m)
        (pairs if m <= m_cap else nxt).append((float(m), coef))
    pairs += [p for p in fam1 if p[0] <= alpha_max]
    nxt += [(b, c) for b, c in fam1 if b > alpha_max]
    lead = min([b for b, _ in nxt] + [a_next / sigma, m_cap + 1.0])
    draft = ThetaExpansion.from_terms(pairs)
    # remainder constant fitted on a grid against the transformed theta (factor 2 margin)
    from .spectrum import _Power, _transform

    powered = _transform(seq, _Power(sigma), math.pi / 2, seq.k, None, "power-fit")
    grid = np.logspace(math.log10(_affordable_t(seq, sigma)), 0, 31)
    th = theta_eval(powered, grid, tol_rel=1e-17)
    part = draft.partial(grid)
    # discount the rounding noise of the two large cancelling sums before fitting
    noise = 64 * np.finfo(float).eps * (np.abs(th) + sum(abs(c) * grid**a for a, c in pairs))
    resid = np.maximum(np.abs(th - part) - noise, 0.0)
    floor = 1e-15 * max([abs(c) for _, c in pairs] + [1.0])
    C = 2.0 * max(float(np.max(resid / grid**lead)), max([abs(c) for _, c in nxt] + [floor]))
    return ThetaExpansion.from_terms(pairs, RemainderBound(((C, lead),), (), 1.0))


__all__ = [
    "ZetaEvaluator", "MellinSource", "MellinResult", "sequence_source", "mellin_zeta",
    "mellin_deriv_at_zero", "zeta_eval", "zeta_eval_with_error", "zeta_deriv_at_zero",
    "zeta_deriv_with_error", "zeta_value_at_zero", "residue_at", "residue_contour",
    "power_expansion", "EULER_GAMMA",
]
