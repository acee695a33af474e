"""Gamma-trace heat models, L2-zeta functions and determinants, equivariant versions."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate as sp_integrate
from scipy import special

from .config import DEFAULT_CONFIG, NumericConfig
from .errors import CutError, InputError, PreconditionError
from .expansion import RemainderBound, ThetaExpansion, rotation_expansion
from .spectrum import SpectralSequence
from .zeta import (
    MellinResult,
    MellinSource,
    ZetaEvaluator,
    mellin_deriv_at_zero,
    mellin_zeta,
    zeta_deriv_with_error,
    zeta_eval,
)


@dataclass(frozen=True)
class GammaTraceModel:
    """Closed-form t -> tr_Gamma exp(-tD) for a model covering.

    ``large_t`` lists monomials (C, p) with trace(t) - h = sum C t^p exactly for
    t >= ``large_t_from``; the flat models are pure power laws, so this holds
    for every t.
    """

    name: str
    dimension: int
    volume: float
    trace: Callable[[np.ndarray], np.ndarray]
    small_t_expansion: ThetaExpansion
    kernel_gamma_dim: float = 0.0
    gns_exact: float = math.inf
    large_t: tuple[tuple[float, float], ...] = ()
    large_t_from: float = 1.0

    def is_monomial(self) -> bool:
        return len(self.large_t) == 1 and self.large_t_from <= 0.0 and self.kernel_gamma_dim == 0.0


def _power_law(coef: float, p: float):
    def trace(t):
        return coef * np.power(np.asarray(t, dtype=float), p)
    return trace


def flat_model(lengths) -> GammaTraceModel:
    """Z^n acting on R^n by translations with periods ``lengths``: trace = vol (4 pi t)^(-n/2)."""
    lengths = [float(x) for x in np.atleast_1d(lengths)]
    if not lengths or any(not x > 0 for x in lengths):
        raise InputError("periods must be positive")
    n = len(lengths)
    vol = math.prod(lengths)
    coef = vol / (4.0 * math.pi) ** (n / 2.0)
    p = -n / 2.0
    return GammaTraceModel(
        name=f"flat{tuple(lengths)}", dimension=n, volume=vol, trace=_power_law(coef, p),
        small_t_expansion=ThetaExpansion.from_terms([(p, coef)], RemainderBound()),
        kernel_gamma_dim=0.0, gns_exact=float(n), large_t=((coef, p),), large_t_from=0.0)


def line_model(length: float) -> GammaTraceModel:
    """Z acting on the real line by translation by ``length``: trace = L (4 pi t)^(-1/2)."""
    if not length > 0:
        raise InputError("L must be positive")
    model = flat_model([length])
    return GammaTraceModel(**{**model.__dict__, "name": f"line(L={length!r})"})


def gns_estimate(model: GammaTraceModel, t_window=(10.0, 1000.0), points: int = 41) -> float:
    """-2 times the least-squares slope of log(trace - h) against log t."""
    a, b = t_window
    if not 0 < a < b:
        raise InputError("window must satisfy 0 < a < b")
    ts = np.geomspace(a, b, points)
    y = np.asarray(model.trace(ts), dtype=float) - model.kernel_gamma_dim
    if np.any(~(y > 0)):
        raise InputError("trace - h is not positive on the window")
    slope = np.polyfit(np.log(ts), np.log(y), 1)[0]
    return float(-2.0 * slope)


# -- L2 zeta function -------------------------------------------------------------

def _on_cut(lam: complex) -> bool:
    return lam.imag == 0.0 and lam.real < 0.0


def _model_source(model: GammaTraceModel, lam: complex, alpha_max: float = 4.0) -> MellinSource:
    h = model.kernel_gamma_dim
    base = model.small_t_expansion
    if h:
        base = base.plus(ThetaExpansion.from_terms([(0.0, -h)], RemainderBound()))
    if lam == 0:
        if not model.large_t:
            raise InputError(f"{model.name}: lambda = 0 needs a large-time law")

        def theta0(ts):
            return np.asarray(model.trace(ts), dtype=complex) - h

        return MellinSource(theta0, base, 0.0, lambda t: float(model.trace(t)) + h, 1.0,
                            large_t=model.large_t, large_t_from=max(1.0, model.large_t_from),
                            label=model.name)
    exp = base.shifted(lam, max([a for a, _ in base.terms] + [alpha_max]))
    split = min(1.0, 1.0 / abs(lam))

    def theta(ts):
        ts = np.asarray(ts, dtype=float)
        return (np.asarray(model.trace(ts), dtype=complex) - h) * np.exp(-lam * ts)

    def abs_bound(t):
        # trace - h is nonincreasing for the bundled models
        return abs(float(model.trace(t)) - h) * math.exp(-lam.real * t) * (1 + 1e-12)

    return MellinSource(theta, exp, lam.real, abs_bound, split, label=f"{model.name}+{lam}")


def _strip_check(model: GammaTraceModel, s: complex) -> None:
    # int_1^inf t^(s-1) t^p dt converges iff Re s < -p = gns/2
    for _, p in model.large_t:
        if not s.real < -p:
            raise InputError(f"{model.name}: at lambda = 0 the large-time integral needs Re s < {-p}")


def l2_zeta_closed_form(model: GammaTraceModel, lam: complex, s: complex) -> complex:
    """C Gamma(s + p) / Gamma(s) lam^(-s-p) for a pure power-law model, lam off the cut."""
    if not model.is_monomial():
        raise InputError(f"{model.name}: no closed form")
    lam, s = complex(lam), complex(s)
    (C, p), = model.large_t
    if lam == 0:
        return 0.0j
    if _on_cut(lam):
        raise CutError(f"lambda={lam} on the cut")
    return complex(C * special.gamma(s + p) * special.rgamma(s) * cmath.exp(-(s + p) * cmath.log(lam)))


def _closed_form_deriv(model: GammaTraceModel, lam: complex) -> complex:
    (C, p), = model.large_t
    if lam == 0:
        return 0.0j
    loglam = cmath.log(lam)
    if p <= 0 and float(p).is_integer():
        k = int(round(-p))
        f0 = lam**k * (-1) ** k / math.factorial(k)
        return C * f0 * (-loglam + math.fsum(1.0 / j for j in range(1, k + 1)))
    return complex(C * special.gamma(p) * cmath.exp(-p * loglam))


def l2_zeta_full(model: GammaTraceModel, lam: complex, s: complex,
                 config: NumericConfig = DEFAULT_CONFIG) -> MellinResult:
    lam, s = complex(lam), complex(s)
    if _on_cut(lam):
        raise CutError(f"lambda={lam} on the cut")
    if lam == 0:
        _strip_check(model, s)
        return mellin_zeta(_model_source(model, lam), s, config)
    if lam.real > 0:
        return mellin_zeta(_model_source(model, lam), s, config)
    return MellinResult(l2_zeta_closed_form(model, lam, s), 0.0)


def l2_zeta_eval(model: GammaTraceModel, lam: complex, s: complex,
                 config: NumericConfig = DEFAULT_CONFIG) -> complex:
    """zeta^(2) of D + lam: numeric Mellin split for Re lam > 0 and lam = 0, closed form elsewhere."""
    return l2_zeta_full(model, lam, s, config).value


def l2_log_det(model: GammaTraceModel, lam: complex, config: NumericConfig = DEFAULT_CONFIG) -> MellinResult:
    lam = complex(lam)
    if _on_cut(lam):
        raise CutError(f"lambda={lam} on the cut")
    if lam == 0:
        _strip_check(model, 0j)
        res = mellin_deriv_at_zero(_model_source(model, lam), config)
    elif lam.real > 0:
        res = mellin_deriv_at_zero(_model_source(model, lam), config)
    else:
        if not model.is_monomial():
            raise InputError(f"{model.name}: continuation to Re lambda <= 0 needs a closed form")
        res = MellinResult(_closed_form_deriv(model, lam), 0.0)
    return MellinResult(-res.value, res.error)


def l2_det(model: GammaTraceModel, lam: complex, config: NumericConfig = DEFAULT_CONFIG) -> complex:
    """det^(2)(D + lam) = exp(-d/ds zeta^(2)(s) at s = 0)."""
    return cmath.exp(l2_log_det(model, lam, config).value)


def l2_zeta_ode_residual(model: GammaTraceModel, lam: complex, s: complex, step: float = 1e-3,
                         config: NumericConfig = DEFAULT_CONFIG) -> float:
    """|d/dlam zeta(s, lam) + s zeta(s + 1, lam)| with a fourth-order central difference."""
    lam, s = complex(lam), complex(s)
    f = [l2_zeta_eval(model, lam + k * step, s, config) for k in (-2, -1, 1, 2)]
    deriv = (f[0] - 8 * f[1] + 8 * f[2] - f[3]) / (12 * step)
    return abs(deriv + s * l2_zeta_eval(model, lam, s + 1, config))


def l2_det_path_check(model: GammaTraceModel, lam: complex, lam0: complex = 1.0,
                      config: NumericConfig = DEFAULT_CONFIG):
    """Cross-check of the continuation: log det(lam) - log det(lam0) = int_lam0^lam zeta(1, z) dz.

    Integrated along the straight segment (which must avoid the cut).  Only
    available when zeta(s, z) is regular at s = 1, i.e. dimension 1.
    Returns ``(direct, integrated)``.
    """
    if model.dimension >= 2:
        raise PreconditionError("zeta(1, z) has a pole for dimension >= 2")
    lam, lam0 = complex(lam), complex(lam0)
    d = lam - lam0

    def zeta1(z):
        # near the imaginary axis the Mellin integrand oscillates; use the closed form there
        if z.real >= 0.2 * abs(z) or not model.is_monomial():
            return l2_zeta_eval(model, z, 1.0, config)
        return l2_zeta_closed_form(model, z, 1.0)

    def f(u, part):
        v = zeta1(lam0 + u * d) * d
        return v.real if part == 0 else v.imag

    re = sp_integrate.quad(f, 0.0, 1.0, args=(0,), epsabs=1e-12, epsrel=1e-12)[0]
    im = sp_integrate.quad(f, 0.0, 1.0, args=(1,), epsabs=1e-12, epsrel=1e-12)[0]
    direct = l2_log_det(model, lam, config).value - l2_log_det(model, lam0, config).value
    return direct, complex(re, im)


# -- equivariant zeta and determinants (compact case) ------------------------------

def equivariant_spectrum(pairs) -> SpectralSequence:
    """Finite equivariant spectrum from (eigenvalue, tr(g | eigenspace)) pairs."""
    pairs = list(pairs)
    if not pairs:
        raise InputError("empty equivariant spectrum")
    vals = np.array([complex(v) for v, _ in pairs])
    trs = np.array([float(w) for _, w in pairs])
    order = np.lexsort((vals.imag, vals.real))
    return SpectralSequence(vals[order], trs[order], math.pi / 2, 1, name="equivariant")


class _RotationRule:
    def __init__(self, length: float, order: int):
        self.w = 2.0 * math.pi / length
        self.order = order

    def __call__(self, idx):
        k = idx + 1
        w = 2.0 * np.cos(2.0 * math.pi * (k % self.order) / self.order)
        # cos(pi/2) is not exactly zero in floating point; a spurious tiny weight would
        # end the theta summation early
        w[np.abs(w) < 1e-12] = 0.0
        return ((self.w * k) ** 2).astype(complex), w


def rotation_spectrum(length: float, order: int, include_zero: bool = False) -> SpectralSequence:
    """Circle Laplacian weighted by the trace of rotation by length/order: 2 cos(2 pi k / order)."""
    if not length > 0:
        raise InputError("circumference must be positive")
    if int(order) != order or order < 1:
        raise InputError("rotation order must be a positive integer")
    order = int(order)
    if order == 1:
        from .spectrum import circle_spectrum
        return circle_spectrum(length, include_zero)
    head = (np.array([0.0]), np.array([1.0])) if include_zero else (np.empty(0), np.empty(0))
    return SpectralSequence(head[0], head[1], math.pi / 2, 1, tail=_RotationRule(length, order),
                            expansion=rotation_expansion(length, order, reduced=not include_zero),
                            name=f"rotation(L={length!r}, m={order})")


def equivariant_zeta(eq_spectrum, s: complex, config: NumericConfig = DEFAULT_CONFIG) -> complex:
    """sum_{lambda > 0} tr(g | Eig) lambda^(-s); ``eq_spectrum`` is a sequence or (lambda, tr) pairs."""
    seq = eq_spectrum if isinstance(eq_spectrum, SpectralSequence) else equivariant_spectrum(eq_spectrum)
    return zeta_eval(ZetaEvaluator(seq, config=config), s)


def equivariant_det(eq_spectrum, lam: complex = 0.0, config: NumericConfig = DEFAULT_CONFIG) -> complex:
    """det_g(D + lam) = exp(-zeta'_{D+lam, g}(0))."""
    from .determinants import CharFn, char_fn_full, reg_det_full
    seq = eq_spectrum if isinstance(eq_spectrum, SpectralSequence) else equivariant_spectrum(eq_spectrum)
    lam = complex(lam)
    if lam == 0:
        return reg_det_full(seq, None, config).value
    return char_fn_full(CharFn(seq, config=config), lam).value


def equivariant_det_limit(full: SpectralSequence, kernel_trace: float, lambdas,
                          config: NumericConfig = DEFAULT_CONFIG) -> list[complex]:
    """lam^(-tr(g | ker)) det_g(D + lam) along ``lambdas`` (tends to det_g(D) as lam -> 0)."""
    return [complex(lam) ** (-kernel_trace) * equivariant_det(full, lam, config) for lam in lambdas]


# -- equivariant L2 traces (line model) ----------------------------------------------

@dataclass(frozen=True)
class EquivariantTraceModel:
    """tr_{Gamma_gamma}(gamma exp(-tD)) for translation by n L on the line."""

    length: float
    n: int
    trace: Callable[[np.ndarray], np.ndarray] = field(repr=False)

    @property
    def translation_length(self) -> float:
        return abs(self.n) * self.length


def equivariant_line_model(length: float, n: int) -> EquivariantTraceModel:
    if not length > 0:
        raise InputError("L must be positive")
    if int(n) != n or n == 0:
        raise InputError("n must be a nonzero integer (use l2_det for the identity class)")
    n = int(n)
    c = length / math.sqrt(4.0 * math.pi)
    a2 = (n * length) ** 2 / 4.0

    def trace(t):
        t = np.asarray(t, dtype=float)
        return c * np.power(t, -0.5) * np.exp(-a2 / t)

    return EquivariantTraceModel(length, n, trace)


def equivariant_l2_trace(length: float, n: int, t) -> float:
    """L (4 pi t)^(-1/2) exp(-(n L)^2 / (4 t))."""
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise InputError("t must be positive")
    out = equivariant_line_model(length, n).trace(t)
    return float(out) if out.ndim == 0 else out


def _equivariant_source(model: EquivariantTraceModel, lam: complex) -> MellinSource:
    c = model.length / math.sqrt(4.0 * math.pi)
    a2 = model.translation_length**2 / 4.0
    # no power terms: the whole trace is the exponentially small remainder near t = 0
    exp = ThetaExpansion.from_terms([], RemainderBound((), ((c, -0.5, a2),), 1.0))

    def theta(ts):
        ts = np.asarray(ts, dtype=float)
        return model.trace(ts) * np.exp(-lam * ts)

    def abs_bound(t):
        # c t^-1/2 exp(-a2/t) is increasing up to t = 2 a2, so bound by its maximum
        peak = c * (2 * a2) ** -0.5 * math.exp(-0.5) if t < 2 * a2 else float(model.trace(t))
        return peak * math.exp(-lam.real * t) * (1 + 1e-12)

    return MellinSource(theta, exp, lam.real, abs_bound, min(1.0, 1.0 / abs(lam)),
                        label=f"gamma_{model.n}+{lam}")


def equivariant_l2_log_det(length: float, n: int, lam: complex, method: str = "mellin",
                           config: NumericConfig = DEFAULT_CONFIG) -> complex:
    """log det^(2)_gamma(D + lam); ``closed`` gives -(1/|n|) exp(-|n| L sqrt(lam))."""
    model = equivariant_line_model(length, n)
    lam = complex(lam)
    if lam.imag == 0.0 and lam.real <= 0.0:
        raise CutError(f"lambda={lam} on the cut")
    if method == "closed" or lam.real <= 0:
        return -cmath.exp(-model.translation_length * cmath.sqrt(lam)) / abs(model.n)
    if method != "mellin":
        raise InputError(f"unknown method {method!r}")
    return -mellin_deriv_at_zero(_equivariant_source(model, lam), config).value


def equivariant_l2_det(length: float, n: int, lam: complex, method: str = "mellin",
                       config: NumericConfig = DEFAULT_CONFIG) -> complex:
    """det^(2)_gamma(D + lam) for translation by n L on the line."""
    return cmath.exp(equivariant_l2_log_det(length, n, lam, method, config))


def circle_product_formula(length: float, lam: complex, method: str = "mellin", tol: float = 1e-17,
                           config: NumericConfig = DEFAULT_CONFIG) -> complex:
    """det^(2)(line + lam) times prod over n != 0 of det^(2)_n(line + lam).

    By the Euler-product formula this equals det(circle Laplacian + lam).
    """
    lam = complex(lam)
    total = l2_log_det(line_model(length), lam, config).value
    decay = abs(cmath.exp(-length * cmath.sqrt(lam)))
    n = 1
    while True:
        total += 2.0 * equivariant_l2_log_det(length, n, lam, method, config)
        if decay ** (n + 1) / (n + 1) / (1 - decay) < tol:
            break
        n += 1
    return cmath.exp(total)


__all__ = [
    "GammaTraceModel", "line_model", "flat_model", "gns_estimate", "l2_zeta_eval", "l2_zeta_full",
    "l2_zeta_closed_form", "l2_log_det", "l2_det", "l2_zeta_ode_residual", "l2_det_path_check",
    "equivariant_spectrum", "rotation_spectrum", "equivariant_zeta", "equivariant_det",
    "equivariant_det_limit", "EquivariantTraceModel", "equivariant_line_model", "equivariant_l2_trace",
    "equivariant_l2_log_det", "equivariant_l2_det", "circle_product_formula",
]
