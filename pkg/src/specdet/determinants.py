"""Regularized and reduced determinants, characteristic functions and Fredholm determinants."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as sp_integrate
from scipy import special

from .config import DEFAULT_CONFIG, ZERO_THRESHOLD, NumericConfig
from .errors import ConvergenceError, CutError, InputError, PreconditionError
from .expansion import ThetaExpansion
from .spectrum import SpectralSequence, kernel_split, shift
from .zeta import (
    EULER_GAMMA,
    MellinResult,
    ZetaEvaluator,
    zeta_deriv_with_error,
    zeta_eval,
    zeta_value_at_zero,
)


@dataclass(frozen=True)
class DetValue:
    """A determinant together with its logarithm and error estimate (on the log)."""

    value: complex
    log: complex
    error: float
    zero_order: float = 0

    def __complex__(self):
        return complex(self.value)


def _from_zeta_deriv(res: MellinResult) -> DetValue:
    log = -res.value
    return DetValue(cmath.exp(log), log, res.error)


def reg_det_full(seq: SpectralSequence, expansion: ThetaExpansion | None = None,
                 config: NumericConfig = DEFAULT_CONFIG) -> DetValue:
    return _from_zeta_deriv(zeta_deriv_with_error(ZetaEvaluator(seq, expansion, config)))


def reg_det(seq: SpectralSequence, expansion: ThetaExpansion | None = None,
            config: NumericConfig = DEFAULT_CONFIG) -> complex:
    """exp(-zeta'(0)) of a kernel-free admissible sequence."""
    return reg_det_full(seq, expansion, config).value


def reduced_det(seq: SpectralSequence, expansion_of_reduced: ThetaExpansion | None = None,
                config: NumericConfig = DEFAULT_CONFIG):
    """(kernel dimension, det') after removing the zero modes."""
    split = kernel_split(seq)
    return split.kernel_dimension, reg_det(split.reduced, expansion_of_reduced, config)


# -- characteristic function ----------------------------------------------------

@dataclass(frozen=True)
class CharFn:
    """lambda -> det(A + lambda) for the spectrum ``base`` (zero modes allowed)."""

    base: SpectralSequence
    expansion: ThetaExpansion | None = None
    config: NumericConfig = field(default=DEFAULT_CONFIG)
    alpha_window: float = 4.0

    def __post_init__(self):
        if self.expansion is None:
            object.__setattr__(self, "expansion", self.base.expansion)


def _on_cut(lam: complex) -> bool:
    return lam.imag == 0.0 and lam.real <= 0.0


def char_fn_full(cf: CharFn, lam: complex, allow_cut: bool = False) -> DetValue:
    """det(A + lam) via the Mellin pipeline on the shifted spectrum.

    Entries whose shift leaves the right half-plane (or all entries up to
    2|lam| when ``lam`` is on the cut and ``allow_cut`` is set) are split off
    as an exact finite product, which realises the entire continuation.
    """
    lam = complex(lam)
    if _on_cut(lam) and not allow_cut:
        raise CutError(f"lambda={lam} lies on the cut (-inf, 0]")
    seq = cf.base
    probe, pm = seq.prefix(4096)
    shifted = probe + lam
    need = (shifted.real <= 0.5 * np.abs(shifted)) | (np.abs(shifted) <= 1.0)
    if _on_cut(lam) or np.any(need):
        limit = 2.0 * abs(lam) + 1.0
        n_defl = int(np.count_nonzero(probe.real <= limit))
        if np.any(need):
            n_defl = max(n_defl, int(np.flatnonzero(need)[-1]) + 1)
    else:
        n_defl = 0
    if seq.is_finite:
        v, m = seq.head_values + lam, seq.head_mults
        return _finite_logdet(v, m)
    if n_defl == 0:
        sh = shift(seq, lam, cf.alpha_window)
        exp = cf.expansion.shifted(lam, max([a for a, _ in cf.expansion.terms] + [cf.alpha_window]))
        return reg_det_full(sh, exp, cf.config)
    dv, dm = seq.prefix(n_defl)
    head = _finite_logdet(dv + lam, dm)
    if head.zero_order:
        return head
    rest = SpectralSequence(seq.head_values[n_defl:], seq.head_mults[n_defl:], seq.epsilon, seq.k,
                            tail=seq.tail,
                            tail_offset=seq.tail_offset + max(0, n_defl - seq.head_values.shape[0]),
                            name=f"{seq.name}[{n_defl}:]")
    top = max([a for a, _ in cf.expansion.terms] + [cf.alpha_window])
    rest_exp = cf.expansion.minus_finite(dv, dm, top)
    sh = shift(rest.with_expansion(rest_exp), lam, cf.alpha_window)
    tail = reg_det_full(sh, rest_exp.shifted(lam, top), cf.config)
    log = head.log + tail.log
    return DetValue(cmath.exp(log), log, tail.error)


def _finite_logdet(values, mults) -> DetValue:
    values = np.asarray(values, dtype=complex)
    mults = np.asarray(mults, dtype=float)
    zero = np.abs(values) <= ZERO_THRESHOLD
    if np.any(zero):
        order = float(np.sum(mults[zero]))
        return DetValue(0.0j, complex(-math.inf), 0.0, int(order) if order.is_integer() else order)
    log = complex(np.sum(mults * np.log(values)))
    return DetValue(cmath.exp(log), log, 0.0)


def char_fn_eval(cf: CharFn, lam: complex, allow_cut: bool = False) -> complex:
    """det(A + lam); exactly 0 when lam hits -a_n (order = multiplicity, see char_fn_full)."""
    return char_fn_full(cf, lam, allow_cut).value


# -- large-lambda asymptotics ----------------------------------------------------

def _harmonic(k: int) -> float:
    return math.fsum(1.0 / j for j in range(1, k + 1))


def _is_nonpos_int(a: float) -> bool:
    return a <= 0 and float(a).is_integer()


@dataclass(frozen=True)
class AsymptoticSeries:
    """Terms of -log det(A + mu) as mu -> infinity, derived from a theta expansion.

    ``power``: (alpha, c Gamma(alpha)) contributing coef * mu^(-alpha).
    ``log``: (k, c (-1)^k / k!, H_k) contributing coef * (H_k - log mu) mu^k.
    ``next_terms``: dropped expansion terms and remainder, used for the error estimate.
    """

    power: tuple[tuple[float, complex], ...]
    log: tuple[tuple[int, complex, float], ...]
    next_terms: tuple[tuple[float, complex], ...]

    @classmethod
    def from_expansion(cls, expansion: ThetaExpansion, alpha_keep: float = math.inf) -> "AsymptoticSeries":
        power, log, nxt = [], [], []
        for a, c in expansion.terms:
            if a > alpha_keep:
                nxt.append((a, c))
                continue
            if _is_nonpos_int(a):
                k = int(round(-a))
                log.append((k, c * (-1) ** k / math.factorial(k), _harmonic(k)))
            else:
                power.append((a, c * special.gamma(a)))
        for C, a in expansion.remainder.power:
            nxt.append((a, C))
        return cls(tuple(power), tuple(log), tuple(nxt))


C0_REGULARIZED = None


def c0_constant() -> float:
    """Regularized int_0^inf (1 - cos t)/t dt = lim_M [int_0^M (1 - cos t)/t dt - log M].

    The integral itself diverges logarithmically; the finite part is computed by
    quadrature on [0, 1] plus the cosine-integral tail, and equals Euler's gamma.
    """
    global C0_REGULARIZED
    if C0_REGULARIZED is None:
        head, _ = sp_integrate.quad(lambda t: 2.0 * math.sin(0.5 * t) ** 2 / t if t > 0 else 0.0,
                                    0.0, 1.0, epsabs=1e-15, epsrel=1e-13)
        # int_1^M (1 - cos t)/t dt - log M = Ci(1) - Ci(M) -> Ci(1)
        tail = float(special.sici(1.0)[1])
        C0_REGULARIZED = head + tail
    return C0_REGULARIZED


def char_fn_asymptotic(series: AsymptoticSeries, lam: complex, sign: int = 0,
                       extra_alpha0_term: bool = False):
    """Truncated large-parameter expansion of -log det(A + mu).

    ``sign`` = 0 evaluates at mu = lam (lam > 0); sign = +1/-1 evaluates the
    imaginary-shift variant at mu = +/- i lam.  By default the alpha = 0 term
    is counted once, in the log family (which is the analytic continuation of
    the real-axis formula); ``extra_alpha0_term`` additionally adds the
    separate c (C0 + gamma +/- i pi/2 + log lam) term of the imaginary variant.

    Returns ``(value, next_term_estimate)``.
    """
    lam = complex(lam)
    mu = lam if sign == 0 else (1j * sign) * lam
    logmu = cmath.log(mu)
    total = 0.0j
    for a, coef in series.power:
        total += coef * cmath.exp(-a * logmu)
    for k, coef, hk in series.log:
        total += coef * (hk - logmu) * mu**k
    if sign != 0 and extra_alpha0_term:
        for k, coef, _ in series.log:
            if k == 0:
                total += coef * (c0_constant() + EULER_GAMMA + sign * 0.5j * math.pi + cmath.log(lam))
    est = 0.0
    for a, c in series.next_terms:
        if _is_nonpos_int(a):
            k = int(round(-a))
            est = max(est, abs(c) / math.factorial(k) * abs((_harmonic(k) - logmu) * mu**k))
        else:
            est = max(est, abs(c * special.gamma(a) * cmath.exp(-a * logmu)))
    return total, est


# -- Fredholm determinants --------------------------------------------------------

def fredholm_det(eigs=None, trace_powers=None, method: str = "product", tol: float = 1e-15) -> complex:
    """det_Fr(1 + T) for a normal trace-class T.

    ``product``: prod (1 + lambda_n) over the finite list ``eigs``.
    ``exp_series``: exp(-sum_n (-1)^n/n tr T^n), needs max |lambda_n| < 1; the
    traces come from ``trace_powers`` (callable n -> tr T^n, or a list) or are
    formed from ``eigs``.
    """
    if method == "product":
        if eigs is None:
            raise InputError("product method needs eigenvalues")
        lam = np.asarray(eigs, dtype=complex)
        if np.any(lam == -1):
            return 0.0j
        return complex(np.exp(np.sum(np.log1p(lam)))) if np.all(lam.imag == 0) and np.all(lam.real > -1) \
            else complex(np.prod(1 + lam))
    if method != "exp_series":
        raise InputError(f"unknown Fredholm method {method!r}")
    if eigs is not None:
        lam = np.asarray(eigs, dtype=complex)
        norm = float(np.max(np.abs(lam))) if lam.size else 0.0
        if norm >= 1:
            raise PreconditionError(f"exp_series needs ||T|| < 1 (got {norm})")
        if trace_powers is None:
            def trace_powers(n, lam=lam):
                return complex(np.sum(lam**n))
        ratio = norm
        scale = float(np.sum(np.abs(lam)))
    else:
        if trace_powers is None:
            raise InputError("exp_series needs eigenvalues or trace powers")
        ratio, scale = None, None
    tr = trace_powers if callable(trace_powers) else (lambda n, tp=list(trace_powers): tp[n - 1])
    total = 0.0j
    n = 1
    while True:
        term = (-1) ** n / n * tr(n)
        total += term
        if ratio is not None:
            if scale * ratio ** n / (n + 1) / (1 - ratio) < tol * max(1.0, abs(total)) or ratio == 0:
                break
        elif abs(term) < tol * max(1.0, abs(total)) and n > 2:
            break
        n += 1
        if not callable(trace_powers) and n > len(trace_powers):
            break
        if n > 10_000:
            raise ConvergenceError("exp_series did not converge")
    return complex(cmath.exp(-total))


def _check_inverse_trace_class(seq: SpectralSequence, expansion: ThetaExpansion | None) -> float:
    """Abscissa of convergence of sum |a_n|^-s; A^(eps-1) trace class needs it < 1."""
    exp = expansion if expansion is not None else seq.expansion
    if seq.is_finite:
        return 0.0
    if exp is None:
        raise PreconditionError("cannot decide trace class without an expansion")
    abscissa = max([-a for a, _ in exp.terms if not (a >= 0 and float(a).is_integer())] + [0.0])
    if not abscissa < 1:
        raise PreconditionError(f"A^-1 is not trace class (sum |a_n|^-s converges only for s > {abscissa})")
    return abscissa


def fredholm_det_inverse(seq: SpectralSequence, method: str = "product",
                         expansion: ThetaExpansion | None = None,
                         config: NumericConfig = DEFAULT_CONFIG, head_terms: int = 2000) -> complex:
    """det_Fr(1 + A^-1) for an infinite (or finite) kernel-free spectrum.

    ``product``: exact partial product over the first ``head_terms`` entries; the
    tail sum log(1 + 1/a) is expanded in powers 1/a^j whose tail sums come from
    zeta_A(j) (Dirichlet region) minus the head.
    ``exp_series``: traces tr A^-n = zeta_A(n); needs |a_n| > 1 for all n.
    """
    _check_inverse_trace_class(seq, expansion)
    if seq.is_finite:
        v, m = seq.head_values, seq.head_mults
        inv = np.repeat(1.0 / v, m.astype(int))
        return fredholm_det(inv, method=method)
    ev = ZetaEvaluator(seq, expansion, config)
    v, m = seq.prefix(head_terms)
    if method == "exp_series":
        if abs(v[0]) <= 1:
            raise PreconditionError(f"exp_series needs ||A^-1|| < 1 (smallest |a| = {abs(v[0])})")
        return fredholm_det(trace_powers=lambda n: zeta_eval(ev, n), method="exp_series")
    head = complex(np.sum(m * np.log1p(1.0 / v)))
    r = 1.0 / abs(complex(seq.prefix(head_terms + 1)[0][-1]))
    tail = 0.0j
    j = 1
    while True:
        tail_sum = zeta_eval(ev, j) - complex(np.sum(m * v ** (-j)))
        tail += (-1) ** (j + 1) / j * tail_sum
        if abs(tail_sum) < 1e-17 or r**j < 1e-17:
            break
        j += 1
    return complex(cmath.exp(head + tail))


@dataclass(frozen=True)
class RatioReport:
    lhs: complex
    rhs: complex
    rel_gap: float


def fredholm_ratio_check(seq: SpectralSequence, expansion: ThetaExpansion | None = None,
                         config: NumericConfig = DEFAULT_CONFIG) -> RatioReport:
    """det_Fr(1 + A^-1) against det(A + 1) / det(A), both computed independently."""
    lhs = fredholm_det_inverse(seq, "product", expansion, config)
    cf = CharFn(seq, expansion, config)
    rhs_log = char_fn_full(cf, 1.0).log - reg_det_full(seq, expansion, config).log
    rhs = cmath.exp(rhs_log)
    return RatioReport(lhs, rhs, abs(lhs - rhs) / abs(rhs))


__all__ = [
    "DetValue", "reg_det", "reg_det_full", "reduced_det", "CharFn", "char_fn_eval", "char_fn_full",
    "AsymptoticSeries", "char_fn_asymptotic", "c0_constant", "fredholm_det", "fredholm_det_inverse",
    "fredholm_ratio_check", "RatioReport", "zeta_value_at_zero",
]
