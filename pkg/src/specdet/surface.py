"""Euler-product determinant of the Laplacian on a compact hyperbolic surface.

det(Delta + lam) = identity_term(g, lam) * prod over primitive closed geodesics
of prod_{N >= 0} (1 - exp(-(s + N) l)), with s = sqrt(lam + 1/4).
"""

from __future__ import annotations

import cmath
import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .config import DEFAULT_CONFIG, NumericConfig
from .determinants import CharFn, char_fn_full
from .errors import ConvergenceError, CutError, InputError
from .expansion import sphere_half_expansion
from .spectrum import SpectralSequence


@dataclass(frozen=True)
class LengthSpectrum:
    """Primitive closed geodesics of a genus-g surface: sorted (length, count) pairs."""

    genus: int
    primitives: tuple[tuple[float, int], ...]

    def __post_init__(self):
        if int(self.genus) != self.genus or self.genus < 1:
            raise InputError("genus must be a positive integer")
        prims = []
        for length, count in self.primitives:
            length = float(length)
            if not (length > 0 and math.isfinite(length)):
                raise InputError(f"primitive length {length} must be positive")
            if int(count) != count or count < 1:
                raise InputError(f"count {count} must be a positive integer")
            prims.append((length, int(count)))
        prims.sort()
        object.__setattr__(self, "genus", int(self.genus))
        object.__setattr__(self, "primitives", tuple(prims))

    @property
    def lengths(self) -> np.ndarray:
        return np.array([l for l, _ in self.primitives], dtype=float)

    @property
    def counts(self) -> np.ndarray:
        return np.array([c for _, c in self.primitives], dtype=float)

    def to_json(self) -> dict:
        return {"genus": self.genus,
                "primitives": [{"length": l, "count": c} for l, c in self.primitives]}


def load_length_spectrum(source) -> LengthSpectrum:
    """Read {"genus": g, "primitives": [{"length": l, "count": c}, ...]} from a path or dict."""
    if isinstance(source, (str, Path)):
        try:
            doc = json.loads(Path(source).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read length spectrum: {exc}") from exc
    else:
        doc = source
    try:
        prims = [(p["length"], p.get("count", 1)) for p in doc["primitives"]]
        return LengthSpectrum(doc["genus"], tuple(prims))
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed length spectrum: {exc}") from exc


@dataclass(frozen=True)
class ConjClassTerm:
    """The class gamma_0^m of a primitive class of length l0: length m l0, multiplicity m."""

    l0: float
    m: int

    def __post_init__(self):
        if not self.l0 > 0:
            raise InputError("primitive length must be positive")
        if int(self.m) != self.m or self.m < 1:
            raise InputError("power m must be a positive integer")

    @property
    def length(self) -> float:
        return self.m * self.l0

    @property
    def multiplicity(self) -> int:
        return int(self.m)


def spectral_parameter(lam: complex) -> complex:
    """s = sqrt(lam + 1/4); lam on (-inf, -1/4] is the cut."""
    lam = complex(lam)
    z = lam + 0.25
    if z.imag == 0.0 and z.real <= 0.0:
        raise CutError(f"lambda={lam} lies on the cut (-inf, -1/4]")
    return cmath.sqrt(z)


def _as_real(z: complex):
    return z.real if z.imag == 0.0 else z


# -- identity contribution ------------------------------------------------------------

class _SphereRule:
    def __call__(self, idx):
        k = idx.astype(float)
        return (k + 0.5).astype(complex), 2.0 * k + 1.0


def sphere_operator_spectrum() -> SpectralSequence:
    """P = sqrt(Delta_sphere + 1/4): eigenvalues k + 1/2 with multiplicity 2k + 1, k >= 0."""
    return SpectralSequence(np.empty(0), np.empty(0), math.pi / 2, 3, tail=_SphereRule(),
                            expansion=sphere_half_expansion(), name="sphere P")


def identity_term(genus: int, lam: complex, prefactor: float = 1.0,
                  config: NumericConfig = DEFAULT_CONFIG):
    """(prefactor * exp(-lam - 1/4) * det(P + s))^(2 - 2g), the identity-class factor."""
    if int(genus) != genus or genus < 1:
        raise InputError("genus must be a positive integer")
    s = spectral_parameter(lam)
    e = 2 - 2 * int(genus)
    if e == 0:
        return 1.0
    d = char_fn_full(CharFn(sphere_operator_spectrum(), config=config), s)
    log = e * (math.log(prefactor) - (complex(lam) + 0.25) + d.log)
    return _as_real(cmath.exp(log))


# -- geodesic contributions --------------------------------------------------------------

def _tail_count(x0: float, q: float, tol: float) -> int:
    """Smallest n with x0 q^n / ((1 - x0 q^n)(1 - q)) < tol."""
    n = 0
    x = x0
    while x / ((1 - x) * (1 - q)) >= tol:
        x *= q
        n += 1
        if n > 10_000_000:
            raise ConvergenceError("geodesic tail does not decay")
    return n


def conj_class_log_factor(term: ConjClassTerm, lam: complex, n_max: int | None = None,
                          tol_abs: float = 1e-17):
    """log det_gamma(D + lam) = -sum_{N >= 0} exp(-(s + N) l) / mu; returns (value, tail bound)."""
    s = spectral_parameter(lam)
    l, mu = term.length, term.multiplicity
    q = math.exp(-l)
    x0 = abs(cmath.exp(-s * l))
    if n_max is None:
        n_max = _tail_count(x0, q, tol_abs * mu) + 1
    N = np.arange(n_max + 1)
    terms = np.exp(-(s + N) * l) / mu
    re = math.fsum(terms.real)
    im = math.fsum(terms.imag)
    tail = x0 * q ** (n_max + 1) / (mu * (1 - q))
    return _as_real(-complex(re, im)), tail


def conj_class_factor(term: ConjClassTerm, lam: complex, n_max: int | None = None,
                      tol_abs: float = 1e-17):
    """exp(-sum_{N=0}^{N_max} exp(-(s + N) l)/mu), s = sqrt(lam + 1/4), l = m l0, mu = m."""
    log, _ = conj_class_log_factor(term, lam, n_max, tol_abs)
    return _as_real(cmath.exp(log))


@dataclass(frozen=True)
class ProductValue:
    log: complex
    tail_bound: float

    @property
    def value(self):
        return _as_real(cmath.exp(self.log))


def geodesic_log_product(spectrum: LengthSpectrum, lam: complex, tol_abs: float = 1e-15,
                         n_max: int = 10_000_000) -> ProductValue:
    """log prod_prim prod_N (1 - exp(-(s + N) l))^count with a certified tail bound."""
    s = spectral_parameter(lam)
    if not spectrum.primitives:
        warnings.warn("empty length spectrum: geodesic product is 1", stacklevel=2)
        return ProductValue(0.0j, 0.0)
    if s.imag == 0.0:
        total, tail, _ = kernels.geodesic_log_sum(spectrum.lengths, spectrum.counts, s.real, tol_abs, n_max)
        return ProductValue(complex(total), float(tail))
    parts_re, parts_im, tail_total = [], [], 0.0
    p = len(spectrum.primitives)
    for l, c in spectrum.primitives:
        q = math.exp(-l)
        x0 = abs(cmath.exp(-s * l))
        n = _tail_count(x0, q, tol_abs / (c * p)) + 1
        v = c * np.log1p(-np.exp(-(s + np.arange(n)) * l))
        parts_re.extend(v.real)
        parts_im.extend(v.imag)
        xn = x0 * q**n
        tail_total += c * xn / ((1 - xn) * (1 - q))
    return ProductValue(complex(math.fsum(parts_re), math.fsum(parts_im)), tail_total)


def geodesic_product(spectrum: LengthSpectrum, lam: complex, tol_abs: float = 1e-15):
    """prod over primitive classes and N >= 0 of (1 - exp(-(s + N) l))^count."""
    return geodesic_log_product(spectrum, lam, tol_abs).value


def geodesic_product_via_classes(spectrum: LengthSpectrum, lam: complex,
                                 tol_abs: float = 1e-15) -> ProductValue:
    """Second route: sum of log conj_class_factor over every class gamma_0^m.

    The m-tail is bounded by sum_N x_N^(M+1)/((M+1)(1 - x_N)) <= x_0^(M+1)/((M+1)(1 - x_0)(1 - q)).
    """
    s = spectral_parameter(lam)
    if not spectrum.primitives:
        return ProductValue(0.0j, 0.0)
    re, im, tail_total = [], [], 0.0
    p = len(spectrum.primitives)
    for l0, c in spectrum.primitives:
        x0 = abs(cmath.exp(-s * l0))
        q = math.exp(-l0)
        share = tol_abs / (2 * c * p)
        m = 1
        while True:
            v, t = conj_class_log_factor(ConjClassTerm(l0, m), lam, tol_abs=share)
            v = complex(v)
            re.append(c * v.real)
            im.append(c * v.imag)
            tail_total += c * t
            rest = x0 ** (m + 1) / ((m + 1) * (1 - x0) * (1 - q))
            if rest < share:
                tail_total += c * rest
                break
            m += 1
    return ProductValue(complex(math.fsum(re), math.fsum(im)), tail_total)


@dataclass(frozen=True)
class SurfaceDet:
    lam: complex
    identity: float | complex
    geodesic: float | complex
    det: float | complex
    tail_bound: float


def surface_det(genus: int, spectrum: LengthSpectrum | None, lam: complex, prefactor: float = 1.0,
                config: NumericConfig = DEFAULT_CONFIG) -> SurfaceDet:
    """identity_term(g, lam) times geodesic_product(spectrum, lam)."""
    ident = identity_term(genus, lam, prefactor, config)
    if spectrum is None or not spectrum.primitives:
        geo = ProductValue(0.0j, 0.0)
    else:
        geo = geodesic_log_product(spectrum, lam)
    return SurfaceDet(complex(lam), ident, geo.value, _as_real(ident * cmath.exp(geo.log)), geo.tail_bound)


__all__ = [
    "LengthSpectrum", "load_length_spectrum", "ConjClassTerm", "spectral_parameter",
    "sphere_operator_spectrum", "identity_term", "conj_class_log_factor", "conj_class_factor",
    "ProductValue", "geodesic_log_product", "geodesic_product", "geodesic_product_via_classes",
    "SurfaceDet", "surface_det",
]
