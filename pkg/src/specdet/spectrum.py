"""Admissible eigenvalue sequences: data model, model spectra and their algebra."""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .config import ZERO_THRESHOLD
from .errors import InputError, SectorError
from .expansion import (
    ThetaExpansion,
    circle_expansion,
    integer_expansion,
    torus_expansion,
)

# Vectorised tail rule: integer indices -> (values, multiplicities)
TailRule = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]

CHECK_PREFIX = 10_000


@dataclass(frozen=True)
class SpectralSequence:
    """Eigenvalues with multiplicities, sorted by nondecreasing real part.

    A finite ``head`` is followed by an optional lazy ``tail`` rule evaluated at
    indices ``tail_offset, tail_offset + 1, ...``.  ``epsilon`` is the sector
    margin of W_eps and ``k`` the declared convergence exponent.  ``expansion``
    is the small-t theta expansion when one is known in closed form.
    """

    head_values: np.ndarray
    head_mults: np.ndarray
    epsilon: float
    k: int
    tail: TailRule | None = None
    tail_offset: int = 0
    expansion: ThetaExpansion | None = None
    name: str = "custom"
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "head_values", np.asarray(self.head_values, dtype=complex))
        object.__setattr__(self, "head_mults", np.asarray(self.head_mults, dtype=float))
        self.head_values.setflags(write=False)
        self.head_mults.setflags(write=False)
        if not 0.0 < self.epsilon < math.pi:
            raise InputError("epsilon must lie in (0, pi)")
        if self.k < 1:
            raise InputError("convergence exponent k must be a positive integer")

    # -- access --------------------------------------------------------------

    @property
    def is_finite(self) -> bool:
        return self.tail is None

    def __len__(self) -> int:
        if self.tail is not None:
            raise TypeError("infinite spectral sequence has no length")
        return self.head_values.shape[0]

    def prefix(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """First ``n`` entries (fewer for finite sequences) as ``(values, mults)``."""
        nh = self.head_values.shape[0]
        if n <= nh or self.tail is None:
            return self.head_values[:n], self.head_mults[:n]
        cached = self._cache.get("prefix")
        if cached is not None and cached[0].shape[0] >= n:
            return cached[0][:n], cached[1][:n]
        idx = np.arange(self.tail_offset, self.tail_offset + n - nh)
        tv, tm = self.tail(idx)
        vals = np.concatenate([self.head_values, np.asarray(tv, dtype=complex)])
        mults = np.concatenate([self.head_mults, np.broadcast_to(np.asarray(tm, dtype=float), idx.shape)])
        vals.setflags(write=False)
        mults.setflags(write=False)
        # single read-mostly slot; a racing writer only stores an equally valid prefix
        self._cache["prefix"] = (vals, mults)
        return vals, mults

    def entries(self, n: int) -> list[tuple[complex, float]]:
        v, m = self.prefix(n)
        return [(complex(a), int(b) if float(b).is_integer() else float(b)) for a, b in zip(v, m)]

    def check_sector(self, n: int = CHECK_PREFIX) -> None:
        """Raise SectorError unless the first ``n`` entries lie in W_eps and are nonzero."""
        v, _ = self.prefix(n)
        if v.size == 0:
            return
        if np.any(np.abs(v) <= ZERO_THRESHOLD):
            raise SectorError(f"{self.name}: zero eigenvalue present (use kernel_split)")
        bad = np.abs(np.angle(v)) >= math.pi - self.epsilon
        if np.any(bad):
            i = int(np.flatnonzero(bad)[0])
            raise SectorError(f"{self.name}: entry {i} = {v[i]} outside W_eps (eps={self.epsilon})")

    def with_expansion(self, expansion: ThetaExpansion | None) -> "SpectralSequence":
        return replace(self, expansion=expansion, _cache={})


def finite_spectrum(values, mults=None, epsilon: float | None = None, k: int = 1,
                    name: str = "finite", check: bool = True) -> SpectralSequence:
    """Finite sequence, sorted by real part (ties by imaginary part)."""
    values = np.atleast_1d(np.asarray(values, dtype=complex))
    mults = np.ones(values.shape) if mults is None else np.atleast_1d(np.asarray(mults, dtype=float))
    if mults.shape != values.shape:
        raise InputError("values and multiplicities differ in length")
    if np.any(mults <= 0):
        raise InputError("multiplicities must be positive")
    order = np.lexsort((values.imag, values.real))
    values, mults = values[order], mults[order]
    if epsilon is None:
        nz = values[np.abs(values) > ZERO_THRESHOLD]
        worst = float(np.max(np.abs(np.angle(nz)))) if nz.size else 0.0
        epsilon = max(1e-6, (math.pi - worst) / 2.0)
    seq = SpectralSequence(values, mults, epsilon, k, name=name)
    if check:
        v = values[np.abs(values) > ZERO_THRESHOLD]
        if np.any(np.abs(np.angle(v)) >= math.pi - epsilon):
            raise SectorError("finite spectrum leaves the declared sector")
    return seq


# -- bundled model spectra ----------------------------------------------------

def _integers(idx):
    return (idx + 1).astype(complex), 1.0


def integer_spectrum() -> SpectralSequence:
    """a_n = n, n >= 1; its zeta function is Riemann's."""
    return SpectralSequence(np.empty(0), np.empty(0), math.pi / 2, 2, tail=_integers,
                            expansion=integer_expansion(), name="integers")


class _CircleRule:
    def __init__(self, length: float):
        self.w = 2.0 * math.pi / length

    def __call__(self, idx):
        return ((self.w * (idx + 1)) ** 2).astype(complex), 2.0


def circle_spectrum(length: float, include_zero: bool = False) -> SpectralSequence:
    """Laplacian on the circle of circumference ``length``: (2 pi k / length)^2, multiplicity 2."""
    if not length > 0:
        raise InputError("circumference must be positive")
    head = (np.array([0.0]), np.array([1.0])) if include_zero else (np.empty(0), np.empty(0))
    return SpectralSequence(head[0], head[1], math.pi / 2, 1, tail=_CircleRule(length),
                            expansion=circle_expansion(length, reduced=not include_zero),
                            name=f"circle(L={length!r}{', zero' if include_zero else ''})")


class _SemilatticeRule:
    def __init__(self, a0, z):
        self.a0, self.z = complex(a0), complex(z)

    def __call__(self, idx):
        return self.a0 + idx * self.z, 1.0


def semilattice_spectrum(a0: complex, z: complex, epsilon: float | None = None) -> SpectralSequence:
    """a_n = a0 + n z, n >= 0; both a0 and z must lie in a common sector W_eps."""
    a0, z = complex(a0), complex(z)
    if a0 == 0 or z == 0:
        raise SectorError("a0 and z must be nonzero")
    worst = max(abs(cmath.phase(a0)), abs(cmath.phase(z)))
    if worst >= math.pi:
        raise SectorError("a0 or z lies on the negative real axis")
    if epsilon is None:
        epsilon = (math.pi - worst) / 2.0
    if worst >= math.pi - epsilon:
        raise SectorError(f"a0={a0}, z={z} outside W_eps for eps={epsilon}")
    seq = SpectralSequence(np.empty(0), np.empty(0), epsilon, 2, tail=_SemilatticeRule(a0, z),
                           name=f"semilattice({a0}, {z})")
    seq.check_sector(CHECK_PREFIX)
    return seq


def _aggregate(values: np.ndarray, mults: np.ndarray, rel: float = 1e-12):
    order = np.argsort(values, kind="stable")
    values, mults = values[order], mults[order]
    out_v, out_m = [], []
    for v, m in zip(values, mults):
        if out_v and abs(v - out_v[-1]) <= rel * max(1.0, abs(v)):
            out_m[-1] += m
        else:
            out_v.append(v)
            out_m.append(m)
    return np.array(out_v), np.array(out_m)


def torus_spectrum(lengths, cutoff: float) -> SpectralSequence:
    """Flat torus R^n / prod L_i Z: sum_i (2 pi m_i / L_i)^2 <= cutoff, zero mode included."""
    lengths = [float(x) for x in np.atleast_1d(lengths)]
    if not lengths:
        raise InputError("torus needs at least one length")
    if any(not x > 0 for x in lengths):
        raise InputError("torus lengths must be positive")
    if not cutoff > 0:
        raise InputError("cutoff must be positive")
    axes = []
    for L in lengths:
        mmax = int(math.floor(L * math.sqrt(cutoff) / (2.0 * math.pi)))
        m = np.arange(-mmax, mmax + 1)
        axes.append((2.0 * math.pi * m / L) ** 2)
    total = np.zeros(1)
    for ax in axes:
        total = (total[:, None] + ax[None, :]).ravel()
        total = total[total <= cutoff * (1 + 1e-12)]
    vals, mults = _aggregate(total, np.ones_like(total))
    vals[np.abs(vals) <= ZERO_THRESHOLD] = 0.0
    seq = SpectralSequence(vals, mults, math.pi / 2, max(1, len(lengths)),
                           name=f"torus({tuple(lengths)}, cutoff={cutoff})")
    # truncated spectrum: the closed-form expansion describes the untruncated torus
    return seq


def torus_model_expansion(lengths, reduced: bool) -> ThetaExpansion:
    return torus_expansion(lengths, reduced)


# -- algebra ------------------------------------------------------------------

class _Mapped:
    def __init__(self, rule: TailRule, fn):
        self.rule, self.fn = rule, fn

    def __call__(self, idx):
        v, m = self.rule(idx)
        return self.fn(np.asarray(v, dtype=complex)), m


class _Scale:
    def __init__(self, c):
        self.c = c

    def __call__(self, v):
        return v * self.c


class _Shift:
    def __init__(self, lam):
        self.lam = lam

    def __call__(self, v):
        return v + self.lam


class _Power:
    def __init__(self, s):
        self.s = s

    def __call__(self, v):
        return np.exp(self.s * np.log(v))


def _transform(seq: SpectralSequence, fn, epsilon: float, k: int, expansion, name: str) -> SpectralSequence:
    tail = _Mapped(seq.tail, fn) if seq.tail is not None else None
    out = SpectralSequence(fn(seq.head_values.copy()), seq.head_mults.copy(), epsilon, k,
                           tail=tail, tail_offset=seq.tail_offset, expansion=expansion, name=name)
    return out


def _sector_margin(values: np.ndarray) -> float:
    if values.size == 0:
        return math.pi / 2
    if np.any(np.abs(values) <= ZERO_THRESHOLD):
        raise SectorError("transformed sequence contains a zero eigenvalue")
    worst = float(np.max(np.abs(np.angle(values))))
    if worst >= math.pi - 1e-9:
        raise SectorError("transformed sequence leaves every admissible sector")
    return (math.pi - worst) / 2.0


def scale(seq: SpectralSequence, c: float) -> SpectralSequence:
    """Entrywise c * a_n for c > 0; Theta_{cA}(t) = Theta_A(ct)."""
    c = float(c)
    if not c > 0:
        raise InputError("scale factor must be positive")
    exp = seq.expansion.scaled(c) if seq.expansion is not None else None
    return _transform(seq, _Scale(c), seq.epsilon, seq.k, exp, f"{c}*{seq.name}")


def shift(seq: SpectralSequence, lam: complex, alpha_max: float = 4.0) -> SpectralSequence:
    """Entrywise a_n + lam; the expansion is multiplied by the series of exp(-lam t)."""
    lam = complex(lam)
    exp = None
    if seq.expansion is not None:
        top = max([a for a, _ in seq.expansion.terms] + [alpha_max])
        exp = seq.expansion.shifted(lam, top)
    v, _ = seq.prefix(CHECK_PREFIX)
    eps = min(seq.epsilon, _sector_margin(v + lam))
    if seq.tail is not None:
        # asymptotic direction: a_n + lam ~ a_n as Re a_n -> infinity
        eps = min(eps, seq.epsilon)
    return _transform(seq, _Shift(lam), eps, seq.k, exp, f"({seq.name})+{lam}")


def power(seq: SpectralSequence, s: complex) -> SpectralSequence:
    """Entrywise principal power a_n^s for Re s > 0.

    The theta expansion of the result is derived from the poles of
    Gamma(u) zeta_A(s u) (see :func:`specdet.zeta.power_expansion`).
    """
    s = complex(s)
    if not s.real > 0:
        raise InputError("power requires Re s > 0")
    v, _ = seq.prefix(CHECK_PREFIX)
    pv = np.exp(s * np.log(v)) if v.size else v
    eps = _sector_margin(pv)
    k = int(math.ceil(seq.k / s.real))
    exp = None
    if seq.expansion is not None and s.imag == 0:
        from .zeta import power_expansion

        # slowly growing powers need more certified terms so the Mellin cut stays affordable
        exp = power_expansion(seq, s.real, alpha_max=4.0 if s.real >= 1 else 6.0 / s.real)
    s_out = s.real if s.imag == 0 else s
    return _transform(seq, _Power(s_out), eps, k, exp, f"({seq.name})^{s_out}")


@dataclass(frozen=True)
class KernelSplit:
    kernel_dimension: float
    reduced: SpectralSequence


def kernel_split(seq: SpectralSequence, zero_threshold: float = ZERO_THRESHOLD) -> KernelSplit:
    """Remove (near-)zero eigenvalues; report the removed multiplicity.

    For a lazy tail the zero modes must sit in the head (bundled models put the
    zero mode there); tail entries are checked on a prefix.
    """
    hv, hm = seq.head_values, seq.head_mults
    zero = np.abs(hv) <= zero_threshold
    dim = float(np.sum(hm[zero]))
    if seq.tail is not None:
        tv, _ = seq.tail(np.arange(seq.tail_offset, seq.tail_offset + 64))
        if np.any(np.abs(np.asarray(tv)) <= zero_threshold):
            raise InputError("zero eigenvalue inside a lazy tail")
    if not np.any(zero):
        return KernelSplit(0, seq)
    exp = None
    if seq.expansion is not None:
        exp = ThetaExpansion.from_terms(list(seq.expansion.terms) + [(0.0, -dim)], seq.expansion.remainder)
    reduced = SpectralSequence(hv[~zero], hm[~zero], seq.epsilon, seq.k, tail=seq.tail,
                               tail_offset=seq.tail_offset, expansion=exp, name=f"{seq.name}'")
    return KernelSplit(int(dim) if dim.is_integer() else dim, reduced)


def union(a: SpectralSequence, b: SpectralSequence) -> SpectralSequence:
    """Disjoint union of two finite sequences, or of a finite one with an infinite one."""
    if a.tail is not None and b.tail is not None:
        raise InputError("union of two infinite sequences is not supported")
    if a.tail is not None:
        a, b = b, a
    # a finite, b arbitrary: the merged head must precede b's tail
    if b.tail is not None:
        tv, _ = b.tail(np.array([b.tail_offset]))
        if a.head_values.size and np.max(a.head_values.real) > float(np.real(tv[0])):
            # move enough of b's tail into the head
            n = b.head_values.shape[0] + 1
            while True:
                v, _ = b.prefix(n)
                if v[-1].real >= np.max(a.head_values.real) or n > 10**6:
                    break
                n *= 2
            bv, bm = b.prefix(n)
            b = SpectralSequence(bv, bm, b.epsilon, b.k, tail=b.tail,
                                 tail_offset=b.tail_offset + n - b.head_values.shape[0],
                                 expansion=b.expansion, name=b.name)
    values = np.concatenate([a.head_values, b.head_values])
    mults = np.concatenate([a.head_mults, b.head_mults])
    order = np.lexsort((values.imag, values.real))
    exp = None
    if b.expansion is not None or b.tail is None:
        from .expansion import finite_expansion

        ea = finite_expansion(a.head_values, a.head_mults)
        eb = b.expansion if b.expansion is not None else finite_expansion(b.head_values, b.head_mults)
        exp = ea.plus(eb)
    return SpectralSequence(values[order], mults[order], min(a.epsilon, b.epsilon), max(a.k, b.k),
                            tail=b.tail, tail_offset=b.tail_offset, expansion=exp,
                            name=f"{a.name}+{b.name}")


# -- spectrum files -----------------------------------------------------------

def load_spectrum(source) -> SpectralSequence:
    """Read the JSON spectrum document (path, JSON string or already-parsed dict)."""
    if isinstance(source, dict):
        doc = source
    else:
        try:
            text = Path(source).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read spectrum file {source}: {exc}") from exc
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed spectrum JSON: {exc}") from exc
    try:
        eps = None if doc.get("epsilon") is None else float(doc["epsilon"])
        k = int(doc.get("k", 1))
        entries = doc["entries"]
        values = [complex(float(e["re"]), float(e.get("im", 0.0))) for e in entries]
        mults = [e.get("mult", 1) for e in entries]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed spectrum document: {exc}") from exc
    if any(not float(m).is_integer() or m < 1 for m in mults):
        raise InputError("multiplicities must be positive integers")
    return finite_spectrum(values, mults, epsilon=eps, k=k, name="file", check=False)


def dump_spectrum(seq: SpectralSequence, n: int | None = None) -> dict:
    v, m = (seq.head_values, seq.head_mults) if n is None else seq.prefix(n)
    return {
        "epsilon": seq.epsilon,
        "k": seq.k,
        "entries": [{"re": float(a.real), "im": float(a.imag), "mult": int(b)} for a, b in zip(v, m)],
    }


def validate_loaded(seq: SpectralSequence) -> SpectralSequence:
    """Prefix sanity check for user data: nonzero values inside W_eps.

    Admissibility itself is asymptotic and accepted on declaration.
    """
    split = kernel_split(seq)
    split.reduced.check_sector(CHECK_PREFIX)
    return seq


__all__ = [
    "SpectralSequence", "KernelSplit", "finite_spectrum", "integer_spectrum", "circle_spectrum",
    "semilattice_spectrum", "torus_spectrum", "torus_model_expansion", "scale", "shift", "power",
    "kernel_split", "union", "load_spectrum", "dump_spectrum", "validate_loaded",
]
