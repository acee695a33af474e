"""Small-t asymptotic expansions of theta series and their remainder bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace, field

import numpy as np

from .errors import InputError

_ALPHA_MERGE = 1e-12


@dataclass(frozen=True)
class RemainderBound:
    """Certified bound ``|Theta(t) - sum c_nu t^alpha_nu| <= bound(t)`` for ``0 < t <= t_max``.

    ``power`` holds pieces ``C t^alpha``; ``expo`` holds pieces
    ``C t^alpha exp(-rate/t)`` (exponentially small Poisson-type tails).
    """

    power: tuple[tuple[float, float], ...] = ()
    expo: tuple[tuple[float, float, float], ...] = ()
    t_max: float = 1.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for c, a in self.power:
            out = out + c * t**a
        for c, a, rate in self.expo:
            with np.errstate(over="ignore", divide="ignore"):
                out = out + c * t**a * np.exp(-rate / t)
        return out

    @property
    def leading_alpha(self) -> float:
        """Smallest power exponent, or +inf when only exponential pieces remain."""
        return min((a for c, a in self.power if c != 0.0), default=math.inf)

    def integral_below(self, t: float, sigma: float) -> float:
        """Bound on the integral of u^(sigma-1) * bound(u) over (0, t)."""
        total = 0.0
        for c, a in self.power:
            if c == 0.0:
                continue
            p = a + sigma
            if p <= 0:
                return math.inf
            total += c * t**p / p
        for c, a, rate in self.expo:
            # u^(q) e^(-rate/u) is increasing on (0, rate/|q|) for q < 0; bound by t * max
            q = a + sigma - 1.0
            if q < 0 and t > rate / -q:
                return math.inf
            total += c * t * t**q * math.exp(-rate / t)
        return total

    def __add__(self, other: "RemainderBound") -> "RemainderBound":
        return RemainderBound(self.power + other.power, self.expo + other.expo,
                              min(self.t_max, other.t_max))

    def scaled(self, factor: float) -> "RemainderBound":
        return RemainderBound(tuple((factor * c, a) for c, a in self.power),
                              tuple((factor * c, a, r) for c, a, r in self.expo), self.t_max)

    def to_json(self) -> dict:
        # the file format carries a single power piece
        if self.expo and not self.power:
            a = min(a for _, a, _ in self.expo)
            return {"C": sum(c for c, _, _ in self.expo), "alpha_next": a, "rate": min(r for *_, r in self.expo)}
        a = self.leading_alpha
        return {"C": sum(c for c, _ in self.power), "alpha_next": a if math.isfinite(a) else None}


@dataclass(frozen=True)
class ThetaExpansion:
    """Ordered pairs ``(alpha_nu, c_nu)`` with Theta(t) ~ sum c_nu t^alpha_nu as t -> 0."""

    terms: tuple[tuple[float, complex], ...]
    remainder: RemainderBound = field(default_factory=RemainderBound)

    def __post_init__(self):
        alphas = [a for a, _ in self.terms]
        if any(b <= a for a, b in zip(alphas, alphas[1:])):
            raise InputError("expansion exponents must be strictly increasing")

    @classmethod
    def from_terms(cls, pairs, remainder: RemainderBound | None = None) -> "ThetaExpansion":
        """Sort, merge equal exponents and drop zero coefficients."""
        merged: dict[float, complex] = {}
        keys: list[float] = []
        for a, c in pairs:
            a = float(a)
            for k in keys:
                if abs(k - a) <= _ALPHA_MERGE * max(1.0, abs(a)):
                    merged[k] += complex(c)
                    break
            else:
                keys.append(a)
                merged[a] = complex(c)
        terms = tuple((a, merged[a]) for a in sorted(keys) if merged[a] != 0)
        return cls(terms, remainder or RemainderBound())

    @property
    def valid_to(self) -> int:
        return len(self.terms) - 1

    @property
    def alphas(self) -> list[float]:
        return [a for a, _ in self.terms]

    def partial(self, t, n: int | None = None):
        t = np.asarray(t, dtype=float)
        terms = self.terms if n is None else self.terms[: n + 1]
        out = np.zeros(t.shape, dtype=complex)
        for a, c in terms:
            out = out + c * t**a
        return out

    def next_alpha(self, n: int) -> float:
        """Exponent controlling the remainder after keeping terms 0..n."""
        if n + 1 < len(self.terms):
            return self.terms[n + 1][0]
        return self.remainder.leading_alpha

    def coefficient(self, alpha: float) -> complex:
        for a, c in self.terms:
            if abs(a - alpha) <= _ALPHA_MERGE * max(1.0, abs(alpha)):
                return c
        return 0.0j

    def split(self, alpha_cut: float) -> "ThetaExpansion":
        """Keep terms with alpha <= alpha_cut; the rest is folded into the remainder."""
        keep = [(a, c) for a, c in self.terms if a <= alpha_cut]
        drop = [(abs(c), a) for a, c in self.terms if a > alpha_cut]
        return ThetaExpansion(tuple(keep), self.remainder + RemainderBound(tuple(drop), (), self.remainder.t_max))

    # -- transformations mirroring the sequence algebra --------------------

    def scaled(self, c: float) -> "ThetaExpansion":
        """Expansion of Theta(c t)."""
        rem = self.remainder
        new_rem = RemainderBound(tuple((C * c**a, a) for C, a in rem.power),
                                 tuple((C * c**a, a, r / c) for C, a, r in rem.expo),
                                 rem.t_max / c)
        return ThetaExpansion(tuple((a, v * c**a) for a, v in self.terms), new_rem)

    def shifted(self, lam: complex, alpha_max: float) -> "ThetaExpansion":
        """Expansion of exp(-lam t) Theta(t), kept up to exponent ``alpha_max``."""
        lam = complex(lam)
        pairs = []
        extra_power = []
        for a, c in self.terms:
            n = 0
            while True:
                coef = c * (-lam) ** n / math.factorial(n)
                if a + n > alpha_max:
                    # Taylor remainder of exp(-lam t) after n-1 terms, times |c| t^a
                    extra_power.append((abs(c) * abs(lam) ** n / math.factorial(n), a + n))
                    break
                pairs.append((a + n, coef))
                n += 1
                if lam == 0:
                    break
        # the Mellin split never exceeds 1/|lam|, so the bound is only needed up to there;
        # this keeps the exp(|lam| t) factors below e
        t_max = min(self.remainder.t_max, 1.0 / abs(lam)) if abs(lam) > 1.0 else self.remainder.t_max
        grow = math.exp(max(0.0, -lam.real) * t_max)
        # the Taylor-tail pieces also carry exp(|lam| t); fold the worst case over t <= t_max
        tail_factor = math.exp(abs(lam) * t_max)
        rem = replace(self.remainder.scaled(grow), t_max=t_max) + RemainderBound(
            tuple((C * tail_factor, a) for C, a in extra_power), (), t_max)
        return ThetaExpansion.from_terms(pairs, rem)

    def plus(self, other: "ThetaExpansion") -> "ThetaExpansion":
        return ThetaExpansion.from_terms(list(self.terms) + list(other.terms),
                                         self.remainder + other.remainder)

    def minus_finite(self, values, mults, alpha_max: float) -> "ThetaExpansion":
        """Expansion after removing finitely many entries ``sum m exp(-t a)``."""
        values = np.asarray(values, dtype=complex)
        mults = np.asarray(mults, dtype=float)
        if values.size == 0:
            return self
        kmax = max(0, int(math.floor(alpha_max)))
        pairs = list(self.terms)
        for k in range(kmax + 1):
            pairs.append((float(k), -complex(np.sum(mults * (-values) ** k)) / math.factorial(k)))
        t_max = self.remainder.t_max
        grow = math.exp(max(0.0, float(np.max(-values.real))) * t_max)
        c_next = float(np.sum(np.abs(mults) * np.abs(values) ** (kmax + 1))) / math.factorial(kmax + 1)
        rem = self.remainder + RemainderBound(((c_next * grow, float(kmax + 1)),), (), t_max)
        return ThetaExpansion.from_terms(pairs, rem)

    # -- file format -------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "terms": [{"alpha": a, "c_re": c.real, "c_im": c.imag} for a, c in self.terms],
            "remainder": self.remainder.to_json(),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ThetaExpansion":
        try:
            pairs = [(float(t["alpha"]), complex(float(t["c_re"]), float(t.get("c_im", 0.0))))
                     for t in doc["terms"]]
            rem_doc = doc.get("remainder") or {}
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed expansion document: {exc}") from exc
        rem = RemainderBound()
        if rem_doc.get("alpha_next") is not None:
            if "rate" in rem_doc:
                rem = RemainderBound((), ((float(rem_doc["C"]), float(rem_doc["alpha_next"]), float(rem_doc["rate"])),))
            else:
                rem = RemainderBound(((float(rem_doc["C"]), float(rem_doc["alpha_next"])),))
        alphas = [a for a, _ in pairs]
        if len(set(alphas)) != len(alphas):
            raise InputError("duplicate exponents in expansion")
        return cls(tuple(sorted(pairs, key=lambda p: p[0])), rem)


def finite_expansion(values, mults, alpha_max: float = 4.0) -> ThetaExpansion:
    """Taylor expansion at t = 0 of a finite theta sum."""
    return ThetaExpansion((), RemainderBound()).minus_finite(values, -np.asarray(mults, dtype=float), alpha_max)


# -- closed-form expansions of the bundled models ---------------------------

def _bernoulli(n: int) -> list[float]:
    from fractions import Fraction
    from math import comb

    b = [Fraction(1)]
    for m in range(1, n + 1):
        b.append(-sum(comb(m + 1, k) * b[k] for k in range(m)) / (m + 1))
    return [float(x) for x in b]


def integer_expansion() -> ThetaExpansion:
    """1/(e^t - 1) = sum_n B_n t^(n-1)/n!; alternating tail bounded by the first omitted term."""
    b = _bernoulli(10)
    pairs = [(n - 1.0, b[n] / math.factorial(n)) for n in range(0, 9) if b[n] != 0.0]
    rem = RemainderBound(((abs(b[10]) / math.factorial(10), 9.0),), (), 1.0)
    return ThetaExpansion.from_terms(pairs, rem)


def circle_expansion(length: float, reduced: bool) -> ThetaExpansion:
    """Poisson summation: Theta(t) = length/sqrt(4 pi t) * sum_m exp(-m^2 length^2 / 4t)."""
    c = length / math.sqrt(4.0 * math.pi)
    rate = length * length / 4.0
    rem = RemainderBound((), ((2.0 * c / -math.expm1(-rate), -0.5, rate),), 1.0)
    pairs = [(-0.5, c)] + ([(0.0, -1.0)] if reduced else [])
    return ThetaExpansion.from_terms(pairs, rem)


def rotation_expansion(length: float, order: int, reduced: bool) -> ThetaExpansion:
    """Equivariant theta of the rotation by length/order on the circle (order >= 2)."""
    c = length / math.sqrt(4.0 * math.pi)
    rem = RemainderBound((), ((2.0 * c / -math.expm1(-length * length / 4.0), -0.5,
                               length * length / (4.0 * order * order)),), 1.0)
    pairs = [(0.0, -1.0)] if reduced else []
    return ThetaExpansion.from_terms(pairs, rem)


def torus_expansion(lengths, reduced: bool) -> ThetaExpansion:
    """Product of circle expansions; the cross terms are exponentially small."""
    lengths = [float(x) for x in lengths]
    n = len(lengths)
    cs = [x / math.sqrt(4.0 * math.pi) for x in lengths]
    ratios = [2.0 / -math.expm1(-x * x / 4.0) for x in lengths]
    vol_c = math.prod(cs)
    rate = min(x * x for x in lengths) / 4.0
    C = vol_c * (math.prod(1.0 + r for r in ratios) - 1.0)
    pairs = [(-n / 2.0, vol_c)] + ([(0.0, -1.0)] if reduced else [])
    return ThetaExpansion.from_terms(pairs, RemainderBound((), ((C, -n / 2.0, rate),), 1.0))


def sphere_half_expansion() -> ThetaExpansion:
    """sum_k (2k+1) exp(-t (k+1/2)) = cosh(t/2) / (2 sinh^2(t/2)) = 2/t^2 + 1/12 - 7 t^2/960 + ...

    Laurent coefficients follow from 1/sinh x = sum 2(1 - 2^(2n-1)) B_2n x^(2n-1)/(2n)!.
    """
    b = _bernoulli(12)
    # cosh x / sinh^2 x = -d/dx (1/sinh x), x = t/2, then divide by 2
    pairs = []
    for n in range(0, 5):
        a = 2.0 * (1.0 - 2.0 ** (2 * n - 1)) * b[2 * n] / math.factorial(2 * n)  # coeff of x^(2n-1)
        p = 2 * n - 2  # power of x after differentiation
        coef = -a * (2 * n - 1) / 2.0 * 0.5 ** p
        if coef != 0.0:
            pairs.append((float(p), coef))
    n = 5
    a = 2.0 * (1.0 - 2.0 ** (2 * n - 1)) * b[2 * n] / math.factorial(2 * n)
    nxt = abs(a * (2 * n - 1) / 2.0 * 0.5 ** (2 * n - 2))
    # alternating Laurent tail: first omitted term bounds it for t < 2 pi; margin factor 2
    return ThetaExpansion.from_terms(pairs, RemainderBound(((2.0 * nxt, float(2 * n - 2)),), (), 1.0))
