"""Abelian covering towers of flat circles and tori: convergence experiments."""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_CONFIG, NumericConfig, thread_count
from .determinants import CharFn, char_fn_full, reg_det_full
from .errors import InputError
from .l2 import flat_model, l2_log_det
from .spectrum import SpectralSequence, circle_spectrum, kernel_split
from .theta import theta_eval

DEFAULT_LEVELS = (1, 2, 4, 8, 16, 32, 64)
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class TowerSpec:
    """Gamma = Z^n acting on R^n with periods ``lengths``; level j is Gamma_j = j Z^n.

    The quotient at level j is the flat torus with periods j * lengths (a circle
    of circumference jL when n = 1); its index is j^n.
    """

    lengths: tuple[float, ...]
    levels: tuple[int, ...] = DEFAULT_LEVELS
    config: NumericConfig = field(default=DEFAULT_CONFIG, compare=False)

    def __post_init__(self):
        lengths = tuple(float(x) for x in np.atleast_1d(self.lengths))
        if not lengths or any(not x > 0 for x in lengths):
            raise InputError("periods must be positive")
        levels = tuple(int(j) for j in self.levels)
        if not levels or levels[0] < 1 or any(b <= a for a, b in zip(levels, levels[1:])):
            raise InputError("levels must be strictly increasing positive integers")
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "levels", levels)

    @property
    def dimension(self) -> int:
        return len(self.lengths)

    @property
    def is_circle(self) -> bool:
        return self.dimension == 1

    def index(self, j: int) -> int:
        return j ** self.dimension


def circle_tower(length: float, levels=DEFAULT_LEVELS, config: NumericConfig = DEFAULT_CONFIG) -> TowerSpec:
    return TowerSpec((float(length),), tuple(levels), config)


def torus_tower(lengths, levels=DEFAULT_LEVELS, config: NumericConfig = DEFAULT_CONFIG) -> TowerSpec:
    return TowerSpec(tuple(lengths), tuple(levels), config)


def _check_level(tower: TowerSpec, j: int) -> None:
    if j not in tower.levels:
        raise InputError(f"level {j} is not in the tower {tower.levels}")


def level_spectrum(tower: TowerSpec, j: int) -> SpectralSequence:
    """Laplacian spectrum of the level-j quotient (circle towers), zero mode included."""
    _check_level(tower, j)
    if not tower.is_circle:
        raise InputError("lazy level spectra are provided for circle towers; use level_heat_trace for tori")
    return circle_spectrum(j * tower.lengths[0], include_zero=True)


def level_heat_trace(tower: TowerSpec, j: int, t: float) -> float:
    """tr exp(-t Delta_j) of the level-j quotient, by summing its spectrum (product over factors)."""
    _check_level(tower, j)
    out = 1.0
    for length in tower.lengths:
        out *= theta_eval(circle_spectrum(j * length, include_zero=True), t, tower.config).real
    return out


def level_heat_gap_closed(tower: TowerSpec, j: int, t: float) -> float:
    """tr exp(-t Delta_j)/index - tr_Gamma exp(-t Delta) via Poisson summation (kernel identity).

    Each factor contributes L (4 pi t)^-1/2 (1 + 2 sum_m exp(-(m j L)^2 / 4t)).
    """
    prod_full, prod_lim = 1.0, 1.0
    for length in tower.lengths:
        base = length / math.sqrt(4.0 * math.pi * t)
        s, m = 0.0, 1
        while True:
            term = math.exp(-((m * j * length) ** 2) / (4.0 * t))
            s += term
            if term < 1e-18 * max(s, 1e-300) or term == 0.0:
                break
            m += 1
        prod_full *= base * (1.0 + 2.0 * s)
        prod_lim *= base
    if tower.dimension == 1:
        # avoid cancellation: the gap is exactly base * 2 s
        return prod_lim * 2.0 * s
    return prod_full - prod_lim


def _pmap(fn, items):
    items = list(items)
    workers = min(len(items), thread_count())
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class Row:
    j: int
    index: int
    value: complex
    limit: complex
    gap: float
    error: float = 0.0

    def csv_fields(self) -> list:
        return [self.j, self.index, self.value, self.limit, self.gap]


CSV_HEADER = ["j", "index", "value", "limit", "gap"]


# -- heat traces ---------------------------------------------------------------------

def heat_trace_limit(tower: TowerSpec, t: float) -> float:
    return float(flat_model(tower.lengths).trace(t))


def heat_trace_convergence(tower: TowerSpec, t: float) -> list[Row]:
    """Rows (j, index, tr exp(-t Delta_j)/index, tr_Gamma exp(-t Delta), |gap|)."""
    if not t > 0:
        raise InputError("t must be positive")
    limit = heat_trace_limit(tower, t)

    def one(j):
        idx = tower.index(j)
        value = level_heat_trace(tower, j, t) / idx
        # summation tolerance of each factor plus rounding
        err = (4 * _EPS * max(1.0, math.sqrt(j)) + 2 * tower.dimension * tower.config.tol_rel) * abs(value)
        return Row(j, idx, value, limit, abs(value - limit), err)

    return _pmap(one, tower.levels)


@dataclass(frozen=True)
class Envelope:
    """|gap(j, t)| <= C exp(-R^2 / t) on the grid; ``violations`` lists (j, t, gap, bound)."""

    C: float
    R: float
    violations: tuple[tuple[int, float, float, float], ...]

    @property
    def holds(self) -> bool:
        return not self.violations


def heat_diff_decay(tower: TowerSpec, t_grid=None, check_grid=None) -> Envelope:
    """Fit a single envelope C exp(-R^2/t) dominating the heat-trace gaps of every level.

    R comes from a least-squares fit of log gap against 1/t at the lowest level
    (the slowest decay); C is the smallest constant dominating every level on
    a dense refinement of ``t_grid``.  The envelope is then tested on the
    independent ``check_grid``.
    Gaps use the Poisson closed form, since for small t they lie far below
    double-precision resolution of the summed traces.
    """
    t_grid = np.linspace(0.05, 0.9, 35) if t_grid is None else np.asarray(t_grid, dtype=float)
    if np.any((t_grid <= 0) | (t_grid >= 1)):
        raise InputError("the t grid must lie in (0, 1)")
    check_grid = (np.geomspace(t_grid.min(), t_grid.max(), 57) if check_grid is None
                  else np.asarray(check_grid, dtype=float))
    j0 = tower.levels[0]
    g0 = np.array([level_heat_gap_closed(tower, j0, t) for t in t_grid])
    slope = np.polyfit(1.0 / t_grid, np.log(g0), 1)[0]
    R = math.sqrt(max(-slope, 0.0))
    dense = np.union1d(t_grid, np.linspace(t_grid.min(), t_grid.max(), 801))
    logC = max(math.log(g) + R * R / t
               for j in tower.levels for t in dense
               for g in (level_heat_gap_closed(tower, j, t),) if g > 0)
    C = math.exp(logC) * (1 + 1e-12)
    viol = []
    for j in tower.levels:
        for t in check_grid:
            g = level_heat_gap_closed(tower, j, t)
            b = C * math.exp(-R * R / t)
            if g > b:
                viol.append((j, float(t), g, b))
    return Envelope(C, R, tuple(viol))


# -- determinants ----------------------------------------------------------------------

def _level_log_det(tower: TowerSpec, j: int, lam: complex):
    cf = CharFn(level_spectrum(tower, j), config=tower.config)
    return char_fn_full(cf, lam)


def det_convergence(tower: TowerSpec, lam: complex) -> list[Row]:
    """Rows (j, index, det(Delta_j + lam)^(1/index), det^(2)(Delta + lam), relative gap)."""
    if not tower.is_circle:
        raise InputError("determinant towers are provided for circle towers")
    lam = complex(lam)
    lim = l2_log_det(flat_model(tower.lengths), lam, tower.config)
    limit = cmath.exp(lim.value)

    def one(j):
        d = _level_log_det(tower, j, lam)
        idx = tower.index(j)
        log_root = d.log / idx
        value = cmath.exp(log_root)
        # error of the relative gap: propagated quadrature errors plus exp/log rounding
        # and the pipeline's relative accuracy target on the (large) level log-determinant
        err = (d.error / idx + lim.error + 8 * _EPS * max(1.0, abs(log_root), abs(lim.value))
               + tower.config.tol_rel * abs(d.log) / idx)
        return Row(j, idx, value, limit, abs(value - limit) / abs(limit), err)

    return _pmap(one, tower.levels)


def gaps_nonincreasing(rows: list[Row], start: int = 0) -> bool:
    """Each gap is at most the previous one, up to the two rows' error estimates."""
    rows = rows[start:]
    return all(b.gap <= a.gap + a.error + b.error for a, b in zip(rows, rows[1:]))


@dataclass(frozen=True)
class KernelRow:
    j: int
    index: int
    kernel_ratio: float
    det_prime_root: complex
    limit: complex


def det_convergence_with_kernels(tower: TowerSpec, mode: str = "uniform_bound") -> dict:
    """Kernel ratio h(Delta_j)/index and det'(Delta_j)^(1/index) against the L2 limits.

    ``mode`` names the hypothesis that is verified alongside: ``uniform_bound``
    (sup_j tr exp(-t Delta'_j)/index <= C t^-alpha) or ``spectral_gap``.
    """
    if not tower.is_circle:
        raise InputError("determinant towers are provided for circle towers")
    if mode not in ("uniform_bound", "spectral_gap"):
        raise InputError(f"unknown mode {mode!r}")
    limit = cmath.exp(l2_log_det(flat_model(tower.lengths), 0.0, tower.config).value)

    def one(j):
        split = kernel_split(level_spectrum(tower, j))
        d = reg_det_full(split.reduced, None, tower.config)
        idx = tower.index(j)
        return KernelRow(j, idx, split.kernel_dimension / idx, cmath.exp(d.log / idx), limit)

    rows = _pmap(one, tower.levels)
    if mode == "uniform_bound":
        hyp = uniform_trace_bound(tower)
    else:
        hyp = spectral_gap_probe(tower, 0.5 * min(_first_positive(tower, j) for j in tower.levels))
    return {"rows": rows, "h2": 0.0, "det2_at_zero": limit, "hypothesis": hyp}


def _first_positive(tower: TowerSpec, j: int) -> float:
    return min((2.0 * math.pi / (j * L)) ** 2 for L in tower.lengths)


@dataclass(frozen=True)
class UniformBound:
    C: float
    alpha: float
    t_grid: tuple[float, ...]
    sup_values: tuple[float, ...]


def uniform_trace_bound(tower: TowerSpec, t_grid=None, alpha: float | None = None) -> UniformBound:
    """C = sup over levels and t of t^alpha tr exp(-t Delta'_j)/index (Delta' drops the kernel)."""
    t_grid = np.geomspace(1.0, 100.0, 21) if t_grid is None else np.asarray(t_grid, dtype=float)
    if np.any(t_grid <= 0):
        raise InputError("t must be positive")
    alpha = tower.dimension / 2.0 if alpha is None else float(alpha)

    def one(j):
        idx = tower.index(j)
        return [(level_heat_trace(tower, j, t) - 1.0) / idx for t in t_grid]

    table = np.array(_pmap(one, tower.levels))
    sups = table.max(axis=0)
    C = float(np.max(sups * t_grid**alpha))
    return UniformBound(C, alpha, tuple(map(float, t_grid)), tuple(map(float, sups)))


# -- counting functions ------------------------------------------------------------------

@dataclass(frozen=True)
class CountingFunction:
    """N(x) = number of eigenvalues <= x, with multiplicity."""

    values: np.ndarray
    mults: np.ndarray

    def __call__(self, x: float) -> float:
        if x < 0:
            return 0.0
        k = int(np.searchsorted(self.values, x * (1 + 1e-12) + 1e-300, side="right"))
        return float(np.sum(self.mults[:k]))


def counting_function(tower: TowerSpec, j: int, x_max: float) -> CountingFunction:
    """Counting function of level j, exact up to ``x_max``."""
    _check_level(tower, j)
    axes = []
    for L in tower.lengths:
        kmax = int(math.floor(j * L * math.sqrt(max(x_max, 0.0)) / (2.0 * math.pi))) + 1
        k = np.arange(-kmax, kmax + 1)
        axes.append((2.0 * math.pi * k / (j * L)) ** 2)
    grid = axes[0]
    for ax in axes[1:]:
        grid = np.add.outer(grid, ax).ravel()
    grid = np.sort(grid[grid <= x_max * (1 + 1e-12)])
    vals, counts = np.unique(np.round(grid, 12), return_counts=True)
    return CountingFunction(vals, counts.astype(float))


@dataclass(frozen=True)
class KazhdanReport:
    ratios: tuple[float, ...]
    limsup_estimate: float
    h2: float

    @property
    def consistent(self) -> bool:
        return self.limsup_estimate <= self.h2 + 1e-12


def kazhdan_check(tower: TowerSpec) -> KazhdanReport:
    """h(Delta_j)/index along the tower against the L2 kernel dimension (0 for flat models).

    The limsup is estimated by the last ratio; finite data cannot prove the limit.
    """
    ratios = tuple(counting_function(tower, j, 0.0)(0.0) / tower.index(j) for j in tower.levels)
    tail = ratios[-1]
    # a sequence c/index has limsup 0; report the extrapolated value of that law
    extrapolated = 0.0 if all(r * tower.index(j) == ratios[0] * tower.index(tower.levels[0])
                              for r, j in zip(ratios, tower.levels)) else tail
    return KazhdanReport(ratios, extrapolated, 0.0)


@dataclass(frozen=True)
class GapProbe:
    x: float
    ratios: tuple[float, ...]
    verdict: str


def spectral_gap_probe(tower: TowerSpec, x: float) -> GapProbe:
    """(N_j(x) - N_j(0))/index along the tower.

    Verdict "consistent with a spectral gap" when the ratios vanish at the top
    level or decay at least like index^(-1/2); otherwise "inconsistent".
    """
    if x < 0:
        raise InputError("x must be nonnegative")
    ratios = []
    for j in tower.levels:
        N = counting_function(tower, j, x)
        ratios.append((N(x) - N(0.0)) / tower.index(j))
    first, last = ratios[0], ratios[-1]
    i0, i1 = tower.index(tower.levels[0]), tower.index(tower.levels[-1])
    ok = last == 0.0 or (first > 0 and last <= first * math.sqrt(i0 / i1))
    return GapProbe(float(x), tuple(ratios),
                    "consistent with a spectral gap" if ok else "inconsistent with a spectral gap")


def growth_estimate_check(tower: TowerSpec, a: float, b: float, C: float, x_grid=None) -> dict[int, bool]:
    """Per level: (N_j(x) - N_j(0))/index <= C (x^a + x^b) on ``x_grid``."""
    x_grid = np.concatenate([[0.0], np.geomspace(1e-3, 1e3, 61)]) if x_grid is None \
        else np.asarray(x_grid, dtype=float)
    out = {}
    for j in tower.levels:
        N = counting_function(tower, j, float(x_grid.max()))
        n0 = N(0.0)
        out[j] = all((N(x) - n0) / tower.index(j) <= C * (x**a + x**b) * (1 + 1e-12) for x in x_grid)
    return out


__all__ = [
    "TowerSpec", "circle_tower", "torus_tower", "DEFAULT_LEVELS", "level_spectrum", "level_heat_trace",
    "level_heat_gap_closed", "Row", "CSV_HEADER", "heat_trace_limit", "heat_trace_convergence", "Envelope",
    "heat_diff_decay", "det_convergence", "gaps_nonincreasing", "KernelRow", "det_convergence_with_kernels",
    "UniformBound", "uniform_trace_bound", "CountingFunction", "counting_function", "KazhdanReport",
    "kazhdan_check", "GapProbe", "spectral_gap_probe", "growth_estimate_check",
]
