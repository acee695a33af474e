from __future__ import annotations

import os
from dataclasses import dataclass, replace

from .errors import InputError

ZERO_THRESHOLD = 1e-12


@dataclass(frozen=True)
class NumericConfig:
    """Tolerances shared by every continuation and truncation.

    tol_rel / tol_abs
        target relative / absolute accuracy of sums and quadratures.
    quad_panels_max
        ceiling on Gauss-Legendre panels per integral before giving up.
    upper_cutoff_T
        hard ceiling on the upper limit of Mellin integrals.
    pole_margin
        minimal distance between an evaluation point and a pole.
    max_terms
        ceiling on eigenvalue entries materialised for one theta evaluation.
    """

    tol_rel: float = 1e-12
    tol_abs: float = 1e-14
    quad_panels_max: int = 4096
    upper_cutoff_T: float = 1e7
    pole_margin: float = 1e-6
    max_terms: int = 4_000_000

    def __post_init__(self):
        if not (self.tol_rel > 0 and self.tol_abs > 0):
            raise InputError("tolerances must be positive")
        if not self.pole_margin > 0:
            raise InputError("pole_margin must be positive")
        if self.quad_panels_max < 1 or self.max_terms < 1:
            raise InputError("panel and term budgets must be positive")

    def with_overrides(self, **kw) -> "NumericConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


DEFAULT_CONFIG = NumericConfig()


def thread_count() -> int:
    """Worker count from SPECDET_THREADS (0 or unset means one per CPU)."""
    raw = os.environ.get("SPECDET_THREADS", "0")
    try:
        n = int(raw)
    except ValueError as exc:
        raise InputError(f"SPECDET_THREADS must be an integer, got {raw!r}") from exc
    if n < 0:
        raise InputError("SPECDET_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)
