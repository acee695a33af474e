"""Zeta-regularized, L2 and equivariant determinants for explicit spectra and model geometries."""

from types import ModuleType as _ModuleType

from .config import DEFAULT_CONFIG, NumericConfig
from .determinants import (
    AsymptoticSeries,
    CharFn,
    char_fn_asymptotic,
    char_fn_eval,
    fredholm_det,
    fredholm_det_inverse,
    fredholm_ratio_check,
    reduced_det,
    reg_det,
)
from .errors import ConvergenceError, CutError, InputError, PoleError, PreconditionError, SectorError, SpecDetError
from .expansion import RemainderBound, ThetaExpansion
from .kernels import BACKEND
from .l2 import (
    equivariant_det,
    equivariant_l2_det,
    equivariant_l2_trace,
    equivariant_zeta,
    flat_model,
    gns_estimate,
    l2_det,
    l2_zeta_eval,
    line_model,
    rotation_spectrum,
)
from .spectrum import (
    SpectralSequence,
    circle_spectrum,
    finite_spectrum,
    integer_spectrum,
    kernel_split,
    load_spectrum,
    power,
    scale,
    semilattice_spectrum,
    shift,
    torus_spectrum,
    union,
)
from .surface import LengthSpectrum, geodesic_product, identity_term, load_length_spectrum, surface_det
from .theta import theta_eval
from .tower import circle_tower, det_convergence, heat_trace_convergence, torus_tower
from .zeta import ZetaEvaluator, residue_at, residue_contour, zeta_deriv_at_zero, zeta_eval, zeta_value_at_zero

__version__ = "0.1.0"

__all__ = sorted(n for n, v in globals().items() if not n.startswith("_") and not isinstance(v, _ModuleType))
