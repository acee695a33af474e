"""Exception hierarchy.

Input problems (bad parameters, sector violations, poles) map to CLI exit
code 2; numeric nonconvergence maps to exit code 3.
"""


class SpecDetError(Exception):
    """Base class for all library errors."""


class InputError(SpecDetError, ValueError):
    """Invalid argument or data."""


class SectorError(InputError):
    """A value left the admissible sector W_eps."""


class PoleError(InputError):
    """Evaluation point too close to a pole (or a requested residue at a regular point)."""


class CutError(InputError):
    """Spectral parameter on the branch cut (-inf, 0]."""


class PreconditionError(InputError):
    """A mathematical precondition (trace class, norm < 1, ...) does not hold."""


class ConvergenceError(SpecDetError, ArithmeticError):
    """Series, product or quadrature failed to reach the requested tolerance."""
