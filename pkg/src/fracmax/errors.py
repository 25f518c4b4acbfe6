"""Exception taxonomy shared across the package.

The CLI maps these onto distinct exit codes, so library code should raise
the most specific class that applies.
"""

from __future__ import annotations


class FracmaxError(Exception):
    """Base class for all package-specific errors."""


class SpaceFormatError(FracmaxError, ValueError):
    """Malformed space data: bad matrix shape, metric violation, bad weights."""


class EmptyBallError(FracmaxError, ValueError):
    """An average was requested over an empty point set."""


class ParameterWindowError(FracmaxError, ValueError):
    """A smoothness or exponent parameter lies outside its admissible window."""


class AnnulusRangeError(FracmaxError, ValueError):
    """A pair's dyadic annulus index falls outside a sequence's level range."""


class SolverError(FracmaxError, RuntimeError):
    """A convex solve did not reach an acceptable status."""


class InputError(FracmaxError, ValueError):
    """Malformed user input outside the space format (CSV, config, ids)."""
