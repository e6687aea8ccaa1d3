"""Numerical machinery for random sparse polynomial systems.

The modules build on each other in this order:

- `toricond.logic.supports`: exponent sets, exact hulls and mixed volumes.
- `toricond.logic.kahler`: potential, momentum map, Hessian and Veronese maps.
- `toricond.logic.randsys`: Gaussian ensembles, systems, regions and the
  multiprojective distance.
- `toricond.logic.conditioning`: condition matrices, distances to the
  discriminant, condition bounds and the mixed dilation.
- `toricond.logic.quadrature`: adaptive Gauss–Legendre quadrature over boxes.
- `toricond.logic.volume`: mixed densities, expected root counts and the
  pushforward of the toric volume.
- `toricond.logic.rootfind`: all roots of univariate and bivariate systems.
- `toricond.logic.experiments`: Monte Carlo estimators and bound audits.

Errors raised by the package derive from `ToricondError`.
"""
from typing import Optional
from enum import IntEnum, auto as enum_auto


class Field(IntEnum):
    """Coefficient field of an ensemble."""

    COMPLEX = enum_auto()
    """Complex Gaussian coefficients, roots counted in the complex torus."""
    REAL = enum_auto()
    """Real Gaussian coefficients, roots counted in the positive orthant."""

    @classmethod
    def parse(cls, name: "str | Field") -> "Field":
        """Get a field from its (case insensitive) name."""
        if isinstance(name, Field):
            return name
        try:
            return cls[str(name).upper()]
        except KeyError:
            raise InputError(f'Unknown field "{name}", expected "complex" or "real"')


class ToricondError(Exception):
    """Base class of errors raised by the package."""


class InputError(ToricondError, ValueError):
    """An input violates the preconditions of an operation."""


class ConvergenceError(ToricondError, ArithmeticError):
    """A numerical procedure did not reach its tolerance."""

    def __init__(self, message: str, residual: Optional[float] = None):
        """Initialize the class.

        Args:
            message: Description of the failure.
            residual: The error estimate or residual at the time of failure.
        """
        if residual is not None:
            message = f"{message} (residual {residual:.3e})"
        super().__init__(message)
        self.residual = residual


class DegenerateSystemError(ToricondError):
    """A system is too close to degenerate for reliable root finding."""


class ConfigError(InputError):
    """A run configuration violates its schema."""

    def __init__(self, message: str, path: str = ""):
        """Initialize the class.

        Args:
            message: Description of the violation.
            path: Dotted path of the offending entry, e.g. "ensemble.covariances[1]".
        """
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


__pdoc__ = {
    "Field.parse": True,
}
