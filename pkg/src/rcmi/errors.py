"""Exception hierarchy shared by every module of the package.

Errors split into two families. ``InputError`` subclasses signal that the
caller supplied something malformed (bad layout, bad partition, out-of-range
order parameter); the CLI maps them to exit code 2. ``NumericalError``
subclasses signal that a well-formed computation could not be completed
reliably; the CLI maps them to exit code 3.
"""

from __future__ import annotations


class RCMIError(Exception):
    """Base class for all package errors."""


class InputError(RCMIError, ValueError):
    """The caller supplied invalid input."""


class NumericalError(RCMIError, ArithmeticError):
    """A computation failed for numerical reasons."""


# --- layouts and operators -------------------------------------------------
class LabelCollision(InputError):
    """Two operands of a tensor product share a subsystem label."""


class UnknownSystem(InputError):
    """A subsystem label is not present in the layout."""


class DimMismatch(InputError):
    """Dimensions of operands or subsystems are inconsistent."""


class LayoutMismatch(InputError):
    """Two operators that must share a layout do not."""


class NonHermitian(InputError):
    """An operator deviates from Hermiticity beyond ``herm_tol``."""


class NotPSD(InputError):
    """An operator has an eigenvalue below ``-psd_tol``."""


class ZeroOperator(InputError):
    """A divergence was requested with a vanishing first argument."""


# --- states and channels ---------------------------------------------------
class BadRank(InputError):
    """Requested rank is outside ``[1, total_dim]``."""


class BadDims(InputError):
    """Channel dimensions cannot describe an isometry."""


class BadDistribution(InputError):
    """A probability vector or array is negative or does not sum to one."""


class MarginalMismatch(InputError):
    """A supplied marginal is inconsistent with the joint operator."""


class InvariantViolation(InputError):
    """An object fails its type invariants (trace, positivity, completeness)."""


# --- entropic quantities ---------------------------------------------------
class BadPartition(InputError):
    """Subsystem groups overlap, are empty, or reference unknown labels."""


class OutOfRange(InputError):
    """A scalar parameter lies outside its admissible domain."""


class AlphaEqualsOne(OutOfRange):
    """The Renyi order is too close to one for the requested formula."""


class GammaZero(OutOfRange):
    """The derivative numerator is undefined at ``gamma = 0``."""


class OrthogonalityViolation(NumericalError):
    """The trace defining a Renyi quantity vanishes (orthogonal supports)."""


class SupportViolation(NumericalError):
    """A support inclusion required by the quantity does not hold."""


class ConvergenceFailure(NumericalError):
    """An eigen- or singular-value solver failed to converge."""


# --- CLI -------------------------------------------------------------------
class ParseError(InputError):
    """A state or configuration file could not be parsed."""


class ConfigError(InputError):
    """A command-line or file configuration is invalid."""


class UnknownSuite(InputError):
    """The requested verification suite does not exist."""
