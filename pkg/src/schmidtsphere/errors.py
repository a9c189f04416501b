"""Exception hierarchy.

Validation problems derive from ``ValueError`` and numerical breakdowns
(non-regular points in lifts) from ``ArithmeticError`` so the CLI can map
them to distinct exit codes.
"""


class SchmidtError(Exception):
    """Base class for all package errors."""


class ConstraintError(SchmidtError, ValueError):
    """Input violates a symmetry / membership constraint."""


class NormalizationError(ConstraintError):
    """State or Schmidt point is not unit norm."""


class UnitarityError(ConstraintError):
    """Matrix expected to be unitary is not."""


class DimensionError(SchmidtError, ValueError):
    pass


class KindError(SchmidtError, ValueError):
    """Operation applied to the wrong particle statistics."""


class InputError(SchmidtError, ValueError):
    """Non-finite or otherwise malformed numerical input."""


class EnumerationSizeError(SchmidtError, ValueError):
    pass


class SingularityError(SchmidtError, ArithmeticError):
    """A point is not regular where regularity is required.

    ``gap`` holds the offending minimal gap (or minimal value) so callers can
    report how close to the singular set the computation got.
    """

    def __init__(self, message, gap=None, indices=()):
        super().__init__(message)
        self.gap = gap
        self.indices = tuple(indices)


class ConfigError(SchmidtError, ValueError):
    """Invalid configuration file; ``errors`` lists every failure found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
