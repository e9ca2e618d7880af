"""Exception hierarchy shared by all fieldscan modules."""


class FieldScanError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(FieldScanError, ValueError):
    """Lattice geometry mismatch: box outside the window, bad axis count, index overflow."""


class ShapeError(FieldScanError, ValueError):
    """Per-site vector has the wrong number of components."""


class FormatError(FieldScanError, ValueError):
    """File does not parse as the expected on-disk format."""


class TruncationError(FormatError):
    """File header promises more payload than the file contains."""


class DataError(FieldScanError, ValueError):
    """Field payload contains non-finite values."""


class EmptyScanSpaceError(FieldScanError, ValueError):
    """The window family is empty; scanning cannot proceed."""


class DegenerateWindowError(FieldScanError, ValueError):
    """Window volume is 0 or fills the whole observation window, leaving no complement."""


class DomainError(FieldScanError, ValueError):
    """Numeric argument outside its valid domain."""


class ConvergenceError(FieldScanError, RuntimeError):
    """Iterative solver failed to bracket or converge."""
