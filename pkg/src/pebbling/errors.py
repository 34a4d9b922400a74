"""Exception types shared across the package."""


class PebblingError(Exception):
    """Base class for all errors raised by this package."""


class StructureError(PebblingError, ValueError):
    """A structure, signature or element set is malformed."""


class SignatureMismatch(StructureError):
    """Two structures were combined over different signatures."""


class SizeCapExceeded(PebblingError):
    """A materialization would exceed the configured size cap."""


class LawViolation(PebblingError, ValueError):
    """A coalgebra, traversal or play fails one of its defining laws."""
