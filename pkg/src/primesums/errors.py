"""Exception hierarchy shared by all modules."""


class PrimeSumsError(Exception):
    """Base class for errors raised by this package."""


class ConstructionError(PrimeSumsError):
    """Invalid field or polynomial construction (e.g. reducible modulus)."""


class FieldMismatchError(PrimeSumsError):
    """Operands belong to different fields."""


class HorizonError(PrimeSumsError):
    """A series operation cannot be justified at the requested precision."""


class CacheMismatchError(PrimeSumsError):
    """A cache entry does not match the requesting computation."""


class BudgetError(PrimeSumsError):
    """A computation exceeds the configured enumeration/memory budget."""


class UsageError(PrimeSumsError):
    """Invalid parameters at the CLI / manifest level."""
