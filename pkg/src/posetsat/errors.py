class PosetError(Exception):
    """Base class for errors raised by posetsat."""


class InvalidSpecError(PosetError, ValueError):
    """Arguments violate an operation's preconditions."""


class ResourceLimitError(PosetError):
    """A computation would exceed a configured enumeration limit."""
