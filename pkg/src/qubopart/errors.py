"""Exception types shared across the package."""


class ParseError(ValueError):
    """A text source could not be parsed; message carries the line number."""


class DomainError(ValueError):
    """Input violates a documented precondition (weights, sizes, ranges)."""


class FeasibilityError(ValueError):
    """A bit vector does not encode a valid community assignment."""
