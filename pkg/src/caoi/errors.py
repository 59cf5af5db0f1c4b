"""Exception types shared across the toolkit."""


class CaoiError(Exception):
    """Base class for every toolkit error."""


class DomainError(CaoiError, ValueError):
    """An input lies outside the mathematical domain of an operation."""


class MissingConstraint(CaoiError, ValueError):
    """A bound was requested but its defining constraint is absent."""


class Infeasible(CaoiError):
    """No admissible operating point satisfies the active constraints."""


class ConfigError(CaoiError, ValueError):
    """A simulation configuration violates its invariants."""


class ParseError(CaoiError, ValueError):
    """Malformed input data. Messages carry the offending line number."""


class ValidationError(CaoiError, ValueError):
    """Parseable input that breaks a semantic invariant."""
