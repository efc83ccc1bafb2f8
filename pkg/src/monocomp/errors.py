"""Exception hierarchy.

Every error raised for a violated operation contract derives from
:class:`ContractError`; the CLI maps those to exit status 1 and reports the
class name. :class:`ConfigError` is reserved for malformed input (exit 2).
"""


class MonocompError(Exception):
    """Base class for all package errors."""


class ContractError(MonocompError):
    """An operation was called outside its contract, or the contract failed."""


class ConfigError(MonocompError):
    """A configuration value is missing, malformed or out of range."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field

    def __str__(self):
        msg = super().__str__()
        return f"{self.field}: {msg}" if self.field else msg


# scaffold
class ArityMismatch(ContractError):
    pass


class DepthUnsupported(ContractError):
    pass


class NotAPredecessor(ContractError):
    pass


# schemes
class SampleTooLarge(ContractError):
    pass


class InvalidSideInfo(ContractError):
    pass


class CapExceeded(ContractError):
    pass


class SampleNotTabulated(ContractError):
    pass


# transforms
class FamilyGap(ContractError):
    pass


class NoFreshElement(ContractError):
    pass


class ContractViolated(ContractError):
    pass


# emx
class EmptyClass(ContractError):
    pass


class NotInClass(ContractError):
    pass


class NoDominatingConcept(ContractError):
    pass


class NotUnionBounded(ContractError):
    pass


class SizeBoundExceeded(ContractError):
    pass


# search
class RNotP(ContractError):
    pass
