"""Exception hierarchy shared by every layer of the simulator."""


class QbcError(Exception):
    """Base class for all errors raised by qbclab."""


class DimensionError(QbcError, ValueError):
    """Mismatched or inconsistent dimensions."""


class NotHermitianError(QbcError, ValueError):
    pass


class NotPositiveError(QbcError, ValueError):
    pass


class NormalizationError(QbcError, ValueError):
    pass


class ParameterError(QbcError, ValueError):
    """A protocol/state parameter is outside its valid range."""


class MeasurementError(QbcError, ValueError):
    """Measurement family is incomplete, non-positive or not projective."""


class OwnershipError(QbcError, PermissionError):
    """A party touched a register it does not own."""


class ProtocolOrderError(QbcError):
    """A message arrived in a phase where it is not allowed."""


class DecodeError(QbcError, ValueError):
    """Malformed wire frame."""


class BudgetError(QbcError):
    pass
