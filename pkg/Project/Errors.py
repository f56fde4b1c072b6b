from enum import Enum


class Errors(Enum):
    """
        Exit codes of the belltide command line

        OK: everything computed and written

        VERIFICATION_FAILED: a verify suite failed

        IO_ERROR: unreadable config, invalid flags or unwritable output

        NO_CROSSING: the requested level is not bracketed by the sweep range
    """
    OK = 0
    VERIFICATION_FAILED = 1
    IO_ERROR = 2
    NO_CROSSING = 3


class BelltideError(Exception):
    pass


class DimensionError(BelltideError, ValueError):
    pass


class NormalizationError(BelltideError, ValueError):
    pass


class NotUnitaryError(BelltideError, ValueError):
    pass


class NotHermitianError(BelltideError, ValueError):
    pass


class NotBivalentError(BelltideError, ValueError):
    pass


class SubsystemError(BelltideError, ValueError):
    pass


class IncompleteMeasurementError(BelltideError, ValueError):
    pass


class ParameterRangeError(BelltideError, ValueError):
    pass


class OutputError(BelltideError, OSError):
    pass
