"""Exception hierarchy shared by the cipher, the attacks and the CLI."""


class ChaosCrackError(Exception):
    """Base class for every error raised by this package."""


class DivergenceError(ChaosCrackError, ArithmeticError):
    """The chaotic trajectory left the configured magnitude bound."""


class InsufficientSamplesError(ChaosCrackError, ValueError):
    pass


class DimensionMismatchError(ChaosCrackError, ValueError):
    """A map or image has a size the operation cannot address."""


class CoverageError(ChaosCrackError):
    """Some substitution bytes needed for the operation were never recovered."""


class NonConformingOracleError(ChaosCrackError):
    """Oracle answers do not follow the permutation/XOR structure an attack relies on."""


class AmbiguityError(ChaosCrackError):
    pass


class InconsistencyError(ChaosCrackError):
    """Recovered material contradicts itself (e.g. two values for one keystream byte)."""


class PgmFormatError(ChaosCrackError, ValueError):
    pass


class MalformedHeaderError(PgmFormatError):
    pass


class WrongMaxvalError(PgmFormatError):
    pass


class TruncatedPayloadError(PgmFormatError):
    pass


class KeyFileError(ChaosCrackError, ValueError):
    """An equivalent-key file could not be parsed or describes a non-bijective map."""


class OracleTimeoutError(ChaosCrackError, TimeoutError):
    pass


class MalformedAnswerError(ChaosCrackError):
    pass
