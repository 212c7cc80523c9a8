"""Exception types raised across the package."""


class SimlabError(Exception):
    """Base class for every error raised by simlab."""


class NonFinite(SimlabError, ValueError):
    pass


class NotSquare(SimlabError, ValueError):
    pass


class DimensionMismatch(SimlabError, ValueError):
    pass


class NotHermitian(SimlabError, ValueError):
    pass


class NotPositive(SimlabError, ValueError):
    pass


class Unstable(SimlabError, ArithmeticError):
    pass


class SingularPencil(SimlabError, ArithmeticError):
    pass


class RadiusNotLessThanOne(SimlabError, ValueError):
    pass


class RadiusBelowOne(SimlabError, ValueError):
    pass


class RateBelowAbscissa(SimlabError, ValueError):
    pass


class BudgetExceeded(SimlabError, RuntimeError):
    """The barrier search ran out of iterations before deciding feasibility."""


class ZeroPolynomial(SimlabError, ValueError):
    pass


class EmptySample(SimlabError, ValueError):
    pass


class ZeroFactor(SimlabError, ValueError):
    pass


class NoPeripheralVector(SimlabError, ValueError):
    pass


class NotGridAligned(SimlabError, ValueError):
    pass


class CertificateInvalid(SimlabError, ValueError):
    pass


class NonCommuting(SimlabError, ValueError):
    pass


class BadParams(SimlabError, ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class NegativeTime(SimlabError, ValueError):
    pass


class OneInSpectrum(SimlabError, ArithmeticError):
    pass


class ConfigError(SimlabError, ValueError):
    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.field = field


class ParseError(SimlabError, ValueError):
    def __init__(self, message, line=None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class UnknownSuite(SimlabError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown suite"


class IoError(SimlabError, OSError):
    """An output file could not be written, or would be overwritten without permission."""
