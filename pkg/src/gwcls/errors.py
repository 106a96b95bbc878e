"""Exception hierarchy shared by all gwcls modules."""


class GWCLSError(Exception):
    """Base class for every error raised by gwcls."""


class InvalidLaw(GWCLSError, ValueError):
    pass


class ModelError(GWCLSError, ValueError):
    """The three laws do not define an admissible model."""


class NotDoublySymmetric(ModelError):
    pass


class NotCritical(ModelError):
    pass


class NotPositivelyRegular(ModelError):
    pass


class ZeroImmigrationMean(ModelError):
    pass


class DenominatorZero(GWCLSError, ZeroDivisionError):
    """The sample lies outside the set on which an estimator exists."""


class SingularNormalMatrix(GWCLSError, ArithmeticError):
    pass


class DegenerateDenominator(GWCLSError, ZeroDivisionError):
    pass


class WrongRegime(GWCLSError, ValueError):
    pass


class EnumerationTooLarge(GWCLSError, ValueError):
    pass


class EmptySample(GWCLSError, ValueError):
    pass


class ConfigError(GWCLSError, ValueError):
    pass
