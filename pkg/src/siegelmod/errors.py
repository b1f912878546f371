"""Exception hierarchy shared by all modules."""


class SiegelModError(Exception):
    """Base class; every error raised by the package derives from it."""


class ValidationError(SiegelModError, ValueError):
    pass


class NotSymmetric(ValidationError):
    pass


class OddDiagonal(ValidationError):
    pass


class Singular(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class EvenDenominator(ValidationError):
    pass


class EvenInput(ValidationError):
    pass


class NotInGamma04(ValidationError):
    pass


class NotOddPrime(ValidationError):
    pass


class ModulusDividesLevel(ValidationError):
    pass


class ParityViolation(ValidationError):
    pass


class VariantMismatch(ValidationError):
    pass


class BudgetExceeded(SiegelModError):
    pass


class TableOverflow(BudgetExceeded):
    pass


class NotStabilized(SiegelModError):
    pass


class DomainError(SiegelModError, ValueError):
    pass


class PoleError(DomainError):
    pass


class PoleProximity(DomainError):
    pass


class SingularGamma(DomainError):
    pass


class BelowYMin(DomainError):
    pass


class PrecisionLoss(SiegelModError):
    pass


class MissingMeasure(SiegelModError, KeyError):
    pass


class MissingConstants(SiegelModError):
    pass


class UnresolvedConstants(MissingConstants):
    pass


class IllConditioned(SiegelModError):
    pass


class CorruptRecord(SiegelModError):
    def __init__(self, offsets):
        self.offsets = list(offsets)
        super().__init__(f"corrupt cache records at byte offsets {self.offsets}")
