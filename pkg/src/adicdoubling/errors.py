"""Exception types shared across the package.

The CLI maps these onto process exit codes: configuration problems exit
with 2, exhausted searches with 3, failed certificate verification with 4.
"""


class AdicDoublingError(Exception):
    exit_code = 1


class ValidationError(AdicDoublingError):
    exit_code = 2


class NotCoprimeError(ValidationError):
    pass


class NotInSubgroupError(ValidationError):
    pass


class DegenerateDenominatorError(ValidationError):
    pass


class MultiplierDegenerateError(ValidationError):
    pass


class ScheduleError(ValidationError):
    pass


class OverlapError(ValidationError):
    pass


class SearchExhaustedError(AdicDoublingError):
    exit_code = 3


class EpsilonTooCoarseError(SearchExhaustedError):
    pass


class NoValidKError(SearchExhaustedError):
    pass


class DomainExhaustedError(SearchExhaustedError):
    pass


class BoundaryStraddleError(SearchExhaustedError):
    pass


class VerificationFailedError(AdicDoublingError):
    exit_code = 4


class ContainmentFailureError(VerificationFailedError):
    pass
