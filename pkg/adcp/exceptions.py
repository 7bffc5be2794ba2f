# coding: utf-8
import typing

if typing.TYPE_CHECKING:  # pragma: nocover
    from adcp import completion


class ADCPException(Exception):
    """Exception that is the base class of all other error exceptions.
    You can use this to catch all errors with one single except statement.
    Warnings are not considered errors and thus not use this class as base.
    It is a subclass of the :exc:`Exception`.

    """


class InvalidArgument(ADCPException, ValueError):
    """A value passed to a numerical routine does not validate, for example
    a non-positive tolerance or an empty set of vectors where one is
    required.

    """


class DimensionMismatch(ADCPException, ValueError):
    """Vectors, bases or index sets passed together do not share the same
    ambient dimension.

    """


class PositionOutOfRange(ADCPException, IndexError):
    """A measurement was requested at a position outside of the hidden
    instance.

    """


class RankDeficient(ADCPException):
    """The row-subsampled basis :math:`U_\\Omega` is numerically rank
    deficient, so the least-squares projection onto its columns is not
    unique. Callers may draw a fresh index set and retry.

    :param ratio: Smallest over largest diagonal magnitude of the triangular
        factor of :math:`U_\\Omega`

    """
    def __init__(self, message: str, ratio: float = 0.0) -> None:
        super().__init__(message)
        self.ratio = ratio


class InvalidSpec(ADCPException):
    """A :class:`~adcp.instances.SyntheticSpec` violates its invariants,
    for example a rank larger than the smallest dimension or block sizes
    that do not divide the dimensions.

    """
    name = 'INVALID-SPEC'
    value = 2


class ConfigError(ADCPException):
    """A configuration file or command line value could not be used to
    build a run configuration.

    """
    name = 'BAD-CONFIG'
    value = 2


class RunFailure(ADCPException):
    """A completion run could not finish, usually because a subsampled
    basis stayed rank deficient after every permitted resample.

    The partially assembled report is attached as :attr:`report` so the
    caller can still audit the entries observed before the failure.

    """
    name = 'RUN-FAILURE'
    value = 1

    def __init__(self, message: str,
                 report: typing.Optional['completion.CompletionReport']
                 = None) -> None:
        super().__init__(message)
        self.report = report


class StateTransitionError(ADCPException):
    """The completion algorithms implement a strict state machine for the
    phase they are in (sampling, testing, observing, reconstructing).

    If this exception is raised, one or more of the following is true:

    - A phase was entered out of order by a caller driving the run manually
    - There is a bug in adcp

    """


#  Exception class to process exit code mapping
EXIT_CODES = {
    RunFailure: RunFailure.value,
    ConfigError: ConfigError.value,
    InvalidSpec: InvalidSpec.value
}
