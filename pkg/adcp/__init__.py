# coding: utf-8
import contextlib
import logging
import typing

from adcp import exceptions
from adcp.__version__ import version

if typing.TYPE_CHECKING:  # pragma: nocover
    from adcp import instances, oracle

DEFAULT_DROP_TOL = 1e-10
DEFAULT_RANK_TOL = 1e-12
DEFAULT_RESIDUAL_TOL = 1e-8
DEFAULT_RESAMPLE_RETRIES = 1
DEFAULT_SUCCESS_THRESHOLD = 1e-6

LOGGER = logging.getLogger('adcp')


@contextlib.contextmanager
def instance(spec: 'instances.SyntheticSpec') \
        -> typing.Iterator[typing.Tuple['instances.Instance',
                                        'oracle.MeasurementOracle']]:
    """:ref:`Context-manager <python:typecontextmanager>` that generates a
    synthetic instance, returning the :class:`~adcp.instances.Instance` and
    the :class:`~adcp.oracle.MeasurementOracle` guarding it as the target.
    The number of entries revealed inside the block is logged on exit.

    .. code-block:: python3
       :caption: Example Usage

       spec = adcp.instances.SyntheticSpec(dims=[200, 200], rank=5)
       with adcp.instance(spec) as (truth, measurements):
           report = adcp.completion.complete_matrix(
               measurements, 200, 200,
               adcp.completion.NoiselessConfig(budgets=[60]))

    :param spec: The generator settings
    :raises adcp.exceptions.InvalidSpec: when the spec does not validate

    """
    from adcp import instances

    generated, measurements = instances.generate(spec)
    try:
        yield generated, measurements
    finally:
        LOGGER.info('Instance %r revealed %i entries',
                    spec, measurements.observed_count)

__all__ = [
    'bounds',
    'completion',
    'css',
    'DEFAULT_DROP_TOL',
    'DEFAULT_RANK_TOL',
    'DEFAULT_RESAMPLE_RETRIES',
    'DEFAULT_RESIDUAL_TOL',
    'DEFAULT_SUCCESS_THRESHOLD',
    'exceptions',
    'experiments',
    'instance',
    'instances',
    'linalg',
    'oracle',
    'sampling',
    'types',
    'version'
]
