# coding: utf-8
"""Index sets over a vectorized slice and the samplers that draw them"""
import dataclasses
import enum
import logging
import typing

import numpy as np

from adcp import exceptions, types

LOGGER = logging.getLogger(__name__)

MAX_OVERSAMPLING = 10


class SamplingMode(enum.Enum):
    """How an :class:`IndexSet` was drawn"""
    WITH_REPLACEMENT = 'with-replacement'
    """Exactly ``m`` i.i.d. uniform draws, duplicates allowed"""
    BERNOULLI = 'bernoulli'
    """Each index kept independently with probability ``m / n``"""
    FULL = 'full'
    """Every index exactly once, in order"""
    EXPLICIT = 'explicit'
    """Indices supplied by the caller"""


@dataclasses.dataclass(frozen=True, eq=False)
class IndexSet:
    """An ordered multiset :math:`\\Omega` of positions in ``[0, n)``.

    Indices are zero based. A duplicated index in a
    :attr:`SamplingMode.WITH_REPLACEMENT` draw reveals one physical entry but
    is kept, and counted, once per draw.

    :param ambient_dim: The dimension ``n`` of the indexed space
    :param indices: The sampled positions
    :param mode: How the positions were drawn
    :param parameter: ``m`` for with-replacement draws, ``p`` for Bernoulli

    """
    ambient_dim: int
    indices: np.ndarray
    mode: SamplingMode = SamplingMode.EXPLICIT
    parameter: float = 0.0

    def __post_init__(self) -> None:
        indices = np.array(self.indices, dtype=np.intp).ravel()
        if self.ambient_dim < 1:
            raise exceptions.InvalidArgument(
                'ambient_dim must be positive, got {}'.format(
                    self.ambient_dim))
        if indices.size and (indices.min() < 0
                             or indices.max() >= self.ambient_dim):
            raise exceptions.PositionOutOfRange(
                'indices must lie in [0, {})'.format(self.ambient_dim))
        indices.setflags(write=False)
        object.__setattr__(self, 'indices', indices)

    def __len__(self) -> int:
        return int(self.indices.size)

    def __iter__(self) -> typing.Iterator[int]:
        return iter(self.indices.tolist())

    def distinct(self) -> np.ndarray:
        """Return the sorted distinct indices"""
        return np.unique(self.indices)

    def complement(self) -> 'IndexSet':
        """Return the indices of ``[0, n)`` that were never drawn"""
        mask = np.ones(self.ambient_dim, dtype=bool)
        mask[self.indices] = False
        return IndexSet(self.ambient_dim, np.flatnonzero(mask))

    @classmethod
    def full(cls, ambient_dim: int) -> 'IndexSet':
        """Return the index set covering ``[0, n)`` once each"""
        return cls(ambient_dim, np.arange(ambient_dim), SamplingMode.FULL,
                   float(ambient_dim))


def sample_index_set(n: int, m: int,
                     mode: SamplingMode = SamplingMode.WITH_REPLACEMENT,
                     rng: types.Seed = None) -> IndexSet:
    """Draw an index set over ``[0, n)``.

    With replacement, exactly ``m`` i.i.d. uniform draws are returned. In
    the Bernoulli model each index is kept with probability
    ``min(1, m / n)``, so ``m`` is the expected size.

    :param n: The ambient dimension
    :param m: The number of draws (or expected size)
    :param mode: :attr:`SamplingMode.WITH_REPLACEMENT`,
        :attr:`SamplingMode.BERNOULLI` or :attr:`SamplingMode.FULL`, which
        ignores ``m`` and returns every index once
    :param rng: A :class:`numpy.random.Generator` or a seed for one
    :raises adcp.exceptions.InvalidArgument: when ``n`` or ``m`` is out of
        range or the mode cannot be sampled

    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise exceptions.InvalidArgument(
            'n must be a positive integer, got {!r}'.format(n))
    elif not isinstance(m, (int, np.integer)) \
            or not 1 <= m <= n * MAX_OVERSAMPLING:
        raise exceptions.InvalidArgument(
            'm must be an integer in [1, {}], got {!r}'.format(
                n * MAX_OVERSAMPLING, m))
    if mode == SamplingMode.FULL:
        return IndexSet.full(n)
    rng = np.random.default_rng(rng)
    if mode == SamplingMode.WITH_REPLACEMENT:
        return IndexSet(n, rng.integers(0, n, size=int(m)), mode, float(m))
    elif mode == SamplingMode.BERNOULLI:
        p = min(1.0, m / n)
        return IndexSet(n, np.flatnonzero(rng.random(n) < p), mode, p)
    raise exceptions.InvalidArgument(
        'Can not sample an index set in {} mode'.format(mode.value))
