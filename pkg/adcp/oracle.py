# coding: utf-8
"""The measurement oracle that stands between the completion algorithms and
the hidden instance.

Algorithms only ever see the entries they explicitly ask for, and every
scalar revealed is counted.

"""
import contextlib
import logging
import math
import typing

import numpy as np

from adcp import exceptions, sampling, types

LOGGER = logging.getLogger(__name__)

NOISE_STREAM = 0x4E

_Index = typing.Tuple[typing.Union[int, np.ndarray], ...]


class Audit:
    """The number of entries revealed inside an :meth:`MeasurementOracle.audit`
    block. :attr:`delta` is live inside the block and frozen on exit.

    """
    def __init__(self, oracle: 'MeasurementOracle') -> None:
        self.start = oracle.observed_count
        self._oracle: typing.Optional[MeasurementOracle] = oracle
        self._delta = 0

    @property
    def delta(self) -> int:
        if self._oracle is not None:
            return self._oracle.observed_count - self.start
        return self._delta

    def freeze(self) -> None:
        self._delta = self.delta
        self._oracle = None


class MeasurementOracle:
    """Reveal entries of a hidden matrix or tensor on request, adding
    Gaussian noise with standard deviation ``sigma`` when it is positive.

    Noise is realized lazily one last-mode slice at a time from a generator
    keyed by ``(seed, slice)`` and memoized, so the same entry always comes
    back with the same value and answers do not depend on query order.

    :param ground_truth: The hidden array, two or more modes
    :param sigma: Per-entry noise standard deviation
    :param seed: Seed of the noise generator
    :param track_positions: Keep a log of every position revealed so that
        :attr:`distinct_observed` can be reported

    """
    def __init__(self, ground_truth: types.Tensor, sigma: float = 0.0,
                 seed: int = 0, track_positions: bool = False) -> None:
        truth = np.array(ground_truth, dtype=np.float64)
        if truth.ndim < 2:
            raise exceptions.InvalidArgument(
                'The hidden instance needs at least two modes, got {}'.format(
                    truth.ndim))
        elif not math.isfinite(sigma) or sigma < 0:
            raise exceptions.InvalidArgument(
                'sigma must be finite and non-negative, got {!r}'.format(
                    sigma))
        truth.setflags(write=False)
        self._truth = truth
        self._sigma = float(sigma)
        self._seed = int(seed)
        self._noise: typing.Dict[int, np.ndarray] = {}
        self._revealed: typing.Optional[np.ndarray] = \
            np.zeros(truth.shape, dtype=bool) if self._sigma > 0 else None
        self._observed_count = 0
        self._positions: typing.Optional[typing.List[np.ndarray]] = \
            [] if track_positions else None

    def __repr__(self) -> str:
        return '<MeasurementOracle dims={} sigma={} observed={}>'.format(
            self.dims, self._sigma, self._observed_count)

    @property
    def dims(self) -> typing.Tuple[int, ...]:
        """The dimensions of the hidden instance"""
        return tuple(int(n) for n in self._truth.shape)

    @property
    def sigma(self) -> float:
        return self._sigma

    @property
    def observed_count(self) -> int:
        """The number of scalar entries revealed so far, counting every draw
        of a multiset query

        """
        return self._observed_count

    @property
    def distinct_observed(self) -> typing.Optional[int]:
        """The number of distinct positions revealed so far, or :data:`None`
        when the oracle was created without ``track_positions``

        """
        if self._positions is None:
            return None
        elif not self._positions:
            return 0
        return int(np.unique(np.concatenate(self._positions)).size)

    @property
    def noise_energy(self) -> float:
        """The squared noise summed over every distinct position revealed
        so far, zero for a noiseless oracle

        """
        if self._revealed is None:
            return 0.0
        return float(sum(
            np.sum(noise[self._revealed[..., j]] ** 2)
            for j, noise in self._noise.items()))

    @contextlib.contextmanager
    def audit(self) -> typing.Iterator[Audit]:
        """Count the entries revealed inside the block.

        .. code-block:: python3
           :caption: Example Usage

            with oracle.audit() as audit:
                oracle.observe_column(0)
            assert audit.delta == oracle.dims[0]

        """
        result = Audit(self)
        try:
            yield result
        finally:
            result.freeze()

    def observe_entry(self, position: types.Position) -> float:
        """Reveal a single entry.

        :raises adcp.exceptions.PositionOutOfRange: when the position is
            not inside the instance

        """
        position = tuple(position)
        if len(position) != self._truth.ndim:
            raise exceptions.PositionOutOfRange(
                'Position {!r} does not have {} indices'.format(
                    position, self._truth.ndim))
        self._check_indices(position, self.dims)
        return float(self._reveal(tuple(int(i) for i in position))[()])

    def observe_column(self, j: int) -> types.Vector:
        """Reveal column ``j`` of a matrix, ``n1`` entries"""
        if self._truth.ndim != 2:
            raise exceptions.InvalidArgument(
                'Columns are only defined for matrices, use '
                'observe_subtensor for an order {} tensor'.format(
                    self._truth.ndim))
        return self.observe_subtensor(1, j)

    def observe_subtensor(self, mode: int, index: int) -> types.Tensor:
        """Reveal the order ``T - 1`` slice with ``index`` fixed in ``mode``
        (zero based).

        :raises adcp.exceptions.PositionOutOfRange: when the mode or index
            is not inside the instance

        """
        if not 0 <= mode < self._truth.ndim:
            raise exceptions.PositionOutOfRange(
                'Mode {} is not one of the {} modes'.format(
                    mode, self._truth.ndim))
        self._check_indices((index,), (self.dims[mode],))
        grid = np.indices(self.dims[:mode] + self.dims[mode + 1:],
                          sparse=True)
        position = tuple(grid[:mode]) + (int(index),) + tuple(grid[mode:])
        return self._reveal(position)

    def observe_slice(self, selector: types.Selector) -> types.Vector:
        """Reveal every entry of the slice selected by fixing the trailing
        modes, vectorized lexicographically

        """
        leading = self._leading_dims(selector)
        return self.observe_at(
            sampling.IndexSet.full(int(np.prod(leading))), selector)

    def observe_at(self, omega: sampling.IndexSet,
                   selector: types.Selector) -> types.Vector:
        """Reveal the entries at ``omega`` within the slice selected by
        fixing the trailing modes to ``selector``.

        The modes that are not fixed are vectorized lexicographically, as
        :func:`numpy.ravel_multi_index` does. One entry is counted per
        element of ``omega``, duplicates included.

        :param omega: Indices into the vectorized slice
        :param selector: Fixed indices of the trailing modes, ``(j,)`` for
            column ``j`` of a matrix
        :raises adcp.exceptions.DimensionMismatch: when ``omega`` does not
            index a slice of this size
        :raises adcp.exceptions.PositionOutOfRange: when the selector is not
            inside the instance

        """
        leading = self._leading_dims(selector)
        size = int(np.prod(leading))
        if omega.ambient_dim != size:
            raise exceptions.DimensionMismatch(
                'Index set over [0, {}) does not match a slice of {} '
                'entries'.format(omega.ambient_dim, size))
        position = np.unravel_index(omega.indices, leading) \
            + tuple(int(i) for i in selector)
        return self._reveal(position)

    def _check_indices(self, indices: typing.Sequence[int],
                       bounds: typing.Sequence[int]) -> None:
        for index, bound in zip(indices, bounds):
            if not isinstance(index, (int, np.integer)) \
                    or not 0 <= index < bound:
                raise exceptions.PositionOutOfRange(
                    'Index {!r} is outside of [0, {})'.format(index, bound))

    def _leading_dims(self, selector: types.Selector) \
            -> typing.Tuple[int, ...]:
        selector = tuple(selector)
        if not 1 <= len(selector) < self._truth.ndim:
            raise exceptions.PositionOutOfRange(
                'A selector fixes between 1 and {} trailing modes, got '
                '{!r}'.format(self._truth.ndim - 1, selector))
        split = self._truth.ndim - len(selector)
        self._check_indices(selector, self.dims[split:])
        return self.dims[:split]

    def _reveal(self, position: _Index) -> np.ndarray:
        values = np.array(self._truth[position], dtype=np.float64)
        if self._revealed is not None:
            values = values + self._noise_at(position)
            self._revealed[position] = True
        self._observed_count += int(values.size)
        if self._positions is not None:
            self._positions.append(np.ravel_multi_index(
                np.broadcast_arrays(*position), self.dims).ravel())
        return values

    def _noise_at(self, position: _Index) -> np.ndarray:
        index = np.broadcast_arrays(*(np.asarray(i) for i in position))
        values = np.empty(index[-1].shape)
        for j in np.unique(index[-1]):
            mask = index[-1] == j
            values[mask] = self._slice_noise(int(j))[
                tuple(i[mask] for i in index[:-1])]
        return values

    def _slice_noise(self, j: int) -> np.ndarray:
        if j not in self._noise:
            rng = np.random.default_rng(np.random.SeedSequence(
                self._seed, spawn_key=(NOISE_STREAM, j)))
            self._noise[j] = rng.normal(0.0, self._sigma, self.dims[:-1])
        return self._noise[j]

