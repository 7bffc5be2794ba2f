# coding: utf-8
"""Exact adaptive completion of noiseless low-rank matrices and tensors.

Columns (or mode-``T`` subtensors) are streamed in order. Each is tested
against the basis learned so far using a small random subsample. Those
that fail the test are fully observed and extend the basis, every other
one is reconstructed from its subsample.

"""
import dataclasses
import logging
import typing

import numpy as np

from adcp import (DEFAULT_RESAMPLE_RETRIES, DEFAULT_RESIDUAL_TOL,
                  DEFAULT_SUCCESS_THRESHOLD, exceptions, linalg, oracle,
                  sampling, state, types)

LOGGER = logging.getLogger(__name__)

STATE_IDLE = 0x10
STATE_SAMPLING = 0x11
STATE_TESTING = 0x12
STATE_OBSERVING = 0x13
STATE_RECONSTRUCTING = 0x14
STATE_COMPLETE = 0x15

SAMPLED_MODES = {sampling.SamplingMode.WITH_REPLACEMENT,
                 sampling.SamplingMode.BERNOULLI,
                 sampling.SamplingMode.FULL}


@dataclasses.dataclass
class NoiselessConfig:
    """Configuration of the exact algorithms.

    :param budgets: Per-level sample counts ``m_1 ... m_T``. Columns of a
        matrix use ``m_2``. A single entry applies to every level.
    :param residual_tol: A unit is informative when its subsampled residual
        energy exceeds this fraction of its subsampled energy
    :param resample_on_rank_deficiency: Fresh draws permitted when the
        subsampled basis is rank deficient and reconstruction is needed
    :param sampling_mode: How index sets are drawn
    :param rank_hint: Warn when more units than this are fully observed
    :param seed: Seeds the index set draws when no generator is passed

    """
    budgets: typing.List[int]
    residual_tol: float = DEFAULT_RESIDUAL_TOL
    resample_on_rank_deficiency: int = DEFAULT_RESAMPLE_RETRIES
    sampling_mode: sampling.SamplingMode = \
        sampling.SamplingMode.WITH_REPLACEMENT
    rank_hint: typing.Optional[int] = None
    seed: typing.Optional[int] = None

    def validate(self) -> None:
        if not self.budgets or any(
                not isinstance(m, (int, np.integer)) or m < 1
                for m in self.budgets):
            raise exceptions.InvalidArgument(
                'budgets must be positive integers, got {!r}'.format(
                    self.budgets))
        elif not self.residual_tol >= 0:
            raise exceptions.InvalidArgument(
                'residual_tol must be non-negative')
        elif self.resample_on_rank_deficiency < 0:
            raise exceptions.InvalidArgument(
                'resample_on_rank_deficiency must be non-negative')
        elif self.sampling_mode not in SAMPLED_MODES:
            raise exceptions.InvalidArgument(
                'Can not complete with {} index sets'.format(
                    self.sampling_mode.value))
        elif self.rank_hint is not None and self.rank_hint < 0:
            raise exceptions.InvalidArgument('rank_hint must be >= 0')

    def budget(self, level: int, size: int) -> int:
        """Return the sample count for ``level`` (1 based) over a slice of
        ``size`` entries, capped at ``size``

        """
        if len(self.budgets) == 1:
            m = self.budgets[0]
        else:
            m = self.budgets[min(level, len(self.budgets)) - 1]
        if m > size:
            LOGGER.debug('Capping level %i budget %i at %i', level, m, size)
        return int(min(m, size))


@dataclasses.dataclass
class CompletionReport:
    """The outcome of a completion run.

    ``entries_observed`` is the oracle counter delta over the run.
    ``entries_observed_gross`` also counts the subsampled entries that a
    full observation revealed a second time. ``units_per_level`` holds the
    number of fully observed units at each level, the vectors of the base
    case first. ``basis`` is the learned basis of the top level, the column
    space estimate for a matrix.

    """
    estimate: types.Tensor
    entries_observed: int
    entries_observed_gross: int
    fully_observed_units: int
    units_per_level: typing.List[int]
    basis_dim_final: int
    wall_time: float = 0.0
    success: typing.Optional[bool] = None
    relative_error: typing.Optional[float] = None
    failed_units: typing.List[int] = dataclasses.field(default_factory=list)
    basis_dims: typing.List[int] = dataclasses.field(default_factory=list)
    selected_units: typing.List[int] = \
        dataclasses.field(default_factory=list)
    basis: typing.Optional[linalg.OrthonormalBasis] = None

    def evaluate(self, ground_truth: types.Tensor,
                 threshold: float = DEFAULT_SUCCESS_THRESHOLD) -> bool:
        """Set :attr:`relative_error` and :attr:`success` against the
        ground truth. The error is absolute when the truth is zero.

        """
        ground_truth = np.asarray(ground_truth, dtype=np.float64)
        if ground_truth.shape != np.shape(self.estimate):
            raise exceptions.DimensionMismatch(
                'Estimate {} does not match ground truth {}'.format(
                    np.shape(self.estimate), ground_truth.shape))
        error = float(np.linalg.norm((self.estimate - ground_truth).ravel()))
        scale = float(np.linalg.norm(ground_truth.ravel()))
        self.relative_error = error / scale if scale > 0 else error
        self.success = bool(np.isfinite(self.relative_error)
                            and self.relative_error <= threshold)
        return self.success


class SequentialCompletion(state.StateManager):
    """Drives one adaptive completion run over a single oracle.

    A run is strictly sequential: unit ``j`` is decided using only the
    units before it. Matrices draw a fresh index set per column while
    tensors share one index set across all subtensors of a recursion level.

    :param measurements: The oracle guarding the hidden instance
    :param config: The run configuration
    :param rng: Generator for index set draws, ``config.seed`` when omitted

    """
    STATE_MAP = {
        state.STATE_UNINITIALIZED: 'Uninitialized',
        state.STATE_EXCEPTION: 'Exception Raised',
        STATE_IDLE: 'Idle',
        STATE_SAMPLING: 'Sampling',
        STATE_TESTING: 'Testing',
        STATE_OBSERVING: 'Observing',
        STATE_RECONSTRUCTING: 'Reconstructing',
        STATE_COMPLETE: 'Complete'
    }

    STATE_TRANSITIONS = {
        state.STATE_UNINITIALIZED: [STATE_IDLE],
        state.STATE_EXCEPTION: [],
        STATE_IDLE: [STATE_SAMPLING, STATE_OBSERVING],
        STATE_SAMPLING: [STATE_TESTING],
        STATE_TESTING: [STATE_SAMPLING, STATE_OBSERVING,
                        STATE_RECONSTRUCTING],
        STATE_OBSERVING: [STATE_SAMPLING, STATE_COMPLETE],
        STATE_RECONSTRUCTING: [STATE_SAMPLING, STATE_COMPLETE],
        STATE_COMPLETE: []
    }

    def __init__(self, measurements: oracle.MeasurementOracle,
                 config: NoiselessConfig, rng: types.Seed = None) -> None:
        super().__init__()
        config.validate()
        self._oracle = measurements
        self._config = config
        self._rng = np.random.default_rng(
            config.seed if rng is None else rng)
        self._dims = measurements.dims
        self._units = [0] * len(self._dims)
        self._reused = 0
        self._basis: typing.Optional[linalg.OrthonormalBasis] = None
        self._estimate: typing.Optional[np.ndarray] = None
        self._set_state(STATE_IDLE)

    def complete_matrix(self) -> CompletionReport:
        """Complete the matrix column by column with a fresh index set per
        column.

        :raises adcp.exceptions.RunFailure: when a column can not be
            reconstructed after every permitted resample

        """
        if len(self._dims) != 2:
            raise exceptions.DimensionMismatch(
                'complete_matrix requires a matrix, got dims {}'.format(
                    self._dims))
        n1, n2 = self._dims
        self._estimate = np.full((n1, n2), np.nan)
        m = self._config.budget(2, n1)
        start = self._oracle.observed_count
        basis = linalg.OrthonormalBasis.empty(n1)
        try:
            for j in range(n2):
                basis = self._matrix_column(basis, j, m)
        except exceptions.RunFailure as error:
            error.report = self._report(start)
            self._set_state(state.STATE_EXCEPTION, error)
            raise
        return self._finish(start)

    def complete_tensor(self) -> CompletionReport:
        """Complete the tensor by recursing on informative mode-``T``
        subtensors.

        :raises adcp.exceptions.RunFailure: when a subtensor can not be
            reconstructed after every permitted resample

        """
        if len(self._dims) == 2:
            return self.complete_matrix()
        start = self._oracle.observed_count
        try:
            flat = self._level(len(self._dims), ())
        except exceptions.RunFailure as error:
            error.report = self._report(start)
            self._set_state(state.STATE_EXCEPTION, error)
            raise
        self._estimate = flat.reshape(self._dims)
        return self._finish(start)

    def _matrix_column(self, basis: linalg.OrthonormalBasis, j: int,
                       m: int) -> linalg.OrthonormalBasis:
        n1 = self._dims[0]
        observed: typing.List[typing.Tuple[sampling.IndexSet,
                                           np.ndarray]] = []
        for attempt in range(self._config.resample_on_rank_deficiency + 1):
            self._set_state(STATE_SAMPLING)
            omega = self._draw(n1, m)
            values = self._oracle.observe_at(omega, (j,))
            observed.append((omega, values))
            self._set_state(STATE_TESTING)
            projector = linalg.SubsampledProjector(basis, omega)
            if self._informative(projector, values):
                self._set_state(STATE_OBSERVING)
                column = np.empty(n1)
                for drawn, drawn_values in observed:
                    column[drawn.indices] = drawn_values
                seen = sampling.IndexSet(n1, np.concatenate(
                    [drawn.indices for drawn, _values in observed]))
                remaining = seen.complement()
                column[remaining.indices] = self._oracle.observe_at(
                    remaining, (j,))
                self._reused += int(seen.distinct().size)
                self._units[0] += 1
                self._units[1] += 1
                self._estimate[:, j] = column
                LOGGER.debug('Column %i is informative, basis dimension %i',
                             j, basis.dim + 1)
                basis = basis.extend([column])
                self._basis = basis
                return basis
            elif projector.full_rank:
                self._set_state(STATE_RECONSTRUCTING)
                column = projector.reconstruct(values)
                for drawn, drawn_values in observed:
                    column[drawn.indices] = drawn_values
                self._estimate[:, j] = column
                return basis
            LOGGER.warning('Column %i: U_omega rank %i of %i over %i rows '
                           'after draw %i, resampling', j, projector.rank,
                           basis.dim, len(omega), attempt + 1)
        raise exceptions.RunFailure(
            'Column {} stayed rank deficient after {} draws'.format(
                j, len(observed)))

    def _level(self, level: int,
               selector: typing.Tuple[int, ...]) -> np.ndarray:
        """Complete the order ``level`` subtensor selected by ``selector``
        and return it vectorized

        """
        leading = self._dims[:level - 1]
        if level == 1:
            self._set_state(STATE_OBSERVING)
            self._units[0] += 1
            return self._oracle.observe_slice(selector)
        size = int(np.prod(leading))
        slices = self._dims[level - 1]
        m = self._config.budget(level, size)
        estimate = np.empty((size, slices))
        basis = linalg.OrthonormalBasis.empty(size)
        self._set_state(STATE_SAMPLING)
        omega = self._draw(size, m)
        for j in range(slices):
            sub = (j,) + selector
            if self.state != self.STATE_MAP[STATE_SAMPLING]:
                self._set_state(STATE_SAMPLING)
            values = self._oracle.observe_at(omega, sub)
            observed = [(omega, values)]
            while True:
                self._set_state(STATE_TESTING)
                projector = linalg.SubsampledProjector(basis, omega)
                if self._informative(projector, values):
                    self._set_state(STATE_OBSERVING)
                    estimate[:, j] = self._level(level - 1, sub)
                    for drawn, drawn_values in observed:
                        estimate[drawn.indices, j] = drawn_values
                    self._units[level - 1] += 1
                    basis = basis.extend([estimate[:, j]])
                    if level == len(self._dims):
                        self._basis = basis
                    break
                elif projector.full_rank:
                    self._set_state(STATE_RECONSTRUCTING)
                    estimate[:, j] = projector.reconstruct(values)
                    for drawn, drawn_values in observed:
                        estimate[drawn.indices, j] = drawn_values
                    break
                elif len(observed) > self._config.resample_on_rank_deficiency:
                    raise exceptions.RunFailure(
                        'Level {} slice {} stayed rank deficient after {} '
                        'draws'.format(level, sub, len(observed)))
                LOGGER.warning(
                    'Level %i slice %i: U_omega rank %i of %i over %i rows '
                    'after draw %i, resampling the level index set', level,
                    j, projector.rank, basis.dim, len(omega), len(observed))
                self._set_state(STATE_SAMPLING)
                omega = self._draw(size, m)
                values = self._oracle.observe_at(omega, sub)
                observed.append((omega, values))
        return estimate.ravel()

    def _draw(self, n: int, m: int) -> sampling.IndexSet:
        return sampling.sample_index_set(
            n, m, self._config.sampling_mode, self._rng)

    def _informative(self, projector: linalg.SubsampledProjector,
                     values: np.ndarray) -> bool:
        energy = projector.residual_energy(values)
        return energy > self._config.residual_tol * float(values @ values)

    def _report(self, start: int) -> CompletionReport:
        net = self._oracle.observed_count - start
        return CompletionReport(
            estimate=self._estimate if self._estimate is not None
            else np.full(self._dims, np.nan),
            entries_observed=net,
            entries_observed_gross=net + self._reused,
            fully_observed_units=self._units[-1],
            units_per_level=list(self._units),
            basis_dim_final=self._basis.dim if self._basis is not None else 0,
            wall_time=self.elapsed,
            basis=self._basis)

    def _finish(self, start: int) -> CompletionReport:
        self._set_state(STATE_COMPLETE)
        report = self._report(start)
        if self._config.rank_hint is not None \
                and report.fully_observed_units > self._config.rank_hint:
            LOGGER.warning('Fully observed %i units, more than the rank '
                           'hint of %i', report.fully_observed_units,
                           self._config.rank_hint)
        LOGGER.info('Completed %r observing %i entries (%i gross), %i units '
                    'fully observed, basis dimension %i in %.3f seconds',
                    self._dims, report.entries_observed,
                    report.entries_observed_gross,
                    report.fully_observed_units, report.basis_dim_final,
                    report.wall_time)
        return report


def complete_matrix(measurements: oracle.MeasurementOracle, n1: int,
                    n2: int, config: NoiselessConfig,
                    rng: types.Seed = None) -> CompletionReport:
    """Complete an ``n1`` by ``n2`` matrix by sequential adaptive sampling.

    .. code-block:: python3
       :caption: Example Usage

        truth, measurements = instances.gen_matrix(
            instances.SyntheticSpec([200, 200], 5, seed=7))
        report = complete_matrix(measurements, 200, 200,
                                 NoiselessConfig(budgets=[60]), rng=7)
        report.evaluate(truth.ground_truth)

    :param measurements: The oracle guarding the matrix
    :param n1: Rows
    :param n2: Columns
    :param config: The run configuration, the last budget is used per column
    :param rng: Generator or seed for the index set draws
    :raises adcp.exceptions.DimensionMismatch: when the oracle does not
        guard an ``n1`` by ``n2`` matrix
    :raises adcp.exceptions.RunFailure: when a column stays rank deficient

    """
    if measurements.dims != (n1, n2):
        raise exceptions.DimensionMismatch(
            'Oracle guards {}, not ({}, {})'.format(
                measurements.dims, n1, n2))
    return SequentialCompletion(measurements, config, rng).complete_matrix()


def complete_tensor(measurements: oracle.MeasurementOracle,
                    dims: types.Dims, config: NoiselessConfig,
                    rng: types.Seed = None) -> CompletionReport:
    """Complete an order ``T`` tensor by recursive adaptive sampling. An
    order 2 tensor takes exactly the :func:`complete_matrix` path.

    :raises adcp.exceptions.DimensionMismatch: when the oracle does not
        guard a tensor of ``dims``
    :raises adcp.exceptions.RunFailure: when a subtensor stays rank
        deficient

    """
    if measurements.dims != tuple(dims):
        raise exceptions.DimensionMismatch(
            'Oracle guards {}, not {}'.format(measurements.dims, tuple(dims)))
    return SequentialCompletion(measurements, config, rng).complete_tensor()
