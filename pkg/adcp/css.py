# coding: utf-8
"""Adaptive column subset selection for noisy matrices.

Over ``L`` rounds, ``s`` columns are drawn with probability proportional to
their residual energy against the span of the columns selected so far, the
energies being estimated from small per-column subsamples. Every column
that was not selected is then reconstructed from a fresh subsample.

"""
import dataclasses
import logging
import typing

import numpy as np
from scipy import linalg as sp_linalg

from adcp import (DEFAULT_RESAMPLE_RETRIES, completion, exceptions, linalg,
                  oracle, sampling, state, types)

LOGGER = logging.getLogger(__name__)

STATE_IDLE = 0x10
STATE_ESTIMATING = 0x11
STATE_SELECTING = 0x12
STATE_EXTENDING = 0x13
STATE_RECONSTRUCTING = 0x14
STATE_COMPLETE = 0x15


@dataclasses.dataclass
class CssConfig:
    """Configuration of a column subset selection run.

    ``epsilon`` and ``delta`` are the analysis parameters the sizes were
    planned with, see :func:`adcp.bounds.css_columns_per_round`. They are
    recorded, not enforced.

    """
    rounds: int
    columns_per_round: int
    m_per_column: int
    epsilon: float = 0.5
    delta: float = 0.1
    truncate_rank: typing.Optional[int] = None
    retries: int = DEFAULT_RESAMPLE_RETRIES
    sampling_mode: sampling.SamplingMode = \
        sampling.SamplingMode.WITH_REPLACEMENT
    seed: typing.Optional[int] = None

    def validate(self, n1: int, n2: int) -> None:
        """Validate against an ``n1`` by ``n2`` matrix

        :raises adcp.exceptions.InvalidArgument: on the first violation

        """
        if self.rounds < 1 or self.columns_per_round < 1:
            raise exceptions.InvalidArgument(
                'rounds and columns_per_round must be positive')
        elif self.rounds * self.columns_per_round > n2:
            raise exceptions.InvalidArgument(
                'rounds * columns_per_round = {} exceeds {} columns'.format(
                    self.rounds * self.columns_per_round, n2))
        elif not 1 <= self.m_per_column <= n1:
            raise exceptions.InvalidArgument(
                'm_per_column must be in [1, {}], got {}'.format(
                    n1, self.m_per_column))
        elif not 0 < self.epsilon < 1 or not 0 < self.delta < 1:
            raise exceptions.InvalidArgument(
                'epsilon and delta must be in (0, 1)')
        elif self.truncate_rank is not None \
                and not 1 <= self.truncate_rank <= min(n1, n2):
            raise exceptions.InvalidArgument(
                'truncate_rank must be in [1, {}]'.format(min(n1, n2)))
        elif self.retries < 0:
            raise exceptions.InvalidArgument('retries must be non-negative')
        elif self.sampling_mode not in completion.SAMPLED_MODES:
            raise exceptions.InvalidArgument(
                'Can not estimate with {} index sets'.format(
                    self.sampling_mode.value))


@dataclasses.dataclass
class CssState:
    """The state carried between rounds.

    ``selected`` holds the sorted distinct column indices fully observed so
    far and ``observed_columns`` their values.

    """
    round: int
    basis: linalg.OrthonormalBasis
    selected: np.ndarray
    probs: np.ndarray
    observed_columns: typing.Dict[int, np.ndarray] = \
        dataclasses.field(default_factory=dict)
    basis_dims: typing.List[int] = dataclasses.field(default_factory=list)


def estimate_probs(measurements: oracle.MeasurementOracle,
                   basis: linalg.OrthonormalBasis, m_per_column: int,
                   rng: types.Seed = None,
                   mode: sampling.SamplingMode =
                   sampling.SamplingMode.WITH_REPLACEMENT) -> np.ndarray:
    """Estimate the column sampling distribution from subsamples.

    Each column gets a fresh index set. Its probability is its subsampled
    residual energy against ``basis`` over the total. With an empty basis
    this is the subsampled column energy. When every residual is zero the
    uniform distribution is returned.

    """
    if m_per_column < 1:
        raise exceptions.InvalidArgument('m_per_column must be positive')
    rng = np.random.default_rng(rng)
    n1, n2 = measurements.dims
    energies = np.empty(n2)
    for i in range(n2):
        omega = sampling.sample_index_set(n1, m_per_column, mode, rng)
        values = measurements.observe_at(omega, (i,))
        energies[i] = linalg.SubsampledProjector(
            basis, omega).residual_energy(values)
    total = energies.sum()
    if not total > 0:
        LOGGER.debug('Every residual is zero, returning uniform probabilities')
        return np.full(n2, 1.0 / n2)
    return energies / total


def css_round(measurements: oracle.MeasurementOracle, current: CssState,
              config: CssConfig, rng: types.Seed = None,
              estimate_next: bool = True) -> CssState:
    """Run one selection round: draw ``s`` columns i.i.d. from the current
    probabilities, fully observe the distinct new ones, extend the basis
    and, when ``estimate_next`` is set, re-estimate the probabilities.

    """
    rng = np.random.default_rng(rng)
    new = _select(current, config, rng)
    result = _extend(measurements, current, new)
    if estimate_next:
        result.probs = estimate_probs(
            measurements, result.basis, config.m_per_column, rng,
            config.sampling_mode)
    return result


def css_complete(measurements: oracle.MeasurementOracle, n1: int, n2: int,
                 config: CssConfig,
                 rng: types.Seed = None) -> completion.CompletionReport:
    """Complete a noisy matrix by adaptive column subset selection.

    .. code-block:: python3
       :caption: Example Usage

        report = css_complete(measurements, 200, 200,
                              CssConfig(rounds=3, columns_per_round=10,
                                        m_per_column=40))

    :raises adcp.exceptions.DimensionMismatch: when the oracle does not
        guard an ``n1`` by ``n2`` matrix

    """
    if measurements.dims != (n1, n2):
        raise exceptions.DimensionMismatch(
            'Oracle guards {}, not ({}, {})'.format(
                measurements.dims, n1, n2))
    return ColumnSubsetSelection(measurements, config, rng).run()


def best_rank_r_error(matrix: types.Matrix, r: int) -> float:
    """Return :math:`\\|M - M_r\\|_F^2` for the best rank ``r``
    approximation :math:`M_r`. Evaluation only, it reads the whole matrix.

    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2:
        raise exceptions.DimensionMismatch('A matrix is required')
    elif not 0 <= r <= min(matrix.shape):
        raise exceptions.InvalidArgument(
            'r must be in [0, {}], got {}'.format(min(matrix.shape), r))
    singular_values = sp_linalg.svdvals(matrix)
    return float(np.sum(singular_values[r:] ** 2))


class ColumnSubsetSelection(state.StateManager):
    """Drives a column subset selection run over a single oracle"""
    STATE_MAP = {
        state.STATE_UNINITIALIZED: 'Uninitialized',
        state.STATE_EXCEPTION: 'Exception Raised',
        STATE_IDLE: 'Idle',
        STATE_ESTIMATING: 'Estimating',
        STATE_SELECTING: 'Selecting',
        STATE_EXTENDING: 'Extending',
        STATE_RECONSTRUCTING: 'Reconstructing',
        STATE_COMPLETE: 'Complete'
    }

    STATE_TRANSITIONS = {
        state.STATE_UNINITIALIZED: [STATE_IDLE],
        state.STATE_EXCEPTION: [],
        STATE_IDLE: [STATE_ESTIMATING],
        STATE_ESTIMATING: [STATE_SELECTING],
        STATE_SELECTING: [STATE_EXTENDING],
        STATE_EXTENDING: [STATE_ESTIMATING, STATE_RECONSTRUCTING],
        STATE_RECONSTRUCTING: [STATE_COMPLETE],
        STATE_COMPLETE: []
    }

    def __init__(self, measurements: oracle.MeasurementOracle,
                 config: CssConfig, rng: types.Seed = None) -> None:
        super().__init__()
        n1, n2 = measurements.dims
        config.validate(n1, n2)
        self._oracle = measurements
        self._config = config
        self._rng = np.random.default_rng(
            config.seed if rng is None else rng)
        self._set_state(STATE_IDLE)

    def run(self) -> completion.CompletionReport:
        n1, n2 = self._oracle.dims
        start = self._oracle.observed_count
        current = CssState(
            round=0, basis=linalg.OrthonormalBasis.empty(n1),
            selected=np.zeros(0, dtype=np.intp), probs=np.full(n2, 1.0 / n2))
        for _round in range(self._config.rounds):
            self._set_state(STATE_ESTIMATING)
            current.probs = estimate_probs(
                self._oracle, current.basis, self._config.m_per_column,
                self._rng, self._config.sampling_mode)
            self._set_state(STATE_SELECTING)
            new = _select(current, self._config, self._rng)
            self._set_state(STATE_EXTENDING)
            current = _extend(self._oracle, current, new)
            LOGGER.debug('Round %i selected %i new columns, basis dimension '
                         '%i', current.round, new.size, current.basis.dim)
        self._set_state(STATE_RECONSTRUCTING)
        basis = current.basis
        if self._config.truncate_rank is not None:
            basis = truncate(current, self._config.truncate_rank)
        estimate, failed = self._reconstruct(current, basis)
        self._set_state(STATE_COMPLETE)
        net = self._oracle.observed_count - start
        report = completion.CompletionReport(
            estimate=estimate,
            entries_observed=net,
            entries_observed_gross=net,
            fully_observed_units=int(current.selected.size),
            units_per_level=[int(current.selected.size)],
            basis_dim_final=basis.dim,
            wall_time=self.elapsed,
            failed_units=failed,
            basis_dims=list(current.basis_dims),
            selected_units=current.selected.tolist(),
            basis=basis)
        LOGGER.info('Selected %i columns over %i rounds, observed %i entries '
                    'in %.3f seconds, %i columns failed',
                    report.fully_observed_units, self._config.rounds, net,
                    report.wall_time, len(failed))
        return report

    def _reconstruct(self, current: CssState,
                     basis: linalg.OrthonormalBasis) \
            -> typing.Tuple[np.ndarray, typing.List[int]]:
        n1, n2 = self._oracle.dims
        estimate = np.zeros((n1, n2))
        failed = []
        for i in range(n2):
            if i in current.observed_columns:
                estimate[:, i] = current.observed_columns[i]
                continue
            for attempt in range(self._config.retries + 1):
                omega = sampling.sample_index_set(
                    n1, self._config.m_per_column,
                    self._config.sampling_mode, self._rng)
                projector = linalg.SubsampledProjector(basis, omega)
                values = self._oracle.observe_at(omega, (i,))
                if projector.full_rank:
                    estimate[:, i] = projector.reconstruct(values)
                    break
                LOGGER.warning('Column %i: U_omega rank %i < %i after draw '
                               '%i', i, projector.rank, basis.dim,
                               attempt + 1)
            else:
                failed.append(i)
        return estimate, failed


def truncate(current: CssState, r: int) -> linalg.OrthonormalBasis:
    """Return the top ``r`` left singular vectors of the fully observed
    columns

    """
    if not current.observed_columns:
        return current.basis
    columns = np.column_stack([current.observed_columns[i]
                               for i in sorted(current.observed_columns)])
    left, singular_values, _ = sp_linalg.svd(columns, full_matrices=False)
    keep = min(r, int(np.count_nonzero(singular_values > 0)))
    return linalg.OrthonormalBasis(columns.shape[0], left[:, :keep])


def _select(current: CssState, config: CssConfig,
            rng: np.random.Generator) -> np.ndarray:
    n2 = current.probs.size
    drawn = rng.choice(n2, size=config.columns_per_round, replace=True,
                       p=current.probs)
    return np.setdiff1d(np.unique(drawn), current.selected)


def _extend(measurements: oracle.MeasurementOracle, current: CssState,
            new: np.ndarray) -> CssState:
    n1 = measurements.dims[0]
    observed = dict(current.observed_columns)
    full = sampling.IndexSet.full(n1)
    for i in new.tolist():
        observed[i] = measurements.observe_at(full, (i,))
    basis = current.basis.extend([observed[i] for i in new.tolist()]) \
        if new.size else current.basis
    return CssState(round=current.round + 1, basis=basis,
                    selected=np.union1d(current.selected, new),
                    probs=current.probs, observed_columns=observed,
                    basis_dims=current.basis_dims + [basis.dim])

