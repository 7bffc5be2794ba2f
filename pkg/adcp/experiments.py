# coding: utf-8
"""Seeded Monte-Carlo sweeps over the completion algorithms.

Every sweep is a list of cells, each run for a number of independent trials
in a work pool. Trials own their instance, oracle and generator, seeded from
``SeedSequence(seed, spawn_key=(cell, trial))``, and are reduced in
``(cell, trial)`` order, so a configuration and seed always produce the same
rows. Rows are appended to the CSV as each cell finishes.

"""
import asyncio
import dataclasses
import datetime
import enum
import itertools
import json
import logging
import math
import os
import pathlib
import time
import typing
from concurrent import futures

import numpy as np
import pandas as pd
from scipy import linalg as sp_linalg

from adcp import (DEFAULT_SUCCESS_THRESHOLD, bounds, completion, css,
                  exceptions, instances, linalg, sampling)
from adcp.__version__ import version

LOGGER = logging.getLogger(__name__)

Payload = typing.Tuple[typing.Any, ...]
Outcome = typing.Dict[str, typing.Any]

TIMING_CELLS = [
    (1000, 10, 3.4), (1000, 50, 3.3), (1000, 100, 3.2),
    (5000, 10, 3.4), (5000, 50, 3.5), (5000, 100, 3.4),
    (10000, 10, 3.4), (10000, 50, 3.5), (10000, 100, 3.5)]
"""``(n, r, m / d_r)`` reference timing cells"""

DESK_MAX_N = 2000
LARGE_MAX_N = 10000

ERROR_ENVELOPE_FACTOR = 10.0
"""Allowed squared error of a noisy trial in units of
:math:`1/(n_1 n_2) + \\|R_\\Omega\\|_F^2`, the observed noise energy"""


class ExperimentKind(enum.Enum):
    SUCCESS_VS_P = 'success-vs-p'
    SUCCESS_VS_R = 'success-vs-r'
    TIMING = 'timing'
    NOISY_COHERENCE = 'noisy-coherence'
    DETECTION_VALIDATE = 'detection-validate'


DEFAULT_N = {ExperimentKind.SUCCESS_VS_R: [500]}
"""Sweep sizes used when a config leaves ``n`` empty"""


@dataclasses.dataclass
class SweepConfig:
    """A sweep, loadable from a JSON object with exactly these keys.

    Grids are swept as a Cartesian product. ``p`` is the fraction of each
    column sampled. When ``m`` is not empty it replaces ``p`` with absolute
    per-column counts. Timing sweeps take explicit ``(n, r, ratio)``
    ``cells`` or the product of ``n``, ``r`` and ``oversampling``.
    An empty ``n`` takes the kind default, 500 for rank collapse sweeps and
    200 otherwise.

    """
    kind: ExperimentKind
    n: typing.List[int] = dataclasses.field(default_factory=list)
    r: typing.List[int] = dataclasses.field(default_factory=lambda: [5])
    p: typing.List[float] = dataclasses.field(
        default_factory=lambda: [0.1, 0.2, 0.3, 0.4, 0.5])
    m: typing.List[int] = dataclasses.field(default_factory=list)
    sigma: typing.List[float] = dataclasses.field(
        default_factory=lambda: [0.0])
    theta: typing.List[float] = dataclasses.field(
        default_factory=lambda: [0.0])
    oversampling: typing.List[float] = dataclasses.field(
        default_factory=lambda: [3.4])
    cells: typing.List[typing.List[float]] = \
        dataclasses.field(default_factory=list)
    trials: int = 50
    seed: int = 0
    output: str = 'sweep.csv'
    family: str = instances.Family.GAUSSIAN_FACTORS.value
    mu0: float = 1.0
    sampling_mode: str = sampling.SamplingMode.WITH_REPLACEMENT.value
    success_threshold: float = DEFAULT_SUCCESS_THRESHOLD
    d: int = 5
    delta: float = 0.05
    css_rounds: int = 2
    css_columns_per_round: typing.Optional[int] = None
    css_m_per_column: typing.Optional[int] = None
    max_n: int = DESK_MAX_N
    workers: int = 1
    reproducible: bool = False
    plot: bool = True

    def __post_init__(self) -> None:
        if not self.n:
            self.n = list(DEFAULT_N.get(self.kind, [200]))

    @classmethod
    def from_dict(cls, values: typing.Dict[str, typing.Any]) \
            -> 'SweepConfig':
        """Build and validate a config.

        :raises adcp.exceptions.ConfigError: on unknown keys or values that
            do not validate

        """
        known = {field.name for field in dataclasses.fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise exceptions.ConfigError(
                'Unknown sweep config keys: {}'.format(', '.join(unknown)))
        values = dict(values)
        try:
            values['kind'] = ExperimentKind(values['kind'])
        except KeyError:
            raise exceptions.ConfigError('kind is required')
        except ValueError:
            raise exceptions.ConfigError(
                'Unsupported kind {!r}'.format(values['kind']))
        try:
            config = cls(**values)
        except TypeError as error:
            raise exceptions.ConfigError(str(error))
        config.validate()
        return config

    @classmethod
    def from_file(cls, path: typing.Union[str, os.PathLike]) \
            -> 'SweepConfig':
        """Load a JSON sweep config.

        :raises adcp.exceptions.ConfigError: when the file can not be read
            or parsed, or does not validate

        """
        try:
            values = json.loads(pathlib.Path(path).read_text())
        except (OSError, ValueError) as error:
            raise exceptions.ConfigError(
                'Could not load {}: {}'.format(path, error))
        if not isinstance(values, dict):
            raise exceptions.ConfigError(
                '{} does not hold a JSON object'.format(path))
        return cls.from_dict(values)

    def validate(self) -> None:
        grids = {'n': self.n, 'r': self.r, 'sigma': self.sigma,
                 'theta': self.theta}
        if self.kind in (ExperimentKind.SUCCESS_VS_P,
                         ExperimentKind.SUCCESS_VS_R) and not self.m:
            grids['p'] = self.p
        for name, grid in grids.items():
            if not isinstance(grid, list) or not grid:
                raise exceptions.ConfigError(
                    '{} must be a non-empty list'.format(name))
        if not isinstance(self.trials, int) or self.trials < 1:
            raise exceptions.ConfigError('trials must be at least 1')
        elif any(not 0 <= p <= 1 for p in self.p):
            raise exceptions.ConfigError('p values must be in [0, 1]')
        elif any(n < 1 for n in self.n) or any(r < 1 for r in self.r):
            raise exceptions.ConfigError('n and r values must be positive')
        elif not isinstance(self.workers, int) or self.workers < 1:
            raise exceptions.ConfigError('workers must be at least 1')
        elif not 0 < self.delta < 1:
            raise exceptions.ConfigError('delta must be in (0, 1)')
        try:
            instances.Family(self.family)
            sampling.SamplingMode(self.sampling_mode)
        except ValueError as error:
            raise exceptions.ConfigError(str(error))
        largest = max(self.n + [int(cell[0]) for cell in self.cells])
        if largest > self.max_n:
            raise exceptions.ConfigError(
                'n={} exceeds the memory guard max_n={}'.format(
                    largest, self.max_n))


@dataclasses.dataclass
class SweepResultRow:
    """Aggregate of one cell's trials. ``extra`` holds the columns specific
    to the experiment kind and is flattened into the CSV row.

    """
    experiment: str
    cell: int
    n: int
    r: int
    trials: int
    successes: int
    mean_relative_error: float
    max_relative_error: float
    mean_entries_observed: float
    mean_fully_observed_units: float
    audit_ok: bool
    wall_time: float
    extra: typing.Dict[str, typing.Any] = \
        dataclasses.field(default_factory=dict)

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials

    def as_dict(self, reproducible: bool = False) \
            -> typing.Dict[str, typing.Any]:
        row = dataclasses.asdict(self)
        row.pop('extra')
        row['success_rate'] = self.success_rate
        row.update(self.extra)
        if reproducible:
            row.pop('wall_time')
            row.pop('seconds', None)
        return row


@dataclasses.dataclass
class SweepResult:
    """The rows written, the derived thresholds and summary values"""
    rows: pd.DataFrame
    path: pathlib.Path
    thresholds: typing.Optional[pd.DataFrame] = None
    summary: typing.Dict[str, float] = dataclasses.field(default_factory=dict)


def threshold_crossing(xs: typing.Sequence[float],
                       rates: typing.Sequence[float],
                       level: float = 0.5) -> float:
    """Return where the success rate first reaches ``level``, linearly
    interpolated between grid points. Returns ``nan`` when it never does.

    """
    order = np.argsort(np.asarray(xs, dtype=np.float64), kind='stable')
    xs = np.asarray(xs, dtype=np.float64)[order]
    rates = np.asarray(rates, dtype=np.float64)[order]
    above = np.flatnonzero(rates >= level)
    if not above.size:
        return math.nan
    index = int(above[0])
    if index == 0:
        return float(xs[0])
    x0, x1, y0, y1 = xs[index - 1], xs[index], rates[index - 1], rates[index]
    return float(x0 + (level - y0) * (x1 - x0) / (y1 - y0))


def timing_budget(n: int, r: int, ratio: float) -> int:
    """Per-column sample count whose expected net total, ``m n`` plus the
    unseen entries of ``r`` fully observed columns, is closest to
    ``ratio * r(2n - r)``

    """
    target = ratio * bounds.degrees_of_freedom(n, r)

    def expected(m: int) -> float:
        return m * n + r * n * (1 - 1 / n) ** m

    low, high = 1, n
    while low < high:
        middle = (low + high) // 2
        if expected(middle) < target:
            low = middle + 1
        else:
            high = middle
    if low > 1 and target - expected(low - 1) < expected(low) - target:
        return low - 1
    return low


def run_sweep(config: SweepConfig) -> SweepResult:
    """Run the sweep ``config.kind`` names"""
    runners = {
        ExperimentKind.SUCCESS_VS_P: run_success_sweep,
        ExperimentKind.SUCCESS_VS_R: run_rank_collapse,
        ExperimentKind.TIMING: run_timing,
        ExperimentKind.NOISY_COHERENCE: run_noisy_coherence,
        ExperimentKind.DETECTION_VALIDATE: run_detection_validation
    }
    return runners[config.kind](config)


def run_success_sweep(config: SweepConfig) -> SweepResult:
    """Success probability of exact matrix completion over ``n``, ``r``,
    ``theta`` and the sampling grid. The 50% threshold of every ``(n, r)``
    pair is reported in samples per column.

    """
    _require_kind(config, ExperimentKind.SUCCESS_VS_P,
                  ExperimentKind.SUCCESS_VS_R)
    result = _completion_sweep(config, config.n)
    result.thresholds = _thresholds(result.rows, ['n', 'r'], 'm')
    _write_thresholds(config, result)
    return result


def run_rank_collapse(config: SweepConfig) -> SweepResult:
    """Success probability over ``r`` and ``p`` at the first ``n``. The 50%
    threshold ``p*(r)`` is reported per rank along with the ratios between
    consecutive ranks.

    """
    _require_kind(config, ExperimentKind.SUCCESS_VS_R)
    result = _completion_sweep(config, config.n[:1])
    thresholds = _thresholds(result.rows, ['r'], 'p')
    thresholds['ratio_to_previous'] = \
        thresholds['threshold'] / thresholds['threshold'].shift(1)
    result.thresholds = thresholds
    _write_thresholds(config, result)
    return result


def run_timing(config: SweepConfig) -> SweepResult:
    """Time one exact completion per ``(n, r, oversampling)`` cell"""
    _require_kind(config, ExperimentKind.TIMING)
    cells = [(int(n), int(r), float(ratio)) for n, r, ratio in config.cells] \
        or list(itertools.product(config.n, config.r, config.oversampling))
    writer = _Writer(config)
    for index, (n, r, ratio) in enumerate(cells):
        m = timing_budget(n, r, ratio)
        payloads = [(n, r, m, instances.Family.GAUSSIAN_FACTORS.value, 0.0,
                     config.mu0, config.sampling_mode,
                     config.success_threshold, _seed(config, index, trial))
                    for trial in range(config.trials)]
        outcomes = _run_trials(_completion_trial, payloads, config.workers)
        row = _aggregate(config, index, n, r, outcomes)
        d_r = bounds.degrees_of_freedom(n, r)
        row.extra.update({
            'oversampling': ratio,
            'm': m,
            'd_r': d_r,
            'realized_oversampling': row.mean_entries_observed / d_r,
            'm_over_n2': row.mean_entries_observed / n ** 2,
            'seconds': float(np.mean([o['wall_time'] for o in outcomes]))})
        writer.append(row)
    return writer.result()


def run_noisy_coherence(config: SweepConfig) -> SweepResult:
    """Column subset selection error across row-space coherence.

    Instances are coherent-row matrices scaled to unit Frobenius norm with
    entry noise of standard deviation :math:`\\sigma/\\sqrt{n_1 n_2}`. The
    selection budget is the same for every ``theta`` so errors are
    comparable. The ratio of the largest to the smallest mean squared error
    over ``theta`` is reported as ``flatness`` per ``(n, r, sigma)``.
    Every trial also records the noise energy
    :math:`\\|R_\\Omega\\|_F^2` over the entries it revealed and the ratio
    of its squared error to :math:`1/(n_1 n_2) + \\|R_\\Omega\\|_F^2`.
    Rows carry the mean noise energy, the largest ratio and how many
    trials exceeded :data:`ERROR_ENVELOPE_FACTOR`.

    """
    _require_kind(config, ExperimentKind.NOISY_COHERENCE)
    writer = _Writer(config)
    cells = list(itertools.product(config.n, config.r, config.sigma,
                                   config.theta))
    for index, (n, r, sigma, theta) in enumerate(cells):
        per_round = config.css_columns_per_round or 2 * r
        m = config.css_m_per_column or min(n, 16 * r)
        payloads = [(n, r, sigma, theta, config.css_rounds, per_round, m,
                     config.sampling_mode, config.success_threshold,
                     _seed(config, index, trial))
                    for trial in range(config.trials)]
        outcomes = _run_trials(_css_trial, payloads, config.workers)
        row = _aggregate(config, index, n, r, outcomes)
        row.extra.update({
            'sigma': sigma,
            'theta': theta,
            'rounds': config.css_rounds,
            'columns_per_round': per_round,
            'm_per_column': m,
            'mu_v': float(np.mean([o['mu_v'] for o in outcomes])),
            'mean_squared_error': float(
                np.mean([o['squared_error'] for o in outcomes])),
            'mean_failed_columns': float(
                np.mean([o['failed'] for o in outcomes])),
            'mean_noise_energy': float(
                np.mean([o['noise_energy'] for o in outcomes])),
            'envelope_violations': sum(
                not o['within_envelope'] for o in outcomes),
            'max_envelope_ratio': float(
                max(o['envelope_ratio'] for o in outcomes))})
        writer.append(row)
    result = writer.result()
    frame = result.rows
    for (n, r, sigma), group in frame.groupby(['n', 'r', 'sigma']):
        errors = group['mean_squared_error']
        flatness = float(errors.max() / errors.min()) \
            if errors.min() > 0 else math.nan
        result.summary['flatness_n{}_r{}_sigma{}'.format(n, r, sigma)] = \
            flatness
        LOGGER.info('Error flatness across theta for n=%i r=%i sigma=%s: '
                    '%.3f', n, r, sigma, flatness)
    return result


def run_detection_validation(config: SweepConfig) -> SweepResult:
    """Monte-Carlo frequencies at which the detection sandwich and its
    three supporting concentration bounds are violated, against their
    allowed rates plus a margin of three binomial standard errors.

    When ``m`` is empty it is twice the detection precondition, evaluated
    at the coherence of one basis drawn like the trial bases.

    """
    _require_kind(config, ExperimentKind.DETECTION_VALIDATE)
    writer = _Writer(config)
    cells = []
    for n in config.n:
        grid = config.m or [_detection_budget(config, n)]
        cells.extend((n, m) for m in grid)
    allowed = {'detection': 4 * config.delta, 'norm': 2 * config.delta,
               'cross': config.delta, 'inverse': config.delta}
    for index, (n, m) in enumerate(cells):
        payloads = [(n, config.d, m, config.delta,
                     _seed(config, index, trial))
                    for trial in range(config.trials)]
        outcomes = _run_trials(_detection_trial, payloads, config.workers)
        row = SweepResultRow(
            experiment=config.kind.value, cell=index, n=n, r=config.d,
            trials=config.trials,
            successes=sum(not o['detection'] for o in outcomes),
            mean_relative_error=0.0, max_relative_error=0.0,
            mean_entries_observed=float(m), mean_fully_observed_units=0.0,
            audit_ok=True,
            wall_time=float(sum(o['wall_time'] for o in outcomes)))
        row.extra.update({'m': m, 'delta': config.delta,
                          'in_regime': all(o['in_regime'] for o in outcomes)})
        for name, rate in allowed.items():
            violations = float(np.mean([o[name] for o in outcomes]))
            margin = 3 * math.sqrt(rate * (1 - rate) / config.trials)
            row.extra['{}_violation_rate'.format(name)] = violations
            row.extra['{}_allowed'.format(name)] = rate
            row.extra['{}_within_bound'.format(name)] = \
                violations <= rate + margin
        writer.append(row)
    return writer.result()


def timing_config(include_large: bool = False, output: str = 'table1.csv',
                  seed: int = 0) -> SweepConfig:
    """The timing preset, limited to desk scale unless ``include_large``"""
    max_n = LARGE_MAX_N if include_large else DESK_MAX_N
    return SweepConfig(
        kind=ExperimentKind.TIMING, trials=1, seed=seed, output=output,
        max_n=max_n, n=[1000],
        cells=[[n, r, ratio] for n, r, ratio in TIMING_CELLS if n <= max_n])


def plot_script(config: SweepConfig, csv_path: pathlib.Path) -> str:
    """Return a matplotlib script that reads only the CSV at ``csv_path``"""
    x, y, group = {
        ExperimentKind.SUCCESS_VS_P: ('m', 'success_rate', 'n'),
        ExperimentKind.SUCCESS_VS_R: ('p_over_r', 'success_rate', 'r'),
        ExperimentKind.TIMING: ('r', 'seconds', 'n'),
        ExperimentKind.NOISY_COHERENCE: ('mu_v', 'mean_squared_error',
                                         'sigma'),
        ExperimentKind.DETECTION_VALIDATE: ('m', 'detection_violation_rate',
                                            'n')
    }[config.kind]
    return PLOT_TEMPLATE.format(csv=csv_path.name, x=x, y=y, group=group,
                                title=config.kind.value,
                                image=csv_path.with_suffix('.png').name)


PLOT_TEMPLATE = '''\
import pathlib

import matplotlib.pyplot as plt
import pandas as pd

here = pathlib.Path(__file__).parent
frame = pd.read_csv(here / '{csv}', comment='#')
figure, axes = plt.subplots()
for key, group in frame.groupby('{group}'):
    group = group.sort_values('{x}')
    axes.plot(group['{x}'], group['{y}'], marker='o',
              label='{group}={{}}'.format(key))
axes.set_xlabel('{x}')
axes.set_ylabel('{y}')
axes.set_title('{title}')
axes.legend()
figure.savefig(here / '{image}', dpi=150)
'''


class _Writer:
    """Appends one row per finished cell to the CSV"""

    def __init__(self, config: SweepConfig) -> None:
        self._config = config
        self._path = pathlib.Path(config.output)
        self._rows: typing.List[typing.Dict[str, typing.Any]] = []
        self._path.parent.mkdir(parents=True, exist_ok=True)
        with self._path.open('w') as handle:
            if not config.reproducible:
                handle.write('# adcp {} {} {}\n'.format(
                    version, config.kind.value,
                    datetime.datetime.now(datetime.timezone.utc).isoformat()))

    def append(self, row: SweepResultRow) -> None:
        values = row.as_dict(self._config.reproducible)
        pd.DataFrame([values]).to_csv(
            self._path, mode='a', header=not self._rows, index=False)
        self._rows.append(values)
        LOGGER.info('Cell %i (n=%i, r=%i): success rate %.3f over %i trials',
                    row.cell, row.n, row.r, row.success_rate, row.trials)

    def result(self) -> SweepResult:
        if self._config.plot:
            script = pathlib.Path(str(self._path) + '.plot.py')
            script.write_text(plot_script(self._config, self._path))
        return SweepResult(pd.DataFrame(self._rows), self._path)


def _completion_sweep(config: SweepConfig,
                      sizes: typing.List[int]) -> SweepResult:
    writer = _Writer(config)
    cells = list(itertools.product(sizes, config.r, config.theta,
                                   config.m or config.p))
    for index, (n, r, theta, level) in enumerate(cells):
        if config.m:
            m = int(level)
        else:
            m = max(1, int(round(level * n)))
        mode = config.sampling_mode
        if m >= n and not config.m:
            mode = sampling.SamplingMode.FULL.value
        payloads = [(n, r, min(m, n * sampling.MAX_OVERSAMPLING),
                     config.family, theta, config.mu0, mode,
                     config.success_threshold, _seed(config, index, trial))
                    for trial in range(config.trials)]
        outcomes = _run_trials(_completion_trial, payloads, config.workers)
        row = _aggregate(config, index, n, r, outcomes)
        p = m / n
        row.extra.update({
            'theta': theta,
            'm': m,
            'p': p,
            'np': m,
            'np_log2n': m * math.log(n) ** 2,
            'p_over_r': p / r,
            'p_over_r15': p / r ** 1.5})
        writer.append(row)
    return writer.result()


def _aggregate(config: SweepConfig, cell: int, n: int, r: int,
               outcomes: typing.List[Outcome]) -> SweepResultRow:
    errors = np.array([o['relative_error'] for o in outcomes])
    return SweepResultRow(
        experiment=config.kind.value, cell=cell, n=n, r=r,
        trials=len(outcomes),
        successes=sum(bool(o['success']) for o in outcomes),
        mean_relative_error=float(np.mean(errors)),
        max_relative_error=float(np.max(errors)),
        mean_entries_observed=float(
            np.mean([o['entries_observed'] for o in outcomes])),
        mean_fully_observed_units=float(
            np.mean([o['units'] for o in outcomes])),
        audit_ok=all(o['audit_ok'] for o in outcomes),
        wall_time=float(sum(o['wall_time'] for o in outcomes)))


def _thresholds(frame: pd.DataFrame, keys: typing.List[str],
                x: str) -> pd.DataFrame:
    rows = []
    for key, group in frame.groupby(keys):
        key = key if isinstance(key, tuple) else (key,)
        values = dict(zip(keys, key))
        values['threshold'] = threshold_crossing(
            group[x].tolist(), group['success_rate'].tolist())
        values['axis'] = x
        rows.append(values)
    return pd.DataFrame(rows)


def _write_thresholds(config: SweepConfig, result: SweepResult) -> None:
    if result.thresholds is None:
        return
    path = result.path.with_name(result.path.stem + '.thresholds.csv')
    result.thresholds.to_csv(path, index=False)
    LOGGER.info('Wrote %i thresholds to %s', len(result.thresholds), path)


def _require_kind(config: SweepConfig, *kinds: ExperimentKind) -> None:
    if config.kind not in kinds:
        raise exceptions.ConfigError(
            'Expected a {} sweep, got {}'.format(
                ' or '.join(kind.value for kind in kinds), config.kind.value))


def _seed(config: SweepConfig, cell: int,
          trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(config.seed, spawn_key=(cell, trial))


def _run_trials(function: typing.Callable[[Payload], Outcome],
                payloads: typing.List[Payload],
                workers: int) -> typing.List[Outcome]:
    return asyncio.run(_gather(function, payloads, workers))


async def _gather(function: typing.Callable[[Payload], Outcome],
                  payloads: typing.List[Payload],
                  workers: int) -> typing.List[Outcome]:
    loop = asyncio.get_running_loop()
    executor: futures.Executor = futures.ProcessPoolExecutor(workers) \
        if workers > 1 else futures.ThreadPoolExecutor(1)
    with executor:
        return list(await asyncio.gather(
            *(loop.run_in_executor(executor, function, payload)
              for payload in payloads)))


def _detection_budget(config: SweepConfig, n: int) -> int:
    rng = np.random.default_rng(
        np.random.SeedSequence(config.seed, spawn_key=(n,)))
    mu_u = linalg.coherence_subspace(
        linalg.orthonormalize(rng.standard_normal((n, config.d))))
    return min(n * sampling.MAX_OVERSAMPLING, 2 * math.ceil(
        bounds.detection_precondition(config.d, mu_u, config.delta)))


def _trial_seeds(seed: np.random.SeedSequence) -> typing.Tuple[int, int]:
    instance_seed, run_seed = seed.generate_state(2, np.uint64).tolist()
    return int(instance_seed), int(run_seed)


def _completion_trial(payload: Payload) -> Outcome:
    n, r, m, family, theta, mu0, mode, threshold, seed = payload
    instance_seed, run_seed = _trial_seeds(seed)
    spec = instances.SyntheticSpec(
        [n, n], r, instances.Family(family), seed=instance_seed,
        mu0=mu0, theta=theta)
    truth, measurements = instances.generate(spec)
    config = completion.NoiselessConfig(
        budgets=[int(m)], sampling_mode=sampling.SamplingMode(mode))
    try:
        report = completion.complete_matrix(measurements, n, n, config,
                                            run_seed)
    except exceptions.RunFailure as error:
        report = error.report
    report.evaluate(truth.ground_truth, threshold)
    error = report.relative_error
    return {
        'success': report.success,
        'relative_error': error if math.isfinite(error) else math.inf,
        'entries_observed': report.entries_observed,
        'units': report.fully_observed_units,
        'audit_ok': report.entries_observed == measurements.observed_count,
        'wall_time': report.wall_time}


def _css_trial(payload: Payload) -> Outcome:
    (n, r, sigma, theta, rounds, per_round, m, mode, threshold,
     seed) = payload
    instance_seed, run_seed = _trial_seeds(seed)
    spec = instances.SyntheticSpec(
        [n, n], r, instances.Family.COHERENT_ROW,
        noise_sigma=sigma / n, seed=instance_seed, theta=theta,
        unit_frobenius=True)
    truth, measurements = instances.generate(spec)
    config = css.CssConfig(rounds=rounds, columns_per_round=per_round,
                           m_per_column=m,
                           sampling_mode=sampling.SamplingMode(mode))
    report = css.css_complete(measurements, n, n, config, run_seed)
    report.evaluate(truth.ground_truth, threshold)
    squared_error = float(np.sum((report.estimate - truth.ground_truth) ** 2))
    noise_energy = measurements.noise_energy
    envelope = squared_error / (1 / (n * n) + noise_energy)
    return {
        'success': report.success,
        'relative_error': report.relative_error,
        'squared_error': squared_error,
        'noise_energy': noise_energy,
        'envelope_ratio': envelope,
        'within_envelope': envelope <= ERROR_ENVELOPE_FACTOR,
        'entries_observed': report.entries_observed,
        'units': report.fully_observed_units,
        'failed': len(report.failed_units),
        'mu_v': truth.row_space_coherence,
        'audit_ok': report.entries_observed == measurements.observed_count,
        'wall_time': report.wall_time}


def _detection_trial(payload: Payload) -> Outcome:
    n, d, m, delta, seed = payload
    rng = np.random.default_rng(seed)
    started = time.monotonic()
    basis = linalg.orthonormalize(rng.standard_normal((n, d)))
    x = basis.vectors @ rng.standard_normal(d)
    v = rng.standard_normal(n)
    v = v - linalg.project(basis, v)
    energy = float(v @ v)
    constants = bounds.detection_constants(
        m, n, d, linalg.coherence_subspace(basis),
        linalg.coherence_vector(v), delta)
    omega = sampling.sample_index_set(n, m, rng=rng)
    restricted = basis.restrict(omega)
    residual = linalg.SubsampledProjector(basis, omega).residual_energy(
        (x + v)[omega.indices])
    lower, upper = constants.residual_bounds(energy)
    low_norm, high_norm = constants.norm_bounds(energy)
    v_omega = v[omega.indices]
    singular_values = sp_linalg.svdvals(restricted)
    smallest = float(singular_values[-1]) if singular_values.size == d \
        else 0.0
    inverse_norm = 1 / smallest ** 2 if smallest > 0 else math.inf
    return {
        'detection': not lower <= residual <= upper,
        'norm': not low_norm <= float(v_omega @ v_omega) <= high_norm,
        'cross': float(np.sum((restricted.T @ v_omega) ** 2))
        > constants.cross_bound(energy),
        'inverse': inverse_norm > constants.inverse_bound(),
        'in_regime': constants.in_regime,
        'wall_time': time.monotonic() - started}
