# coding: utf-8
"""The ``adcp`` command line.

Every subcommand prints ``key=value`` lines. Exit codes are ``0`` on
success, ``1`` when a run fails and ``2`` for a bad configuration.

"""
import argparse
import dataclasses
import logging
import math
import sys
import typing

import numpy as np

from adcp import (DEFAULT_SUCCESS_THRESHOLD, bounds, completion, css,
                  exceptions, experiments, instances, sampling)
from adcp.__version__ import version

LOGGER = logging.getLogger(__name__)

LOG_LEVELS = [logging.WARNING, logging.INFO, logging.DEBUG]

BENCH_PRESETS = {
    'table1': experiments.timing_config,
    'timing': experiments.timing_config
}


def main(argv: typing.Optional[typing.Sequence[str]] = None) -> int:
    """Parse ``argv``, run the subcommand and return its exit code"""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=LOG_LEVELS[min(args.verbose, len(LOG_LEVELS) - 1)],
        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    try:
        args.handler(args)
    except tuple(exceptions.EXIT_CODES) as error:
        LOGGER.error('%s: %s', getattr(error, 'name', 'ERROR'), error)
        report = getattr(error, 'report', None)
        if report is not None:
            _emit({'entries_observed': report.entries_observed,
                   'fully_observed_units': report.fully_observed_units})
        return _exit_code(error)
    except (exceptions.InvalidArgument, exceptions.DimensionMismatch) \
            as error:
        LOGGER.error('Invalid arguments: %s', error)
        return exceptions.ConfigError.value
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='adcp',
        description='Adaptive low-rank matrix and tensor completion')
    parser.add_argument('--version', action='version',
                        version='%(prog)s {}'.format(version))
    parser.add_argument('-v', '--verbose', action='count', default=0,
                        help='Increase logging verbosity, repeatable')
    commands = parser.add_subparsers(dest='command', required=True)

    complete = commands.add_parser(
        'complete', help='Exact completion of a synthetic matrix')
    complete.add_argument('--n1', type=int, required=True)
    complete.add_argument('--n2', type=int, required=True)
    complete.add_argument('--rank', type=int, required=True)
    complete.add_argument('--m', type=int, required=True,
                          help='Samples per column')
    _add_instance_arguments(complete)
    complete.add_argument('--mode', default='with-replacement',
                          choices=[mode.value for mode in
                                   completion.SAMPLED_MODES])
    complete.set_defaults(handler=_complete)

    tensor = commands.add_parser(
        'tensor', help='Exact completion of a synthetic tensor')
    tensor.add_argument('--dims', type=_int_list, required=True,
                        help='Comma separated dimensions')
    tensor.add_argument('--rank', type=int, required=True)
    tensor.add_argument('--budgets', type=_int_list, required=True,
                        help='Comma separated per-level sample counts')
    _add_instance_arguments(tensor)
    tensor.set_defaults(handler=_tensor)

    subset = commands.add_parser(
        'css', help='Noisy completion by column subset selection')
    subset.add_argument('--n1', type=int, required=True)
    subset.add_argument('--n2', type=int, required=True)
    subset.add_argument('--rank', type=int, required=True)
    subset.add_argument('--rounds', type=int, required=True)
    subset.add_argument('--per-round', type=int, required=True)
    subset.add_argument('--m', type=int, required=True,
                        help='Samples per column')
    subset.add_argument('--truncate-rank', type=int)
    subset.add_argument('--unit-frobenius', action='store_true')
    _add_instance_arguments(subset)
    subset.set_defaults(handler=_css)

    formulas = commands.add_parser(
        'bounds', help='Evaluate a sample complexity formula')
    formulas.add_argument('formula', choices=sorted(bounds.FORMULAS))
    formulas.add_argument('--params', nargs='*', default=[],
                          metavar='NAME=VALUE',
                          help='Formula arguments, lists comma separated')
    formulas.set_defaults(handler=_bounds)

    sweep = commands.add_parser('sweep', help='Run a sweep config')
    sweep.add_argument('--config', required=True,
                       help='Path to a JSON sweep config')
    sweep.set_defaults(handler=_sweep)

    bench = commands.add_parser('bench', help='Run a timing preset')
    bench.add_argument('--preset', choices=sorted(BENCH_PRESETS),
                       default='table1',
                       help='timing is an alias of table1')
    bench.add_argument('--include-large', action='store_true',
                       help='Include the n > 2000 rows')
    bench.add_argument('--output', help='CSV path, <preset>.csv by default')
    bench.add_argument('--seed', type=int, default=0)
    bench.set_defaults(handler=_bench)
    return parser


def _add_instance_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--seed', type=int, default=0)
    parser.add_argument(
        '--family', default=instances.Family.GAUSSIAN_FACTORS.value,
        choices=[family.value for family in instances.Family])
    parser.add_argument('--sigma', type=float, default=0.0,
                        help='Per-entry noise standard deviation')
    parser.add_argument('--mu0', type=float, default=1.0)
    parser.add_argument('--theta', type=float, default=0.0)


def _spec(args: argparse.Namespace,
          dims: typing.List[int]) -> instances.SyntheticSpec:
    return instances.SyntheticSpec(
        dims, args.rank, instances.Family(args.family),
        noise_sigma=args.sigma, seed=args.seed, mu0=args.mu0,
        theta=args.theta,
        unit_frobenius=getattr(args, 'unit_frobenius', False))


def _complete(args: argparse.Namespace) -> None:
    truth, measurements = instances.gen_matrix(
        _spec(args, [args.n1, args.n2]))
    config = completion.NoiselessConfig(
        budgets=[args.m], sampling_mode=sampling.SamplingMode(args.mode),
        rank_hint=args.rank, seed=args.seed)
    report = completion.complete_matrix(
        measurements, args.n1, args.n2, config)
    _emit_report(report, truth)


def _tensor(args: argparse.Namespace) -> None:
    truth, measurements = instances.generate(_spec(args, args.dims))
    config = completion.NoiselessConfig(budgets=args.budgets,
                                        rank_hint=args.rank, seed=args.seed)
    report = completion.complete_tensor(measurements, args.dims, config)
    _emit_report(report, truth)


def _css(args: argparse.Namespace) -> None:
    truth, measurements = instances.gen_matrix(
        _spec(args, [args.n1, args.n2]))
    config = css.CssConfig(
        rounds=args.rounds, columns_per_round=args.per_round,
        m_per_column=args.m, truncate_rank=args.truncate_rank,
        seed=args.seed)
    report = css.css_complete(measurements, args.n1, args.n2, config)
    _emit_report(report, truth)
    _emit({'squared_error': float(np.sum(
        (report.estimate - truth.ground_truth) ** 2)),
        'best_rank_r_error': css.best_rank_r_error(
            truth.ground_truth, args.rank),
        'failed_columns': len(report.failed_units)})


def _bounds(args: argparse.Namespace) -> None:
    formula = bounds.FORMULAS[args.formula]
    params = dict(_parse_param(param) for param in args.params)
    try:
        if args.formula in ('passive-lower-bound',
                            'passive-lower-bound-exact'):
            result = formula(bounds.BoundParams(**params))
        else:
            result = formula(**params)
    except TypeError as error:
        raise exceptions.ConfigError(
            'Bad parameters for {}: {}'.format(args.formula, error))
    if dataclasses.is_dataclass(result):
        values = dataclasses.asdict(result)
        values['in_regime'] = result.in_regime
    elif isinstance(result, tuple) and hasattr(result, '_asdict'):
        values = result._asdict()
    else:
        values = {args.formula: result}
    _emit(values)


def _sweep(args: argparse.Namespace) -> None:
    result = experiments.run_sweep(
        experiments.SweepConfig.from_file(args.config))
    _emit_sweep(result)


def _bench(args: argparse.Namespace) -> None:
    config = BENCH_PRESETS[args.preset](
        args.include_large, args.output or '{}.csv'.format(args.preset),
        args.seed)
    result = experiments.run_timing(config)
    _emit_sweep(result)


def _emit_report(report: completion.CompletionReport,
                 truth: instances.Instance) -> None:
    report.evaluate(truth.ground_truth, DEFAULT_SUCCESS_THRESHOLD)
    _emit({'success': report.success,
           'relative_error': report.relative_error,
           'entries_observed': report.entries_observed,
           'entries_observed_gross': report.entries_observed_gross,
           'fully_observed_units': report.fully_observed_units,
           'units_per_level': ','.join(str(units) for units in
                                       report.units_per_level),
           'basis_dim_final': report.basis_dim_final,
           'mu0_actual': truth.mu0_actual,
           'row_space_coherence': truth.row_space_coherence,
           'wall_time': report.wall_time})


def _emit_sweep(result: experiments.SweepResult) -> None:
    _emit({'output': str(result.path), 'rows': len(result.rows)})
    if result.thresholds is not None:
        for row in result.thresholds.to_dict('records'):
            keys = ','.join('{}={}'.format(key, row[key]) for key in row
                            if key not in ('threshold', 'axis',
                                           'ratio_to_previous'))
            print('threshold[{}]={}'.format(keys, row['threshold']))
    _emit(result.summary)


def _emit(values: typing.Dict[str, typing.Any]) -> None:
    for key, value in values.items():
        if isinstance(value, (list, tuple)):
            value = ','.join(str(item) for item in value)
        elif isinstance(value, float) and not math.isfinite(value):
            value = str(value)
        print('{}={}'.format(key, value))


def _exit_code(error: Exception) -> int:
    for cls, code in exceptions.EXIT_CODES.items():
        if isinstance(error, cls):
            return code
    return 1


def _int_list(value: str) -> typing.List[int]:
    try:
        return [int(item) for item in value.split(',') if item]
    except ValueError:
        raise argparse.ArgumentTypeError(
            '{!r} is not a comma separated list of integers'.format(value))


def _parse_param(param: str) -> typing.Tuple[str, typing.Any]:
    name, sep, value = param.partition('=')
    if not sep:
        raise exceptions.ConfigError(
            'Expected NAME=VALUE, got {!r}'.format(param))
    name = name.replace('-', '_')
    if ',' in value:
        return name, [_number(item) for item in value.split(',') if item]
    return name, _number(value)


def _number(value: str) -> typing.Union[int, float]:
    try:
        return int(value)
    except ValueError:
        try:
            return float(value)
        except ValueError:
            raise exceptions.ConfigError(
                '{!r} is not a number'.format(value))


if __name__ == '__main__':  # pragma: nocover
    sys.exit(main())
