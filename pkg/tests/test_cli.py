import contextlib
import io
import json
from unittest import mock

import pandas as pd

import adcp
from adcp import cli, exceptions, experiments, instances
from . import testing


class CliTestCase(testing.TempDirTestCase):

    def run_cli(self, *argv):
        output = io.StringIO()
        with contextlib.redirect_stdout(output):
            code = cli.main(list(argv))
        values = {}
        for line in output.getvalue().splitlines():
            key, _, value = line.rpartition('=')
            values[key] = value
        return code, values

    def test_complete(self):
        code, values = self.run_cli(
            'complete', '--n1', '40', '--n2', '30', '--rank', '2',
            '--m', '20', '--seed', '3')
        self.assertEqual(code, 0)
        self.assertEqual(values['success'], 'True')
        self.assertEqual(values['fully_observed_units'], '2')
        self.assertLess(int(values['entries_observed']), 40 * 30)

    def test_tensor(self):
        code, values = self.run_cli(
            'tensor', '--dims', '8,8,8', '--rank', '1',
            '--budgets', '6,8,10', '--seed', '1')
        self.assertEqual(code, 0)
        self.assertEqual(values['success'], 'True')
        self.assertEqual(values['units_per_level'], '1,1,1')

    def test_css(self):
        code, values = self.run_cli(
            'css', '--n1', '30', '--n2', '30', '--rank', '2',
            '--rounds', '2', '--per-round', '6', '--m', '15',
            '--unit-frobenius')
        self.assertEqual(code, 0)
        self.assertIn('squared_error', values)
        self.assertEqual(values['failed_columns'], '0')

    def test_bounds(self):
        code, values = self.run_cli(
            'bounds', 'matrix-budget', '--params', 'r=1', 'mu0=1',
            'delta=0.7357588823428847')
        self.assertEqual(code, 0)
        self.assertAlmostEqual(float(values['matrix-budget']), 36.0)

    def test_bounds_named_tuple(self):
        code, values = self.run_cli(
            'bounds', 'passive-lower-bound', '--params', 'dims=100,100',
            'rank=2')
        self.assertEqual(code, 0)
        self.assertEqual(values['reliable'], 'True')

    def test_bounds_dataclass(self):
        code, values = self.run_cli(
            'bounds', 'detection-constants', '--params', 'm=80', 'n=200',
            'd=5', 'mu_u=1', 'mu_v=1', 'delta=0.05')
        self.assertEqual(code, 0)
        self.assertEqual(values['in_regime'], 'True')

    def test_bounds_bad_parameters(self):
        code, _values = self.run_cli(
            'bounds', 'matrix-budget', '--params', 'rank=1')
        self.assertEqual(code, exceptions.ConfigError.value)
        code, _values = self.run_cli(
            'bounds', 'matrix-budget', '--params', 'r')
        self.assertEqual(code, 2)
        code, _values = self.run_cli(
            'bounds', 'matrix-budget', '--params', 'r=x')
        self.assertEqual(code, 2)

    def test_invalid_argument_exit_code(self):
        code, _values = self.run_cli(
            'bounds', 'matrix-budget', '--params', 'r=0', 'mu0=1',
            'delta=0.1')
        self.assertEqual(code, 2)

    def test_invalid_spec(self):
        code, _values = self.run_cli(
            'complete', '--n1', '4', '--n2', '4', '--rank', '5', '--m', '2')
        self.assertEqual(code, exceptions.InvalidSpec.value)

    def test_sweep(self):
        path = self.path / 'sweep.json'
        path.write_text(json.dumps({
            'kind': 'success-vs-p', 'n': [20], 'r': [1], 'p': [1.0],
            'trials': 2, 'output': str(self.path / 'out.csv')}))
        code, values = self.run_cli('sweep', '--config', str(path))
        self.assertEqual(code, 0)
        self.assertEqual(values['rows'], '1')
        self.assertIn('threshold[n=20,r=1]', values)

    def test_sweep_bad_config(self):
        path = self.path / 'sweep.json'
        path.write_text(json.dumps({'kind': 'timing', 'bogus': True}))
        code, _values = self.run_cli('sweep', '--config', str(path))
        self.assertEqual(code, 2)

    def run_bench(self, *argv):
        result = experiments.SweepResult(
            rows=pd.DataFrame(), path=self.path / 'bench.csv')
        with mock.patch.object(experiments, 'run_timing',
                               return_value=result) as run_timing:
            code, values = self.run_cli('bench', *argv)
        return code, values, run_timing.call_args[0][0]

    def test_bench_table1_preset(self):
        code, values, config = self.run_bench('--preset', 'table1')
        self.assertEqual(code, 0)
        self.assertEqual(values['rows'], '0')
        self.assertEqual(config.kind, experiments.ExperimentKind.TIMING)
        self.assertEqual(config.output, 'table1.csv')
        self.assertEqual(len(config.cells), 3)

    def test_bench_timing_alias(self):
        _code, _values, config = self.run_bench(
            '--preset', 'timing', '--include-large', '--output', 'out.csv')
        self.assertEqual(config.output, 'out.csv')
        self.assertEqual(len(config.cells), 9)

    def test_bench_default_preset(self):
        _code, _values, config = self.run_bench()
        self.assertEqual(config.output, 'table1.csv')

    def test_bench_unknown_preset(self):
        with contextlib.redirect_stderr(io.StringIO()), \
                self.assertRaises(SystemExit) as context:
            cli.main(['bench', '--preset', 'bogus'])
        self.assertEqual(context.exception.code, 2)

    def test_exit_code_mapping(self):
        self.assertEqual(cli._exit_code(exceptions.RunFailure('x')), 1)
        self.assertEqual(cli._exit_code(exceptions.ConfigError('x')), 2)

    def test_int_list(self):
        self.assertEqual(cli._int_list('1,2,3'), [1, 2, 3])


class InstanceContextTestCase(testing.TestCase):

    def test_instance(self):
        spec = instances.SyntheticSpec([10, 10], 1, seed=2)
        with self.assertLogs('adcp', 'INFO'):
            with adcp.instance(spec) as (truth, measurements):
                measurements.observe_column(0)
        self.assertEqual(measurements.observed_count, 10)
        self.assertEqual(truth.dims, (10, 10))
