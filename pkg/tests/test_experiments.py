import json
import math

import pandas as pd

from adcp import exceptions, experiments
from . import testing


class ThresholdTestCase(testing.TestCase):

    def test_interpolates(self):
        self.assertAlmostEqual(experiments.threshold_crossing(
            [1, 2, 3], [0.0, 0.4, 0.8]), 2.25)

    def test_unsorted_grid(self):
        self.assertAlmostEqual(experiments.threshold_crossing(
            [3, 1, 2], [0.8, 0.0, 0.4]), 2.25)

    def test_first_point(self):
        self.assertEqual(
            experiments.threshold_crossing([5, 6], [0.9, 1.0]), 5.0)

    def test_never_crosses(self):
        self.assertTrue(math.isnan(
            experiments.threshold_crossing([1, 2], [0.0, 0.1])))


class TimingBudgetTestCase(testing.TestCase):

    def test_reference_cell(self):
        n, r = 1000, 10
        m = experiments.timing_budget(n, r, 3.4)
        expected = m * n + r * n * (1 - 1 / n) ** m
        self.assertAlmostEqual(expected / 19900, 3.4, delta=0.05)
        self.assertAlmostEqual(expected / n ** 2, 0.068, delta=0.002)

    def test_capped_at_n(self):
        self.assertEqual(experiments.timing_budget(20, 2, 100.0), 20)


class SweepConfigTestCase(testing.TempDirTestCase):

    def test_from_dict(self):
        config = experiments.SweepConfig.from_dict(
            {'kind': 'success-vs-p', 'n': [50], 'trials': 3})
        self.assertEqual(config.kind, experiments.ExperimentKind.SUCCESS_VS_P)
        self.assertEqual(config.n, [50])

    def test_unknown_key(self):
        with self.assertRaises(exceptions.ConfigError):
            experiments.SweepConfig.from_dict(
                {'kind': 'timing', 'bogus': 1})

    def test_missing_or_bad_kind(self):
        with self.assertRaises(exceptions.ConfigError):
            experiments.SweepConfig.from_dict({'n': [10]})
        with self.assertRaises(exceptions.ConfigError):
            experiments.SweepConfig.from_dict({'kind': 'nope'})

    def test_invalid_values(self):
        for values in ({'trials': 0}, {'p': [1.5]}, {'n': []},
                       {'workers': 0}, {'family': 'nope'},
                       {'sampling_mode': 'nope'}, {'n': [5000]}):
            values['kind'] = 'success-vs-p'
            with self.assertRaises(exceptions.ConfigError, msg=values):
                experiments.SweepConfig.from_dict(values)

    def test_memory_guard_can_be_raised(self):
        config = experiments.SweepConfig.from_dict(
            {'kind': 'timing', 'n': [5000], 'max_n': 10000})
        self.assertEqual(config.max_n, 10000)

    def test_from_file(self):
        path = self.path / 'sweep.json'
        path.write_text(json.dumps({'kind': 'timing', 'trials': 2}))
        self.assertEqual(
            experiments.SweepConfig.from_file(path).trials, 2)

    def test_from_bad_file(self):
        path = self.path / 'sweep.json'
        path.write_text('{not json')
        with self.assertRaises(exceptions.ConfigError):
            experiments.SweepConfig.from_file(path)
        path.write_text('[]')
        with self.assertRaises(exceptions.ConfigError):
            experiments.SweepConfig.from_file(path)
        with self.assertRaises(exceptions.ConfigError):
            experiments.SweepConfig.from_file(self.path / 'missing.json')

    def test_default_n_per_kind(self):
        collapse = experiments.SweepConfig.from_dict({'kind': 'success-vs-r'})
        self.assertEqual(collapse.n, [500])
        sweep = experiments.SweepConfig.from_dict({'kind': 'success-vs-p'})
        self.assertEqual(sweep.n, [200])
        given = experiments.SweepConfig.from_dict(
            {'kind': 'success-vs-r', 'n': [40]})
        self.assertEqual(given.n, [40])

    def test_timing_preset(self):
        self.assertEqual(len(experiments.timing_config().cells), 3)
        self.assertEqual(
            len(experiments.timing_config(include_large=True).cells), 9)


class SweepTestCase(testing.TempDirTestCase):

    def config(self, **kwargs) -> experiments.SweepConfig:
        values = {'kind': 'success-vs-p', 'n': [20], 'r': [2],
                  'p': [0.0, 1.0], 'trials': 3, 'reproducible': True,
                  'output': str(self.path / 'sweep.csv')}
        values.update(kwargs)
        return experiments.SweepConfig.from_dict(values)

    def test_degenerate_cells(self):
        result = experiments.run_sweep(self.config())
        rates = result.rows.set_index('p')['success_rate']
        self.assertEqual(rates[1.0], 1.0)
        self.assertEqual(rates[0.05], 0.0)
        self.assertTrue(result.rows['audit_ok'].all())
        self.assertEqual(len(result.thresholds), 1)
        self.assertEqual(result.thresholds['threshold'][0], 10.5)
        self.assertTrue(
            (self.path / 'sweep.thresholds.csv').is_file())
        self.assertTrue((self.path / 'sweep.csv.plot.py').is_file())

    def test_csv_matches_rows(self):
        result = experiments.run_sweep(self.config())
        frame = pd.read_csv(result.path, comment='#')
        self.assertEqual(list(frame.columns), list(result.rows.columns))
        self.assertNotIn('wall_time', frame.columns)
        self.assertEqual(len(frame), 2)

    def test_reproducible_output_is_identical(self):
        first = experiments.run_sweep(self.config())
        content = first.path.read_bytes()
        second = experiments.run_sweep(self.config())
        self.assertEqual(second.path.read_bytes(), content)

    def test_header_line(self):
        result = experiments.run_sweep(
            self.config(reproducible=False, plot=False))
        self.assertTrue(result.path.read_text().startswith(
            '# adcp '))
        self.assertIn('wall_time', result.rows.columns)
        self.assertFalse((self.path / 'sweep.csv.plot.py').exists())

    def test_absolute_m_grid(self):
        result = experiments.run_sweep(self.config(m=[4, 20], p=[]))
        self.assertEqual(result.rows['m'].tolist(), [4, 20])

    def test_rank_collapse(self):
        result = experiments.run_sweep(self.config(
            kind='success-vs-r', r=[1, 2], p=[0.05, 1.0]))
        self.assertEqual(result.thresholds['r'].tolist(), [1, 2])
        self.assertIn('ratio_to_previous', result.thresholds.columns)
        self.assertIn('p_over_r', result.rows.columns)

    def test_timing(self):
        result = experiments.run_sweep(self.config(
            kind='timing', cells=[[30, 2, 3.4]], trials=1))
        row = result.rows.iloc[0]
        self.assertEqual(row['d_r'], 116)
        self.assertEqual(row['m'], experiments.timing_budget(30, 2, 3.4))
        self.assertNotIn('seconds', result.rows.columns)
        self.assertEqual(row['success_rate'], 1.0)

    def test_timing_is_independent_of_workers(self):
        serial = experiments.run_sweep(self.config(
            kind='timing', cells=[[30, 2, 3.4]], trials=2,
            output=str(self.path / 'serial.csv')))
        parallel = experiments.run_sweep(self.config(
            kind='timing', cells=[[30, 2, 3.4]], trials=2, workers=2,
            output=str(self.path / 'parallel.csv')))
        self.assertEqual(serial.path.read_bytes(),
                         parallel.path.read_bytes())

    def test_noisy_coherence(self):
        result = experiments.run_sweep(self.config(
            kind='noisy-coherence', r=[1], sigma=[0.0],
            theta=[0.0, 1.0], trials=2, css_rounds=1))
        rows = result.rows.sort_values('theta')
        self.assertLess(rows['mu_v'].iloc[0], rows['mu_v'].iloc[1])
        self.assertTrue((rows['mean_relative_error'] <= 1e-8).all())
        self.assertIn('flatness_n20_r1_sigma0.0', result.summary)
        self.assertTrue((rows['mean_noise_energy'] == 0.0).all())
        self.assertTrue((rows['envelope_violations'] == 0).all())
        self.assertTrue((rows['max_envelope_ratio']
                         <= experiments.ERROR_ENVELOPE_FACTOR).all())

    def test_noisy_coherence_records_noise_energy(self):
        result = experiments.run_sweep(self.config(
            kind='noisy-coherence', r=[1], sigma=[1.0], theta=[0.5],
            trials=2, css_rounds=1))
        row = result.rows.iloc[0]
        self.assertGreater(row['mean_noise_energy'], 0.0)
        self.assertIn('envelope_violations', result.rows.columns)
        self.assertGreater(row['max_envelope_ratio'], 0.0)

    def test_detection_validation(self):
        result = experiments.run_sweep(self.config(
            kind='detection-validate', n=[50], m=[40], d=2, trials=20))
        row = result.rows.iloc[0]
        for name in ('detection', 'norm', 'cross', 'inverse'):
            rate = row['{}_violation_rate'.format(name)]
            self.assertTrue(0.0 <= rate <= 1.0)
        self.assertAlmostEqual(row['detection_allowed'], 0.2)

    def test_detection_default_budget(self):
        result = experiments.run_sweep(self.config(
            kind='detection-validate', n=[50], d=2, trials=2))
        self.assertGreater(result.rows.iloc[0]['m'], 0)

    def test_wrong_runner(self):
        with self.assertRaises(exceptions.ConfigError):
            experiments.run_timing(self.config())

    def test_plot_script(self):
        config = self.config()
        script = experiments.plot_script(config, self.path / 'sweep.csv')
        self.assertIn("'sweep.csv'", script)
        self.assertIn("'sweep.png'", script)
        compile(script, 'plot.py', 'exec')
