import math

from adcp import bounds, completion, experiments, instances
from . import testing


class ExactRecoveryTestCase(testing.TestCase):

    DELTA = 0.05

    def run_trials(self, seeds, **kwargs):
        outcomes = []
        for seed in seeds:
            truth, measurements = self.matrix_instance(200, 200, 5, seed,
                                                       **kwargs)
            m = min(200, math.ceil(
                bounds.matrix_budget(5, truth.mu0_actual, self.DELTA)))
            report = completion.complete_matrix(
                measurements, 200, 200,
                completion.NoiselessConfig(budgets=[m]), rng=seed)
            report.evaluate(truth.ground_truth)
            self.assertEqual(report.entries_observed,
                             measurements.observed_count)
            self.assertLess(report.entries_observed, bounds.matrix_total(
                200, 200, 5, truth.mu0_actual, self.DELTA))
            outcomes.append((truth, report))
        return outcomes

    def test_incoherent_columns(self):
        outcomes = self.run_trials(range(50))
        successes = [report for _truth, report in outcomes
                     if report.success]
        self.assertGreaterEqual(len(successes), 48)
        for report in successes:
            self.assertEqual(report.fully_observed_units, 5)

    def test_coherent_row_space(self):
        outcomes = self.run_trials(
            range(50), family=instances.Family.COHERENT_ROW, theta=1.0)
        for truth, _report in outcomes:
            self.assertGreaterEqual(truth.row_space_coherence, 10)
        self.assertGreaterEqual(
            sum(bool(report.success) for _truth, report in outcomes), 48)


class BlockDiagonalRecoveryTestCase(testing.TestCase):

    def test_block_diagonal(self):
        successes = 0
        for seed in range(20):
            truth = instances.gen_blockdiag(120, 120, 3, 2.0, seed)
            measurements = truth.oracle()
            m = min(120, math.ceil(
                bounds.matrix_budget(3, truth.mu0_actual, 0.05)))
            report = completion.complete_matrix(
                measurements, 120, 120,
                completion.NoiselessConfig(budgets=[m]), rng=seed)
            successes += report.evaluate(truth.ground_truth)
            self.assertEqual(report.entries_observed,
                             measurements.observed_count)
        self.assertGreaterEqual(successes, 18)


class DetectionBoundTestCase(testing.TempDirTestCase):

    def test_violation_rates(self):
        result = experiments.run_sweep(experiments.SweepConfig.from_dict({
            'kind': 'detection-validate', 'n': [200], 'd': 5,
            'delta': 0.05, 'trials': 1000, 'reproducible': True,
            'plot': False, 'output': str(self.path / 'detection.csv')}))
        row = result.rows.iloc[0]
        self.assertLessEqual(row['detection_violation_rate'], 0.24)
        for name in ('detection', 'norm', 'cross', 'inverse'):
            self.assertTrue(row['{}_within_bound'.format(name)], name)


class NoisyColumnSelectionTestCase(testing.TempDirTestCase):

    def test_noise_envelope_across_coherence(self):
        result = experiments.run_sweep(experiments.SweepConfig.from_dict({
            'kind': 'noisy-coherence', 'n': [200], 'r': [5],
            'sigma': [0.0, 0.1, 1.0], 'theta': [0.0, 0.5, 1.0],
            'trials': 3, 'reproducible': True, 'plot': False,
            'output': str(self.path / 'noisy.csv')}))
        rows = result.rows
        self.assertEqual(len(rows), 9)
        self.assertTrue((rows['envelope_violations'] == 0).all())
        self.assertTrue((rows['max_envelope_ratio']
                         <= experiments.ERROR_ENVELOPE_FACTOR).all())
        self.assertTrue(rows['audit_ok'].all())
        noiseless = rows[rows['sigma'] == 0.0]
        self.assertTrue((noiseless['max_relative_error'] <= 1e-8).all())
        self.assertTrue((noiseless['mean_noise_energy'] == 0.0).all())
        noisy = rows[rows['sigma'] > 0.0]
        self.assertTrue((noisy['mean_noise_energy'] > 0.0).all())
