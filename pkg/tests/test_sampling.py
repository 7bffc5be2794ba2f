import numpy as np

from adcp import exceptions, sampling
from . import testing


class IndexSetTestCase(testing.TestCase):

    def test_indices_are_copied_and_read_only(self):
        source = np.array([3, 1, 3])
        omega = sampling.IndexSet(5, source)
        source[0] = 0
        self.assert_array_equal(omega.indices, [3, 1, 3])
        with self.assertRaises(ValueError):
            omega.indices[0] = 2

    def test_duplicates_are_kept(self):
        omega = sampling.IndexSet(5, [3, 1, 3])
        self.assertEqual(len(omega), 3)
        self.assertEqual(list(omega), [3, 1, 3])
        self.assert_array_equal(omega.distinct(), [1, 3])

    def test_complement(self):
        omega = sampling.IndexSet(5, [3, 1, 3])
        self.assert_array_equal(omega.complement().indices, [0, 2, 4])

    def test_full(self):
        omega = sampling.IndexSet.full(4)
        self.assertEqual(omega.mode, sampling.SamplingMode.FULL)
        self.assert_array_equal(omega.indices, [0, 1, 2, 3])
        self.assertEqual(len(omega.complement()), 0)

    def test_out_of_range(self):
        with self.assertRaises(exceptions.PositionOutOfRange):
            sampling.IndexSet(3, [0, 3])
        with self.assertRaises(exceptions.PositionOutOfRange):
            sampling.IndexSet(3, [-1])

    def test_bad_ambient_dim(self):
        with self.assertRaises(exceptions.InvalidArgument):
            sampling.IndexSet(0, [])


class SampleIndexSetTestCase(testing.TestCase):

    def test_with_replacement_size(self):
        for _trial in range(20):
            omega = sampling.sample_index_set(10, 5, rng=self.rng)
            self.assertEqual(len(omega), 5)
            self.assertEqual(omega.mode,
                             sampling.SamplingMode.WITH_REPLACEMENT)
            self.assertTrue(np.all(omega.indices < 10))

    def test_oversampling_allowed(self):
        self.assertEqual(len(sampling.sample_index_set(10, 100, rng=1)), 100)

    def test_bernoulli_mean_size(self):
        sizes = [len(sampling.sample_index_set(
            100, 50, sampling.SamplingMode.BERNOULLI, self.rng))
            for _trial in range(1000)]
        self.assertTrue(45 <= np.mean(sizes) <= 55)

    def test_bernoulli_is_distinct_and_sorted(self):
        omega = sampling.sample_index_set(
            50, 20, sampling.SamplingMode.BERNOULLI, self.rng)
        self.assert_array_equal(omega.indices, omega.distinct())
        self.assertAlmostEqual(omega.parameter, 0.4)

    def test_full_ignores_m(self):
        omega = sampling.sample_index_set(7, 2, sampling.SamplingMode.FULL)
        self.assert_array_equal(omega.indices, np.arange(7))

    def test_fixed_seed_is_deterministic(self):
        first = sampling.sample_index_set(100, 30, rng=42)
        second = sampling.sample_index_set(100, 30, rng=42)
        self.assert_array_equal(first.indices, second.indices)

    def test_invalid_arguments(self):
        for n, m in ((0, 1), (10, 0), (10, 101)):
            with self.assertRaises(exceptions.InvalidArgument):
                sampling.sample_index_set(n, m)

    def test_explicit_mode_can_not_be_sampled(self):
        with self.assertRaises(exceptions.InvalidArgument):
            sampling.sample_index_set(
                10, 5, sampling.SamplingMode.EXPLICIT)
