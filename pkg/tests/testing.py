import logging
import pathlib
import shutil
import tempfile
import unittest

import numpy as np

from adcp import instances

LOGGER = logging.getLogger(__name__)

FIXTURES = pathlib.Path(__file__).parent / 'fixtures'


class TestCase(unittest.TestCase):
    """Seeds a generator per test and adds array assertions"""

    SEED = 20200415

    def setUp(self) -> None:
        super().setUp()
        self.rng = np.random.default_rng(self.SEED)

    def assert_allclose(self, actual, expected, rtol: float = 1e-10,
                        atol: float = 0.0) -> None:
        np.testing.assert_allclose(actual, expected, rtol=rtol, atol=atol)

    def assert_array_equal(self, actual, expected) -> None:
        np.testing.assert_array_equal(actual, expected)

    def assert_orthonormal(self, vectors: np.ndarray,
                           tol: float = 1e-10) -> None:
        gram = vectors.T @ vectors
        self.assertLessEqual(
            float(np.abs(gram - np.eye(gram.shape[0])).max(initial=0.0)),
            tol)

    def assert_state(self, manager, value: int) -> None:
        self.assertEqual(manager.state, manager.STATE_MAP[value])

    @staticmethod
    def matrix_instance(n1: int, n2: int, rank: int, seed: int = 7,
                        **kwargs):
        return instances.gen_matrix(
            instances.SyntheticSpec([n1, n2], rank, seed=seed, **kwargs))


class TempDirTestCase(TestCase):
    """Provides a scratch directory removed after every test"""

    def setUp(self) -> None:
        super().setUp()
        self.path = pathlib.Path(tempfile.mkdtemp(prefix='adcp-test-'))
        LOGGER.debug('Using %s', self.path)

    def tearDown(self) -> None:
        shutil.rmtree(self.path, ignore_errors=True)
        super().tearDown()
