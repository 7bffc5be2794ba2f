# coding: utf-8
"""Synthetic ground truth: incoherent Gaussian factors, row-coherent
matrices, the block-diagonal adversarial family and CP-rank tensors, plus
the ADCP v1 text format they are exchanged in.

"""
import dataclasses
import enum
import logging
import math
import os
import pathlib
import typing

import numpy as np
from scipy import fft

from adcp import exceptions, linalg, oracle, types

LOGGER = logging.getLogger(__name__)

FILE_MAGIC = 'ADCP'
FILE_VERSION = 'v1'
MAX_SEED = 2 ** 64


class Family(enum.Enum):
    """The generator used for the factors of a :class:`SyntheticSpec`"""
    GAUSSIAN_FACTORS = 'gaussian'
    BLOCK_DIAGONAL = 'block-diagonal'
    COHERENT_ROW = 'coherent-row'


@dataclasses.dataclass
class SyntheticSpec:
    """Describes a synthetic instance.

    :param dims: Two or more positive dimensions
    :param rank: The rank, or CP rank for tensors
    :param family: The factor generator
    :param noise_sigma: Per-entry Gaussian noise standard deviation
    :param seed: Seeds both the factors and the oracle's noise
    :param mu0: Coherence parameter of the block-diagonal family
    :param theta: Row-space spikiness of the coherent-row family, 0 is flat
        and 1 is concentrated on ``rank`` coordinates
    :param unit_frobenius: Scale the instance to unit Frobenius norm

    """
    dims: typing.List[int]
    rank: int
    family: Family = Family.GAUSSIAN_FACTORS
    noise_sigma: float = 0.0
    seed: int = 0
    mu0: float = 1.0
    theta: float = 0.0
    unit_frobenius: bool = False

    @property
    def order(self) -> int:
        return len(self.dims)

    def validate(self) -> None:
        """Validate the spec, raising :exc:`~adcp.exceptions.InvalidSpec`
        describing the first violation found

        """
        if not isinstance(self.family, Family):
            raise TypeError('family must be a Family')
        elif len(self.dims) < 2:
            raise exceptions.InvalidSpec(
                'At least two dims are required, got {!r}'.format(self.dims))
        elif any(not isinstance(n, (int, np.integer)) or n < 1
                 for n in self.dims):
            raise exceptions.InvalidSpec(
                'dims must be positive integers, got {!r}'.format(self.dims))
        elif not isinstance(self.rank, (int, np.integer)) \
                or not 1 <= self.rank <= min(self.dims):
            raise exceptions.InvalidSpec(
                'rank must be in [1, {}], got {!r}'.format(
                    min(self.dims), self.rank))
        elif not math.isfinite(self.noise_sigma) or self.noise_sigma < 0:
            raise exceptions.InvalidSpec(
                'noise_sigma must be finite and non-negative')
        elif not isinstance(self.seed, (int, np.integer)) \
                or not 0 <= self.seed < MAX_SEED:
            raise exceptions.InvalidSpec(
                'seed must be a 64-bit unsigned integer, got {!r}'.format(
                    self.seed))
        elif not 0 <= self.theta <= 1:
            raise exceptions.InvalidSpec(
                'theta must be in [0, 1], got {!r}'.format(self.theta))
        elif not self.mu0 >= 1:
            raise exceptions.InvalidSpec(
                'mu0 must be at least 1, got {!r}'.format(self.mu0))
        if self.family == Family.COHERENT_ROW and self.order != 2:
            raise exceptions.InvalidSpec(
                'The coherent-row family is only defined for matrices')
        elif self.family == Family.BLOCK_DIAGONAL:
            block_lengths(self.dims, self.rank, self.mu0)

    def family_token(self) -> str:
        """Return the family as written in an ADCP v1 header"""
        if self.family == Family.BLOCK_DIAGONAL:
            return '{}:{!r}'.format(self.family.value, float(self.mu0))
        elif self.family == Family.COHERENT_ROW:
            return '{}:{!r}'.format(self.family.value, float(self.theta))
        return self.family.value


@dataclasses.dataclass(eq=False)
class Instance:
    """A generated ground truth with the structure it was built from.

    ``ground_truth`` is the CP composition of ``factors``, one ``n_t`` by
    ``r`` matrix per mode, with all scale folded into the first mode. For
    matrices ``column_space`` spans the columns and ``mu0_actual`` is its
    coherence. For tensors ``column_space`` is the mode-1 factor span and
    ``mu0_actual`` is the largest coherence over the modes that are
    recursed into, every mode but the last.

    """
    spec: SyntheticSpec
    ground_truth: types.Tensor
    factors: typing.List[np.ndarray]
    column_space: linalg.OrthonormalBasis
    row_space_coherence: float
    mu0_actual: float
    mode_coherences: typing.List[float]

    @classmethod
    def from_factors(cls, spec: SyntheticSpec,
                     factors: typing.Sequence[np.ndarray]) -> 'Instance':
        """Compose the ground truth from per-mode factors and measure the
        coherence of every mode

        """
        factors = [np.array(f, dtype=np.float64) for f in factors]
        shapes = [f.shape for f in factors]
        if shapes != [(n, spec.rank) for n in spec.dims]:
            raise exceptions.InvalidSpec(
                'Factor shapes {} do not match dims {} at rank {}'.format(
                    shapes, list(spec.dims), spec.rank))
        bases = [linalg.orthonormalize(f) for f in factors]
        coherences = [linalg.coherence_subspace(basis) for basis in bases]
        return cls(spec=spec,
                   ground_truth=compose(factors),
                   factors=factors,
                   column_space=bases[0],
                   row_space_coherence=coherences[-1],
                   mu0_actual=max(coherences[:-1]),
                   mode_coherences=coherences)

    @property
    def dims(self) -> typing.Tuple[int, ...]:
        return tuple(self.ground_truth.shape)

    def oracle(self, track_positions: bool = False) \
            -> oracle.MeasurementOracle:
        """Return a fresh oracle guarding this instance"""
        return oracle.MeasurementOracle(
            self.ground_truth, self.spec.noise_sigma, self.spec.seed,
            track_positions)


def compose(factors: typing.Sequence[np.ndarray]) -> types.Tensor:
    """Return :math:`\\sum_k \\otimes_t a_k^{(t)}` for factor matrices whose
    ``k``-th columns are :math:`a_k^{(t)}`

    """
    partial = factors[0]
    for factor in factors[1:-1]:
        partial = partial[..., np.newaxis, :] * factor
    return np.tensordot(partial, factors[-1], axes=([-1], [1]))


def block_lengths(dims: types.Dims, rank: int,
                  mu0: float) -> typing.List[int]:
    """Return the block lengths ``n_1 / r`` and ``n_t / (mu0 r)`` of the
    block-diagonal family.

    :raises adcp.exceptions.InvalidSpec: when a length is not a positive
        integer

    """
    lengths = []
    for mode, n in enumerate(dims):
        length = n / rank if mode == 0 else n / (mu0 * rank)
        if length < 1 or abs(length - round(length)) > 1e-9:
            raise exceptions.InvalidSpec(
                'Block length {} for n={} in mode {} is not a positive '
                'integer (rank={}, mu0={})'.format(
                    length, n, mode + 1, rank, mu0))
        lengths.append(int(round(length)))
    return lengths


def generate(spec: SyntheticSpec) \
        -> typing.Tuple[Instance, oracle.MeasurementOracle]:
    """Generate the instance a spec describes and the oracle guarding it"""
    if len(spec.dims) == 2:
        return gen_matrix(spec)
    return gen_tensor(spec)


def gen_matrix(spec: SyntheticSpec) \
        -> typing.Tuple[Instance, oracle.MeasurementOracle]:
    """Generate a rank ``r`` matrix.

    Gaussian factors give :math:`A = U\\Sigma V^T` with orthonormalized
    Gaussian ``U`` and ``V`` and singular values uniform in ``[1, 2]``. The
    coherent-row family draws ``U`` and the spectrum the same way and then
    orthonormalizes :math:`(1 - \\theta)F + \\theta S` for ``V``, where
    ``F`` holds the first ``r`` orthonormal cosine vectors and ``S`` the
    first ``r`` coordinate vectors.

    :raises adcp.exceptions.InvalidSpec: when the spec does not validate

    """
    spec.validate()
    if len(spec.dims) != 2:
        raise exceptions.InvalidSpec(
            'gen_matrix requires two dims, got {!r}'.format(spec.dims))
    if spec.family == Family.BLOCK_DIAGONAL:
        instance = _block_diagonal(spec)
    else:
        n1, n2 = spec.dims
        rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
        u = _gaussian_basis(rng, n1, spec.rank)
        sigma = rng.uniform(1.0, 2.0, spec.rank)
        if spec.family == Family.COHERENT_ROW:
            v = _coherent_basis(n2, spec.rank, spec.theta)
        else:
            v = _gaussian_basis(rng, n2, spec.rank)
        instance = _finish(spec, [u * sigma, v])
    return instance, instance.oracle()


def gen_blockdiag(n1: int, n2: int, r: int, mu0: float,
                  seed: int) -> Instance:
    """Draw a member of the block-diagonal family: block ``k`` occupies
    rows ``R_k`` and columns ``C_k`` of lengths ``n1 / r`` and
    ``n2 / (mu0 r)``, and every row of a block is constant with a value
    drawn uniformly from :math:`[1, \\sqrt{\\mu_0}]`. Columns past the
    last block are zero.

    """
    spec = SyntheticSpec([n1, n2], r, Family.BLOCK_DIAGONAL, seed=seed,
                         mu0=mu0)
    spec.validate()
    return _block_diagonal(spec)


def gen_tensor(spec: SyntheticSpec) \
        -> typing.Tuple[Instance, oracle.MeasurementOracle]:
    """Generate an order ``T >= 3`` tensor of CP rank ``r``.

    Gaussian factors are scaled by :math:`1/\\sqrt{n_t}` with component
    weights uniform in ``[1, 2]``. The block-diagonal family uses one block
    per component in every mode, with row values in
    :math:`[1, \\sqrt{\\mu_0}]` along the first mode and indicators along
    the others.

    """
    spec.validate()
    if len(spec.dims) < 3:
        raise exceptions.InvalidSpec(
            'gen_tensor requires at least three dims, got {!r}'.format(
                spec.dims))
    if spec.family == Family.BLOCK_DIAGONAL:
        instance = _block_diagonal(spec)
    else:
        rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
        factors = [rng.standard_normal((n, spec.rank)) / math.sqrt(n)
                   for n in spec.dims]
        factors[0] = factors[0] * rng.uniform(1.0, 2.0, spec.rank)
        instance = _finish(spec, factors)
    return instance, instance.oracle()


def dump_instance(instance: Instance,
                  path: typing.Union[str, os.PathLike]) -> None:
    """Write an instance in the ADCP v1 format: a header line
    ``ADCP v1 <T> <dims...> <rank> <family> <sigma> <seed>`` followed by
    one row per factor vector, mode by mode, component by component.

    """
    spec = instance.spec
    header = [FILE_MAGIC, FILE_VERSION, str(len(spec.dims))] \
        + [str(n) for n in spec.dims] \
        + [str(spec.rank), spec.family_token(),
           repr(float(spec.noise_sigma)), str(spec.seed)]
    lines = [' '.join(header)]
    for factor in instance.factors:
        for k in range(spec.rank):
            lines.append(' '.join(repr(float(x)) for x in factor[:, k]))
    pathlib.Path(path).write_text('\n'.join(lines) + '\n')
    LOGGER.debug('Wrote %s instance to %s', spec.family.value, path)


def load_instance(path: typing.Union[str, os.PathLike]) -> Instance:
    """Read an instance written by :func:`dump_instance`. Scaling is carried
    by the factors, so the loaded spec has ``unit_frobenius`` unset.

    :raises adcp.exceptions.InvalidSpec: when the file is malformed

    """
    lines = [line.split() for line in
             pathlib.Path(path).read_text().splitlines() if line.strip()]
    if not lines:
        raise exceptions.InvalidSpec('{} is empty'.format(path))
    header = lines[0]
    try:
        if header[:2] != [FILE_MAGIC, FILE_VERSION]:
            raise ValueError('bad magic {!r}'.format(header[:2]))
        order = int(header[2])
        if len(header) != 7 + order:
            raise ValueError('expected {} header fields'.format(7 + order))
        dims = [int(n) for n in header[3:3 + order]]
        rank = int(header[3 + order])
        family, mu0, theta = _parse_family(header[4 + order])
        spec = SyntheticSpec(dims, rank, family,
                             noise_sigma=float(header[5 + order]),
                             seed=int(header[6 + order]), mu0=mu0,
                             theta=theta)
        rows = [np.array(row, dtype=np.float64) for row in lines[1:]]
    except (IndexError, ValueError) as error:
        raise exceptions.InvalidSpec(
            'Malformed ADCP v1 file {}: {}'.format(path, error))
    spec.validate()
    if len(rows) != order * rank:
        raise exceptions.InvalidSpec(
            'Expected {} factor rows, found {}'.format(
                order * rank, len(rows)))
    factors = []
    for mode, n in enumerate(dims):
        block = rows[mode * rank:(mode + 1) * rank]
        if any(row.size != n for row in block):
            raise exceptions.InvalidSpec(
                'Factor rows of mode {} must have {} values'.format(
                    mode + 1, n))
        factors.append(np.column_stack(block))
    return Instance.from_factors(spec, factors)


def _parse_family(token: str) -> typing.Tuple[Family, float, float]:
    name, _, parameter = token.partition(':')
    family = Family(name)
    if family == Family.BLOCK_DIAGONAL:
        return family, float(parameter), 0.0
    elif family == Family.COHERENT_ROW:
        return family, 1.0, float(parameter)
    return family, 1.0, 0.0


def _gaussian_basis(rng: np.random.Generator, n: int, r: int) -> np.ndarray:
    basis = linalg.orthonormalize(rng.standard_normal((n, r)))
    if basis.dim != r:
        raise exceptions.InvalidSpec(
            'Degenerate Gaussian draw of rank {} < {}'.format(basis.dim, r))
    return basis.vectors


def _coherent_basis(n: int, r: int, theta: float) -> np.ndarray:
    selector = np.zeros((n, r))
    selector[np.arange(r), np.arange(r)] = 1.0
    flat = fft.idct(selector, axis=0, norm='ortho')
    basis = linalg.orthonormalize((1.0 - theta) * flat + theta * selector)
    if basis.dim != r:
        raise exceptions.InvalidSpec(
            'Row space interpolation at theta={} lost rank'.format(theta))
    return basis.vectors


def _block_diagonal(spec: SyntheticSpec) -> Instance:
    lengths = block_lengths(spec.dims, spec.rank, spec.mu0)
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    factors = [np.zeros((n, spec.rank)) for n in spec.dims]
    for k in range(spec.rank):
        rows = slice(k * lengths[0], (k + 1) * lengths[0])
        factors[0][rows, k] = rng.uniform(
            1.0, math.sqrt(spec.mu0), lengths[0])
        for mode in range(1, len(spec.dims)):
            factors[mode][k * lengths[mode]:(k + 1) * lengths[mode], k] = 1.0
    return _finish(spec, factors)


def _finish(spec: SyntheticSpec,
            factors: typing.List[np.ndarray]) -> Instance:
    if spec.unit_frobenius:
        norm = np.linalg.norm(compose(factors))
        if norm > 0:
            factors[0] = factors[0] / norm
    instance = Instance.from_factors(spec, factors)
    LOGGER.debug('Generated %s instance %r with mu0=%.3f, mu(V)=%.3f',
                 spec.family.value, instance.dims, instance.mu0_actual,
                 instance.row_space_coherence)
    return instance
