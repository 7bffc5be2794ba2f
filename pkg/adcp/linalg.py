# coding: utf-8
"""Dense kernels: orthonormalization, full and subsampled projections,
reconstruction from partial observations and coherence.

All routines are pure functions of their inputs and operate in double
precision.

"""
import dataclasses
import functools
import logging
import typing

import numpy as np
from scipy import linalg as sp_linalg

from adcp import (DEFAULT_DROP_TOL, DEFAULT_RANK_TOL, exceptions, sampling,
                  types)

LOGGER = logging.getLogger(__name__)

VectorsLike = typing.Union[np.ndarray, typing.Sequence[np.ndarray]]


@dataclasses.dataclass(frozen=True, eq=False)
class OrthonormalBasis:
    """A ``d``-dimensional subspace of :math:`\\mathbb{R}^n` held as ``d``
    orthonormal column vectors. ``d`` may be zero.

    :param ambient_dim: The ambient dimension ``n``
    :param vectors: An ``n`` by ``d`` array whose columns are orthonormal

    """
    ambient_dim: int
    vectors: np.ndarray

    def __post_init__(self) -> None:
        vectors = np.array(self.vectors, dtype=np.float64)
        if vectors.size == 0:
            vectors = vectors.reshape(self.ambient_dim, 0)
        elif vectors.ndim == 1:
            vectors = vectors.reshape(-1, 1)
        if vectors.ndim != 2 or vectors.shape[0] != self.ambient_dim:
            raise exceptions.DimensionMismatch(
                'Basis vectors of shape {} do not live in R^{}'.format(
                    vectors.shape, self.ambient_dim))
        elif vectors.shape[1] > self.ambient_dim:
            raise exceptions.DimensionMismatch(
                'Can not hold {} orthonormal vectors in R^{}'.format(
                    vectors.shape[1], self.ambient_dim))
        vectors.setflags(write=False)
        object.__setattr__(self, 'vectors', vectors)

    def __len__(self) -> int:
        return self.dim

    @classmethod
    def empty(cls, ambient_dim: int) -> 'OrthonormalBasis':
        """Return the zero-dimensional basis of :math:`\\mathbb{R}^n`"""
        return cls(ambient_dim, np.zeros((ambient_dim, 0)))

    @property
    def dim(self) -> int:
        """The number of basis vectors ``d``"""
        return int(self.vectors.shape[1])

    def restrict(self, omega: sampling.IndexSet) -> types.Matrix:
        """Return the row-subsampled basis matrix :math:`U_\\Omega`"""
        _check_index_set(self, omega)
        return self.vectors[omega.indices]

    def extend(self, vectors: VectorsLike,
               drop_tol: float = DEFAULT_DROP_TOL) -> 'OrthonormalBasis':
        """Return a new basis spanning this one plus ``vectors``.

        Each candidate is orthogonalized against the current vectors twice;
        candidates whose remaining norm falls below ``drop_tol`` times their
        original norm are dropped.

        :param vectors: Column array or sequence of candidate vectors
        :param drop_tol: Relative residual norm below which a candidate is
            considered dependent

        """
        candidates = _as_columns(vectors, self.ambient_dim)
        return OrthonormalBasis(
            self.ambient_dim,
            _gram_schmidt(self.vectors, candidates, drop_tol))

    def orthogonality_error(self) -> float:
        """Return :math:`\\|U^TU - I\\|_{max}`"""
        if not self.dim:
            return 0.0
        gram = self.vectors.T @ self.vectors
        return float(np.abs(gram - np.eye(self.dim)).max())


def orthonormalize(vectors: VectorsLike,
                   drop_tol: float = DEFAULT_DROP_TOL,
                   ambient_dim: typing.Optional[int] = None) \
        -> OrthonormalBasis:
    """Gram-Schmidt with one full reorthogonalization pass.

    .. code-block:: python3
       :caption: Example Usage

        basis = orthonormalize([np.array([1., 1., 0.]),
                                np.array([1., 0., 0.])])
        assert basis.dim == 2

    :param vectors: A sequence of equal length vectors, or an array whose
        columns are the vectors
    :param drop_tol: Relative residual norm below which a vector is
        considered dependent on the ones before it and discarded
    :param ambient_dim: Required only when ``vectors`` is empty
    :raises adcp.exceptions.DimensionMismatch: when the vectors do not share
        one ambient dimension
    :raises adcp.exceptions.InvalidArgument: when ``drop_tol`` is not
        positive or the ambient dimension can not be determined

    """
    columns = _as_columns(vectors, ambient_dim)
    return OrthonormalBasis(
        columns.shape[0],
        _gram_schmidt(np.zeros((columns.shape[0], 0)), columns, drop_tol))


def project(basis: OrthonormalBasis, v: types.Vector) -> types.Vector:
    """Return the orthogonal projection :math:`U(U^Tv)` of ``v``"""
    v = _check_vector(v, basis.ambient_dim, 'v')
    if not basis.dim:
        return np.zeros(basis.ambient_dim)
    return basis.vectors @ (basis.vectors.T @ v)


def residual_energy(basis: OrthonormalBasis, v: types.Vector) -> float:
    """Return :math:`\\|v - \\mathcal{P}_U v\\|_2^2` on the full vector"""
    residual = _check_vector(v, basis.ambient_dim, 'v') - project(basis, v)
    return float(residual @ residual)


class SubsampledProjector:
    """Factorization of the row-subsampled basis :math:`U_\\Omega` shared by
    the residual test and the reconstruction of one subsampled vector.

    :math:`U_\\Omega` is factored with a column-pivoted QR decomposition.
    It is deemed rank deficient when the smallest diagonal magnitude of the
    triangular factor falls below ``rank_tol`` times the largest. An empty
    :math:`\\Omega` is never full rank, whatever the basis dimension. The
    residual is always taken against the numerical column space, while
    :meth:`reconstruct` requires full column rank.

    :param basis: The current basis :math:`U`
    :param omega: The index set :math:`\\Omega` into the ambient space
    :param rank_tol: Relative diagonal magnitude deemed numerically zero

    """
    def __init__(self, basis: OrthonormalBasis,
                 omega: sampling.IndexSet,
                 rank_tol: float = DEFAULT_RANK_TOL) -> None:
        _check_index_set(basis, omega)
        self.basis = basis
        self.omega = omega
        self.rank = 0
        self.ratio = 1.0
        self._q = np.zeros((len(omega), 0))
        self._r = np.zeros((0, 0))
        self._permutation = np.zeros(0, dtype=np.intp)
        if basis.dim and len(omega):
            q, r, permutation = sp_linalg.qr(
                basis.restrict(omega), mode='economic', pivoting=True)
            diagonal = np.abs(np.diag(r))
            largest = diagonal[0] if diagonal.size else 0.0
            self.rank = int(np.count_nonzero(diagonal > rank_tol * largest)) \
                if largest > 0 else 0
            self.ratio = float(diagonal[-1] / largest) if largest > 0 else 0.0
            self._q = q[:, :self.rank]
            self._r = r
            self._permutation = permutation
        elif basis.dim or not len(omega):
            self.ratio = 0.0

    @property
    def full_rank(self) -> bool:
        """Indicates if :math:`U_\\Omega` has full column rank and
        :math:`\\Omega` is not empty

        """
        return self.rank == self.basis.dim and len(self.omega) > 0

    def residual_energy(self, v_omega: types.Vector,
                        strict: bool = False) -> float:
        """Return :math:`\\|v_\\Omega - \\mathcal{P}_{U_\\Omega}v_\\Omega\\|
        _2^2`.

        :param v_omega: The observed entries, one per element of
            :math:`\\Omega`
        :param strict: Raise instead of projecting onto the numerical column
            space when :math:`U_\\Omega` is rank deficient
        :raises adcp.exceptions.RankDeficient: when ``strict`` and
            :math:`U_\\Omega` is rank deficient

        """
        v_omega = _check_vector(v_omega, len(self.omega), 'v_omega')
        if strict:
            self._require_full_rank()
        residual = v_omega - self._q @ (self._q.T @ v_omega)
        return float(residual @ residual)

    def coefficients(self, v_omega: types.Vector) -> types.Vector:
        """Return :math:`(U_\\Omega^TU_\\Omega)^{-1}U_\\Omega^Tv_\\Omega`"""
        v_omega = _check_vector(v_omega, len(self.omega), 'v_omega')
        self._require_full_rank()
        if not self.basis.dim:
            return np.zeros(0)
        solved = sp_linalg.solve_triangular(self._r, self._q.T @ v_omega)
        coefficients = np.empty(self.basis.dim)
        coefficients[self._permutation] = solved
        return coefficients

    def reconstruct(self, v_omega: types.Vector) -> types.Vector:
        """Return :math:`U(U_\\Omega^TU_\\Omega)^{-1}U_\\Omega^Tv_\\Omega`,
        a vector in the ambient space.

        :raises adcp.exceptions.RankDeficient: when :math:`U_\\Omega` is
            rank deficient

        """
        coefficients = self.coefficients(v_omega)
        if not self.basis.dim:
            return np.zeros(self.basis.ambient_dim)
        return self.basis.vectors @ coefficients

    def _require_full_rank(self) -> None:
        if not self.full_rank:
            raise exceptions.RankDeficient(
                'U_omega has numerical rank {} < {} ({} rows, ratio '
                '{:.3e})'.format(self.rank, self.basis.dim, len(self.omega),
                                 self.ratio), self.ratio)


def subsampled_residual_energy(basis: OrthonormalBasis,
                               omega: sampling.IndexSet,
                               v_omega: types.Vector,
                               strict: bool = False) -> float:
    """Return :math:`\\|v_\\Omega - \\mathcal{P}_{U_\\Omega}v_\\Omega\\|
    _2^2`, the least-squares residual of the observed entries against the
    row-subsampled basis.

    .. seealso:: :class:`SubsampledProjector` to test and reconstruct with a
        single factorization.

    :raises adcp.exceptions.RankDeficient: when ``strict`` and
        :math:`U_\\Omega` is rank deficient

    """
    return SubsampledProjector(basis, omega).residual_energy(v_omega, strict)


def reconstruct_from_subsample(basis: OrthonormalBasis,
                               omega: sampling.IndexSet,
                               v_omega: types.Vector) -> types.Vector:
    """Return :math:`U(U_\\Omega^TU_\\Omega)^{-1}U_\\Omega^Tv_\\Omega`.

    :raises adcp.exceptions.RankDeficient: when :math:`U_\\Omega` is rank
        deficient

    """
    return SubsampledProjector(basis, omega).reconstruct(v_omega)


def coherence_subspace(basis: OrthonormalBasis) -> float:
    """Return :math:`\\mu(U) = \\frac{n}{d}\\max_j\\|\\mathcal{P}_Ue_j\\|^2`,
    a value in ``[1, n / d]``.

    :raises adcp.exceptions.InvalidArgument: for an empty basis

    """
    if not basis.dim:
        raise exceptions.InvalidArgument(
            'Coherence is undefined for a zero-dimensional subspace')
    row_energy = np.einsum('ij,ij->i', basis.vectors, basis.vectors)
    return float(basis.ambient_dim / basis.dim * row_energy.max())


def coherence_vector(v: types.Vector) -> float:
    """Return :math:`\\mu(v) = n\\|v\\|_\\infty^2 / \\|v\\|_2^2`"""
    v = np.asarray(v, dtype=np.float64).ravel()
    energy = float(v @ v)
    if energy == 0.0:
        raise exceptions.InvalidArgument(
            'Coherence is undefined for the zero vector')
    return float(v.size * np.abs(v).max() ** 2 / energy)


def kron_basis(bases: typing.Sequence[OrthonormalBasis],
               drop_tol: float = DEFAULT_DROP_TOL) -> OrthonormalBasis:
    """Return an orthonormal basis of
    :math:`\\mathrm{span}\\{\\otimes_t u_i^{(t)}\\}_{i=1}^d`, pairing the
    ``i``-th vector of every basis.

    :raises adcp.exceptions.DimensionMismatch: when the bases do not all
        have the same dimension

    """
    if not bases:
        raise exceptions.InvalidArgument('At least one basis is required')
    dims = {basis.dim for basis in bases}
    if len(dims) != 1:
        raise exceptions.DimensionMismatch(
            'Bases must share one dimension, got {}'.format(sorted(dims)))
    products = [functools.reduce(np.kron,
                                 [basis.vectors[:, i] for basis in bases])
                for i in range(bases[0].dim)]
    ambient_dim = int(np.prod([basis.ambient_dim for basis in bases]))
    return orthonormalize(products, drop_tol, ambient_dim)


def _as_columns(vectors: VectorsLike,
                ambient_dim: typing.Optional[int]) -> np.ndarray:
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        columns = np.asarray(vectors, dtype=np.float64)
    else:
        vectors = [np.asarray(vector, dtype=np.float64).ravel()
                   for vector in vectors]
        lengths = {vector.size for vector in vectors}
        if len(lengths) > 1:
            raise exceptions.DimensionMismatch(
                'Vectors have differing lengths: {}'.format(sorted(lengths)))
        elif not vectors:
            if ambient_dim is None:
                raise exceptions.InvalidArgument(
                    'ambient_dim is required to orthonormalize no vectors')
            return np.zeros((ambient_dim, 0))
        columns = np.column_stack(vectors)
    if ambient_dim is not None and columns.shape[0] != ambient_dim:
        raise exceptions.DimensionMismatch(
            'Vectors of length {} do not live in R^{}'.format(
                columns.shape[0], ambient_dim))
    if not np.all(np.isfinite(columns)):
        raise exceptions.InvalidArgument('Vectors must be finite')
    return columns


def _gram_schmidt(existing: np.ndarray, candidates: np.ndarray,
                  drop_tol: float) -> np.ndarray:
    if not drop_tol > 0:
        raise exceptions.InvalidArgument(
            'drop_tol must be positive, got {!r}'.format(drop_tol))
    size, count = existing.shape
    result = np.empty((size, count + candidates.shape[1]))
    result[:, :count] = existing
    for offset in range(candidates.shape[1]):
        vector = candidates[:, offset]
        norm = np.linalg.norm(vector)
        if norm == 0.0:
            continue
        current = result[:, :count]
        residual = vector - current @ (current.T @ vector)
        residual -= current @ (current.T @ residual)
        remaining = np.linalg.norm(residual)
        if remaining <= drop_tol * norm:
            LOGGER.debug('Dropping dependent vector %i (%.3e relative)',
                         offset, remaining / norm)
            continue
        result[:, count] = residual / remaining
        count += 1
    return result[:, :count].copy()


def _check_index_set(basis: OrthonormalBasis,
                     omega: sampling.IndexSet) -> None:
    if omega.ambient_dim != basis.ambient_dim:
        raise exceptions.DimensionMismatch(
            'Index set over [0, {}) does not match a basis in R^{}'.format(
                omega.ambient_dim, basis.ambient_dim))


def _check_vector(v: types.Vector, size: int, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (size,):
        raise exceptions.DimensionMismatch(
            '{} has shape {}, expected ({},)'.format(name, v.shape, size))
    return v
