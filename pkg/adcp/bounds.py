# coding: utf-8
"""Closed-form sample complexity, detection and lower-bound formulas used to
plan budgets and to validate runs.

Logarithms are natural. Budgets are returned unrounded, callers apply the
ceiling.

"""
import dataclasses
import math
import typing

from adcp import exceptions, types

BUDGET_CONSTANT = 36.0


@dataclasses.dataclass
class BoundParams:
    """Parameters shared by the lower bounds.

    :param dims: The dimensions ``n_1 ... n_T``
    :param rank: The rank ``r``
    :param mu0: The coherence bound of every mode subspace
    :param delta: Failure probability, in ``(0, 1/2)``
    :param epsilon: Slack of the passive lower bound, in ``(0, 1)``

    """
    dims: typing.List[int]
    rank: int
    mu0: float = 1.0
    delta: float = 0.1
    epsilon: float = 0.5

    @property
    def order(self) -> int:
        return len(self.dims)

    def validate(self) -> None:
        if len(self.dims) < 2 or any(n < 1 for n in self.dims):
            raise exceptions.InvalidArgument(
                'dims must hold two or more positive dimensions')
        elif self.rank < 1:
            raise exceptions.InvalidArgument('rank must be at least 1')
        elif self.mu0 < 1:
            raise exceptions.InvalidArgument('mu0 must be at least 1')
        elif not 0 < self.delta < 0.5:
            raise exceptions.InvalidArgument('delta must be in (0, 1/2)')
        elif not 0 < self.epsilon < 1:
            raise exceptions.InvalidArgument('epsilon must be in (0, 1)')


class PassiveBound(typing.NamedTuple):
    """A passive lower bound and whether its side condition held"""
    value: float
    side_condition: float
    reliable: bool


@dataclasses.dataclass
class DetectionConstants:
    """The constants of the subspace detection sandwich

    .. math::

        \\ell\\frac{m}{n}\\|v\\|^2 \\le \\|y_\\Omega -
        \\mathcal{P}_{U_\\Omega}y_\\Omega\\|^2 \\le u\\frac{m}{n}\\|v\\|^2

    where ``v`` is the component of ``y`` orthogonal to the subspace,
    :math:`\\ell` is :attr:`lower_factor` and ``u`` is
    :attr:`upper_factor`. Out of regime (:math:`\\gamma \\ge 1`) the lower
    factor is :data:`-inf <math.inf>`.

    """
    m: int
    n: int
    d: int
    mu_u: float
    alpha: float
    beta: float
    gamma: float
    lower_factor: float
    upper_factor: float

    @property
    def in_regime(self) -> bool:
        return self.gamma < 1

    def residual_bounds(self, orthogonal_energy: float) \
            -> typing.Tuple[float, float]:
        """Return the lower and upper bounds on the subsampled residual
        energy for a vector whose orthogonal component has
        ``orthogonal_energy``

        """
        scale = self.m / self.n * orthogonal_energy
        return self.lower_factor * scale, self.upper_factor * scale

    def norm_bounds(self, energy: float) -> typing.Tuple[float, float]:
        """Bounds on :math:`\\|v_\\Omega\\|^2` for a vector of ``energy``"""
        scale = self.m / self.n * energy
        return (1 - self.alpha) * scale, (1 + self.alpha) * scale

    def cross_bound(self, energy: float) -> float:
        """Bound on :math:`\\|U_\\Omega^Tv_\\Omega\\|^2` for ``v``
        orthogonal to the subspace

        """
        return self.beta * self.m / self.n * self.d * self.mu_u / self.n \
            * energy

    def inverse_bound(self) -> float:
        """Bound on :math:`\\|(U_\\Omega^TU_\\Omega)^{-1}\\|_2`"""
        if not self.in_regime:
            return math.inf
        return self.n / ((1 - self.gamma) * self.m)


def matrix_budget(r: float, mu0: float, delta: float) -> float:
    """Per-column samples for exact matrix recovery,
    :math:`36 r^{3/2} \\mu_0 \\log(2r/\\delta)`

    """
    _check_budget_args(r, mu0, delta)
    return BUDGET_CONSTANT * r ** 1.5 * mu0 * math.log(2 * r / delta)


def tensor_budget_schedule(r: float, mu0: float, delta: float,
                           order: int) -> typing.List[float]:
    """Per-level samples :math:`m_t = 36 r^{t - 1/2} \\mu_0^{t - 1}
    \\log(2r/\\delta)` for ``t = 1 ... T``

    """
    _check_budget_args(r, mu0, delta)
    if order < 2:
        raise exceptions.InvalidArgument('order must be at least 2')
    log_term = math.log(2 * r / delta)
    return [BUDGET_CONSTANT * r ** (t - 0.5) * mu0 ** (t - 1) * log_term
            for t in range(1, order + 1)]


def tensor_total(r: float, mu0: float, delta: float,
                 dims: types.Dims) -> float:
    """Expected total samples of the recursive algorithm,
    :math:`36 (\\sum_t n_t) r^{T - 1/2} \\mu_0^{T - 1} \\log(2r/\\delta)`

    """
    _check_budget_args(r, mu0, delta)
    order = len(dims)
    return BUDGET_CONSTANT * sum(dims) * r ** (order - 0.5) \
        * mu0 ** (order - 1) * math.log(2 * r / delta)


def matrix_total(n1: int, n2: int, r: float, mu0: float,
                 delta: float) -> float:
    """Expected total samples of the matrix algorithm counting ``r`` full
    columns, :math:`36 n_2 r^{3/2} \\mu_0 \\log(2r/\\delta) + r n_1`

    """
    return n2 * matrix_budget(r, mu0, delta) + r * n1


def passive_lower_bound(params: BoundParams) -> PassiveBound:
    """Samples below which a passive (non-adaptive) scheme can not tell
    instances of the block-diagonal family apart,
    :math:`n_1 r^{T-1} \\mu_0^{T-1} \\log(n_1/2\\delta)(1 - \\epsilon/2)`.

    The bound relies on the side condition
    :math:`\\frac{\\mu_0^{T-1} r^{T-1}}{\\prod_{t \\ge 2} n_t}
    \\log(n_1/2\\delta) \\le \\epsilon`. It is always computed and marked
    unreliable when the condition fails.

    """
    params.validate()
    side = _passive_exponent(params)
    n1, order = params.dims[0], params.order
    value = n1 * (params.rank * params.mu0) ** (order - 1) \
        * math.log(n1 / (2 * params.delta)) * (1 - params.epsilon / 2)
    return PassiveBound(value, side, side <= params.epsilon)


def passive_lower_bound_exact(params: BoundParams) -> float:
    """The passive threshold before linearizing the exponential,
    :math:`\\prod_t n_t (1 - e^{-S})` with ``S`` the side condition value.
    Not smaller than :func:`passive_lower_bound` whenever that one is
    reliable.

    """
    params.validate()
    return -math.prod(params.dims) * math.expm1(-_passive_exponent(params))


def adaptive_lower_bound(dims: types.Dims, r: int) -> int:
    """Parameter count :math:`r \\sum_t n_t` below which any scheme is
    underdetermined

    """
    if r < 0:
        raise exceptions.InvalidArgument('r must be non-negative')
    return int(r * sum(dims))


def detection_constants(m: int, n: int, d: int, mu_u: float, mu_v: float,
                        delta: float) -> DetectionConstants:
    """Evaluate the subspace detection constants

    .. math::

        \\alpha = \\sqrt{\\frac{2\\mu(v)}{m}\\log\\frac{1}{\\delta}} +
        \\frac{2\\mu(v)}{3m}\\log\\frac{1}{\\delta}, \\quad
        \\beta = 6\\log\\frac{d}{\\delta} + \\frac{4}{3}\\frac{d\\mu(v)}{m}
        \\log^2\\frac{d}{\\delta}, \\quad
        \\gamma = \\sqrt{\\frac{8d\\mu(U)}{3m}\\log\\frac{2d}{\\delta}}

    with lower factor :math:`(1 - \\alpha) - \\frac{d\\mu(U)\\beta}
    {m(1 - \\gamma)}` and upper factor :math:`1 + \\alpha`.

    """
    if m < 1 or d < 1 or n < 1:
        raise exceptions.InvalidArgument('m, n and d must be positive')
    elif not 0 < delta < 1:
        raise exceptions.InvalidArgument('delta must be in (0, 1)')
    log_inv = math.log(1 / delta)
    log_d = math.log(d / delta)
    alpha = math.sqrt(2 * mu_v / m * log_inv) + 2 * mu_v / (3 * m) * log_inv
    beta = 6 * log_d + 4 / 3 * d * mu_v / m * log_d ** 2
    gamma = math.sqrt(8 * d * mu_u / (3 * m) * math.log(2 * d / delta))
    if gamma < 1:
        lower = (1 - alpha) - d * mu_u * beta / (m * (1 - gamma))
    else:
        lower = -math.inf
    return DetectionConstants(m, n, d, mu_u, alpha, beta, gamma, lower,
                              1 + alpha)


def detection_precondition(d: int, mu_u: float, delta: float) -> float:
    """The smallest ``m`` keeping :math:`\\gamma \\le 1`,
    :math:`\\frac{8}{3} d \\mu(U) \\log(2d/\\delta)`

    """
    return 8 / 3 * d * mu_u * math.log(2 * d / delta)


def nested_coherence_bound(dim_u: int, d_prime: int, mu_u: float) -> float:
    """Ceiling :math:`\\frac{d}{d'}\\mu(U)` on the coherence of any
    ``d'``-dimensional subspace of ``U``

    """
    if not 1 <= d_prime <= dim_u:
        raise exceptions.InvalidArgument(
            'd_prime must be in [1, {}]'.format(dim_u))
    return dim_u / d_prime * mu_u


def product_coherence_bound(d: int, mus: typing.Sequence[float]) -> float:
    """Ceiling :math:`d^{T-1}\\prod_t \\mu(U_t)` on the coherence of the
    span of ``d`` mode-wise outer products

    """
    if not mus:
        raise exceptions.InvalidArgument('At least one coherence is required')
    return d ** (len(mus) - 1) * math.prod(mus)


def css_columns_per_round(rounds: int, r: int, delta: float,
                          epsilon: float) -> float:
    """Columns drawn per selection round, :math:`\\frac{5Lr}{2\\delta
    \\epsilon}`

    """
    if not 0 < delta < 1 or not 0 < epsilon < 1:
        raise exceptions.InvalidArgument(
            'delta and epsilon must be in (0, 1)')
    return 5 * rounds * r / (2 * delta * epsilon)


def css_rounds(n1: int, n2: int) -> int:
    """Selection rounds :math:`\\lceil\\log(n_1 n_2)\\rceil`"""
    return int(math.ceil(math.log(n1 * n2)))


def css_error_envelope(epsilon: float, rounds: int, tail_energy: float,
                       total_energy: float) -> float:
    """Expected squared error after ``rounds`` of residual sampling,
    :math:`\\frac{1}{1 - \\epsilon}\\|M - M_r\\|_F^2 +
    \\epsilon^L\\|M\\|_F^2`

    """
    if not 0 < epsilon < 1:
        raise exceptions.InvalidArgument('epsilon must be in (0, 1)')
    return tail_energy / (1 - epsilon) + epsilon ** rounds * total_energy


def degrees_of_freedom(n: int, r: int) -> int:
    """Degrees of freedom :math:`r(2n - r)` of an ``n`` by ``n`` rank ``r``
    matrix

    """
    return r * (2 * n - r)


FORMULAS: typing.Dict[str, typing.Callable[..., typing.Any]] = {
    'matrix-budget': matrix_budget,
    'tensor-budget-schedule': tensor_budget_schedule,
    'tensor-total': tensor_total,
    'matrix-total': matrix_total,
    'passive-lower-bound': passive_lower_bound,
    'passive-lower-bound-exact': passive_lower_bound_exact,
    'adaptive-lower-bound': adaptive_lower_bound,
    'detection-constants': detection_constants,
    'nested-coherence-bound': nested_coherence_bound,
    'product-coherence-bound': product_coherence_bound,
    'css-columns-per-round': css_columns_per_round,
    'css-rounds': css_rounds,
    'css-error-envelope': css_error_envelope,
    'degrees-of-freedom': degrees_of_freedom
}


def _check_budget_args(r: float, mu0: float, delta: float) -> None:
    if r < 1:
        raise exceptions.InvalidArgument('r must be at least 1')
    elif mu0 < 1:
        raise exceptions.InvalidArgument('mu0 must be at least 1')
    elif not 0 < delta < 1:
        raise exceptions.InvalidArgument('delta must be in (0, 1)')


def _passive_exponent(params: BoundParams) -> float:
    n1, order = params.dims[0], params.order
    return (params.mu0 * params.rank) ** (order - 1) \
        / math.prod(params.dims[1:]) * math.log(n1 / (2 * params.delta))
