import typing

import numpy as np

Vector = np.ndarray
"""A one-dimensional array of double precision values."""

Matrix = np.ndarray
"""A two-dimensional array of double precision values. Columns are the
units the matrix algorithms stream over.

"""

Tensor = np.ndarray
"""An order-T array of double precision values with dims
:math:`(n_1, \\ldots, n_T)`. Subtensors along the last mode are vectorized
lexicographically (C order, last leading index fastest), so the flat index
of ``(i_1, ..., i_k)`` over dims ``(n_1, ..., n_k)`` is the one returned by
:func:`numpy.ravel_multi_index`.

"""

Dims = typing.Sequence[int]
"""Dimensions of a matrix or tensor, one entry per mode."""

Position = typing.Tuple[int, ...]
"""A full multi-index into a matrix or tensor."""

Selector = typing.Tuple[int, ...]
"""Fixed indices for the trailing modes of a tensor. The leading modes that
are not fixed form the vectorized slice an :class:`~adcp.sampling.IndexSet`
indexes into. For a matrix, ``(j,)`` selects column ``j``.

"""

Seed = typing.Union[int, np.random.SeedSequence, np.random.Generator, None]
"""Anything :func:`numpy.random.default_rng` accepts."""
