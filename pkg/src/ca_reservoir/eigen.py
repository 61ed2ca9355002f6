"""Symmetric eigenvalues by cyclic Jacobi rotations.

The Gram matrices this package decomposes are symmetric positive
semidefinite, so their eigenvalue and singular-value decompositions
coincide; Jacobi is used for both roles. The sweep kernel lives in
``_kernels`` with numba and numpy twins.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .errors import DimensionError

DEFAULT_TOL = 1e-10
DEFAULT_MAX_SWEEPS = 100


def jacobi_eigvalsh(
    a: np.ndarray,
    tol: float = DEFAULT_TOL,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> np.ndarray:
    """Eigenvalues of a symmetric matrix, sorted descending.

    Rotates until the largest off-diagonal magnitude is at most ``tol``
    (absolute) or ``max_sweeps`` cyclic sweeps have run.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError("expected a square matrix")
    if not np.allclose(a, a.T):
        raise DimensionError("expected a symmetric matrix")
    work = np.array(a, dtype=np.float64, copy=True)
    _kernels.jacobi_sweeps(work, float(tol), int(max_sweeps))
    vals = np.diag(work).copy()
    return np.sort(vals)[::-1]
