"""Small dense linear algebra for the IB ODE: pivoted LU solves with a
condition estimate, smallest singular values and eigenvalues.

All heavy lifting is LAPACK through scipy.linalg."""
import logging
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.linalg.lapack import get_lapack_funcs

from app.common.errors import PartialSpectrumError, ShapeMismatchError, SingularMatrixError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LinearSolveReport:
    solution: np.ndarray
    condition: float
    pivot_growth: float
    residual: float


def _square(a):
    a = np.array(a, dtype=np.float64, order='F', copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeMismatchError("Expected a square matrix, got shape {}".format(a.shape))
    return a


def lu_solve(a, b):
    """Solves a x = b by LU with partial pivoting.
    Reports the 1-norm condition estimate (LAPACK gecon) and the pivot growth max|U| / max|A|."""
    a = _square(a)
    b = np.asarray(b, dtype=np.float64)
    if b.shape[0] != a.shape[0]:
        raise ShapeMismatchError("Right-hand side of length {} does not conform to order {}".format(
            b.shape[0], a.shape[0]))

    with warnings.catch_warnings():
        warnings.simplefilter('ignore', scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a)
    if np.any(np.diag(lu) == 0.0):
        raise SingularMatrixError("Exactly singular pivot in LU factorization")

    anorm = np.linalg.norm(a, 1)
    (gecon,) = get_lapack_funcs(('gecon',), (lu,))
    rcond, _ = gecon(lu, anorm, norm='1')
    condition = np.inf if rcond == 0.0 else 1.0 / rcond

    max_a = np.max(np.abs(a))
    pivot_growth = float(np.max(np.abs(np.triu(lu))) / max_a) if max_a > 0 else 1.0

    x = scipy.linalg.lu_solve((lu, piv), b)
    residual = float(np.max(np.abs(a @ x - b))) if x.size else 0.0
    return LinearSolveReport(solution=x, condition=float(condition),
                             pivot_growth=pivot_growth, residual=residual)


def singular_values(a):
    return scipy.linalg.svdvals(_square(a))


def sigma_min(a):
    a = _square(a)
    if a.shape[0] == 0:
        return 0.0
    return float(singular_values(a)[-1])


def nullity(a, tol):
    """Number of singular values at or below tol"""
    return int(np.sum(singular_values(a) <= tol))


def left_null_vector(a):
    """Unit vector v minimizing |v a|, the left singular vector of the smallest singular value"""
    u, _, _ = scipy.linalg.svd(_square(a))
    return u[:, -1]


def eigenvalues(a):
    """Eigenvalues sorted by real part, then imaginary part"""
    a = _square(a)
    try:
        values = scipy.linalg.eigvals(a)
    except np.linalg.LinAlgError as err:
        raise PartialSpectrumError("Eigenvalue iteration did not converge: {}".format(err))
    order = np.lexsort((values.imag, values.real))
    return values[order]


def spectral_radius(a):
    values = eigenvalues(a)
    return float(np.max(np.abs(values))) if values.size else 0.0
