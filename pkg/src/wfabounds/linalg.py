"""Small linear-algebra helpers shared by the norm and spectrum modules."""

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigs

from .errors import ConditioningError

#: Dense eigenvalue computation is used up to this many rows.
DENSE_LIMIT = 400


def kron_sum(mats):
    """Return ``sum_a kron(M_a, M_a)`` for a stack of square matrices."""
    mats = np.asarray(mats, dtype=float)
    n = mats.shape[-1]
    out = np.zeros((n * n, n * n))
    for M in mats:
        out += np.kron(M, M)
    return out


def kron_sum_operator(mats, transpose=False):
    """Matrix-free version of :func:`kron_sum` acting on row-major ``vec(X)``.

    ``kron(M, M) vec(X) = vec(M X M^T)`` for row-major vectorisation.
    """
    mats = np.asarray(mats, dtype=float)
    if transpose:
        mats = np.transpose(mats, (0, 2, 1))
    n = mats.shape[-1]

    def matvec(v):
        X = np.asarray(v).reshape(n, n)
        return np.einsum("aij,jk,alk->il", mats, X, mats).ravel()

    return LinearOperator((n * n, n * n), matvec=matvec, dtype=float)


def spectral_radius(M, tol=1e-10, maxiter=10_000):
    """Largest eigenvalue modulus of a square matrix or ``LinearOperator``."""
    shape = M.shape
    if shape[0] == 0:
        return 0.0
    if shape[0] <= DENSE_LIMIT and not isinstance(M, LinearOperator):
        return float(np.max(np.abs(np.linalg.eigvals(M))))
    if shape[0] <= DENSE_LIMIT:
        dense = M @ np.eye(shape[0])
        return float(np.max(np.abs(np.linalg.eigvals(dense))))
    try:
        vals = eigs(M, k=1, which="LM", tol=tol, maxiter=maxiter,
                    return_eigenvectors=False)
    except ArpackNoConvergence as exc:
        raise ConditioningError("spectral radius iteration did not converge") from exc
    return float(np.abs(vals[0]))
