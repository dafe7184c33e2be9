"""Pure numpy implementations of the hot factorization kernels.

The Cython module `_kernels` provides the same two functions with identical
semantics; `linalg` picks whichever is importable.  Keep the two in sync.
"""

import numpy as np

BACKEND = "python"


def gauss_mhn(a, rel_tol):
    """Doolittle elimination without pivoting: a = m @ h @ n.

    m is unit lower triangular, h diagonal, n unit upper triangular.
    Returns None when some leading principal minor has modulus
    <= rel_tol * ||a||_F (the product of pivots up to k equals the k-th
    leading principal minor, exactly, since no pivoting happens).
    """
    a = np.asarray(a, dtype=np.complex128)
    nn = a.shape[0]
    norm = np.linalg.norm(a)
    thresh = rel_tol * norm
    u = a.copy()
    m = np.eye(nn, dtype=np.complex128)
    minor = 1.0 + 0.0j
    for k in range(nn):
        pivot = u[k, k]
        minor = minor * pivot
        if abs(minor) <= thresh:
            return None
        if k < nn - 1:
            factors = u[k + 1 :, k] / pivot
            m[k + 1 :, k] = factors
            u[k + 1 :, k:] -= np.outer(factors, u[k, k:])
    h = np.diag(np.diag(u))
    n = u / np.diag(u)[:, None]
    n = np.triu(n)
    np.fill_diagonal(n, 1.0)
    return m, h, n


def unipotent_log(u):
    """Logarithm of a unipotent matrix via the terminating nilpotent series."""
    u = np.asarray(u, dtype=np.complex128)
    nn = u.shape[0]
    x = u - np.eye(nn, dtype=np.complex128)
    out = np.zeros_like(x)
    power = np.eye(nn, dtype=np.complex128)
    for k in range(1, nn):
        power = power @ x
        out += ((-1) ** (k + 1) / k) * power
    return out
