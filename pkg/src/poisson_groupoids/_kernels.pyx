# cython: language_level=3
"""Cython twin of `_kernels_py`: tiny-matrix factorization kernels.

Semantics must match `_kernels_py` exactly; `tests/test_linalg.py` asserts
agreement whenever this module is importable.
"""

import numpy as np

cimport cython

BACKEND = "cython"


@cython.boundscheck(False)
@cython.wraparound(False)
def gauss_mhn(a, double rel_tol):
    """Doolittle elimination without pivoting: a = m @ h @ n, or None."""
    cdef double complex[:, ::1] u = np.array(a, dtype=np.complex128, order="C")
    cdef Py_ssize_t nn = u.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double norm2 = 0.0
    for i in range(nn):
        for j in range(nn):
            norm2 += u[i, j].real * u[i, j].real + u[i, j].imag * u[i, j].imag
    cdef double thresh = rel_tol * norm2 ** 0.5
    m_arr = np.eye(nn, dtype=np.complex128)
    cdef double complex[:, ::1] m = m_arr
    cdef double complex minor = 1.0
    cdef double complex pivot, factor
    for k in range(nn):
        pivot = u[k, k]
        minor = minor * pivot
        if abs(minor) <= thresh:
            return None
        for i in range(k + 1, nn):
            factor = u[i, k] / pivot
            m[i, k] = factor
            for j in range(k, nn):
                u[i, j] = u[i, j] - factor * u[k, j]
    h_arr = np.zeros((nn, nn), dtype=np.complex128)
    n_arr = np.eye(nn, dtype=np.complex128)
    cdef double complex[:, ::1] h = h_arr
    cdef double complex[:, ::1] n = n_arr
    for i in range(nn):
        h[i, i] = u[i, i]
        for j in range(i + 1, nn):
            n[i, j] = u[i, j] / u[i, i]
    return m_arr, h_arr, n_arr


@cython.boundscheck(False)
@cython.wraparound(False)
def unipotent_log(u):
    """Logarithm of a unipotent matrix via the terminating nilpotent series."""
    arr = np.array(u, dtype=np.complex128)
    cdef Py_ssize_t nn = arr.shape[0]
    x = arr - np.eye(nn, dtype=np.complex128)
    out = np.zeros((nn, nn), dtype=np.complex128)
    power = np.eye(nn, dtype=np.complex128)
    cdef Py_ssize_t k
    for k in range(1, nn):
        power = power @ x
        out += ((-1.0) ** (k + 1) / k) * power
    return out
