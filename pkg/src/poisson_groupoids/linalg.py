"""Dense complex kernel layer: Gauss factorization, torus square roots,
matrix exponentials/logarithms for triangular arguments, and numerical
differentiation of holomorphic chart maps.

The Gauss kernel is dispatched to the compiled extension when available.
"""

import itertools
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import DomainError, DomainEscape, NotInOpenCell

try:  # compiled twin, optional
    from . import _kernels as _K
except ImportError:  # pragma: no cover - depends on build environment
    from . import _kernels_py as _K

KERNEL_BACKEND = _K.BACKEND

PIVOT_RTOL = 1e-9


class GaussFactors(NamedTuple):
    m: np.ndarray  # unit lower triangular
    h: np.ndarray  # diagonal
    n: np.ndarray  # unit upper triangular


def gauss_decompose(g: np.ndarray, rel_tol: float = PIVOT_RTOL) -> GaussFactors:
    """Factor g = m @ h @ n with m unit lower, h diagonal, n unit upper.

    Raises NotInOpenCell when a leading principal minor has modulus
    <= rel_tol * ||g||, which is exactly failure of membership in the open
    cell N_- T N.
    """
    out = _K.gauss_mhn(g, rel_tol)
    if out is None:
        raise NotInOpenCell("leading principal minor below pivot tolerance")
    return GaussFactors(*out)


def torus_sqrt(t: np.ndarray, ref: Optional[np.ndarray] = None) -> np.ndarray:
    """Square root of a diagonal det-1 matrix.

    Entrywise principal square roots, with the sign pattern adjusted over the
    2-torsion subgroup so the result keeps unit determinant; among those the
    root nearest `ref` (or nearest the principal value) is returned.
    """
    t = np.asarray(t, dtype=np.complex128)
    d = np.diag(t)
    principal = np.sqrt(d)
    nn = len(d)
    best = None
    best_dist = None
    for signs in itertools.product((1.0, -1.0), repeat=nn):
        cand = principal * np.array(signs)
        if abs(np.prod(d) - 1.0) < 1e-8 and abs(np.prod(cand) - 1.0) > 1e-8:
            continue
        if ref is not None:
            dist = np.linalg.norm(cand - np.diag(ref))
        else:
            dist = np.linalg.norm(cand - principal)
        if best is None or dist < best_dist - 1e-15:
            best = cand
            best_dist = dist
    return np.diag(best)


def expm_tri(a: np.ndarray) -> np.ndarray:
    """exp(a) by scaling-and-squaring Taylor; exact enough for small matrices."""
    a = np.asarray(a, dtype=np.complex128)
    nn = a.shape[0]
    norm = np.linalg.norm(a)
    k = max(0, int(np.ceil(np.log2(max(norm, 1e-300) / 0.25))))
    b = a / (2**k)
    out = np.eye(nn, dtype=np.complex128)
    term = np.eye(nn, dtype=np.complex128)
    for j in range(1, 25):
        term = term @ b / j
        out = out + term
        if np.linalg.norm(term) < 1e-18 * max(1.0, np.linalg.norm(out)):
            break
    for _ in range(k):
        out = out @ out
    return out


def unipotent_log(u: np.ndarray) -> np.ndarray:
    """log of a unipotent matrix (terminating nilpotent series)."""
    return _K.unipotent_log(u)


def is_upper(a: np.ndarray, tol: float = 1e-9) -> bool:
    """Relative check that a is upper triangular."""
    scale = max(np.linalg.norm(a), 1.0)
    return np.linalg.norm(np.tril(a, -1)) <= tol * scale


def is_lower(a: np.ndarray, tol: float = 1e-9) -> bool:
    scale = max(np.linalg.norm(a), 1.0)
    return np.linalg.norm(np.triu(a, 1)) <= tol * scale


def solve_det_one(a: np.ndarray) -> np.ndarray:
    """Rescale an invertible matrix to determinant one (principal root)."""
    nn = a.shape[0]
    det = np.linalg.det(a)
    return a / det ** (1.0 / nn)


def numeric_jacobian(
    f: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    step: float = 1e-6,
    richardson: bool = False,
) -> np.ndarray:
    """Central-difference Jacobian of a holomorphic map in chart coordinates.

    All maps in scope are holomorphic, so probing real coordinate directions
    determines the complex-linear Jacobian; error is O(step^2), or O(step^4)
    with one Richardson extrapolation.
    """
    x = np.asarray(x, dtype=np.complex128)

    def jac(h):
        cols = []
        for k in range(len(x)):
            xp = x.copy()
            xm = x.copy()
            xp[k] += h
            xm[k] -= h
            try:
                fp = np.asarray(f(xp), dtype=np.complex128)
                fm = np.asarray(f(xm), dtype=np.complex128)
            except DomainError as exc:
                raise DomainEscape(f"probe left the domain: {exc}") from exc
            cols.append((fp - fm) / (2.0 * h))
        return np.stack(cols, axis=-1)

    j = jac(step)
    if richardson:
        j2 = jac(step / 2.0)
        j = (4.0 * j2 - j) / 3.0
    return j
