"""Root-system and r-matrix data for sl(n).

Fixes once and for all: elementary root vectors, a trace-orthonormalized
Cartan basis, the standard skew-symmetric r-matrix, the dual bases of the
two Borel subalgebras, and the standard Weyl group representatives.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Sequence, Tuple

import numpy as np


def elementary(n: int, i: int, j: int) -> np.ndarray:
    e = np.zeros((n, n), dtype=np.complex128)
    e[i, j] = 1.0
    return e


def positive_roots(n: int) -> List[Tuple[int, int]]:
    """Positive roots of sl(n) as index pairs (i, j), i < j, lexicographic."""
    return [(i, j) for i in range(n) for j in range(i + 1, n) ]


def trace_form(x: np.ndarray, y: np.ndarray) -> complex:
    """Bilinear form of the defining representation, <x,y> = tr(xy)."""
    return np.trace(x @ y)


def borel_pairing(x: np.ndarray, xi: np.ndarray) -> complex:
    """The duality pairing between the Borel subalgebras.

    <x_+ + x_0, y_- + y_0> = -tr(x_+ y_-) - 2 tr(x_0 y_0), where the first
    argument lives in the upper Borel subalgebra, the second in the lower.
    """
    x_up = np.triu(x, 1)
    x_d = np.diag(np.diag(x))
    xi_lo = np.tril(xi, -1)
    xi_d = np.diag(np.diag(xi))
    return -np.trace(x_up @ xi_lo) - 2.0 * np.trace(x_d @ xi_d)


@dataclass(frozen=True)
class LieBasis:
    """Chevalley data for sl(n) with the trace form normalization."""

    n: int
    roots: List[Tuple[int, int]]
    pos_root_vectors: List[np.ndarray]
    neg_root_vectors: List[np.ndarray]
    cartan_basis: List[np.ndarray]  # 2 tr(H_i H_j) = delta_ij

    @property
    def rank(self) -> int:
        return self.n - 1


@lru_cache(maxsize=None)
def lie_basis(n: int) -> LieBasis:
    roots = positive_roots(n)
    pos = [elementary(n, i, j) for (i, j) in roots]
    neg = [elementary(n, j, i) for (i, j) in roots]
    # Gram-Schmidt on E_ii - E_{i+1,i+1} under the form 2 tr(xy).
    cartan = []
    for i in range(n - 1):
        v = elementary(n, i, i) - elementary(n, i + 1, i + 1)
        for h in cartan:
            v = v - 2.0 * trace_form(v, h) * h
        v = v / np.sqrt(2.0 * trace_form(v, v))
        cartan.append(v)
    return LieBasis(n, roots, pos, neg, cartan)


@dataclass(frozen=True)
class DualBorelBases:
    """Dual bases of the upper and lower Borel subalgebras.

    x_basis spans the upper Borel ({-E_a} then {-H_i}), xi_basis the lower
    ({E_{-a}} then {H_i}); <x_i, xi^j> = delta under `borel_pairing`.
    """

    n: int
    x_basis: List[np.ndarray]
    xi_basis: List[np.ndarray]

    @property
    def dim(self) -> int:
        return len(self.x_basis)


@lru_cache(maxsize=None)
def dual_borel_bases(n: int) -> DualBorelBases:
    lb = lie_basis(n)
    x = [-e for e in lb.pos_root_vectors] + [-h for h in lb.cartan_basis]
    xi = [e for e in lb.neg_root_vectors] + list(lb.cartan_basis)
    return DualBorelBases(n, x, xi)


def standard_r_matrix(n: int) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Wedge pairs (E_{-a}, E_a), one per positive root, lexicographic order."""
    lb = lie_basis(n)
    return list(zip(lb.neg_root_vectors, lb.pos_root_vectors))


def mixed_r_term(n: int) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Wedge pairs (xi^i, x_i) feeding mixed-product assembly."""
    db = dual_borel_bases(n)
    return list(zip(db.xi_basis, db.x_basis))


@dataclass(frozen=True)
class WeylWord:
    """A finite sequence of simple-reflection indices in {1, .., n-1}."""

    letters: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(int(k) for k in self.letters))

    def validate(self, n: int) -> None:
        for k in self.letters:
            if not 1 <= k <= n - 1:
                raise ValueError(f"letter {k} out of range for rank {n}")


def simple_representative(n: int, i: int) -> np.ndarray:
    """Standard representative of the i-th simple reflection (1-based index)."""
    w = np.eye(n, dtype=np.complex128)
    w[i - 1, i - 1] = 0.0
    w[i, i] = 0.0
    w[i - 1, i] = -1.0
    w[i, i - 1] = 1.0
    return w


def weyl_representative(word: WeylWord, n: int) -> np.ndarray:
    """Product of the standard simple representatives along the word."""
    word.validate(n)
    out = np.eye(n, dtype=np.complex128)
    for k in word.letters:
        out = out @ simple_representative(n, k)
    return out


def weyl_permutation(word: WeylWord, n: int) -> List[int]:
    """Permutation sigma with w_bar e_j = +- e_{sigma(j)}.

    The last letter acts first: w_bar = s_{i1} ... s_{il} as a matrix product.
    """
    out = list(range(n))
    for j in range(n):
        img = j
        for k in reversed(word.letters):
            i = k - 1
            if img == i:
                img = i + 1
            elif img == i + 1:
                img = i
        out[j] = img
    return out


def inversion_roots(word: WeylWord, n: int) -> List[Tuple[int, int]]:
    """Positive roots (i, j) with u^{-1}(e_i - e_j) negative, lexicographic."""
    sigma = weyl_permutation(word, n)
    inv = [0] * n
    for j, img in enumerate(sigma):
        inv[img] = j
    return [(i, j) for (i, j) in positive_roots(n) if inv[i] > inv[j]]


def adjoint_orbit_basis(n: int) -> Sequence[np.ndarray]:
    """Full gl-independent basis of sl(n): root vectors plus Cartan."""
    lb = lie_basis(n)
    return list(lb.pos_root_vectors) + list(lb.neg_root_vectors) + list(lb.cartan_basis)
