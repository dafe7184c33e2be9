"""The double of a pair of dual Poisson Lie groups and its two groupoid
structures.

The concrete pair is (B, B_-) inside SL(n), with double D = G x T and
embeddings b -> (hn, h), b_- -> (mh, h^{-1}).  An element of the double
groupoid is a factorization quadruple (b, u, u', b') with

    embed_B(b) * embed_Bminus(u) = embed_Bminus(u') * embed_B(b')   in D.

Dressing solves that equation for the missing half via Gauss factorization
of the G-component plus a torus square root fixing the T-component; the
square root carries the discrete 2-torsion ambiguity, resolved by the
principal branch or by a continuity reference.
"""

from dataclasses import dataclass
from typing import Any, Optional, Tuple

import numpy as np

from .errors import InvariantViolation, NotComposable, NotInDressingDomain, NotInOpenCell
from .linalg import gauss_decompose, torus_sqrt

COMPOSE_RTOL = 1e-9


@dataclass(frozen=True)
class DoubleElement:
    """Point of D = G x T with componentwise multiplication."""

    g: np.ndarray
    t: np.ndarray

    def __matmul__(self, other: "DoubleElement") -> "DoubleElement":
        return DoubleElement(self.g @ other.g, self.t @ other.t)

    def dist(self, other: "DoubleElement") -> float:
        sg = max(np.linalg.norm(self.g), 1.0)
        st = max(np.linalg.norm(self.t), 1.0)
        return max(
            np.linalg.norm(self.g - other.g) / sg,
            np.linalg.norm(self.t - other.t) / st,
        )


@dataclass(frozen=True)
class GammaElement:
    """Factorization quadruple (b, u, u', b'); b, b' upper, u, u' lower."""

    b: Any
    u: Any
    u_prime: Any
    b_prime: Any

    def slots(self) -> Tuple[Any, Any, Any, Any]:
        return (self.b, self.u, self.u_prime, self.b_prime)


def _exchange(n: int) -> np.ndarray:
    j = np.zeros((n, n), dtype=np.complex128)
    for i in range(n):
        j[i, n - 1 - i] = 1.0
    return j


class DualPairBase:
    """Shared groupoid structure over the two legs of a dual pair.

    Concrete subclasses supply the element arithmetic and the two dressing
    factorizations; everything else (both multiplications, inverses,
    identities, bisections) is generic.
    """

    # -- element arithmetic, supplied by subclasses --------------------------
    def emult(self, a, b):
        raise NotImplementedError

    def einv(self, a):
        raise NotImplementedError

    def edist(self, a, b) -> float:
        raise NotImplementedError

    @property
    def unit(self):
        raise NotImplementedError

    def dress(self, b, u, ref=None):
        """Solve b_bar u_bar = u'_bar b'_bar for (u', b')."""
        raise NotImplementedError

    def dress_inverse(self, u_prime, b_prime, ref=None):
        """Solve b_bar u_bar = u'_bar b'_bar for (b, u)."""
        raise NotImplementedError

    def gamma_residual(self, gamma: GammaElement) -> float:
        raise NotImplementedError

    # -- constructors ---------------------------------------------------------
    def gamma_lower(self, g, u, ref=None) -> GammaElement:
        """gamma_{g,u} = (g, u, g[u], g^u)."""
        u2, g2 = self.dress(g, u, ref=ref)
        return GammaElement(g, u, u2, g2)

    def gamma_upper(self, u_prime, g_prime, ref=None) -> GammaElement:
        """gamma^{u',g'} = (u'[g'], u'^{g'}, u', g')."""
        g1, u1 = self.dress_inverse(u_prime, g_prime, ref=ref)
        return GammaElement(g1, u1, u_prime, g_prime)

    def validate(self, gamma: GammaElement, tol: float = 1e-10) -> GammaElement:
        res = self.gamma_residual(gamma)
        if res > tol:
            raise InvariantViolation(f"factorization quadruple off by {res:.3e}")
        return gamma

    # -- groupoid over the dual leg (source u, target u') ---------------------
    def star_source(self, gamma: GammaElement):
        return gamma.u

    def star_target(self, gamma: GammaElement):
        return gamma.u_prime

    def star_identity(self, u) -> GammaElement:
        return GammaElement(self.unit, u, u, self.unit)

    def star_inverse(self, gamma: GammaElement) -> GammaElement:
        b, u, u2, b2 = gamma.slots()
        return GammaElement(self.einv(b), u2, u, self.einv(b2))

    def star_mult(self, g1: GammaElement, g2: GammaElement, tol=COMPOSE_RTOL) -> GammaElement:
        if self.edist(g1.u_prime, g2.u) > tol:
            raise NotComposable("star product needs u'_1 = u_2")
        return GammaElement(
            self.emult(g2.b, g1.b),
            g1.u,
            g2.u_prime,
            self.emult(g2.b_prime, g1.b_prime),
        )

    # -- groupoid over the primary leg (source b, target b') ------------------
    def g_source(self, gamma: GammaElement):
        return gamma.b

    def g_target(self, gamma: GammaElement):
        return gamma.b_prime

    def g_identity(self, g) -> GammaElement:
        return GammaElement(g, self.unit, self.unit, g)

    def g_inverse(self, gamma: GammaElement) -> GammaElement:
        b, u, u2, b2 = gamma.slots()
        return GammaElement(b2, self.einv(u), self.einv(u2), b)

    def g_mult(self, g1: GammaElement, g2: GammaElement, tol=COMPOSE_RTOL) -> GammaElement:
        if self.edist(g1.b_prime, g2.b) > tol:
            raise NotComposable("product over the primary leg needs b'_1 = b_2")
        return GammaElement(
            g1.b,
            self.emult(g1.u, g2.u),
            self.emult(g1.u_prime, g2.u_prime),
            g2.b_prime,
        )

    # -- bisections ------------------------------------------------------------
    def bisection_S(self, gamma: GammaElement, h, ref=None) -> GammaElement:
        """Point of the local bisection S_gamma of the primary-leg groupoid.

        S_gamma(h) = (h g, u, h[u'], h^{u'} g'); h = unit returns gamma.
        """
        b, u, u2, b2 = gamma.slots()
        hu2, hg2 = self.dress(h, u2, ref=ref)
        return GammaElement(self.emult(h, b), u, hu2, self.emult(hg2, b2))

    def lagrangian_bisection_pair(self, gamma: GammaElement) -> Tuple[GammaElement, GammaElement]:
        """Diagonal point of the Lagrangian bisection; requires gamma in the
        graph locus, i.e. (b, u) must re-derive the quadruple."""
        check = self.gamma_lower(gamma.b, gamma.u, ref=_diag_ref(gamma.u_prime))
        if self.edist(check.u_prime, gamma.u_prime) > 1e-8 or self.edist(
            check.b_prime, gamma.b_prime
        ) > 1e-8:
            raise NotInDressingDomain("quadruple is not on the dressing graph")
        return (gamma, gamma)


def _diag_ref(x) -> Optional[np.ndarray]:
    if isinstance(x, np.ndarray):
        return np.diag(np.diag(x))
    return None


class BorelPair(DualPairBase):
    """The pair (B, B_-) in SL(n) with double D = G x T."""

    def __init__(self, n: int):
        self.n = n
        self._eye = np.eye(n, dtype=np.complex128)
        self._exch = _exchange(n)

    # element arithmetic
    def emult(self, a, b):
        return a @ b

    def einv(self, a):
        return np.linalg.inv(a)

    def edist(self, a, b) -> float:
        return np.linalg.norm(a - b) / max(np.linalg.norm(a), 1.0)

    @property
    def unit(self):
        return self._eye

    # embeddings into the double
    def embed_B(self, b: np.ndarray) -> DoubleElement:
        """b = hn with h diagonal, n unit upper; image (hn, h)."""
        return DoubleElement(b, np.diag(np.diag(b)))

    def embed_Bminus(self, bm: np.ndarray) -> DoubleElement:
        """b_- = mh; image (mh, h^{-1})."""
        h = np.diag(bm)
        return DoubleElement(bm, np.diag(1.0 / h))

    def gamma_residual(self, gamma: GammaElement) -> float:
        lhs = self.embed_B(gamma.b) @ self.embed_Bminus(gamma.u)
        rhs = self.embed_Bminus(gamma.u_prime) @ self.embed_B(gamma.b_prime)
        return lhs.dist(rhs)

    def dress(self, b: np.ndarray, u: np.ndarray, ref=None) -> Tuple[np.ndarray, np.ndarray]:
        """Factor b_bar u_bar = u'_bar b'_bar given the left pair.

        The G-component b u = m h n fixes everything except the diagonal
        split of h between u' and b'; the T-component forces
        diag(u')^2 = h * diag(u) * diag(b)^{-1}.
        """
        try:
            m, h, nmat = gauss_decompose(b @ u)
        except NotInOpenCell as exc:
            raise NotInDressingDomain(str(exc)) from exc
        hb = np.diag(b)
        hu = np.diag(u)
        h1_sq = np.diag(np.diag(h) * hu / hb)
        h1 = torus_sqrt(h1_sq, ref=ref)
        u_prime = m @ h1
        b_prime = np.diag(np.diag(h) / np.diag(h1)) @ nmat
        return u_prime, b_prime

    def dress_inverse(self, u_prime: np.ndarray, g_prime: np.ndarray, ref=None):
        """Factor the product the other way: find (g, u) with g u = u' g'.

        Uses the opposite (upper times lower) factorization, obtained from
        Gauss elimination on the exchange-conjugated matrix; the T-component
        forces diag(u)^2 = diag(U) * diag(u') * diag(g')^{-1}.
        """
        d = u_prime @ g_prime
        jj = self._exch
        try:
            m, h, nmat = gauss_decompose(jj @ d @ jj)
        except NotInOpenCell as exc:
            raise NotInDressingDomain(str(exc)) from exc
        u0 = jj @ m @ jj  # unit upper
        hh = jj @ h @ jj  # diagonal
        l0 = jj @ nmat @ jj  # unit lower
        s_sq = np.diag(np.diag(hh) * np.diag(u_prime) / np.diag(g_prime))
        s = torus_sqrt(s_sq, ref=ref)
        g = u0 @ hh @ np.diag(1.0 / np.diag(s))
        u = s @ l0
        return g, u
