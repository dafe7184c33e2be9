"""Holomorphic charts for the manifolds in play.

A chart provides coordinates (a complex vector), the inverse parametrization,
and an embedding of points into a flat ambient frame; bivectors are always
stored as antisymmetric coefficient matrices relative to a chart's frame.
"""

from typing import List, Optional, Sequence

import numpy as np

from .double import DualPairBase, GammaElement


class Chart:
    dim: int
    label: str

    def coords(self, point) -> np.ndarray:
        raise NotImplementedError

    def point(self, z: np.ndarray):
        raise NotImplementedError

    def embed(self, point) -> np.ndarray:
        """Flatten a point into the chart's ambient frame."""
        raise NotImplementedError


class AmbientMatrixChart(Chart):
    """Matrix entries as global coordinates (a frame for group-level bivectors)."""

    def __init__(self, n: int, label: str = "ambient"):
        self.n = n
        self.dim = n * n
        self.label = label

    def coords(self, point) -> np.ndarray:
        return np.asarray(point, dtype=np.complex128).reshape(-1)

    def point(self, z: np.ndarray):
        return np.asarray(z, dtype=np.complex128).reshape(self.n, self.n)

    def embed(self, point) -> np.ndarray:
        return self.coords(point)


class BorelChart(Chart):
    """Global chart of the upper Borel subgroup: b = h(t) (I + S)."""

    def __init__(self, n: int):
        self.n = n
        self.dim = (n - 1) + n * (n - 1) // 2
        self.label = f"B({n})"
        self._upper = [(i, j) for i in range(n) for j in range(i + 1, n)]

    def coords(self, b) -> np.ndarray:
        n = self.n
        h = np.diag(b)
        s = b / h[:, None]
        return np.concatenate([h[: n - 1], np.array([s[i, j] for (i, j) in self._upper])])

    def point(self, z: np.ndarray):
        n = self.n
        t = np.concatenate([z[: n - 1], [1.0 / np.prod(z[: n - 1])]])
        b = np.eye(n, dtype=np.complex128)
        for k, (i, j) in enumerate(self._upper):
            b[i, j] = z[n - 1 + k]
        return np.diag(t) @ b

    def embed(self, point) -> np.ndarray:
        return np.asarray(point, dtype=np.complex128).reshape(-1)


class BorelMinusChart(Chart):
    """Global chart of the lower Borel subgroup: b_- = (I + M) h(t)."""

    def __init__(self, n: int):
        self.n = n
        self.dim = (n - 1) + n * (n - 1) // 2
        self.label = f"B-({n})"
        self._lower = [(i, j) for i in range(n) for j in range(i)]

    def coords(self, bm) -> np.ndarray:
        n = self.n
        h = np.diag(bm)
        m = bm / h[None, :]
        return np.concatenate([h[: n - 1], np.array([m[i, j] for (i, j) in self._lower])])

    def point(self, z: np.ndarray):
        n = self.n
        t = np.concatenate([z[: n - 1], [1.0 / np.prod(z[: n - 1])]])
        m = np.eye(n, dtype=np.complex128)
        for k, (i, j) in enumerate(self._lower):
            m[i, j] = z[n - 1 + k]
        return m @ np.diag(t)

    def embed(self, point) -> np.ndarray:
        return np.asarray(point, dtype=np.complex128).reshape(-1)


class TorusChart(Chart):
    """Maximal torus of SL(n): first n-1 diagonal entries."""

    def __init__(self, n: int):
        self.n = n
        self.dim = n - 1
        self.label = f"T({n})"

    def coords(self, t) -> np.ndarray:
        return np.diag(t)[: self.n - 1].astype(np.complex128)

    def point(self, z: np.ndarray):
        t = np.concatenate([z, [1.0 / np.prod(z)]])
        return np.diag(t)

    def embed(self, point) -> np.ndarray:
        return np.asarray(point, dtype=np.complex128).reshape(-1)


class DoubleFrameChart(Chart):
    """Frame for the double D = G x T: matrix entries plus torus diagonal.

    Overparametrized as a chart, which is fine both as a pushforward target
    and as the frame carrying the double's bivectors.
    """

    def __init__(self, n: int):
        self.n = n
        self.dim = n * n + n
        self.label = f"D({n})"

    def coords(self, d) -> np.ndarray:
        return np.concatenate([np.asarray(d.g).reshape(-1), np.diag(d.t)])

    def point(self, z: np.ndarray):
        from .double import DoubleElement

        n = self.n
        return DoubleElement(z[: n * n].reshape(n, n), np.diag(z[n * n :]))

    def embed(self, point) -> np.ndarray:
        return self.coords(point)


class ProductChart(Chart):
    """Chart of a finite product; points are tuples."""

    def __init__(self, charts: Sequence[Chart], label: Optional[str] = None):
        self.charts = list(charts)
        self.dim = sum(c.dim for c in self.charts)
        self.label = label or "x".join(c.label for c in self.charts)
        self._splits = np.cumsum([c.dim for c in self.charts])[:-1]

    def coords(self, point) -> np.ndarray:
        return np.concatenate([c.coords(p) for c, p in zip(self.charts, point)])

    def point(self, z: np.ndarray):
        parts = np.split(np.asarray(z, dtype=np.complex128), self._splits)
        return tuple(c.point(p) for c, p in zip(self.charts, parts))

    def embed(self, point) -> np.ndarray:
        return np.concatenate([c.embed(p) for c, p in zip(self.charts, point)])

    def block_slices(self) -> List[slice]:
        out = []
        lo = 0
        for c in self.charts:
            out.append(slice(lo, lo + c.dim))
            lo += c.dim
        return out


class GammaPLChart(Chart):
    """Local chart of the factorization groupoid via the (b, u) projection.

    The inverse parametrization re-dresses, with the torus square root
    branch pinned near a reference quadruple for continuity.
    """

    def __init__(self, pair: DualPairBase, ref: GammaElement):
        n = ref.b.shape[0]
        self.pair = pair
        self.ref = ref
        self.cb = BorelChart(n)
        self.cbm = BorelMinusChart(n)
        self.dim = self.cb.dim + self.cbm.dim
        self.label = f"Gamma({n})"

    def coords(self, gamma: GammaElement) -> np.ndarray:
        return np.concatenate([self.cb.coords(gamma.b), self.cbm.coords(gamma.u)])

    def point(self, z: np.ndarray) -> GammaElement:
        b = self.cb.point(z[: self.cb.dim])
        u = self.cbm.point(z[self.cb.dim :])
        ref = np.diag(np.diag(self.ref.u_prime))
        return self.pair.gamma_lower(b, u, ref=ref)

    def embed(self, gamma: GammaElement) -> np.ndarray:
        return np.concatenate([np.asarray(gamma.b).reshape(-1), np.asarray(gamma.u).reshape(-1)])
