"""Bruhat cells, their factorizations, cocycles, and quotient structures.

A cell C_w = N w_bar  intersect  w_bar N_- is parametrized by the inversion
roots of w; products of cells (one factor per letter of a sequence of Weyl
group elements) carry the left action of the upper Borel and the right
action of the lower Borel through iterated cell factorizations, producing
the Borel-valued cocycles that appear everywhere downstream.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import List, Sequence, Tuple

import numpy as np

from .charts import BorelChart, BorelMinusChart, Chart
from .errors import NotInCell, NotInOpenCell
from .lie import WeylWord, elementary, inversion_roots, weyl_representative
from .linalg import expm_tri, gauss_decompose, unipotent_log
from .poisson import Bivector, ambient_to_chart, pi_st_ambient

MEMBERSHIP_RTOL = 1e-9


@dataclass(frozen=True)
class CellChart(Chart):
    """Chart of one cell: t -> exp(sum t_k E_{a_k}) w_bar."""

    n: int
    word: WeylWord
    rep: np.ndarray
    roots: Tuple[Tuple[int, int], ...]

    @property
    def dim(self) -> int:
        return len(self.roots)

    @property
    def label(self) -> str:
        return f"C{self.word.letters}"

    def point(self, t: np.ndarray) -> np.ndarray:
        x = np.zeros((self.n, self.n), dtype=np.complex128)
        for tk, (i, j) in zip(t, self.roots):
            x[i, j] = tk
        return expm_tri(x) @ self.rep

    def coords(self, c: np.ndarray) -> np.ndarray:
        x = unipotent_log(c @ np.linalg.inv(self.rep))
        return np.array([x[i, j] for (i, j) in self.roots])

    def embed(self, c: np.ndarray) -> np.ndarray:
        return np.asarray(c, dtype=np.complex128).reshape(-1)

    def membership_residual(self, c: np.ndarray) -> float:
        """Distance of c from N w_bar intersect w_bar N_-, scale relative."""
        n = self.n
        scale = max(np.linalg.norm(c), 1.0)
        a = c @ np.linalg.inv(self.rep)
        res = np.linalg.norm(np.tril(a, -1)) + np.linalg.norm(np.diag(a) - 1.0)
        x = unipotent_log(a)
        mask = np.ones((n, n), dtype=bool)
        for (i, j) in self.roots:
            mask[i, j] = False
        res += np.linalg.norm(x[mask])
        b = np.linalg.inv(self.rep) @ c
        res += np.linalg.norm(np.triu(b, 1)) + np.linalg.norm(np.diag(b) - 1.0)
        return res / scale


@lru_cache(maxsize=None)
def cell_chart(n: int, letters: Tuple[int, ...]) -> CellChart:
    word = WeylWord(letters)
    word.validate(n)
    rep = weyl_representative(word, n)
    roots = tuple(inversion_roots(word, n))
    return CellChart(n, word, rep, roots)


def cell_param(chart: CellChart, t: np.ndarray) -> np.ndarray:
    return chart.point(np.asarray(t, dtype=np.complex128))


class CellTupleChart(Chart):
    """Product chart for a tuple of cells, one factor per sequence entry."""

    def __init__(self, n: int, words: Sequence[Sequence[int]]):
        self.n = n
        self.factors = [cell_chart(n, tuple(w)) for w in words]
        self.dim = sum(f.dim for f in self.factors)
        self.label = "O" + "".join(f.label for f in self.factors)
        self._splits = np.cumsum([f.dim for f in self.factors])[:-1]

    def coords(self, c: Sequence[np.ndarray]) -> np.ndarray:
        return np.concatenate([f.coords(ci) for f, ci in zip(self.factors, c)])

    def point(self, t: np.ndarray) -> Tuple[np.ndarray, ...]:
        parts = np.split(np.asarray(t, dtype=np.complex128), self._splits)
        return tuple(f.point(p) for f, p in zip(self.factors, parts))

    def embed(self, c: Sequence[np.ndarray]) -> np.ndarray:
        return np.concatenate([np.asarray(ci).reshape(-1) for ci in c])

    def product(self, c: Sequence[np.ndarray]) -> np.ndarray:
        out = np.eye(self.n, dtype=np.complex128)
        for ci in c:
            out = out @ ci
        return out

    def membership_residual(self, c: Sequence[np.ndarray]) -> float:
        return max(f.membership_residual(ci) for f, ci in zip(self.factors, c))


def factor_BuB(g: np.ndarray, chart: CellChart) -> Tuple[np.ndarray, np.ndarray]:
    """Factor g = c b with c in the cell, b upper Borel.

    Gauss elimination of rep^{-1} g realizes the finite height-ordered solve;
    the residual membership check rejects points of other cells.
    """
    try:
        m, h, nm = gauss_decompose(np.linalg.inv(chart.rep) @ g)
    except NotInOpenCell as exc:
        raise NotInCell(str(exc)) from exc
    c = chart.rep @ m
    b = h @ nm
    conj = chart.rep @ m @ np.linalg.inv(chart.rep)
    if np.linalg.norm(np.tril(conj, -1)) > MEMBERSHIP_RTOL * max(np.linalg.norm(conj), 1.0):
        raise NotInCell("factor lies outside N w_bar")
    return c, b


def factor_BminusUBminus(g: np.ndarray, chart: CellChart) -> Tuple[np.ndarray, np.ndarray]:
    """Factor g = b_- c with c in the cell, b_- lower Borel."""
    try:
        m, h, nm = gauss_decompose(g @ np.linalg.inv(chart.rep))
    except NotInOpenCell as exc:
        raise NotInCell(str(exc)) from exc
    bm = m @ h
    c = nm @ chart.rep
    conj = np.linalg.inv(chart.rep) @ nm @ chart.rep
    if np.linalg.norm(np.triu(conj, 1)) > MEMBERSHIP_RTOL * max(np.linalg.norm(conj), 1.0):
        raise NotInCell("factor lies outside w_bar N_-")
    return bm, c


def act_b_on_tuple(
    b: np.ndarray, c: Sequence[np.ndarray], chart: CellTupleChart
) -> Tuple[Tuple[np.ndarray, ...], np.ndarray]:
    """Left action of the upper Borel with its cocycle: b c_ = b[c]_ cocycle."""
    out = []
    acc = b
    for ci, f in zip(c, chart.factors):
        cnew, acc = factor_BuB(acc @ ci, f)
        out.append(cnew)
    return tuple(out), acc


def act_tuple_on_bminus(
    c: Sequence[np.ndarray], bm: np.ndarray, chart: CellTupleChart
) -> Tuple[np.ndarray, Tuple[np.ndarray, ...]]:
    """Right action of the lower Borel with its cocycle: c_ b_- = cocycle c^{b_-}_."""
    out = []
    acc = bm
    for ci, f in zip(reversed(c), reversed(chart.factors)):
        acc, cnew = factor_BminusUBminus(ci @ acc, f)
        out.append(cnew)
    return acc, tuple(reversed(out))


def reduce_to_cells_left(
    gs: Sequence[np.ndarray], chart: CellTupleChart
) -> Tuple[Tuple[np.ndarray, ...], np.ndarray]:
    """Left-to-right sweep reducing a tuple modulo the upper Borel junctions.

    Returns the cell representative and the trailing Borel factor.
    """
    cs = []
    acc = np.eye(chart.n, dtype=np.complex128)
    for gi, f in zip(gs, chart.factors):
        ci, acc = factor_BuB(acc @ gi, f)
        cs.append(ci)
    return tuple(cs), acc


def reduce_to_cells_right(
    gs: Sequence[np.ndarray], chart: CellTupleChart
) -> Tuple[np.ndarray, Tuple[np.ndarray, ...]]:
    """Right-to-left sweep modulo lower Borel junctions; leading factor kept."""
    cs = []
    acc = np.eye(chart.n, dtype=np.complex128)
    for gi, f in zip(reversed(gs), reversed(chart.factors)):
        acc, ci = factor_BminusUBminus(gi @ acc, f)
        cs.append(ci)
    return acc, tuple(reversed(cs))


# ---------------------------------------------------------------------------
# quotient bivectors in cell coordinates
#
# The quotient chart maps are only defined on the Bruhat strata, so their
# Jacobians are taken in stratum coordinates (cell times Borel per factor),
# never in ambient matrix directions; the product standard structure is
# tangent to the strata (cosets are Poisson submanifolds), which makes the
# stratum re-expression exact.


class CellBorelStratum(Chart):
    """Chart of a product of (B u_i B)-cosets: g_i = c_i(t_i) b_i(beta_i)."""

    def __init__(self, chart: CellTupleChart):
        self.tuple_chart = chart
        self.n = chart.n
        self.cb = BorelChart(chart.n)
        self.dim = chart.dim + len(chart.factors) * self.cb.dim
        self.label = chart.label + "strat"

    def coords(self, gs: Sequence[np.ndarray]) -> np.ndarray:
        out = []
        for gi, f in zip(gs, self.tuple_chart.factors):
            ci, bi = factor_BuB(gi, f)
            out.append(f.coords(ci))
            out.append(self.cb.coords(bi))
        return np.concatenate(out)

    def point(self, z: np.ndarray):
        out = []
        lo = 0
        for f in self.tuple_chart.factors:
            t = z[lo : lo + f.dim]
            beta = z[lo + f.dim : lo + f.dim + self.cb.dim]
            lo += f.dim + self.cb.dim
            out.append(f.point(t) @ self.cb.point(beta))
        return tuple(out)

    def embed(self, gs: Sequence[np.ndarray]) -> np.ndarray:
        return np.concatenate([np.asarray(gi).reshape(-1) for gi in gs])


class BminusCellStratum(Chart):
    """Chart of a product of (B_- u_i B_-)-cosets: g_i = b_-(beta_i) c_i(t_i)."""

    def __init__(self, chart: CellTupleChart):
        self.tuple_chart = chart
        self.n = chart.n
        self.cbm = BorelMinusChart(chart.n)
        self.dim = chart.dim + len(chart.factors) * self.cbm.dim
        self.label = chart.label + "strat-"

    def coords(self, gs: Sequence[np.ndarray]) -> np.ndarray:
        out = []
        for gi, f in zip(gs, self.tuple_chart.factors):
            bmi, ci = factor_BminusUBminus(gi, f)
            out.append(self.cbm.coords(bmi))
            out.append(f.coords(ci))
        return np.concatenate(out)

    def point(self, z: np.ndarray):
        out = []
        lo = 0
        for f in self.tuple_chart.factors:
            beta = z[lo : lo + self.cbm.dim]
            t = z[lo + self.cbm.dim : lo + self.cbm.dim + f.dim]
            lo += f.dim + self.cbm.dim
            out.append(self.cbm.point(beta) @ f.point(t))
        return tuple(out)

    def embed(self, gs: Sequence[np.ndarray]) -> np.ndarray:
        return np.concatenate([np.asarray(gi).reshape(-1) for gi in gs])


def _ambient_product_pi_st(gs: Sequence[np.ndarray]) -> np.ndarray:
    n = gs[0].shape[0]
    k = len(gs)
    dim = k * n * n
    out = np.zeros((dim, dim), dtype=np.complex128)
    for i, gi in enumerate(gs):
        sl = slice(i * n * n, (i + 1) * n * n)
        out[sl, sl] = pi_st_ambient(gi).coeffs
    return out


def _stratum_pi(stratum: Chart, gs: Sequence[np.ndarray]) -> np.ndarray:
    return ambient_to_chart(stratum, gs, _ambient_product_pi_st(gs)).coeffs


def _push_from_stratum(stratum: Chart, gs, target_fn, step: float = 1e-6) -> np.ndarray:
    """J f J^T for f: stratum coords -> target coords at gs."""
    from .linalg import numeric_jacobian

    z0 = stratum.coords(gs)
    j = numeric_jacobian(lambda z: target_fn(stratum.point(z)), z0, step)
    return j @ _stratum_pi(stratum, gs) @ j.T


def pi_n_at(chart: CellTupleChart, c: Sequence[np.ndarray], step: float = 1e-6) -> Bivector:
    """Quotient bivector on the cell product, in cell coordinates.

    Pushforward of the product standard structure under the left sweep.
    """
    stratum = CellBorelStratum(chart)
    fn = lambda gs: chart.coords(reduce_to_cells_left(gs, chart)[0])
    return Bivector(chart.label, _push_from_stratum(stratum, tuple(c), fn, step))


def pi_n_prime_at(chart: CellTupleChart, c: Sequence[np.ndarray], step: float = 1e-6) -> Bivector:
    """The opposite-quotient bivector in the same cell coordinates."""
    stratum = BminusCellStratum(chart)
    fn = lambda gs: chart.coords(reduce_to_cells_right(gs, chart)[1])
    return Bivector(chart.label, _push_from_stratum(stratum, tuple(c), fn, step))


def pi_tilde_n_at(chart: CellTupleChart, c: Sequence[np.ndarray], b: np.ndarray,
                  step: float = 1e-6) -> Bivector:
    """Quotient bivector in (cells x B) coordinates: left sweep keeping the
    trailing Borel factor."""
    cb = BorelChart(chart.n)
    stratum = CellBorelStratum(chart)
    gs = tuple(list(c[:-1]) + [c[-1] @ b])

    def fn(gtuple):
        cs, acc = reduce_to_cells_left(gtuple, chart)
        return np.concatenate([chart.coords(cs), cb.coords(acc)])

    return Bivector(chart.label + "xB", _push_from_stratum(stratum, gs, fn, step))


def pi_tilde_minus_n_at(chart: CellTupleChart, bm: np.ndarray, c: Sequence[np.ndarray],
                        step: float = 1e-6) -> Bivector:
    """Quotient bivector in (B_- x cells) coordinates: right sweep keeping the
    leading lower Borel factor."""
    cbm = BorelMinusChart(chart.n)
    stratum = BminusCellStratum(chart)
    gs = tuple([bm @ c[0]] + list(c[1:]))

    def fn(gtuple):
        acc, cs = reduce_to_cells_right(gtuple, chart)
        return np.concatenate([cbm.coords(acc), chart.coords(cs)])

    return Bivector("B-x" + chart.label, _push_from_stratum(stratum, gs, fn, step))


def I_u(c: Sequence[np.ndarray]) -> Tuple[np.ndarray, ...]:
    """Chart change between the two quotient presentations; identity on
    cell representatives."""
    return tuple(c)


# infinitesimal actions, used by the four-line bivector assembly


def cell_left_action_vector(chart: CellTupleChart, c, x: np.ndarray, step: float = 1e-6) -> np.ndarray:
    """d/dt of exp(t x)[c] at t=0 in cell coordinates."""
    plus, _ = act_b_on_tuple(expm_tri(step * x), c, chart)
    minus, _ = act_b_on_tuple(expm_tri(-step * x), c, chart)
    return (chart.coords(plus) - chart.coords(minus)) / (2.0 * step)


def cell_right_action_vector(chart: CellTupleChart, c, xi: np.ndarray, step: float = 1e-6) -> np.ndarray:
    """d/dt of c^{exp(t xi)} at t=0 in cell coordinates."""
    _, plus = act_tuple_on_bminus(c, expm_tri(step * xi), chart)
    _, minus = act_tuple_on_bminus(c, expm_tri(-step * xi), chart)
    return (chart.coords(plus) - chart.coords(minus)) / (2.0 * step)


def cocycle_b_derivative(chart: CellTupleChart, c, x: np.ndarray, step: float = 1e-6) -> np.ndarray:
    """d/dt of the upper cocycle of exp(t x) at t=0 (a Borel algebra element)."""
    _, plus = act_b_on_tuple(expm_tri(step * x), c, chart)
    _, minus = act_b_on_tuple(expm_tri(-step * x), c, chart)
    return (plus - minus) / (2.0 * step)


def cocycle_bminus_derivative(chart: CellTupleChart, c, xi: np.ndarray, step: float = 1e-6) -> np.ndarray:
    """d/dt of the lower cocycle of exp(t xi) at t=0."""
    plus, _ = act_tuple_on_bminus(c, expm_tri(step * xi), chart)
    minus, _ = act_tuple_on_bminus(c, expm_tri(-step * xi), chart)
    return (plus - minus) / (2.0 * step)
